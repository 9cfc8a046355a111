#include "igdts/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>

#include "igdts/errors.hpp"
#include "igdts/imaging_io.hpp"

namespace igdts {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw DomainError("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  return value;
}

struct Field {
  std::function<void(TrackerConfig&, std::string_view key, std::string_view)> set;
  std::function<std::string(const TrackerConfig&)> get;
};

template <typename T>
Field member(T TrackerConfig::*m) {
  return {[m](TrackerConfig& c, std::string_view k, std::string_view v) { c.*m = parse_number<T>(k, v); },
          [m](const TrackerConfig& c) {
            if constexpr (std::is_floating_point_v<T>) return format_number(c.*m);
            else return std::to_string(c.*m);
          }};
}

Field motion(std::size_t j) {
  return {[j](TrackerConfig& c, std::string_view k, std::string_view v) {
            c.motion.sigma[j] = parse_number<double>(k, v);
          },
          [j](const TrackerConfig& c) { return format_number(c.motion.sigma[j]); }};
}

const std::vector<std::pair<ConfigKey, Field>>& table() {
  static const std::vector<std::pair<ConfigKey, Field>> t = [] {
    const TrackerConfig d;
    std::vector<std::pair<ConfigKey, Field>> v;
    auto add = [&](std::string name, std::string desc, bool heuristic, Field f) {
      ConfigKey key{std::move(name), std::move(desc), f.get(d), heuristic};
      v.emplace_back(std::move(key), std::move(f));
    };
    add("n_particles", "particles per frame", false, member(&TrackerConfig::n_particles));
    add("patch_side", "observation patch side in pixels", false, member(&TrackerConfig::patch_side));
    add("k_basis", "maximum subspace basis size", false, member(&TrackerConfig::k_basis));
    add("update_interval", "frames between model updates", false, member(&TrackerConfig::update_interval));
    add("lambda_max", "largest outlier threshold weight", true, member(&TrackerConfig::lambda_max));
    add("lambda_min_ratio", "smallest weight as a fraction of lambda_max", true,
        member(&TrackerConfig::lambda_min_ratio));
    add("kappa", "likelihood sharpness exp(-kappa * d)", true, member(&TrackerConfig::kappa));
    add("sigma_tx", "random-walk std dev of x translation (px)", true, motion(0));
    add("sigma_ty", "random-walk std dev of y translation (px)", true, motion(1));
    add("sigma_theta", "random-walk std dev of rotation (rad)", true, motion(2));
    add("sigma_scale", "random-walk std dev of scale", true, motion(3));
    add("sigma_aspect", "random-walk std dev of aspect ratio", true, motion(4));
    add("sigma_skew", "random-walk std dev of skew", true, motion(5));
    add("forgetting", "weight of the prior model at each update, in (0, 1]", true,
        member(&TrackerConfig::forgetting));
    add("seed", "random seed", false, member(&TrackerConfig::seed));
    add("eps", "solver stopping tolerance on the objective change", true, member(&TrackerConfig::eps));
    add("max_iter", "solver iteration cap", true, member(&TrackerConfig::max_iter));
    add("lost_policy", "coast (keep last state) or halt when every particle is lost", true,
        {[](TrackerConfig& c, std::string_view k, std::string_view val) {
           if (val == "coast") c.lost_policy = LostPolicy::kCoast;
           else if (val == "halt") c.lost_policy = LostPolicy::kHalt;
           else throw DomainError("config key '" + std::string(k) + "': expected coast or halt, got '" +
                                  std::string(val) + "'");
         },
         [](const TrackerConfig& c) { return std::string(c.lost_policy == LostPolicy::kCoast ? "coast" : "halt"); }});
    add("threads", "worker threads for particle scoring", false, member(&TrackerConfig::threads));
    return v;
  }();
  return t;
}

const Field& find(std::string_view key) {
  for (const auto& [k, f] : table())
    if (k.name == key) return f;
  throw DomainError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& [k, f] : table()) out.push_back(k);
    return out;
  }();
  return keys;
}

void set_config_value(TrackerConfig& config, std::string_view key, std::string_view value) {
  find(key).set(config, key, trim(value));
}

std::string get_config_value(const TrackerConfig& config, std::string_view key) { return find(key).get(config); }

TrackerConfig load_config(const std::filesystem::path& path, TrackerConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      set_config_value(base, trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const DomainError& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::filesystem::path>& flag) {
  if (flag) return flag;
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return std::filesystem::path(env);
  return std::nullopt;
}

}  // namespace igdts
