#include "nforge/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "nforge/errors.hpp"

namespace nforge {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("config key '" + std::string(key) + "': invalid value '" + std::string(value) +
                    "' (expected " + std::string(want) + ")");
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty())
    bad_value(key, v, "a non-negative integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::size_t> to_list(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  if (v.empty() || v == "none") return out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const std::string item = trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start));
    out.push_back(to_u64(key, item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

std::string fmt(const std::vector<std::size_t>& v) {
  if (v.empty()) return "none";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class T>
Key num_key(std::string name, T TrainConfig::*field) {
  return {name,
          [name, field](RunConfig& c, std::string_view v) {
            if constexpr (std::is_same_v<T, double>) {
              c.train.*field = to_double(name, v);
            } else {
              c.train.*field = static_cast<T>(to_u64(name, v));
            }
          },
          [field](const RunConfig& c) {
            if constexpr (std::is_same_v<T, double>) {
              return fmt(c.train.*field);
            } else {
              return std::to_string(c.train.*field);
            }
          }};
}

Key bool_key(std::string name, bool TrainConfig::*field) {
  return {name, [name, field](RunConfig& c, std::string_view v) { c.train.*field = to_bool(name, v); },
          [field](const RunConfig& c) { return fmt(c.train.*field); }};
}

Key aug_key(std::string name, double AugmentConfig::*field) {
  return {name,
          [name, field](RunConfig& c, std::string_view v) { c.train.augment_cfg.*field = to_double(name, v); },
          [field](const RunConfig& c) { return fmt(c.train.augment_cfg.*field); }};
}

Key opt_key(std::string name, double OptimizerConfig::*field) {
  return {name,
          [name, field](RunConfig& c, std::string_view v) { c.train.optimizer.*field = to_double(name, v); },
          [field](const RunConfig& c) { return fmt(c.train.optimizer.*field); }};
}

Key path_key(std::string name, fs::path RunConfig::*field) {
  return {name, [field](RunConfig& c, std::string_view v) { c.*field = fs::path(std::string(v)); },
          [field](const RunConfig& c) { return (c.*field).string(); }};
}

const std::vector<Key>& schema() {
  static const std::vector<Key> keys = [] {
    std::vector<Key> k;
    k.push_back(path_key("images", &RunConfig::images));
    k.push_back(path_key("labels", &RunConfig::labels));
    k.push_back(path_key("pnm_dir", &RunConfig::pnm_dir));
    k.push_back({"class_count",
                 [](RunConfig& c, std::string_view v) {
                   const auto n = to_u64("class_count", v);
                   if (n < 2 || n > 255) bad_value("class_count", v, "an integer in [2, 255]");
                   c.class_count = static_cast<int>(n);
                 },
                 [](const RunConfig& c) { return std::to_string(c.class_count); }});
    k.push_back({"train_count",
                 [](RunConfig& c, std::string_view v) { c.train_count = to_u64("train_count", v); },
                 [](const RunConfig& c) { return std::to_string(c.train_count); }});
    k.push_back(path_key("out", &RunConfig::out_dir));
    k.push_back({"topology",
                 [](RunConfig& c, std::string_view v) {
                   try {
                     c.train.topology = parse_topology(v);
                   } catch (const ArgumentError&) {
                     bad_value("topology", v, "cnn, mlp-features or mlp-raw");
                   }
                 },
                 [](const RunConfig& c) { return std::string(topology_name(c.train.topology)); }});
    k.push_back({"activation",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "auto") {
                     c.train.activation.reset();
                     return;
                   }
                   try {
                     c.train.activation = parse_activation(v);
                   } catch (const ArgumentError&) {
                     bad_value("activation", v, "auto, logistic, tanh, arctan, relu or elu");
                   }
                 },
                 [](const RunConfig& c) {
                   return c.train.activation ? std::string(activation_name(*c.train.activation))
                                             : std::string("auto");
                 }});
    k.push_back(num_key("elu_alpha", &TrainConfig::elu_alpha));
    k.push_back({"conv_widths",
                 [](RunConfig& c, std::string_view v) { c.train.widths.conv = to_list("conv_widths", v); },
                 [](const RunConfig& c) { return fmt(c.train.widths.conv); }});
    k.push_back({"dense_widths",
                 [](RunConfig& c, std::string_view v) { c.train.widths.dense = to_list("dense_widths", v); },
                 [](const RunConfig& c) { return fmt(c.train.widths.dense); }});
    k.push_back(num_key("dropout", &TrainConfig::dropout));
    k.push_back(num_key("hidden_units", &TrainConfig::hidden_units));
    k.push_back(bool_key("invert", &TrainConfig::invert));
    k.push_back(bool_key("grayscale", &TrainConfig::grayscale));
    k.push_back(num_key("features_threshold", &TrainConfig::features_threshold));
    k.push_back(num_key("epochs", &TrainConfig::epochs));
    k.push_back(num_key("batch_size", &TrainConfig::batch_size));
    k.push_back({"seed",
                 [](RunConfig& c, std::string_view v) {
                   c.train.seed = to_u64("seed", v);
                   c.train.augment_cfg.seed = c.train.seed;
                 },
                 [](const RunConfig& c) { return std::to_string(c.train.seed); }});
    k.push_back(bool_key("augment", &TrainConfig::augment));
    k.push_back(aug_key("rotation_deg_max", &AugmentConfig::rotation_deg_max));
    k.push_back(aug_key("shift_frac_max", &AugmentConfig::shift_frac_max));
    k.push_back(aug_key("zoom_frac_max", &AugmentConfig::zoom_frac_max));
    k.push_back({"zca",
                 [](RunConfig& c, std::string_view v) { c.train.augment_cfg.zca_enabled = to_bool("zca", v); },
                 [](const RunConfig& c) { return fmt(c.train.augment_cfg.zca_enabled); }});
    k.push_back(aug_key("zca_epsilon", &AugmentConfig::zca_epsilon));
    k.push_back(bool_key("zca_at_eval", &TrainConfig::zca_at_eval));
    k.push_back(bool_key("augment_per_epoch", &TrainConfig::augment_per_epoch));
    k.push_back({"optimizer",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "auto") {
                     c.train.optimizer_kind.reset();
                     return;
                   }
                   try {
                     c.train.optimizer_kind = parse_optimizer(v);
                   } catch (const ArgumentError&) {
                     bad_value("optimizer", v, "auto, adadelta or sgd");
                   }
                 },
                 [](const RunConfig& c) {
                   return c.train.optimizer_kind ? std::string(optimizer_name(*c.train.optimizer_kind))
                                                 : std::string("auto");
                 }});
    k.push_back(opt_key("rho", &OptimizerConfig::rho));
    k.push_back(opt_key("adadelta_eps", &OptimizerConfig::eps));
    k.push_back(opt_key("learning_rate", &OptimizerConfig::learning_rate));
    k.push_back(num_key("checkpoint_interval", &TrainConfig::checkpoint_interval));
    k.push_back(bool_key("timing", &TrainConfig::timing));
    return k;
  }();
  return keys;
}

const Key* find_key(std::string_view name) {
  for (const Key& k : schema())
    if (k.name == name) return &k;
  return nullptr;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const Key& k : schema()) n.push_back(k.name);
    return n;
  }();
  return names;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  const Key* k = find_key(key);
  if (!k) throw ConfigError("unknown config key '" + std::string(key) + "'");
  k->set(*this, trim(value));
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const Key& k : schema()) out += k.name + " = " + k.get(*this) + "\n";
  return out;
}

void RunConfig::validate() const {
  train.validate();
  const bool idx = !images.empty() || !labels.empty();
  const bool pnm = !pnm_dir.empty();
  if (idx && pnm) throw ConfigError("give either images/labels or pnm_dir, not both");
  if (!idx && !pnm) throw ConfigError("no dataset: set images and labels, or pnm_dir");
  if (idx) {
    if (images.empty() || labels.empty()) throw ConfigError("images and labels must both be set");
    if (!fs::is_regular_file(images)) throw ConfigError("images file not found: " + images.string());
    if (!fs::is_regular_file(labels)) throw ConfigError("labels file not found: " + labels.string());
  } else if (!fs::is_directory(pnm_dir)) {
    throw ConfigError("pnm_dir is not a directory: " + pnm_dir.string());
  }
  if (train_count == 0) throw ConfigError("train_count must be >= 1");
}

void apply_config_text(RunConfig& cfg, std::string_view text, const fs::path& base) {
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!seen.insert(key).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!base.empty() && (key == "images" || key == "labels" || key == "pnm_dir") && !value.empty()) {
      fs::path& p = key == "images" ? cfg.images : key == "labels" ? cfg.labels : cfg.pnm_dir;
      if (p.is_relative()) p = base / p;
    }
  }
}

RunConfig load_config(const fs::path& file) {
  std::ifstream f(file);
  if (!f) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << f.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, ss.str(), file.parent_path());
  return cfg;
}

}  // namespace nforge
