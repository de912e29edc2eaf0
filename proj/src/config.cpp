#include "addn/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "addn/error.hpp"

namespace addn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty()) {
    throw UsageError(key, "cannot parse '" + text + "' as a number");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw UsageError(key, "expected true or false, got '" + text + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
  bool flag = false;
};

template <typename T>
Field field(T RunConfig::*member) {
  Field f;
  f.set = [member](RunConfig& c, const std::string& key, const std::string& v) {
    if constexpr (std::is_same_v<T, std::string>) {
      c.*member = v;
    } else if constexpr (std::is_same_v<T, bool>) {
      c.*member = parse_bool(key, v);
    } else {
      c.*member = parse_number<T>(key, v);
    }
  };
  f.get = [member](const RunConfig& c) {
    if constexpr (std::is_same_v<T, std::string>) {
      return c.*member;
    } else if constexpr (std::is_same_v<T, bool>) {
      return std::string(c.*member ? "true" : "false");
    } else if constexpr (std::is_floating_point_v<T>) {
      return format_double(c.*member);
    } else {
      return std::to_string(c.*member);
    }
  };
  f.flag = std::is_same_v<T, bool>;
  return f;
}

template <typename T>
Field synth_field(T SynthConfig::*member) {
  Field f;
  f.set = [member](RunConfig& c, const std::string& key, const std::string& v) {
    c.synth.*member = parse_number<T>(key, v);
  };
  f.get = [member](const RunConfig& c) {
    if constexpr (std::is_floating_point_v<T>) {
      return format_double(c.synth.*member);
    } else {
      return std::to_string(c.synth.*member);
    }
  };
  return f;
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"mode", field(&RunConfig::mode)},
      {"dataset", field(&RunConfig::dataset)},
      {"split_file", field(&RunConfig::split_file)},
      {"out", field(&RunConfig::out)},
      {"checkpoint", field(&RunConfig::checkpoint)},
      {"eval_split", field(&RunConfig::eval_split)},
      {"synth_train_per_class", synth_field(&SynthConfig::train_per_class)},
      {"synth_test_per_class", synth_field(&SynthConfig::test_per_class)},
      {"synth_subjects", synth_field(&SynthConfig::subjects)},
      {"synth_snr_min_db", synth_field(&SynthConfig::snr_min_db)},
      {"synth_snr_max_db", synth_field(&SynthConfig::snr_max_db)},
      {"d_model", field(&RunConfig::d_model)},
      {"heads", field(&RunConfig::heads)},
      {"layers", field(&RunConfig::layers)},
      {"ffn_hidden", field(&RunConfig::ffn_hidden)},
      {"mask_hidden", field(&RunConfig::mask_hidden)},
      {"shared_lambda", field(&RunConfig::shared_lambda)},
      {"lambda_init", field(&RunConfig::lambda_init)},
      {"aff_residual", field(&RunConfig::aff_residual)},
      {"lr", field(&RunConfig::lr)},
      {"weight_decay", field(&RunConfig::weight_decay)},
      {"batch", field(&RunConfig::batch)},
      {"epochs", field(&RunConfig::epochs)},
      {"max_steps", field(&RunConfig::max_steps)},
      {"beta", field(&RunConfig::beta)},
      {"epsilon", field(&RunConfig::epsilon)},
      {"alpha", field(&RunConfig::alpha)},
      {"no_aff", field(&RunConfig::no_aff)},
      {"no_ddl", field(&RunConfig::no_ddl)},
      {"no_bias_loss", field(&RunConfig::no_bias_loss)},
      {"seed", field(&RunConfig::seed)},
      {"threads", field(&RunConfig::threads)},
  };
  return table;
}

const Field& lookup(const std::string& key) {
  for (const auto& [name, f] : fields()) {
    if (name == key) return f;
  }
  throw UsageError(key, "unknown configuration key");
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& entry : fields()) k.push_back(entry.first);
    return k;
  }();
  return keys;
}

bool is_flag_key(const std::string& key) { return lookup(key).flag; }

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  lookup(key).set(config, key, trim(value));
}

std::string get_config_value(const RunConfig& config, const std::string& key) { return lookup(key).get(config); }

ConfigPairs parse_config_text(const std::string& text, const std::string& source) {
  ConfigPairs out;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, number, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    lookup(key);
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

RunConfig parse_config(const ConfigPairs& flags, const std::filesystem::path& config_file) {
  RunConfig config;
  if (!config_file.empty()) {
    std::ifstream in(config_file);
    if (!in) throw MissingFileError("cannot open config file " + config_file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(buf.str(), config_file.string())) set_config_value(config, k, v);
  }
  for (const auto& [k, v] : flags) set_config_value(config, k, v);
  validate(config);
  return config;
}

void validate(const RunConfig& c) {
  if (c.mode != "train" && c.mode != "eval" && c.mode != "synth" && c.mode != "gradcheck") {
    throw UsageError("mode", "expected train, eval, synth or gradcheck, got '" + c.mode + "'");
  }
  if (c.eval_split != "train" && c.eval_split != "test") {
    throw UsageError("eval_split", "expected train or test, got '" + c.eval_split + "'");
  }
  if (c.dataset.empty()) throw UsageError("dataset", "must be 'synth' or a directory");
  if (c.synth.train_per_class == 0) throw UsageError("synth_train_per_class", "must be positive");
  if (c.synth.test_per_class == 0) throw UsageError("synth_test_per_class", "must be positive");
  if (c.synth.subjects < 2) throw UsageError("synth_subjects", "need at least 2 subjects for disjoint splits");
  if (!(c.synth.snr_min_db <= c.synth.snr_max_db)) {
    throw UsageError("synth_snr_max_db", "must not be below synth_snr_min_db");
  }
  if (c.heads == 0) throw UsageError("heads", "must be positive");
  if (c.d_model == 0 || c.d_model % (2 * c.heads) != 0) {
    throw UsageError("d_model", "must be a positive multiple of 2*heads (" + std::to_string(2 * c.heads) + ")");
  }
  if (c.mask_hidden == 0) throw UsageError("mask_hidden", "must be positive");
  if (!(c.lr > 0.0)) throw UsageError("lr", "must be positive");
  if (!(c.weight_decay >= 0.0)) throw UsageError("weight_decay", "must be non-negative");
  if (c.batch == 0) throw UsageError("batch", "must be positive");
  if (!(c.beta >= 0.0 && c.beta <= 1.0)) throw UsageError("beta", "must lie in [0, 1], got " + format_double(c.beta));
  if (!(c.epsilon >= 0.0 && c.epsilon < 1.0)) {
    throw UsageError("epsilon", "must lie in [0, 1), got " + format_double(c.epsilon));
  }
  if (!(c.alpha >= 0.0)) throw UsageError("alpha", "must be non-negative");
  if (!std::isfinite(c.lambda_init)) throw UsageError("lambda_init", "must be finite");
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& [key, f] : fields()) out += key + " = " + f.get(config) + "\n";
  return out;
}

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.backbone.d_model = c.d_model;
  m.backbone.heads = c.heads;
  m.backbone.layers = c.layers;
  m.backbone.ffn_hidden = c.ffn_hidden ? c.ffn_hidden : 2 * c.d_model;
  m.backbone.shared_lambda = c.shared_lambda;
  m.backbone.lambda_init = c.lambda_init;
  m.mask_hidden = c.mask_hidden;
  m.alpha = c.alpha;
  m.use_aff = !c.no_aff;
  m.aff_residual = c.aff_residual;
  m.differential = !c.no_ddl;
  return m;
}

TrainConfig train_config(const RunConfig& c) {
  TrainConfig t;
  t.model = model_config(c);
  t.loss.beta = c.no_bias_loss ? 0.0 : c.beta;
  t.loss.epsilon = c.epsilon;
  t.adam.lr = c.lr;
  t.adam.weight_decay = c.weight_decay;
  t.batch = c.batch;
  t.epochs = c.epochs;
  t.max_steps = c.max_steps;
  t.seed = c.seed;
  t.threads = c.threads;
  return t;
}

std::string ablation_name(const RunConfig& c) {
  std::string name;
  auto add = [&](bool on, const char* tag) {
    if (!on) return;
    if (!name.empty()) name += "+";
    name += tag;
  };
  add(c.no_aff, "no_aff");
  add(c.no_ddl, "no_ddl");
  add(c.no_bias_loss, "no_bias_loss");
  return name.empty() ? "full" : name;
}

}  // namespace addn
