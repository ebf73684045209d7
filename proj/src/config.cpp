#include "eegcap/config.hpp"

#include "eegcap/errors.hpp"
#include "eegcap/results_io.hpp"

#include <cmath>
#include <limits>

namespace eegcap::config {

namespace {

using experiments::ExperimentConfig;
using nlohmann::json;

// Rejects keys of `given` that the default layout does not have.
void check_keys(const json& given, const nlohmann::ordered_json& layout, const std::string& prefix) {
  if (!given.is_object()) {
    throw ConfigError("config key '" + (prefix.empty() ? std::string("<root>") : prefix) +
                      "' must be an object");
  }
  for (auto it = given.begin(); it != given.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!layout.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const auto& expected = layout.at(it.key());
    if (expected.is_object()) check_keys(it.value(), expected, key);
  }
}

class Reader {
 public:
  Reader(const json& root, std::string prefix) : root_(root), prefix_(std::move(prefix)) {}

  bool has(const char* key) const { return root_.contains(key); }

  Reader child(const char* key) const { return Reader(root_.at(key), name(key)); }

  double number(const char* key, double fallback) const {
    if (!has(key)) return fallback;
    const auto& v = root_.at(key);
    if (!v.is_number()) mismatch(key, "a number");
    return v.get<double>();
  }

  std::uint64_t unsigned_int(const char* key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    return as_unsigned(root_.at(key), name(key));
  }

  bool boolean(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = root_.at(key);
    if (!v.is_boolean()) mismatch(key, "a boolean");
    return v.get<bool>();
  }

  std::string string(const char* key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = root_.at(key);
    if (!v.is_string()) mismatch(key, "a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const char* key, const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = root_.at(key);
    if (!v.is_array()) mismatch(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) mismatch(key, "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  template <typename T>
  std::vector<T> unsigned_list(const char* key, const std::vector<T>& fallback) const {
    if (!has(key)) return fallback;
    const auto& v = root_.at(key);
    if (!v.is_array()) mismatch(key, "an array of nonnegative integers");
    std::vector<T> out;
    for (const auto& e : v) out.push_back(static_cast<T>(as_unsigned(e, name(key))));
    return out;
  }

 private:
  std::string name(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  [[noreturn]] void mismatch(const char* key, const char* what) const {
    throw ConfigError("config key '" + name(key) + "' must be " + what);
  }

  static std::uint64_t as_unsigned(const json& v, const std::string& key) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError("config key '" + key + "' must be a nonnegative integer");
  }

  const json& root_;
  std::string prefix_;
};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

nlohmann::ordered_json to_json(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_s"] = cfg.model.n_sources;
  j["n_l"] = cfg.model.n_latents;
  j["rho"] = cfg.model.rho;
  j["n_t"] = cfg.n_samples;
  j["electrode_counts"] = cfg.electrode_counts;
  j["snr_db_list"] = cfg.snr_db_list;
  j["seeds"] = cfg.seeds;
  j["ksg_k"] = cfg.ksg_k;
  j["pca"] = {{"mode", cfg.pca_target.kind == numerics::PcaTarget::Kind::count ? "count" : "fraction"},
              {"value", cfg.pca_target.value}};
  j["mixing_seed"] = cfg.model.mixing_seed;
  j["lenient"] = cfg.lenient;
  j["record_timing"] = cfg.record_timing;
  j["forward"] = {{"blur_width", cfg.model.blur_width},
                  {"loading_width", cfg.model.loading_width},
                  {"mixing_kind", cfg.model.mixing_kind == forward::MixingKind::bump ? "bump" : "dense"},
                  {"noise_corr_mix", cfg.model.noise_corr_mix},
                  {"noise_corr_length", cfg.model.noise_corr_length}};
  const auto& d = cfg.decoder;
  j["decoder"] = {{"input", d.input == experiments::DecoderInput::raw ? "raw" : "pca"},
                  {"train_fraction", d.train_fraction},
                  {"ridge_lambdas", d.ridge_lambdas},
                  {"ridge_validation_fraction", d.ridge_validation_fraction},
                  {"mlp",
                   {{"hidden_width", d.mlp.hidden_width},
                    {"epochs", d.mlp.epochs},
                    {"learning_rate", d.mlp.learning_rate},
                    {"batch_size", d.mlp.batch_size},
                    {"validation_fraction", d.mlp.validation_fraction},
                    {"momentum", d.mlp.momentum},
                    {"patience", d.mlp.patience}}}};
  return j;
}

ExperimentConfig from_json(const json& j) {
  const ExperimentConfig defaults;
  check_keys(j, to_json(defaults), "");

  ExperimentConfig cfg = defaults;
  const Reader r(j, "");
  cfg.model.n_sources = r.unsigned_int("n_s", cfg.model.n_sources);
  cfg.model.n_latents = r.unsigned_int("n_l", cfg.model.n_latents);
  cfg.model.rho = r.number("rho", cfg.model.rho);
  if (!(std::abs(cfg.model.rho) < 1.0)) {
    throw ConfigError("invalid config: rho = " + io::format_number(cfg.model.rho) +
                      " violates the bound |rho| < 1");
  }
  cfg.n_samples = r.unsigned_int("n_t", cfg.n_samples);
  cfg.electrode_counts = r.unsigned_list<std::size_t>("electrode_counts", cfg.electrode_counts);
  cfg.snr_db_list = r.numbers("snr_db_list", cfg.snr_db_list);
  cfg.seeds = r.unsigned_list<std::uint64_t>("seeds", cfg.seeds);
  cfg.ksg_k = r.unsigned_int("ksg_k", cfg.ksg_k);
  cfg.model.mixing_seed = r.unsigned_int("mixing_seed", cfg.model.mixing_seed);
  cfg.lenient = r.boolean("lenient", cfg.lenient);
  cfg.record_timing = r.boolean("record_timing", cfg.record_timing);

  if (r.has("pca")) {
    const Reader p = r.child("pca");
    const std::string mode = p.string("mode", "fraction");
    if (mode == "fraction") {
      cfg.pca_target = numerics::PcaTarget::fraction(p.number("value", 0.99));
    } else if (mode == "count") {
      cfg.pca_target = {numerics::PcaTarget::Kind::count, p.number("value", 8.0)};
    } else {
      throw ConfigError("config key 'pca.mode' must be \"fraction\" or \"count\"");
    }
  }
  if (r.has("forward")) {
    const Reader f = r.child("forward");
    cfg.model.blur_width = f.number("blur_width", cfg.model.blur_width);
    cfg.model.loading_width = f.number("loading_width", cfg.model.loading_width);
    const std::string kind = f.string("mixing_kind", "bump");
    if (kind == "bump") {
      cfg.model.mixing_kind = forward::MixingKind::bump;
    } else if (kind == "dense") {
      cfg.model.mixing_kind = forward::MixingKind::dense;
    } else {
      throw ConfigError("config key 'forward.mixing_kind' must be \"bump\" or \"dense\"");
    }
    cfg.model.noise_corr_mix = f.number("noise_corr_mix", cfg.model.noise_corr_mix);
    cfg.model.noise_corr_length = f.number("noise_corr_length", cfg.model.noise_corr_length);
  }
  if (r.has("decoder")) {
    const Reader d = r.child("decoder");
    const std::string input = d.string("input", "raw");
    if (input == "raw") {
      cfg.decoder.input = experiments::DecoderInput::raw;
    } else if (input == "pca") {
      cfg.decoder.input = experiments::DecoderInput::pca;
    } else {
      throw ConfigError("config key 'decoder.input' must be \"raw\" or \"pca\"");
    }
    cfg.decoder.train_fraction = d.number("train_fraction", cfg.decoder.train_fraction);
    cfg.decoder.ridge_lambdas = d.numbers("ridge_lambdas", cfg.decoder.ridge_lambdas);
    cfg.decoder.ridge_validation_fraction =
        d.number("ridge_validation_fraction", cfg.decoder.ridge_validation_fraction);
    if (d.has("mlp")) {
      const Reader m = d.child("mlp");
      auto& mlp = cfg.decoder.mlp;
      mlp.hidden_width = m.unsigned_int("hidden_width", mlp.hidden_width);
      mlp.epochs = m.unsigned_int("epochs", mlp.epochs);
      mlp.learning_rate = m.number("learning_rate", mlp.learning_rate);
      mlp.batch_size = m.unsigned_int("batch_size", mlp.batch_size);
      mlp.validation_fraction = m.number("validation_fraction", mlp.validation_fraction);
      mlp.momentum = m.number("momentum", mlp.momentum);
      mlp.patience = m.unsigned_int("patience", mlp.patience);
    }
  }
  cfg.validate();
  return cfg;
}

json parse_object(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    throw ConfigError(origin + ": malformed JSON at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": top-level JSON value must be an object");
  return j;
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("override key '" + key + "': '" + part + "' is not an object");
    node = &next;
    start = dot + 1;
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const FileError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return from_json(parse_object(text, path.string()));
}

ExperimentConfig resolve(const std::filesystem::path* path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (path != nullptr) {
    std::string text;
    try {
      text = io::read_text(*path);
    } catch (const FileError&) {
      throw ConfigError("cannot read config file " + path->string());
    }
    j = parse_object(text, path->string());
  }
  for (const auto& o : overrides) apply_override(j, o);
  return from_json(j);
}

}  // namespace eegcap::config
