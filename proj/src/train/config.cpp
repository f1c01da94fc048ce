#include "recnet/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace recnet::train {

std::string to_string(Stage stage) {
  switch (stage) {
    case Stage::xe: return "xe";
    case Stage::joint: return "joint";
    case Stage::rl: return "rl";
    case Stage::rl_joint: return "rl-joint";
  }
  return "xe";
}

Stage parse_stage(const std::string& text) {
  if (text == "xe") return Stage::xe;
  if (text == "joint") return Stage::joint;
  if (text == "rl") return Stage::rl;
  if (text == "rl-joint") return Stage::rl_joint;
  throw ConfigError("unknown stage '" + text + "' (xe|joint|rl|rl-joint)");
}

double default_lambda(recon::ReconKind kind) {
  switch (kind) {
    case recon::ReconKind::global: return 0.2;
    case recon::ReconKind::local:
    case recon::ReconKind::joint: return 0.1;
    case recon::ReconKind::none: break;
  }
  return 0.0;
}

double TrainConfig::effective_lambda() const { return lambda.value_or(default_lambda(reconstructor)); }

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": not a number: '" + v + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": not a boolean: '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  try {
    if (key == "stage") stage = parse_stage(v);
    else if (key == "reconstructor") reconstructor = recon::parse_recon_kind(v);
    else if (key == "lambda") lambda = v.empty() || v == "default" ? std::nullopt : std::optional(to_double(key, v));
    else if (key == "xe_optimizer") xe_optimizer = parse_optimizer_kind(v);
    else if (key == "rl_optimizer") rl_optimizer = parse_optimizer_kind(v);
    else if (key == "adadelta_rho") adadelta.rho = to_double(key, v);
    else if (key == "adadelta_eps") adadelta.eps = to_double(key, v);
    else if (key == "adam_lr") adam.lr = to_double(key, v);
    else if (key == "adam_beta1") adam.beta1 = to_double(key, v);
    else if (key == "adam_beta2") adam.beta2 = to_double(key, v);
    else if (key == "adam_eps") adam.eps = to_double(key, v);
    else if (key == "batch_size") batch_size = to_uint(key, v);
    else if (key == "patience") patience = to_uint(key, v);
    else if (key == "max_epochs") max_epochs = to_uint(key, v);
    else if (key == "seed") seed = to_uint(key, v);
    else if (key == "embed_dim") embed_dim = to_uint(key, v);
    else if (key == "hidden_dim") hidden_dim = to_uint(key, v);
    else if (key == "attn_dim") attn_dim = to_uint(key, v);
    else if (key == "recon_attn_dim") recon_attn_dim = to_uint(key, v);
    else if (key == "beam_size") beam_size = to_uint(key, v);
    else if (key == "min_count") min_count = static_cast<int>(to_uint(key, v));
    else if (key == "cider_d") cider_d = to_bool(key, v);
    else if (key == "mask_padding") mask_padding = to_bool(key, v);
    else if (key == "suppress_reserved") suppress_reserved = to_bool(key, v);
    else if (key == "local_valid_only") local_valid_only = to_bool(key, v);
    else if (key == "features_dir") features_dir = v;
    else if (key == "captions") captions = v;
    else if (key == "train_split") train_split = v;
    else if (key == "val_split") val_split = v;
    else if (key == "test_split") test_split = v;
    else if (key == "output_dir") output_dir = v;
    else if (key == "init_checkpoint") init_checkpoint = v;
    else throw ConfigError("unknown configuration key '" + key + "'");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void TrainConfig::validate() const {
  if (lambda && *lambda < 0.0) throw ConfigError("lambda must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (patience == 0) throw ConfigError("patience must be >= 1");
  if (embed_dim == 0 || hidden_dim == 0) throw ConfigError("model dimensions must be positive");
  if (beam_size == 0) throw ConfigError("beam_size must be >= 1");
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  if (adadelta.rho <= 0.0 || adadelta.rho >= 1.0) throw ConfigError("adadelta_rho must be in (0, 1)");
  if (adam.lr <= 0.0) throw ConfigError("adam_lr must be positive");
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  auto line = [&](const char* k, const std::string& v) { os << k << " = " << v << '\n'; };
  line("stage", to_string(stage));
  line("reconstructor", recon::to_string(reconstructor));
  line("lambda", lambda ? fmt_double(*lambda) : "default");
  line("xe_optimizer", to_string(xe_optimizer));
  line("rl_optimizer", to_string(rl_optimizer));
  line("adadelta_rho", fmt_double(adadelta.rho));
  line("adadelta_eps", fmt_double(adadelta.eps));
  line("adam_lr", fmt_double(adam.lr));
  line("adam_beta1", fmt_double(adam.beta1));
  line("adam_beta2", fmt_double(adam.beta2));
  line("adam_eps", fmt_double(adam.eps));
  line("batch_size", std::to_string(batch_size));
  line("patience", std::to_string(patience));
  line("max_epochs", std::to_string(max_epochs));
  line("seed", std::to_string(seed));
  line("embed_dim", std::to_string(embed_dim));
  line("hidden_dim", std::to_string(hidden_dim));
  line("attn_dim", std::to_string(attn_dim));
  line("recon_attn_dim", std::to_string(recon_attn_dim));
  line("beam_size", std::to_string(beam_size));
  line("min_count", std::to_string(min_count));
  line("cider_d", cider_d ? "true" : "false");
  line("mask_padding", mask_padding ? "true" : "false");
  line("suppress_reserved", suppress_reserved ? "true" : "false");
  line("local_valid_only", local_valid_only ? "true" : "false");
  line("features_dir", features_dir);
  line("captions", captions);
  line("train_split", train_split);
  line("val_split", val_split);
  line("test_split", test_split);
  line("output_dir", output_dir);
  line("init_checkpoint", init_checkpoint);
  return os.str();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    }
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

TrainConfig parse_config(const std::string& text) {
  TrainConfig cfg;
  for (const auto& [k, v] : parse_config_text(text)) cfg.set(k, v);
  return cfg;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace recnet::train
