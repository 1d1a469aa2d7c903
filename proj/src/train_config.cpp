#include "abspec/train_config.hpp"

#include <functional>

#include "abspec/errors.hpp"
#include "abspec/utils.hpp"

namespace abspec {

namespace {

bool parse_bool(const std::string& v) {
  std::string k = lowercase(v);
  if (k == "true" || k == "1" || k == "yes" || k == "on") return true;
  if (k == "false" || k == "0" || k == "no" || k == "off") return false;
  throw ParseError("config: expected boolean, got '" + v + "'");
}

}  // namespace

TrainConfig train_config_from_map(const std::map<std::string, std::string>& kv) {
  TrainConfig cfg;
  std::map<std::string, std::function<void(const std::string&)>> setters = {
      {"seed", [&](const std::string& v) { cfg.seed = std::stoull(v); }},
      {"epochs", [&](const std::string& v) { cfg.epochs = std::stoi(v); }},
      {"lr", [&](const std::string& v) { cfg.lr = std::stod(v); }},
      {"l2_weight", [&](const std::string& v) { cfg.l2_weight = std::stod(v); }},
      {"optimizer", [&](const std::string& v) { cfg.optimizer = lowercase(v); }},
      {"batch_size", [&](const std::string& v) { cfg.batch_size = std::stoi(v); }},
      {"val_fraction", [&](const std::string& v) { cfg.val_fraction = std::stod(v); }},
      {"class_weighted", [&](const std::string& v) { cfg.class_weighted = parse_bool(v); }},
      {"train_encoder", [&](const std::string& v) { cfg.train_encoder = parse_bool(v); }},
      {"l2_scope", [&](const std::string& v) { cfg.l2_scope = lowercase(v); }},
      {"head_variant", [&](const std::string& v) { cfg.head_variant = lowercase(v); }},
      {"aspect_mode", [&](const std::string& v) { cfg.aspect_mode = lowercase(v); }},
      {"encoder", [&](const std::string& v) { cfg.encoder = lowercase(v); }},
      {"dim", [&](const std::string& v) { cfg.dim = std::stoi(v); }},
      {"layers", [&](const std::string& v) { cfg.layers = std::stoi(v); }},
      {"heads", [&](const std::string& v) { cfg.heads = std::stoi(v); }},
      {"ffn_dim", [&](const std::string& v) { cfg.ffn_dim = std::stoi(v); }},
      {"max_len", [&](const std::string& v) { cfg.max_len = std::stoi(v); }},
      {"link_variant", [&](const std::string& v) { cfg.link_variant = lowercase(v); }},
      {"distance", [&](const std::string& v) { cfg.distance = lowercase(v); }},
      {"threshold", [&](const std::string& v) { cfg.threshold = std::stod(v); }},
      {"dictionary", [&](const std::string& v) { cfg.dictionary = v; }},
      {"emb_dim", [&](const std::string& v) { cfg.emb_dim = std::stoi(v); }},
      {"lstm_hidden", [&](const std::string& v) { cfg.lstm_hidden = std::stoi(v); }},
  };
  for (const auto& [key, value] : kv) {
    auto it = setters.find(key);
    if (it == setters.end()) throw ParseError("config: unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("config: bad value for '" + key + "': '" + value + "'");
    }
  }
  return cfg;
}

TrainConfig parse_train_config(const std::string& path) {
  std::map<std::string, std::string> kv;
  size_t lineno = 0;
  for (const std::string& raw : read_lines(path)) {
    ++lineno;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return train_config_from_map(kv);
}

}  // namespace abspec
