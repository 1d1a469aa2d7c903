#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace abspec {

// Flat key = value configuration shared by both training tasks. Every field
// has a usable default; the paper reports no training hyperparameters, so
// all values here are artifact choices.
struct TrainConfig {
  uint64_t seed = 7;
  int epochs = 60;
  double lr = 2e-3;
  double l2_weight = 1e-4;
  std::string optimizer = "adam";  // adam | sgd
  int batch_size = 8;
  double val_fraction = 0.0;       // 0: best epoch by training loss
  bool class_weighted = false;
  bool train_encoder = true;
  std::string l2_scope = "head";   // head | all

  // task 1
  std::string head_variant = "aoa_cls";  // aoa | aoa_cls | enc_only | enc_spc
  std::string aspect_mode = "token";     // token | phrase

  // encoder backend ("mini" is the bundled trainable transformer)
  std::string encoder = "mini";
  int dim = 64;
  int layers = 2;
  int heads = 2;
  int ffn_dim = 128;
  int max_len = 128;

  // task 2
  std::string link_variant = "pair_spc";  // pair_spc | overlap | siamese
  std::string distance = "manhattan";     // manhattan | euclidean
  double threshold = 1.0;                 // overlap match threshold
  std::string dictionary;                 // wordlist path for the overlap baseline
  int emb_dim = 32;
  int lstm_hidden = 32;
};

TrainConfig train_config_from_map(const std::map<std::string, std::string>& kv);
// Lines of "key = value"; '#' starts a comment. Unknown keys are errors.
TrainConfig parse_train_config(const std::string& path);

}  // namespace abspec
