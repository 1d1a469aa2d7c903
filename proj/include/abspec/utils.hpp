#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace abspec {

// Deterministic RNG used everywhere a seed appears in a contract.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  // inclusive bounds
  int64_t uniform_int(int64_t lo, int64_t hi) {
    return std::uniform_int_distribution<int64_t>(lo, hi)(engine_);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), engine_);
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// FNV-1a, stable across platforms; used for evidence-dedup keys.
uint64_t fnv1a64(std::string_view s);
std::string to_hex(uint64_t v);

std::string lowercase(std::string_view s);
std::string trim(std::string_view s);
// Strips leading/trailing characters that are neither alphanumeric nor '_'.
std::string strip_outer_punct(std::string_view s);
bool is_pure_punct(std::string_view s);
bool contains_digit(std::string_view s);
std::vector<std::string> whitespace_split(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
std::vector<std::string> read_lines(const std::string& path);

// ISO-8601 UTC; honors the ABSPEC_CREATED_AT override so exports can be
// byte-compared across runs.
std::string utc_timestamp();

}  // namespace abspec
