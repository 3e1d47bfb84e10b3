#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace agdcert {

// Invalid user input: bad dimensions, malformed files, parameter values
// outside their documented range.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A numerical routine failed to meet its contract (non-convergence,
// loss of positive definiteness, NaN propagation).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

bool all_finite(const Vec& v);
void require_finite(const Vec& v, const std::string& name);

// Deterministic, platform-independent pseudo-random stream. The standard
// <random> distributions are implementation-defined, so every sampled value
// in the project goes through this generator instead.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 bits of mantissa.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller (no caching, two uniforms per draw).
  double normal();

 private:
  std::uint64_t state_;
};

// Round-trip-exact decimal rendering (17 significant digits).
std::string fmt_double(double x);

// Minimal CSV emitter: fixed column order, one header row, doubles rendered
// with fmt_double.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);

  void add_row(const std::vector<std::string>& cells);
  const std::vector<std::string>& columns() const { return columns_; }
  std::string str() const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes `text` to `path`, creating parent directories as needed.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace agdcert
