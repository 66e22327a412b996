#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace tracklearn {

/// Derives an independent substream seed from a master seed and a label.
/// Fixed algorithm (FNV-1a + splitmix64 finalizers) so that streams are
/// reproducible across builds and adding a consumer never perturbs another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

/// Seeded random stream with fully pinned-down sampling algorithms.
///
/// std::mt19937_64 output is specified by the standard; the distribution
/// transforms here are hand-rolled (std:: distributions are
/// implementation-defined and would break run reproducibility).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; never zero, safe under log().
  double uniform_pos() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the desk-scale ranges used here.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tracklearn
