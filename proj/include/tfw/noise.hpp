#pragma once

// Brownian and fractional Brownian increments per noise channel (mode).
//
// Every (sample, mode, channel) draws from its own generator, seeded by a
// counter-based hash of the master seed, so a mode's increments do not depend
// on how many modes are sampled or in which order paths are produced.
// Refinement studies sample once on the finest grid and coarsen.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "tfw/model.hpp"

namespace tfw {

/// Increments on t_i = i tau, i = 0..N-1 (cell i is [t_i, t_{i+1}]).
struct NoisePath {
  double tau = 0.0;
  int n_steps = 0;
  double hurst = 0.5;
  std::uint64_t seed = 0;
  RowMat bm_incr;   // K x N
  RowMat fbm_incr;  // K x N

  int n_modes() const noexcept { return static_cast<int>(bm_incr.rows()); }
};

namespace noise {

enum class Channel : std::uint64_t { brownian = 1, fractional = 2 };

/// Seed of the stream for (master, sample, mode, channel).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t sample, int mode, Channel channel);

/// K x N i.i.d. N(0, tau) increments. `sample` selects the Monte-Carlo path.
RowMat sample_bm(int n_modes, int n_steps, double tau, std::uint64_t seed, std::uint64_t sample = 0);

/// Exact fractional Gaussian noise sampler for one (N, H).
///
/// Circulant embedding of the stationary covariance in size 2N. If the
/// embedding has a negative eigenvalue beyond round-off, falls back to the
/// Cholesky factor of the N x N Toeplitz covariance.
class FgnSampler {
 public:
  FgnSampler(int n_steps, double hurst);

  /// Unit-step fGn (tau = 1) from the given generator seed.
  std::vector<double> draw(std::uint64_t stream) const;

  int n_steps() const noexcept { return n_; }
  double hurst() const noexcept { return hurst_; }
  bool uses_embedding() const noexcept { return embedding_; }

  /// Autocovariance of unit-step fGn at integer lag.
  static double autocov(int lag, double hurst);

 private:
  int n_;
  double hurst_;
  bool embedding_ = true;
  std::vector<double> sqrt_eig_;  // size 2N, scaled by 1/sqrt(2N)
  Mat chol_;                      // lower factor, fallback only
};

/// Shared sampler for (N, H); constructed once and reused read-only.
std::shared_ptr<const FgnSampler> fgn_sampler(int n_steps, double hurst);

/// K x N fGn increments with step tau, Cov scaled by tau^{2H}.
RowMat sample_fbm(int n_modes, int n_steps, double tau, double hurst, std::uint64_t seed,
                  std::uint64_t sample = 0);

/// Both channels for one Monte-Carlo sample.
NoisePath sample_path(int n_modes, int n_steps, double tau, double hurst, std::uint64_t seed,
                      std::uint64_t sample = 0);

/// (xi, xi^H) = (bm / sqrt(tau), fbm / tau^H); both N(0,1) entrywise.
std::pair<RowMat, RowMat> normalize_increments(const NoisePath& path);

/// Block sums of `factor` consecutive increments. Requires factor | N.
NoisePath coarsen(const NoisePath& path, int factor);

/// Keeps the first n_modes channels.
NoisePath restrict_modes(const NoisePath& path, int n_modes);

/// Binary format: "TFWNOISE" magic, u32 version, i32 K, i32 N, f64 tau,
/// f64 H, u64 seed, then bm and fbm row-major, all little-endian.
void dump(const NoisePath& path, const std::string& file);
NoisePath load(const std::string& file);

}  // namespace noise
}  // namespace tfw
