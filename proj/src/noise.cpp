#include "tfw/noise.hpp"

#include <unsupported/Eigen/FFT>

#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace tfw::noise {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_grid(int n_modes, int n_steps, double tau) {
  if (n_modes < 1 || n_steps < 1) throw std::invalid_argument("noise: K and N must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("noise: tau must be positive");
}

std::vector<double> gaussians(std::uint64_t stream, int n) {
  std::mt19937_64 gen(stream);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> z(n);
  for (auto& v : z) v = nd(gen);
  return z;
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t sample, int mode, Channel channel) {
  std::uint64_t h = splitmix(master);
  h = splitmix(h ^ sample);
  h = splitmix(h ^ static_cast<std::uint64_t>(mode));
  return splitmix(h ^ static_cast<std::uint64_t>(channel));
}

RowMat sample_bm(int n_modes, int n_steps, double tau, std::uint64_t seed, std::uint64_t sample) {
  check_grid(n_modes, n_steps, tau);
  RowMat out(n_modes, n_steps);
  const double sd = std::sqrt(tau);
  for (int k = 0; k < n_modes; ++k) {
    const auto z = gaussians(stream_seed(seed, sample, k + 1, Channel::brownian), n_steps);
    for (int i = 0; i < n_steps; ++i) out(k, i) = sd * z[i];
  }
  return out;
}

// ---------------------------------------------------------------------------

double FgnSampler::autocov(int lag, double hurst) {
  const double k = std::fabs(static_cast<double>(lag));
  const double e = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, e) + std::pow(std::fabs(k - 1.0), e) - 2.0 * std::pow(k, e));
}

FgnSampler::FgnSampler(int n_steps, double hurst) : n_(n_steps), hurst_(hurst) {
  if (n_steps < 1) throw std::invalid_argument("fgn: N must be >= 1");
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("fgn: hurst must lie in (0, 1)");

  const int m = 2 * n_;
  std::vector<std::complex<double>> c(m), lam;
  for (int j = 0; j <= n_; ++j) c[j] = autocov(j, hurst);
  for (int j = n_ + 1; j < m; ++j) c[j] = autocov(m - j, hurst);
  Eigen::FFT<double> fft;
  fft.fwd(lam, c);

  sqrt_eig_.resize(m);
  double max_eig = 0.0;
  for (const auto& l : lam) max_eig = std::max(max_eig, std::fabs(l.real()));
  for (int j = 0; j < m; ++j) {
    double l = lam[j].real();
    if (l < 0.0) {
      if (l < -1e-10 * max_eig) {
        embedding_ = false;
        break;
      }
      l = 0.0;
    }
    sqrt_eig_[j] = std::sqrt(l / m);
  }

  if (!embedding_) {
    Mat cov(n_, n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) cov(i, j) = autocov(i - j, hurst);
    Eigen::LLT<Mat> llt(cov);
    if (llt.info() != Eigen::Success) throw std::runtime_error("fgn: covariance factorization failed");
    chol_ = llt.matrixL();
    sqrt_eig_.clear();
  }
}

std::vector<double> FgnSampler::draw(std::uint64_t stream) const {
  if (!embedding_) {
    const auto z = gaussians(stream, n_);
    Eigen::Map<const Vec> zv(z.data(), n_);
    Vec x = chol_.triangularView<Eigen::Lower>() * zv;
    return {x.data(), x.data() + n_};
  }
  const int m = 2 * n_;
  const auto z = gaussians(stream, 2 * m);
  std::vector<std::complex<double>> w(m), y;
  for (int j = 0; j < m; ++j) w[j] = sqrt_eig_[j] * std::complex<double>(z[2 * j], z[2 * j + 1]);
  Eigen::FFT<double> fft;
  fft.fwd(y, w);
  std::vector<double> out(n_);
  for (int i = 0; i < n_; ++i) out[i] = y[i].real();
  return out;
}

std::shared_ptr<const FgnSampler> fgn_sampler(int n_steps, double hurst) {
  static std::mutex mu;
  static std::map<std::pair<int, double>, std::shared_ptr<const FgnSampler>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n_steps, hurst}];
  if (!slot) slot = std::make_shared<const FgnSampler>(n_steps, hurst);
  return slot;
}

RowMat sample_fbm(int n_modes, int n_steps, double tau, double hurst, std::uint64_t seed,
                  std::uint64_t sample) {
  check_grid(n_modes, n_steps, tau);
  const auto sampler = fgn_sampler(n_steps, hurst);
  const double scale = std::pow(tau, hurst);
  RowMat out(n_modes, n_steps);
  for (int k = 0; k < n_modes; ++k) {
    const auto x = sampler->draw(stream_seed(seed, sample, k + 1, Channel::fractional));
    for (int i = 0; i < n_steps; ++i) out(k, i) = scale * x[i];
  }
  return out;
}

NoisePath sample_path(int n_modes, int n_steps, double tau, double hurst, std::uint64_t seed,
                      std::uint64_t sample) {
  NoisePath p;
  p.tau = tau;
  p.n_steps = n_steps;
  p.hurst = hurst;
  p.seed = seed;
  p.bm_incr = sample_bm(n_modes, n_steps, tau, seed, sample);
  p.fbm_incr = sample_fbm(n_modes, n_steps, tau, hurst, seed, sample);
  return p;
}

std::pair<RowMat, RowMat> normalize_increments(const NoisePath& path) {
  return {path.bm_incr / std::sqrt(path.tau), path.fbm_incr / std::pow(path.tau, path.hurst)};
}

NoisePath coarsen(const NoisePath& path, int factor) {
  if (factor < 1) throw std::invalid_argument("coarsen: factor must be >= 1");
  if (path.n_steps % factor != 0)
    throw std::invalid_argument("coarsen: factor " + std::to_string(factor) + " does not divide N = " +
                                std::to_string(path.n_steps));
  NoisePath out;
  out.tau = path.tau * factor;
  out.n_steps = path.n_steps / factor;
  out.hurst = path.hurst;
  out.seed = path.seed;
  const int k_modes = path.n_modes();
  auto sum_blocks = [&](const RowMat& src) {
    RowMat dst = RowMat::Zero(k_modes, out.n_steps);
    for (int k = 0; k < k_modes; ++k)
      for (int i = 0; i < out.n_steps; ++i) {
        double s = 0.0;
        for (int j = 0; j < factor; ++j) s += src(k, i * factor + j);
        dst(k, i) = s;
      }
    return dst;
  };
  out.bm_incr = sum_blocks(path.bm_incr);
  out.fbm_incr = sum_blocks(path.fbm_incr);
  return out;
}

NoisePath restrict_modes(const NoisePath& path, int n_modes) {
  if (n_modes < 1 || n_modes > path.n_modes())
    throw std::invalid_argument("restrict_modes: mode count out of range");
  NoisePath out = path;
  out.bm_incr = path.bm_incr.topRows(n_modes);
  out.fbm_incr = path.fbm_incr.topRows(n_modes);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'F', 'W', 'N', 'O', 'I', 'S', 'E'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, T v) {
  static_assert(std::endian::native == std::endian::little, "little-endian host required");
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("noise file truncated");
  return v;
}

}  // namespace

void dump(const NoisePath& path, const std::string& file) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + file + "' for writing");
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kVersion);
  put<std::int32_t>(os, path.n_modes());
  put<std::int32_t>(os, path.n_steps);
  put<double>(os, path.tau);
  put<double>(os, path.hurst);
  put<std::uint64_t>(os, path.seed);
  for (const RowMat* m : {&path.bm_incr, &path.fbm_incr})
    os.write(reinterpret_cast<const char*>(m->data()), static_cast<std::streamsize>(m->size() * sizeof(double)));
  if (!os) throw std::runtime_error("write to '" + file + "' failed");
}

NoisePath load(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + file + "'");
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw std::runtime_error("not a noise file: " + file);
  if (get<std::uint32_t>(is) != kVersion) throw std::runtime_error("unsupported noise file version");
  NoisePath p;
  const int k_modes = get<std::int32_t>(is);
  p.n_steps = get<std::int32_t>(is);
  p.tau = get<double>(is);
  p.hurst = get<double>(is);
  p.seed = get<std::uint64_t>(is);
  if (k_modes < 1 || p.n_steps < 1) throw std::runtime_error("corrupt noise header");
  for (RowMat* m : {&p.bm_incr, &p.fbm_incr}) {
    m->resize(k_modes, p.n_steps);
    is.read(reinterpret_cast<char*>(m->data()), static_cast<std::streamsize>(m->size() * sizeof(double)));
    if (!is) throw std::runtime_error("noise file truncated");
  }
  return p;
}

}  // namespace tfw::noise
