#include "tfw/fem.hpp"

#include <gsl/gsl_sf_zeta.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>

namespace tfw::fem {

namespace {

constexpr double kPi = std::numbers::pi;

// 2 (1 - cos(w h)) / (w^2 h), written with sin^2 to avoid cancellation.
double hat_factor(double w, double h) {
  const double s = std::sin(0.5 * w * h);
  return 4.0 * s * s / (w * w * h);
}

Mat exact_stiffness(int m_dofs, double h, double len, double beta) {
  const int p = m_dofs + 1;
  const double s = 4.0 - 2.0 * beta;
  const double scale = 8.0 / (len * h * h) * std::pow(kPi / len, 2.0 * beta - 4.0) *
                       std::pow(2.0 * p, 2.0 * beta - 4.0);
  Vec d(m_dofs);
  for (int r = 1; r <= m_dofs; ++r) {
    const double q = static_cast<double>(r) / (2.0 * p);
    const double c = std::sin(0.5 * r * kPi / p);
    const double one_minus_cos = 2.0 * c * c;
    d[r - 1] = scale * (gsl_sf_hzeta(s, q) + gsl_sf_hzeta(s, 1.0 - q)) * one_minus_cos * one_minus_cos;
  }
  Mat sines(m_dofs, m_dofs);
  for (int a = 1; a <= m_dofs; ++a)
    for (int r = 1; r <= m_dofs; ++r) sines(a - 1, r - 1) = std::sin(static_cast<double>(r) * a * kPi / p);
  Mat k = sines * d.asDiagonal() * sines.transpose();
  return 0.5 * (k + k.transpose());
}

}  // namespace

Mat FemSpace::hat_sine(int n_cont) const {
  if (n_cont < 1) throw std::invalid_argument("hat_sine: need at least one continuous mode");
  Mat psi(n_dofs, n_cont);
  const double norm = std::sqrt(2.0 / domain_len);
  for (int j = 1; j <= n_cont; ++j) {
    const double w = j * kPi / domain_len;
    const double f = norm * hat_factor(w, h_bar);
    for (int a = 0; a < n_dofs; ++a) psi(a, j - 1) = f * std::sin(w * nodes[a]);
  }
  return psi;
}

Mat FemSpace::coupling(int n_cont) const { return eig_vecs.transpose() * hat_sine(n_cont); }

FemSpace build_space(double h_bar, double domain_len, double beta, int spectral_trunc) {
  if (!(domain_len > 0.0) || !(h_bar > 0.0)) throw std::invalid_argument("build_space: L and h must be positive");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("build_space: beta must lie in (0, 1]");
  const double cells = domain_len / h_bar;
  const long p = std::lround(cells);
  if (p < 2 || std::fabs(cells - static_cast<double>(p)) > 1e-9 * cells)
    throw std::invalid_argument("build_space: L / h_bar must be an integer >= 2");

  FemSpace sp;
  sp.h_bar = domain_len / static_cast<double>(p);
  sp.domain_len = domain_len;
  sp.beta = beta;
  sp.n_dofs = static_cast<int>(p) - 1;
  const int m = sp.n_dofs;
  const double h = sp.h_bar;
  sp.nodes.resize(m);
  for (int a = 0; a < m; ++a) sp.nodes[a] = (a + 1) * h;

  sp.mass = Mat::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    sp.mass(a, a) = 2.0 * h / 3.0;
    if (a + 1 < m) sp.mass(a, a + 1) = sp.mass(a + 1, a) = h / 6.0;
  }

  const Mat exact = exact_stiffness(m, h, domain_len, beta);
  if (spectral_trunc == 0) {
    sp.frac_stiff = exact;
  } else {
    if (spectral_trunc < 4 * m) throw std::invalid_argument("build_space: spectral truncation J must be >= 4M");
    sp.spectral_trunc = spectral_trunc;
    const Mat psi = sp.hat_sine(spectral_trunc);
    const Vec lam = frac_eigenvalues(spectral_trunc, domain_len, beta);
    sp.frac_stiff = psi * lam.asDiagonal() * psi.transpose();
    double tail = 0.0;
    for (int a = 0; a < m; ++a)
      tail = std::max(tail, std::fabs(exact(a, a) - sp.frac_stiff(a, a)) / exact(a, a));
    sp.tail_estimate = tail;
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(sp.frac_stiff, sp.mass);
  if (es.info() != Eigen::Success) throw std::runtime_error("build_space: generalized eigensolve failed");
  sp.eig_vals = es.eigenvalues();
  sp.eig_vecs = es.eigenvectors();
  const Mat b = sp.coupling(m);
  for (int k = 0; k < m; ++k)
    if (b(k, k) < 0.0) sp.eig_vecs.col(k) *= -1.0;
  return sp;
}

Vec project_L2(const FemSpace& space, const Vec& target) {
  const Vec load = space.hat_sine(static_cast<int>(target.size())) * target;
  return space.mass.llt().solve(load);
}

Vec project_ritz(const FemSpace& space, const Vec& target) {
  const int n = static_cast<int>(target.size());
  const Vec lam = frac_eigenvalues(n, space.domain_len, space.beta);
  const Vec load = space.hat_sine(n) * lam.cwiseProduct(target);
  return space.frac_stiff.llt().solve(load);
}

Vec discrete_frac_apply(const FemSpace& space, const Vec& nodal) {
  return space.mass.llt().solve(space.frac_stiff * nodal);
}

Vec modal_coeffs(const FemSpace& space, const Vec& nodal) {
  return space.eig_vecs.transpose() * (space.mass * nodal);
}

double discrete_norm(const FemSpace& space, const Vec& nodal, double p) {
  const Vec c = modal_coeffs(space, nodal);
  double acc = 0.0;
  for (int k = 0; k < space.n_dofs; ++k) acc += std::pow(space.eig_vals[k], p / space.beta) * c[k] * c[k];
  return std::sqrt(acc);
}

double inverse_inequality_probe(const FemSpace& space, double s, double l) {
  if (l < s) throw std::invalid_argument("inverse_inequality_probe: need l >= s");
  double worst = 0.0;
  for (int k = 0; k < space.n_dofs; ++k) {
    const Vec phi = space.eig_vecs.col(k);
    const double ratio = discrete_norm(space, phi, l) / (std::pow(space.h_bar, s - l) * discrete_norm(space, phi, s));
    worst = std::max(worst, ratio);
  }
  return worst;
}

std::shared_ptr<const kernels::KernelTable> make_table(const FemSpace& space, double alpha, double tau,
                                                       int n_steps) {
  return std::make_shared<const kernels::KernelTable>(alpha, tau, n_steps, space.eig_vals);
}

ModalTrajectory solve_fem(const ModelSpec& model, const FemSpace& space, const NoisePath& path,
                          std::shared_ptr<const kernels::KernelTable> table, const SolveOptions& opts) {
  model.validate();
  if (std::fabs(space.beta - model.beta) > 1e-14 || std::fabs(space.domain_len - model.domain_len) > 1e-14)
    throw std::invalid_argument("solve_fem: space and model disagree on beta or L");
  if (std::fabs(path.tau * path.n_steps - model.horizon) > 1e-9 * model.horizon)
    throw std::invalid_argument("solve_fem: path does not span the horizon");
  const int n = model.n_modes;
  const int m = space.n_dofs;
  if (!table) table = make_table(space, model.alpha, path.tau, path.n_steps);
  if (table->n_modes() != m) throw std::invalid_argument("solve_fem: kernel table has the wrong mode count");
  const kernels::WeightView view = solver::view_for(table, path.tau, path.n_steps);

  const Mat b = space.coupling(n);
  solver::VolterraSystem sys;
  sys.nu = model.nu;
  sys.v0 = b * model.init_a;
  sys.v1 = model.nu * sys.v0 + b * model.init_b;

  if (!model.is_linear_homogeneous()) {
    auto spectral = solver::spectral_forcing(model, path);
    sys.forcing = [&b, spectral, n, m](int i, double t, const double* u, double* out) {
      const Vec cont = b.transpose() * Eigen::Map<const Vec>(u, m);
      Vec rhs(n);
      spectral(i, t, cont.data(), rhs.data());
      Eigen::Map<Vec>(out, m) = b * rhs;
    };
  }

  ModalTrajectory traj;
  traj.tau = path.tau;
  traj.n_steps = path.n_steps;
  traj.seed = path.seed;
  traj.model = std::make_shared<const ModelSpec>(model);
  traj.coeffs = solver::run_volterra(view, sys, opts);
  return traj;
}

Vec prolongate(const FemSpace& space, const Vec& discrete_coeffs, int n_cont) {
  return space.coupling(n_cont).transpose() * discrete_coeffs;
}

double l2_error_sq(const Mat& coupling, const Vec& ref, const Vec& discrete_coeffs) {
  if (coupling.cols() != ref.size() || coupling.rows() != discrete_coeffs.size())
    throw std::invalid_argument("l2_error_sq: dimension mismatch");
  const Vec proj = coupling.transpose() * discrete_coeffs;
  const double outside = std::max(0.0, discrete_coeffs.squaredNorm() - proj.squaredNorm());
  return (ref - proj).squaredNorm() + outside;
}

void dump_matrix(const Mat& m, const std::string& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot open '" + file + "' for writing");
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
    os << '\n';
  }
}

}  // namespace tfw::fem
