#include "tfw/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "tfw/calculus.hpp"
#include "tfw/errors.hpp"

namespace tfw::solver {

namespace {

// Steps advanced together; their far history is accumulated in one sweep.
constexpr int kBlock = 64;

int checked_ratio(double coarse, double fine) {
  const double r = coarse / fine;
  const long n = std::lround(r);
  if (n < 1 || std::fabs(r - static_cast<double>(n)) > 1e-9 * r)
    throw std::invalid_argument("time step " + std::to_string(coarse) + " is not a multiple of " + std::to_string(fine));
  return static_cast<int>(n);
}

void check_horizon(const ModelSpec& model, double tau, int n_steps) {
  const double span = tau * n_steps;
  if (std::fabs(span - model.horizon) > 1e-9 * model.horizon)
    throw std::invalid_argument("grid spans " + std::to_string(span) + " but the horizon is " +
                                std::to_string(model.horizon));
}

}  // namespace

RowMat run_volterra(const kernels::WeightView& weights, const VolterraSystem& sys, const SolveOptions& opts) {
  const int n = weights.n_steps();
  const int k_modes = weights.n_modes();
  const double tau = weights.tau();
  if (sys.v0.size() != k_modes || sys.v1.size() != k_modes)
    throw std::invalid_argument("run_volterra: initial data length differs from the mode count");
  if (n > opts.max_steps)
    throw std::invalid_argument("run_volterra: " + std::to_string(n) + " steps exceed the cap of " +
                                std::to_string(opts.max_steps));

  RowMat u(n + 1, k_modes);
  u.row(0) = sys.v0.transpose();
  const bool forced = static_cast<bool>(sys.forcing);
  std::vector<double> fhat(forced ? static_cast<std::size_t>(n) * k_modes : 0, 0.0);
  std::vector<double> acc(static_cast<std::size_t>(kBlock) * k_modes);

  auto eval_forcing = [&](int i) {
    double* row = &fhat[static_cast<std::size_t>(i) * k_modes];
    const double t = i * tau;
    sys.forcing(i, t, u.row(i).data(), row);
    const double g = std::exp(sys.nu * t);
    for (int k = 0; k < k_modes; ++k) row[k] *= g;
  };
  if (forced) eval_forcing(0);

  for (int m0 = 1; m0 <= n; m0 += kBlock) {
    const int nb = std::min(kBlock, n + 1 - m0);
    std::fill(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(nb) * k_modes, 0.0);

    if (forced) {
      for (int i = 0; i < m0; ++i) {
        const double* f = &fhat[static_cast<std::size_t>(i) * k_modes];
        for (int r = 0; r < nb; ++r) {
          const double* w = weights.weights(m0 + r - i);
          double* a = &acc[static_cast<std::size_t>(r) * k_modes];
          for (int k = 0; k < k_modes; ++k) a[k] += w[k] * f[k];
        }
      }
    }

    for (int r = 0; r < nb; ++r) {
      const int m = m0 + r;
      double* a = &acc[static_cast<std::size_t>(r) * k_modes];
      if (forced) {
        for (int i = m0; i < m; ++i) {
          const double* w = weights.weights(m - i);
          const double* f = &fhat[static_cast<std::size_t>(i) * k_modes];
          for (int k = 0; k < k_modes; ++k) a[k] += w[k] * f[k];
        }
      }
      const double* e1 = weights.e1(m);
      const double* te2 = weights.te2(m);
      const double damp = std::exp(-sys.nu * m * tau);
      for (int k = 0; k < k_modes; ++k) {
        const double v = sys.v0[k] * e1[k] + sys.v1[k] * te2[k] + a[k];
        if (!std::isfinite(v) || std::fabs(v) > opts.guard)
          throw GuardError("trajectory left the guard range at step " + std::to_string(m) + ", mode " +
                               std::to_string(k + 1),
                           static_cast<std::size_t>(m), static_cast<std::size_t>(k + 1));
        u(m, k) = damp * v;
      }
      if (forced && m < n) eval_forcing(m);
    }
  }
  return u;
}

std::shared_ptr<const kernels::KernelTable> make_table(const ModelSpec& model, double tau, int n_steps) {
  return std::make_shared<const kernels::KernelTable>(model.alpha, tau, n_steps, model.lambda_beta());
}

kernels::WeightView view_for(std::shared_ptr<const kernels::KernelTable> table, double tau, int n_steps) {
  const int stride = checked_ratio(tau, table->tau());
  if (static_cast<long>(stride) * n_steps != table->n_steps())
    throw std::invalid_argument("kernel table does not cover the requested grid");
  return kernels::WeightView(std::move(table), stride);
}

ModalTrajectory exact_linear(const ModelSpec& model, double tau, int n_steps) {
  model.validate();
  if (!model.is_linear_homogeneous())
    throw std::invalid_argument("exact_linear: f, g and h must all be of kind zero");
  if (!(tau > 0.0) || n_steps < 1) throw std::invalid_argument("exact_linear: bad grid");
  const int k_modes = model.n_modes;
  const Vec lam = model.lambda_beta();
  ModalTrajectory traj;
  traj.tau = tau;
  traj.n_steps = n_steps;
  traj.coeffs.resize(n_steps + 1, k_modes);
  traj.model = std::make_shared<const ModelSpec>(model);
  for (int k = 0; k < k_modes; ++k) {
    const kernels::ModeKernelCtx ctx{lam[k], model.alpha, model.nu};
    const double a = model.init_a[k], b = model.init_b[k];
    for (int m = 0; m <= n_steps; ++m) {
      const double t = m * tau;
      double v = 0.0;
      if (a != 0.0) v += a * kernels::eval_T(ctx, t);
      if (b != 0.0) v += b * kernels::eval_R(ctx, t);
      traj.coeffs(m, k) = v;
    }
  }
  return traj;
}

Forcing spectral_forcing(const ModelSpec& model, const NoisePath& path) {
  const int k_modes = model.n_modes;
  const bool noisy = !model.g_spec.is_zero() || !model.h_spec.is_zero();
  if (noisy && path.n_modes() < k_modes)
    throw std::invalid_argument("noise path carries " + std::to_string(path.n_modes()) + " channels, model needs " +
                                std::to_string(k_modes));
  const double tau = path.tau;

  return [&model, &path, k_modes, tau](int i, double t, const double* u, double* out) {
    const Eigen::Map<const Vec> uv(u, k_modes);
    Eigen::Map<Vec> ov(out, k_modes);
    ov = model.f_spec.is_zero() ? Vec::Zero(k_modes) : apply_drift(model.f_spec, t, uv);

    auto add_noise = [&](const NonlinearitySpec& spec, const CoeffRule& rule, const RowMat& incr) {
      if (spec.is_zero() || rule.kind == CoeffKind::zero) return;
      Vec z(k_modes);
      for (int l = 0; l < k_modes; ++l) z[l] = rule.approx(l + 1, t) * incr(l, i) / tau;
      if (spec.is_diagonal()) {
        ov += apply_diagonal(spec, t, uv).cwiseProduct(z);
      } else {
        ov += apply_operator(spec, t, uv) * z;
      }
    };
    add_noise(model.g_spec, model.noise_coeffs.sigma, path.bm_incr);
    add_noise(model.h_spec, model.noise_coeffs.rho, path.fbm_incr);
  };
}

ModalTrajectory solve_regularized(const ModelSpec& model, const NoisePath& path,
                                  std::shared_ptr<const kernels::KernelTable> table, const SolveOptions& opts) {
  model.validate();
  check_horizon(model, path.tau, path.n_steps);
  if (!table) table = make_table(model, path.tau, path.n_steps);
  if (table->n_modes() != model.n_modes) throw std::invalid_argument("kernel table has the wrong mode count");
  const kernels::WeightView view = view_for(table, path.tau, path.n_steps);

  VolterraSystem sys;
  sys.nu = model.nu;
  sys.v0 = model.init_a;
  sys.v1 = model.nu * model.init_a + model.init_b;
  if (!model.is_linear_homogeneous()) sys.forcing = spectral_forcing(model, path);

  ModalTrajectory traj;
  traj.tau = path.tau;
  traj.n_steps = path.n_steps;
  traj.seed = path.seed;
  traj.model = std::make_shared<const ModelSpec>(model);
  traj.coeffs = run_volterra(view, sys, opts);
  return traj;
}

ModalTrajectory time_derivative(const ModalTrajectory& traj) {
  const int n = traj.n_steps;
  if (n < 2) throw std::invalid_argument("time_derivative: need N >= 2");
  const double tau = traj.tau;
  const auto& c = traj.coeffs;
  ModalTrajectory out = traj;
  out.coeffs.row(0) = (-3.0 * c.row(0) + 4.0 * c.row(1) - c.row(2)) / (2.0 * tau);
  for (int m = 1; m < n; ++m) out.coeffs.row(m) = (c.row(m + 1) - c.row(m - 1)) / (2.0 * tau);
  out.coeffs.row(n) = (3.0 * c.row(n) - 4.0 * c.row(n - 1) + c.row(n - 2)) / (2.0 * tau);
  return out;
}

std::vector<double> residual_check(const ModalTrajectory& traj, const ModelSpec& model, const NoisePath& path) {
  const int n = traj.n_steps;
  const int k_modes = traj.n_modes();
  if (k_modes != model.n_modes) throw std::invalid_argument("residual_check: mode count mismatch");
  if (path.n_steps != n || std::fabs(path.tau - traj.tau) > 1e-12 * traj.tau)
    throw std::invalid_argument("residual_check: path grid differs from the trajectory grid");
  const Vec lam = model.lambda_beta();

  RowMat res = RowMat::Zero(n + 1, k_modes);
  for (int k = 0; k < k_modes; ++k) {
    calculus::TimeSeries s{traj.tau, std::vector<double>(n + 1)};
    for (int m = 0; m <= n; ++m) s.values[m] = traj.coeffs(m, k);
    const auto d = calculus::tempered_caputo(s, model.alpha, model.nu, model.init_b[k]);
    for (int m = 1; m <= n; ++m) res(m, k) = d.values[m] + lam[k] * s.values[m];
  }

  if (!model.is_linear_homogeneous()) {
    const Forcing rhs = spectral_forcing(model, path);
    Vec row(k_modes), f(k_modes);
    for (int m = 1; m <= n; ++m) {
      row = traj.coeffs.row(m).transpose();
      rhs(std::min(m, n - 1), m * traj.tau, row.data(), f.data());
      res.row(m) -= f.transpose();
    }
  }

  std::vector<double> norms(n + 1, 0.0);
  for (int m = 1; m <= n; ++m) norms[m] = res.row(m).norm();
  return norms;
}

}  // namespace tfw::solver
