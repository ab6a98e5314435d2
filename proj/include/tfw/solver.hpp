#pragma once

// Modal time stepping in the conjugated variable v = e^{nu t} u.
//
//   v_k(t_m) = a_k E_{a,1}(-l_k t_m^a) + (nu a_k + b_k) t_m E_{a,2}(-l_k t_m^a)
//            + sum_{i<m} w_k(m-i) e^{nu t_i} F_k(i)
//
// where w_k(j) are the exact cell integrals of s^{a-1} E_{a,a}(-l_k s^a) and
// F_k(i) is the right-hand side evaluated at the left end of cell i with the
// piecewise-constant noise derivatives dW(i)/tau.

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "tfw/kernels.hpp"
#include "tfw/model.hpp"
#include "tfw/noise.hpp"

namespace tfw {

struct ModalTrajectory {
  double tau = 0.0;
  int n_steps = 0;
  RowMat coeffs;  // (N+1) x K, row m = u(t_m)
  std::uint64_t seed = 0;
  std::shared_ptr<const ModelSpec> model;

  double t(int m) const noexcept { return m * tau; }
  Vec at(int m) const { return coeffs.row(m).transpose(); }
  int n_modes() const noexcept { return static_cast<int>(coeffs.cols()); }
};

struct SolveOptions {
  int max_steps = 1 << 13;
  double guard = 1e12;
};

namespace solver {

/// Right-hand side at left point i: writes F(i) (untempered) for the given
/// state u(t_i). Both arrays have one entry per mode.
using Forcing = std::function<void(int i, double t, const double* u, double* out)>;

struct VolterraSystem {
  double nu = 0.0;
  Vec v0;           // u(0)
  Vec v1;           // nu u(0) + u'(0)
  Forcing forcing;  // empty: homogeneous
};

/// Runs the recursion above on the grid of `weights`. Returns (N+1) x K in u.
/// Throws GuardError with the offending (step, mode).
RowMat run_volterra(const kernels::WeightView& weights, const VolterraSystem& sys,
                    const SolveOptions& opts = {});

/// Kernel table for the model's modes on the grid (tau, n_steps).
std::shared_ptr<const kernels::KernelTable> make_table(const ModelSpec& model, double tau, int n_steps);

/// Weight view of `table` at step tau (a multiple of the table step).
kernels::WeightView view_for(std::shared_ptr<const kernels::KernelTable> table, double tau, int n_steps);

/// Closed-form solution of the linear homogeneous problem on t_m = m tau.
ModalTrajectory exact_linear(const ModelSpec& model, double tau, int n_steps);

/// Regularized mild solution driven by `path`. The path must carry at least
/// K channels and span the model horizon. A shared table (step dividing
/// path.tau) avoids recomputing Mittag-Leffler values across samples.
ModalTrajectory solve_regularized(const ModelSpec& model, const NoisePath& path,
                                  std::shared_ptr<const kernels::KernelTable> table = nullptr,
                                  const SolveOptions& opts = {});

/// Right-hand side of the regularized problem at node i in the spectral basis.
Forcing spectral_forcing(const ModelSpec& model, const NoisePath& path);

/// Centred differences in time, second-order one-sided at the ends.
ModalTrajectory time_derivative(const ModalTrajectory& traj);

/// |(tempered Caputo + lambda^beta) u - RHS|_{H^0} at every node (entry 0 is 0).
std::vector<double> residual_check(const ModalTrajectory& traj, const ModelSpec& model, const NoisePath& path);

}  // namespace solver
}  // namespace tfw
