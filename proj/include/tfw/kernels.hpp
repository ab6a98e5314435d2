#pragma once

// Per-mode factors of the mild-solution kernels
//
//   T(t) = e^{-nu t} (E_{a,1}(-l t^a) + nu t E_{a,2}(-l t^a))
//   R(t) = t e^{-nu t} E_{a,2}(-l t^a)
//   S(t) = t^{a-1} e^{-nu t} E_{a,a}(-l t^a)
//
// with l = lambda_k^beta, and the exact cell integrals of the untempered S.

#include <memory>
#include <vector>

#include "tfw/model.hpp"

namespace tfw::kernels {

struct ModeKernelCtx {
  double lam_beta = 1.0;
  double alpha = 1.8;
  double nu = 0.0;
};

double eval_T(const ModeKernelCtx& ctx, double t);
double eval_R(const ModeKernelCtx& ctx, double t);
double eval_S(const ModeKernelCtx& ctx, double t);
double eval_dT(const ModeKernelCtx& ctx, double t);

/// t^a E_{a,a+1}(-l t^a), the primitive of the untempered S.
double conv_primitive(const ModeKernelCtx& ctx, double t);

/// int_{t_left}^{t_right} s^{a-1} E_{a,a}(-l s^a) ds. Requires ctx.nu == 0.
double conv_weight(const ModeKernelCtx& ctx, double t_right, double t_left);

/// Untempered kernel values on the lattice t_j = j tau, j = 0..N, for a set
/// of modes. Coarser grids with step s*tau read every s-th entry.
class KernelTable {
 public:
  KernelTable(double alpha, double tau, int n_steps, const Vec& lam_beta);

  int n_modes() const noexcept { return n_modes_; }
  int n_steps() const noexcept { return n_steps_; }
  double tau() const noexcept { return tau_; }
  double alpha() const noexcept { return alpha_; }
  const Vec& lam_beta() const noexcept { return lam_; }

  /// Row j: E_{a,1}(-l t_j^a) per mode.
  const double* e1(int j) const { return &e1_[static_cast<std::size_t>(j) * n_modes_]; }
  /// Row j: t_j E_{a,2}(-l t_j^a) per mode.
  const double* te2(int j) const { return &te2_[static_cast<std::size_t>(j) * n_modes_]; }
  /// Row j: t_j^a E_{a,a+1}(-l t_j^a) per mode.
  const double* prim(int j) const { return &prim_[static_cast<std::size_t>(j) * n_modes_]; }

 private:
  double alpha_, tau_;
  int n_steps_, n_modes_;
  Vec lam_;
  std::vector<double> e1_, te2_, prim_;
};

/// Convolution weights w_k(j) = G_k(j h) - G_k((j-1) h), j = 1..n, at step
/// h = stride * table.tau(), stored row-major (row j-1 = lag j).
class WeightView {
 public:
  WeightView(std::shared_ptr<const KernelTable> table, int stride);

  int n_steps() const noexcept { return n_steps_; }
  int n_modes() const noexcept { return table_->n_modes(); }
  double tau() const noexcept { return table_->tau() * stride_; }
  const double* weights(int lag) const { return &w_[static_cast<std::size_t>(lag - 1) * n_modes()]; }
  const double* e1(int m) const { return table_->e1(m * stride_); }
  const double* te2(int m) const { return table_->te2(m * stride_); }

 private:
  std::shared_ptr<const KernelTable> table_;
  int stride_, n_steps_;
  std::vector<double> w_;
};

}  // namespace tfw::kernels
