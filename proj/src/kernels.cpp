#include "tfw/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "tfw/special.hpp"

namespace tfw::kernels {

namespace {

void check(const ModeKernelCtx& ctx, double t) {
  if (!(ctx.lam_beta >= 0.0)) throw std::invalid_argument("kernel: lam_beta must be non-negative");
  if (!(t >= 0.0)) throw std::invalid_argument("kernel: t must be non-negative");
}

double arg(const ModeKernelCtx& ctx, double t) { return -ctx.lam_beta * std::pow(t, ctx.alpha); }

}  // namespace

double eval_T(const ModeKernelCtx& ctx, double t) {
  check(ctx, t);
  const double z = arg(ctx, t);
  const double a = ctx.alpha;
  return std::exp(-ctx.nu * t) * (special::ml(a, 1.0, z) + ctx.nu * t * special::ml(a, 2.0, z));
}

double eval_R(const ModeKernelCtx& ctx, double t) {
  check(ctx, t);
  return t * std::exp(-ctx.nu * t) * special::ml(ctx.alpha, 2.0, arg(ctx, t));
}

double eval_S(const ModeKernelCtx& ctx, double t) {
  check(ctx, t);
  if (t == 0.0) return 0.0;
  const double a = ctx.alpha;
  return std::pow(t, a - 1.0) * std::exp(-ctx.nu * t) * special::ml(a, a, arg(ctx, t));
}

double eval_dT(const ModeKernelCtx& ctx, double t) {
  check(ctx, t);
  const double a = ctx.alpha, nu = ctx.nu;
  const double z = arg(ctx, t);
  const double e1 = special::ml(a, 1.0, z);
  const double e2 = special::ml(a, 2.0, z);
  const double ea = t > 0.0 ? std::pow(t, a - 1.0) * special::ml(a, a, z) : 0.0;
  const double damp = std::exp(-nu * t);
  return -nu * damp * (e1 + nu * t * e2) + damp * (-ctx.lam_beta * ea + nu * e1);
}

double conv_primitive(const ModeKernelCtx& ctx, double t) {
  check(ctx, t);
  if (t == 0.0) return 0.0;
  const double a = ctx.alpha;
  return std::pow(t, a) * special::ml(a, a + 1.0, arg(ctx, t));
}

double conv_weight(const ModeKernelCtx& ctx, double t_right, double t_left) {
  if (ctx.nu != 0.0) throw std::invalid_argument("conv_weight: kernel must be untempered (nu = 0)");
  if (!(t_left >= 0.0 && t_left <= t_right)) throw std::invalid_argument("conv_weight: need 0 <= t_left <= t_right");
  if (t_left == t_right) return 0.0;
  return conv_primitive(ctx, t_right) - conv_primitive(ctx, t_left);
}

// ---------------------------------------------------------------------------

KernelTable::KernelTable(double alpha, double tau, int n_steps, const Vec& lam_beta)
    : alpha_(alpha), tau_(tau), n_steps_(n_steps), n_modes_(static_cast<int>(lam_beta.size())), lam_(lam_beta) {
  if (!(tau > 0.0) || n_steps < 1 || n_modes_ < 1) throw std::invalid_argument("KernelTable: bad grid");
  const std::size_t rows = static_cast<std::size_t>(n_steps) + 1;
  e1_.assign(rows * n_modes_, 0.0);
  te2_.assign(rows * n_modes_, 0.0);
  prim_.assign(rows * n_modes_, 0.0);
  for (std::size_t j = 0; j < rows; ++j) {
    const double t = static_cast<double>(j) * tau;
    const double ta = std::pow(t, alpha);
    for (int k = 0; k < n_modes_; ++k) {
      const double z = -lam_[k] * ta;
      const std::size_t idx = j * n_modes_ + k;
      e1_[idx] = special::ml(alpha, 1.0, z);
      te2_[idx] = t * special::ml(alpha, 2.0, z);
      prim_[idx] = ta * special::ml(alpha, alpha + 1.0, z);
    }
  }
}

WeightView::WeightView(std::shared_ptr<const KernelTable> table, int stride)
    : table_(std::move(table)), stride_(stride) {
  if (!table_) throw std::invalid_argument("WeightView: null table");
  if (stride < 1 || table_->n_steps() % stride != 0)
    throw std::invalid_argument("WeightView: stride must divide the table length");
  n_steps_ = table_->n_steps() / stride;
  const int k_modes = table_->n_modes();
  w_.resize(static_cast<std::size_t>(n_steps_) * k_modes);
  for (int j = 1; j <= n_steps_; ++j) {
    const double* hi = table_->prim(j * stride);
    const double* lo = table_->prim((j - 1) * stride);
    double* out = &w_[static_cast<std::size_t>(j - 1) * k_modes];
    for (int k = 0; k < k_modes; ++k) out[k] = hi[k] - lo[k];
  }
}

}  // namespace tfw::kernels
