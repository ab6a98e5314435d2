#pragma once

// Piecewise-linear Galerkin space on a uniform mesh of (0, L) with the
// fractional stiffness ((-Lap)^{b/2} psi_a, (-Lap)^{b/2} psi_c) written in the
// Dirichlet sine basis. Hat-sine inner products are closed form:
//
//   (psi_a, phi_j) = sqrt(2/L) sin(w_j x_a) * 2 (1 - cos(w_j h)) / (w_j^2 h).
//
// Summed over all j, the stiffness is periodic in j with period 2P (P = L/h)
// apart from the factor j^{2b-4}, so the infinite sum folds into Hurwitz zeta
// values: K = S diag(d) S^T with S[a][r] = sin(r a pi / P). A truncated sum
// over j <= J is available as an alternative assembly.

#include <memory>
#include <string>

#include "tfw/kernels.hpp"
#include "tfw/model.hpp"
#include "tfw/noise.hpp"
#include "tfw/solver.hpp"

namespace tfw::fem {

struct FemSpace {
  double h_bar = 0.0;
  double domain_len = 1.0;
  double beta = 1.0;
  int n_dofs = 0;         // M interior nodes
  Vec nodes;              // x_a = a h, a = 1..M
  Mat mass;               // M x M
  Mat frac_stiff;         // M x M
  Vec eig_vals;           // lambda_k^{h,beta}, ascending
  Mat eig_vecs;           // columns mass-orthonormal, (phi_k^h, phi_k) >= 0
  int spectral_trunc = 0; // 0: exact (zeta-folded) assembly, else J
  double tail_estimate = 0.0;  // relative size of the neglected tail (truncated assembly)

  /// (psi_a, phi_j) for j = 1..n_cont, M x n_cont.
  Mat hat_sine(int n_cont) const;
  /// (phi_k^h, phi_j), M x n_cont. Maps discrete modal coefficients c to
  /// continuous ones by B^T c.
  Mat coupling(int n_cont) const;
};

/// Uniform mesh with L / h_bar cells (integer, >= 2). `spectral_trunc` = 0
/// selects the exact assembly; a positive J sums j <= J and must be >= 4M.
FemSpace build_space(double h_bar, double domain_len, double beta, int spectral_trunc = 0);

/// Nodal vector of P_h psi for psi = sum_j c_j phi_j.
Vec project_L2(const FemSpace& space, const Vec& target);

/// Nodal vector of R_h psi.
Vec project_ritz(const FemSpace& space, const Vec& target);

/// Nodal vector of (-Lap_h)^beta applied to a nodal vector.
Vec discrete_frac_apply(const FemSpace& space, const Vec& nodal);

/// Discrete modal coefficients (x, phi_k^h) of a nodal vector.
Vec modal_coeffs(const FemSpace& space, const Vec& nodal);

/// sqrt(sum_k (lambda_k^{h,beta})^{p/beta} (x, phi_k^h)^2).
double discrete_norm(const FemSpace& space, const Vec& nodal, double p);

/// max_k |||phi_k^h|||_l / (h^{s-l} |||phi_k^h|||_s).
double inverse_inequality_probe(const FemSpace& space, double s, double l);

/// Kernel table for the discrete eigenvalues on (tau, n_steps).
std::shared_ptr<const kernels::KernelTable> make_table(const FemSpace& space, double alpha, double tau,
                                                       int n_steps);

/// Fully discrete solution in the discrete eigenbasis ((N+1) x M). The
/// nonlinearities act on the first model.n_modes continuous coefficients of
/// the discrete state and their images are projected back with P_h.
ModalTrajectory solve_fem(const ModelSpec& model, const FemSpace& space, const NoisePath& path,
                          std::shared_ptr<const kernels::KernelTable> table = nullptr,
                          const SolveOptions& opts = {});

/// Continuous coefficients (u_h, phi_j), j = 1..n_cont.
Vec prolongate(const FemSpace& space, const Vec& discrete_coeffs, int n_cont);

/// ||u - u_h||^2 for u = sum_{j <= n} ref_j phi_j, exact in L^2: the part of
/// u_h outside span{phi_1..phi_n} is included through ||u_h||^2.
double l2_error_sq(const Mat& coupling, const Vec& ref, const Vec& discrete_coeffs);

/// Text dump, one row per line, space separated, 17 significant digits.
void dump_matrix(const Mat& m, const std::string& file);

}  // namespace tfw::fem
