#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vem/assembly.hpp"

namespace vem {

enum class EigenMethod { automatic, dense, shift_invert };

EigenMethod parse_method(const std::string& name);
std::string to_string(EigenMethod method);

struct EigenOptions {
  EigenMethod method = EigenMethod::automatic;
  /// Number of positive eigenpairs to return (dense: <= 0 returns all).
  int modes = 5;
  /// Shift for the shift-invert iteration (unscaled units of lambda).
  double shift = 4.0;
  /// Eigenvalues below zero_threshold * lambda_scale form the kernel cluster.
  double zero_threshold = 1e-8;
  int max_iterations = 2000;
  double tolerance = 1e-11;
  int dense_cutoff = 6000;
  /// Shift-invert only: also run the rank oracle for the kernel multiplicity.
  bool compute_kernel = false;
};

struct Spectrum {
  /// Lowest positive eigenvalues, ascending.
  std::vector<double> eigenvalues;
  /// Matching eigenvectors (columns), M-orthonormal, largest entry positive.
  Eigen::MatrixXd eigenvectors;
  std::vector<double> residuals;  // relative residual per returned pair
  /// Kernel cluster size; not available from shift-invert unless requested.
  std::optional<int> kernel_multiplicity;
  double kernel_max_abs = 0.0;  // largest |lambda| inside the kernel cluster
  double zero_threshold = 0.0;  // absolute threshold actually used
  double lambda_max = 0.0;      // largest eigenvalue (dense) or scale estimate
  /// Dense only: every finite eigenvalue, ascending (kernel cluster included).
  std::vector<double> all_eigenvalues;
  std::string method;
  double shift = 0.0;
  int iterations = 0;
  /// True when M was singular and the (K+M, M) pencil was inverted instead.
  bool singular_mass = false;

  /// lambda / pi^2, the normalisation used in the convergence tables.
  std::vector<double> scaled() const;
};

/// Full generalized eigendecomposition. Uses (K+M) w = (lambda+1) M w when M
/// is positive definite, and M w = nu (K+M) w with lambda = 1/nu - 1
/// otherwise (sigma = 0).
Spectrum solve_dense(const GlobalSystem& system, const EigenOptions& opts);

/// Lanczos with full reorthogonalisation on (K - shift M)^{-1} M in the
/// M inner product. Returns the `modes` non-kernel eigenvalues nearest to
/// the shift (the lowest ones when the shift lies below the first).
/// Multiple eigenvalues may be resolved only once.
Spectrum solve_shift_invert(const GlobalSystem& system, const EigenOptions& opts);

/// Dispatches on opts.method; `automatic` picks dense up to dense_cutoff
/// unknowns, or when M is singular.
Spectrum solve(const GlobalSystem& system, const EigenOptions& opts);

/// Relative residual ||K v - lambda M v|| / ((||K|| + |lambda| ||M||) ||v||),
/// with the 1-norm (an upper bound of the spectral norm for symmetric
/// matrices).
double relative_residual(const GlobalSystem& system, double lambda, const Eigen::VectorXd& v);

/// Per-cell P_k coefficients (scaled monomials) of p_h = -div w_h.
std::vector<Eigen::VectorXd> pressure_field(const GlobalSystem& system,
                                            const Eigen::VectorXd& eigenvector);

/// Expands a free-dof vector to per-cell local (outward) dof vectors.
std::vector<Eigen::VectorXd> local_dof_vectors(const GlobalSystem& system,
                                               const Eigen::VectorXd& free_dofs);

}  // namespace vem
