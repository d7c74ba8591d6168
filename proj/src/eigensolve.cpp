#include "vem/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace vem {

EigenMethod parse_method(const std::string& name) {
  if (name == "auto" || name == "automatic") return EigenMethod::automatic;
  if (name == "dense") return EigenMethod::dense;
  if (name == "si" || name == "shift-invert") return EigenMethod::shift_invert;
  throw std::invalid_argument("unknown eigen method '" + name + "'");
}

std::string to_string(EigenMethod method) {
  switch (method) {
    case EigenMethod::automatic: return "auto";
    case EigenMethod::dense: return "dense";
    case EigenMethod::shift_invert: return "si";
  }
  return "?";
}

std::vector<double> Spectrum::scaled() const {
  std::vector<double> out;
  out.reserve(eigenvalues.size());
  for (double l : eigenvalues) out.push_back(l / (std::numbers::pi * std::numbers::pi));
  return out;
}

namespace {

double norm1(const SparseMatrix& A) {
  double best = 0.0;
  for (int j = 0; j < A.outerSize(); ++j) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

// First entry within roundoff of the largest magnitude is made positive.
// Symmetric meshes produce ties of opposite sign, so plain argmax is unstable.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double big = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v(i)) >= (1.0 - 1e-6) * big) {
      if (v(i) < 0) v = -v;
      return;
    }
}

// Largest Rayleigh quotient over unit vectors: a cheap lower bound of
// lambda_max used to scale the kernel threshold.
double lambda_scale(const GlobalSystem& sys) {
  double s = 0.0;
  for (int i = 0; i < sys.size(); ++i) {
    const double m = sys.M.coeff(i, i);
    if (m > 0) s = std::max(s, sys.K.coeff(i, i) / m);
  }
  return s;
}

}  // namespace

double relative_residual(const GlobalSystem& system, double lambda, const Eigen::VectorXd& v) {
  const Eigen::VectorXd r = system.K * v - lambda * (system.M * v);
  const double denom = (norm1(system.K) + std::abs(lambda) * norm1(system.M)) * v.norm();
  return denom > 0 ? r.norm() / denom : r.norm();
}

Spectrum solve_dense(const GlobalSystem& system, const EigenOptions& opts) {
  const int n = system.size();
  if (n == 0) throw std::invalid_argument("eigenproblem has no unknowns");
  Spectrum out;
  out.method = "dense";
  const Eigen::MatrixXd K(system.K);
  const Eigen::MatrixXd M(system.M);

  Eigen::VectorXd lambdas(n);
  Eigen::MatrixXd vectors;
  std::vector<bool> finite(n, true);

  Eigen::LLT<Eigen::MatrixXd> mfac(M);
  if (mfac.info() == Eigen::Success) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K + M, M);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    lambdas = es.eigenvalues().array() - 1.0;
    vectors = es.eigenvectors();
  } else {
    out.singular_mass = true;
    const Eigen::MatrixXd A = K + M;
    Eigen::LLT<Eigen::MatrixXd> afac(A);
    if (afac.info() != Eigen::Success)
      throw std::runtime_error("dense eigensolver: neither M nor K+M is positive definite");
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, A);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    const Eigen::VectorXd nu = es.eigenvalues();
    vectors = es.eigenvectors();
    const double nu_max = nu.cwiseAbs().maxCoeff();
    for (int i = 0; i < n; ++i) {
      if (nu(i) <= 1e-13 * nu_max) {
        finite[i] = false;  // direction in the null space of M
        lambdas(i) = std::numeric_limits<double>::infinity();
        continue;
      }
      lambdas(i) = 1.0 / nu(i) - 1.0;
      vectors.col(i) /= std::sqrt(nu(i));  // v^T M v = nu
    }
  }

  std::vector<int> order;
  for (int i = 0; i < n; ++i)
    if (finite[i]) order.push_back(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lambdas(a) < lambdas(b); });
  if (order.empty()) throw std::runtime_error("dense eigensolver: no finite eigenvalues");

  out.lambda_max = lambdas(order.back());
  out.zero_threshold = opts.zero_threshold * out.lambda_max;
  int kernel = 0;
  std::vector<int> positive;
  for (int i : order) {
    out.all_eigenvalues.push_back(lambdas(i));
    if (lambdas(i) <= out.zero_threshold) {
      ++kernel;
      out.kernel_max_abs = std::max(out.kernel_max_abs, std::abs(lambdas(i)));
    } else {
      positive.push_back(i);
    }
  }
  out.kernel_multiplicity = kernel;

  const int m = opts.modes <= 0 ? static_cast<int>(positive.size())
                                : std::min<int>(opts.modes, static_cast<int>(positive.size()));
  out.eigenvectors.resize(n, m);
  for (int j = 0; j < m; ++j) {
    const int i = positive[j];
    out.eigenvalues.push_back(lambdas(i));
    out.eigenvectors.col(j) = vectors.col(i);
    fix_sign(out.eigenvectors.col(j));
    out.residuals.push_back(relative_residual(system, lambdas(i), out.eigenvectors.col(j)));
  }
  return out;
}

namespace {

// Factorisation of K - shift M, symmetric LDL^T with an LU fallback.
class ShiftedSolver {
 public:
  ShiftedSolver(const SparseMatrix& A) : n_(A.rows()) {
    ldlt_.compute(A);
    if (ldlt_.info() == Eigen::Success && accurate(A, true)) {
      use_lu_ = false;
      return;
    }
    lu_.analyzePattern(A);
    lu_.factorize(A);
    if (lu_.info() != Eigen::Success || !accurate(A, false))
      throw std::runtime_error("factorisation of K - shift*M failed");
    use_lu_ = true;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    return use_lu_ ? Eigen::VectorXd(lu_.solve(b)) : Eigen::VectorXd(ldlt_.solve(b));
  }

 private:
  bool accurate(const SparseMatrix& A, bool ldlt) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    Eigen::VectorXd x(n_);
    for (int i = 0; i < n_; ++i) x(i) = dist(rng);
    const Eigen::VectorXd b = A * x;
    const Eigen::VectorXd y = ldlt ? Eigen::VectorXd(ldlt_.solve(b)) : Eigen::VectorXd(lu_.solve(b));
    return std::isfinite(y.norm()) && (A * y - b).norm() <= 1e-8 * b.norm();
  }

  Eigen::Index n_;
  bool use_lu_ = false;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  Eigen::SparseLU<SparseMatrix> lu_;
};

}  // namespace

Spectrum solve_shift_invert(const GlobalSystem& system, const EigenOptions& opts) {
  const int n = system.size();
  if (n == 0) throw std::invalid_argument("eigenproblem has no unknowns");
  if (opts.modes < 1) throw std::invalid_argument("shift-invert needs modes >= 1");
  if (system.sigma <= 0.0)
    throw std::invalid_argument("shift-invert requires a positive definite mass (sigma > 0)");
  if (!(opts.shift > 0.0)) throw std::invalid_argument("shift must be positive");

  Spectrum out;
  out.method = "si";
  const double scale = lambda_scale(system);
  out.lambda_max = scale;
  out.zero_threshold = opts.zero_threshold * scale;

  double shift = opts.shift;
  std::unique_ptr<ShiftedSolver> solver;
  for (int attempt = 0; attempt < 2 && !solver; ++attempt) {
    try {
      SparseMatrix A = system.K - shift * system.M;
      A.makeCompressed();
      solver = std::make_unique<ShiftedSolver>(A);
    } catch (const std::runtime_error&) {
      if (attempt == 1) throw;
      shift *= 1.0 + 1e-3;
    }
  }
  out.shift = shift;

  const SparseMatrix& M = system.M;
  const int max_steps = std::min(n, std::max(opts.max_iterations, 2 * opts.modes + 10));
  Eigen::MatrixXd V(n, std::min(max_steps + 1, 64));
  std::vector<double> alpha, beta;

  std::mt19937_64 rng(20160309);
  std::normal_distribution<double> dist;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  v = solver->solve(M * v);  // damp the high end of the spectrum
  v /= std::sqrt(v.dot(M * v));
  V.col(0) = v;

  auto m_dot = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return a.dot(M * b); };

  std::vector<double> previous;
  bool converged = false;
  int steps = 0;
  Eigen::MatrixXd ritz_vectors;
  Eigen::VectorXd ritz_values;
  std::vector<int> wanted;

  for (int j = 0; j < max_steps; ++j) {
    Eigen::VectorXd w = solver->solve(M * V.col(j));
    const double a = m_dot(V.col(j), w);
    alpha.push_back(a);
    // full reorthogonalisation, applied twice
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd Mw = M * w;
      const Eigen::VectorXd coeffs = V.leftCols(j + 1).transpose() * Mw;
      w -= V.leftCols(j + 1) * coeffs;
    }
    const double b = std::sqrt(std::max(0.0, m_dot(w, w)));
    steps = j + 1;

    const bool exhausted = b <= 1e-14 * std::abs(a) || steps == n;
    if ((steps >= opts.modes + 2 && (steps % 5 == 0 || steps == max_steps)) || exhausted) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
      for (int i = 0; i < steps; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < steps) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      ritz_values = es.eigenvalues();
      ritz_vectors = es.eigenvectors();
      std::vector<int> idx;
      for (int i = 0; i < steps; ++i) {
        const double theta = ritz_values(i);
        if (theta == 0.0) continue;
        const double lam = shift + 1.0 / theta;
        if (lam > out.zero_threshold) idx.push_back(i);
      }
      std::sort(idx.begin(), idx.end(), [&](int p, int q) {
        return std::abs(ritz_values(p)) > std::abs(ritz_values(q));
      });
      if (static_cast<int>(idx.size()) >= opts.modes || exhausted) {
        if (static_cast<int>(idx.size()) > opts.modes) idx.resize(opts.modes);
        bool ok = true;
        std::vector<double> current;
        for (int i : idx) {
          const double err = std::abs(b * ritz_vectors(steps - 1, i));
          ok = ok && err <= opts.tolerance * std::abs(ritz_values(i));
          current.push_back(shift + 1.0 / ritz_values(i));
        }
        std::sort(current.begin(), current.end());
        bool stable = previous.size() == current.size();
        for (std::size_t i = 0; stable && i < current.size(); ++i)
          stable = std::abs(current[i] - previous[i]) <= 1e-10 * std::abs(current[i]);
        previous = current;
        if ((ok && stable) || (ok && exhausted)) {
          converged = true;
          wanted = idx;
          break;
        }
      }
    }
    if (exhausted) break;
    beta.push_back(b);
    if (j + 1 >= V.cols()) V.conservativeResize(Eigen::NoChange, std::min<Eigen::Index>(2 * V.cols(), max_steps + 1));
    V.col(j + 1) = w / b;
  }
  out.iterations = steps;
  if (!converged)
    throw std::runtime_error("shift-invert Lanczos did not converge in " + std::to_string(steps) +
                             " steps");

  std::sort(wanted.begin(), wanted.end(), [&](int p, int q) {
    return shift + 1.0 / ritz_values(p) < shift + 1.0 / ritz_values(q);
  });
  out.eigenvectors.resize(n, static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t c = 0; c < wanted.size(); ++c) {
    const int i = wanted[c];
    const double lam = shift + 1.0 / ritz_values(i);
    Eigen::VectorXd x = V.leftCols(steps) * ritz_vectors.col(i);
    x /= std::sqrt(m_dot(x, x));
    fix_sign(x);
    out.eigenvalues.push_back(lam);
    out.eigenvectors.col(static_cast<Eigen::Index>(c)) = x;
    out.residuals.push_back(relative_residual(system, lam, x));
  }
  for (double lam : out.eigenvalues)
    if (std::abs(lam - shift) <= 1e-10 * std::abs(shift))
      throw std::runtime_error("shift coincides with a computed eigenvalue; choose another shift");
  if (opts.compute_kernel) out.kernel_multiplicity = kernel_dimension_oracle(system);
  return out;
}

Spectrum solve(const GlobalSystem& system, const EigenOptions& opts) {
  switch (opts.method) {
    case EigenMethod::dense: return solve_dense(system, opts);
    case EigenMethod::shift_invert: return solve_shift_invert(system, opts);
    case EigenMethod::automatic:
      if (system.size() <= opts.dense_cutoff || system.sigma == 0.0)
        return solve_dense(system, opts);
      return solve_shift_invert(system, opts);
  }
  throw std::invalid_argument("unknown eigen method");
}

std::vector<Eigen::VectorXd> local_dof_vectors(const GlobalSystem& system,
                                               const Eigen::VectorXd& free_dofs) {
  if (free_dofs.size() != system.size())
    throw std::invalid_argument("dof vector does not match the system size");
  const PolygonalMesh& mesh = *system.mesh;
  std::vector<Eigen::VectorXd> out(mesh.num_cells());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto dofs = system.dofs.cell_dofs(mesh, c);
    Eigen::VectorXd local(dofs.size());
    for (std::size_t i = 0; i < dofs.size(); ++i)
      local(i) = system.dofs.is_free(dofs[i].global) ? dofs[i].sign * free_dofs(dofs[i].global)
                                                     : 0.0;
    out[c] = std::move(local);
  }
  return out;
}

std::vector<Eigen::VectorXd> pressure_field(const GlobalSystem& system,
                                            const Eigen::VectorXd& eigenvector) {
  const auto local = local_dof_vectors(system, eigenvector);
  std::vector<Eigen::VectorXd> out(local.size());
  for (std::size_t c = 0; c < local.size(); ++c)
    out[c] = -divergence_matrix(system.mesh->geometry(static_cast<int>(c)), system.k) * local[c];
  return out;
}

}  // namespace vem
