#include "vem/assembly.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <thread>

#include <Eigen/QR>
#include <Eigen/SparseQR>

namespace vem {

DofMap build_dof_map(const PolygonalMesh& mesh, int k) {
  if (k < 0) throw std::invalid_argument("polynomial order k must be >= 0");
  DofMap map;
  map.k = k;
  map.edge_offset.assign(mesh.num_edges(), -1);
  map.cell_offset.assign(mesh.num_cells(), -1);
  int next = 0;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!mesh.is_boundary(e)) {
      map.edge_offset[e] = next;
      next += k + 1;
    }
  const int internal = monomial_count(k) - 1;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    map.cell_offset[c] = next;
    next += internal;
  }
  map.num_free = next;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.is_boundary(e)) {
      map.edge_offset[e] = next;
      next += k + 1;
    }
  map.num_total = next;
  return map;
}

std::vector<DofMap::LocalDof> DofMap::cell_dofs(const PolygonalMesh& mesh, int cell) const {
  const auto& ces = mesh.cell_edges(cell);
  std::vector<LocalDof> out;
  out.reserve(ces.size() * (k + 1) + monomial_count(k) - 1);
  for (const auto& ce : ces)
    for (int i = 0; i <= k; ++i) out.push_back({edge_offset[ce.edge] + i, ce.sign});
  for (int s = 0; s < monomial_count(k) - 1; ++s) out.push_back({cell_offset[cell] + s, 1});
  return out;
}

namespace {

// Scatters every cell into K and M, keeping global dofs below `limit`.
void scatter(const PolygonalMesh& mesh, const DofMap& dofs, int k, double sigma, int limit,
             int threads, SparseMatrix& K, SparseMatrix& M) {
  using Triplet = Eigen::Triplet<double>;
  const int ncells = mesh.num_cells();
  threads = std::clamp(threads, 1, std::max(1, ncells));
  std::vector<std::vector<Triplet>> kbuf(threads), mbuf(threads);

  auto work = [&](int t) {
    const int begin = static_cast<int>(static_cast<long>(ncells) * t / threads);
    const int end = static_cast<int>(static_cast<long>(ncells) * (t + 1) / threads);
    for (int c = begin; c < end; ++c) {
      const auto ops = compute_local_ops(mesh.geometry(c), k, sigma);
      const auto local = dofs.cell_dofs(mesh, c);
      for (std::size_t i = 0; i < local.size(); ++i) {
        if (local[i].global >= limit) continue;
        for (std::size_t j = 0; j < local.size(); ++j) {
          if (local[j].global >= limit) continue;
          const double s = local[i].sign * local[j].sign;
          kbuf[t].emplace_back(local[i].global, local[j].global, s * ops.K(i, j));
          mbuf[t].emplace_back(local[i].global, local[j].global, s * ops.B(i, j));
        }
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  std::vector<Triplet> kt, mt;
  for (int t = 0; t < threads; ++t) {
    kt.insert(kt.end(), kbuf[t].begin(), kbuf[t].end());
    mt.insert(mt.end(), mbuf[t].begin(), mbuf[t].end());
  }
  K.resize(limit, limit);
  M.resize(limit, limit);
  K.setFromTriplets(kt.begin(), kt.end());
  M.setFromTriplets(mt.begin(), mt.end());
}

void check_parameters(int k, double sigma) {
  if (k < 0) throw std::invalid_argument("polynomial order k must be >= 0");
  if (sigma < 0.0) throw std::invalid_argument("stability constant must be >= 0");
}

}  // namespace

GlobalSystem assemble(const PolygonalMesh& mesh, int k, double sigma, int threads) {
  check_parameters(k, sigma);
  GlobalSystem sys;
  sys.mesh = std::make_shared<const PolygonalMesh>(mesh);
  sys.dofs = build_dof_map(mesh, k);
  sys.k = k;
  sys.sigma = sigma;
  scatter(mesh, sys.dofs, k, sigma, sys.dofs.num_free, threads, sys.K, sys.M);
  return sys;
}

std::pair<SparseMatrix, SparseMatrix> assemble_unconstrained(const PolygonalMesh& mesh, int k,
                                                             double sigma) {
  check_parameters(k, sigma);
  const DofMap dofs = build_dof_map(mesh, k);
  SparseMatrix K, M;
  scatter(mesh, dofs, k, sigma, dofs.num_total, 1, K, M);
  return {std::move(K), std::move(M)};
}

int kernel_dimension_oracle(const GlobalSystem& system, double rel_tol) {
  const int n = system.size();
  if (n == 0) return 0;
  if (n <= 3000) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(system.K));
    qr.setThreshold(rel_tol);
    return n - static_cast<int>(qr.rank());
  }
  SparseMatrix A = system.K;
  A.makeCompressed();
  Eigen::SparseQR<SparseMatrix, Eigen::COLAMDOrdering<int>> qr;
  qr.setPivotThreshold(rel_tol * A.norm());
  qr.compute(A);
  if (qr.info() != Eigen::Success) throw std::runtime_error("sparse QR failed in rank oracle");
  return n - static_cast<int>(qr.rank());
}

void write_matrix_market(const SparseMatrix& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  out << std::setprecision(17);
  for (int j = 0; j < A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace vem
