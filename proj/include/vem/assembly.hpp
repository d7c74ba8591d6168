#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "vem/element.hpp"
#include "vem/mesh.hpp"

namespace vem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Global numbering. Free unknowns come first: the k+1 moments of every
/// internal edge (global edge order), then each cell's internal block.
/// Boundary-edge moments are numbered after the free ones; they are not
/// unknowns of the eigenproblem (v.n = 0 on the boundary) but the
/// interpolation tools use them.
struct DofMap {
  int k = 0;
  int num_free = 0;
  int num_total = 0;
  std::vector<int> edge_offset;  // first of the k+1 moments of each edge
  std::vector<int> cell_offset;  // first internal moment of each cell

  bool is_free(int global) const { return global < num_free; }

  struct LocalDof {
    int global = 0;
    int sign = 1;  // local (outward) value = sign * global value
  };
  /// Local-to-global map for one cell, in DofLayout order.
  std::vector<LocalDof> cell_dofs(const PolygonalMesh& mesh, int cell) const;
};

DofMap build_dof_map(const PolygonalMesh& mesh, int k);

struct GlobalSystem {
  std::shared_ptr<const PolygonalMesh> mesh;
  DofMap dofs;
  int k = 0;
  double sigma = 1.0;
  SparseMatrix K;  // int div w div v
  SparseMatrix M;  // b_h(w, v)

  int size() const { return dofs.num_free; }
};

/// Assembles K and M. `threads` > 1 splits the element loop; the result does
/// not depend on the thread count.
GlobalSystem assemble(const PolygonalMesh& mesh, int k, double sigma, int threads = 1);

/// K and M over every dof, boundary moments included (no boundary
/// condition), in DofMap numbering.
std::pair<SparseMatrix, SparseMatrix> assemble_unconstrained(const PolygonalMesh& mesh, int k,
                                                             double sigma);

/// Dimension of the kernel of K from a column-pivoted QR rank estimate.
int kernel_dimension_oracle(const GlobalSystem& system, double rel_tol = 1e-9);

/// Matrix Market coordinate (general, real) export.
void write_matrix_market(const SparseMatrix& A, const std::string& path);

}  // namespace vem
