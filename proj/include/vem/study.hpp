#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vem/eigensolve.hpp"
#include "vem/mesh.hpp"

namespace vem {

struct ExactEigenvalue {
  double value = 0.0;  // (n/a)^2 + (m/b)^2
  int n = 0, m = 0;
  int multiplicity = 1;  // how many (n, m) pairs share this value
};

/// The `count` lowest scaled cavity eigenvalues with n + m >= 1, ascending,
/// repeated according to multiplicity.
std::vector<ExactEigenvalue> exact_eigenvalues(double a, double b, int count);

struct ObservedOrder {
  std::optional<double> slope;  // empty when fewer than 3 usable levels
  std::vector<std::string> warnings;
};

/// Least-squares slope of log|value - exact| against log(1/N).
ObservedOrder observed_order(const std::vector<int>& ns, const std::vector<double>& values,
                             double exact);

struct StudyConfig {
  double a = 1.0, b = 1.1;
  std::vector<MeshFamily> families{MeshFamily::rectangular};
  std::vector<int> ns{8, 16, 32, 64};
  int k = 0;
  std::vector<double> sigmas{1.0};
  int modes = 5;
  EigenOptions solver = [] {
    EigenOptions o;
    o.dense_cutoff = 2000;
    return o;
  }();
  bool raw = false;  // report lambda instead of lambda / pi^2
  std::string csv_path;
  std::string table_path;

  void validate() const;
  static StudyConfig from_json(const nlohmann::json& doc);
};

/// Parses a stability constant given as a number or as "2^p".
double parse_sigma(const nlohmann::json& value);
std::string format_sigma(double sigma);

struct ModeSeries {
  MeshFamily family = MeshFamily::rectangular;
  double sigma = 1.0;
  int mode = 1;  // 1-based
  ExactEigenvalue exact;
  std::vector<double> values;  // one per N, NaN when not computed
  ObservedOrder order;
};

struct RunRecord {
  MeshFamily family = MeshFamily::rectangular;
  double sigma = 1.0;
  int n = 0;
  int dofs = 0;
  std::optional<int> kernel_multiplicity;
  std::string method;
  std::vector<double> eigenvalues;  // reported units (scaled unless raw)
  double seconds = 0.0;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<RunRecord> runs;
  std::vector<ModeSeries> series;

  /// One row per (family, sigma, N, mode). Contains no timings, so repeated
  /// runs give identical bytes.
  std::string to_csv() const;
  /// Aligned table: one block per (family, sigma), N across, modes down.
  std::string to_table() const;

  const ModeSeries& find(MeshFamily family, double sigma, int mode) const;
};

/// Runs every (family, sigma, N) case. Cases run on up to VEM_THREADS threads
/// (default: hardware concurrency); the report does not depend on it.
ConvergenceReport run_study(const StudyConfig& config);

/// Writes a legacy ASCII VTK unstructured grid: polygon cells, cell data
/// "pressure" (-div w_h, cell mean) and "displacement" (Pi_h w_h at the
/// centroid).
void export_eigenfunction(const GlobalSystem& system, const Eigen::VectorXd& eigenvector,
                          const std::string& path);

struct VtkSummary {
  int num_points = 0;
  int num_cells = 0;
  std::vector<int> cell_types;
  std::vector<double> pressure;
  std::vector<Point> displacement;
};

VtkSummary read_vtk(const std::string& path);

}  // namespace vem
