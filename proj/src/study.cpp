#include "vem/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vem/assembly.hpp"
#include "vem/element.hpp"
#include "vem/interp.hpp"

namespace vem {

std::vector<ExactEigenvalue> exact_eigenvalues(double a, double b, int count) {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("cavity sides must be positive");
  if (count <= 0) return {};
  // (n/a)^2 <= value of the count-th smallest is guaranteed once n, m run to
  // count: the pairs (1,0) .. (count,0) alone give count candidates.
  std::vector<ExactEigenvalue> all;
  for (int n = 0; n <= count; ++n)
    for (int m = 0; m <= count; ++m)
      if (n + m >= 1) all.push_back({(n / a) * (n / a) + (m / b) * (m / b), n, m, 1});
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.value != y.value) return x.value < y.value;
    return x.n != y.n ? x.n < y.n : x.m < y.m;
  });
  for (auto& e : all) {
    e.multiplicity = static_cast<int>(std::count_if(all.begin(), all.end(), [&](const auto& o) {
      return std::abs(o.value - e.value) <= 1e-12 * e.value;
    }));
  }
  all.resize(count);
  return all;
}

ObservedOrder observed_order(const std::vector<int>& ns, const std::vector<double>& values,
                             double exact) {
  if (ns.size() != values.size()) throw std::invalid_argument("observed_order: size mismatch");
  ObservedOrder out;
  std::vector<double> inv_n, err;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (std::isnan(values[i])) continue;
    const double e = std::abs(values[i] - exact);
    if (e == 0.0) {
      out.warnings.push_back("N=" + std::to_string(ns[i]) + ": zero error, level excluded");
      continue;
    }
    inv_n.push_back(1.0 / ns[i]);
    err.push_back(e);
  }
  if (err.size() >= 3) out.slope = log_log_slope(inv_n, err);
  return out;
}

double parse_sigma(const nlohmann::json& value) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    const auto caret = s.find('^');
    if (caret != std::string::npos) {
      const double base = std::stod(s.substr(0, caret));
      const double p = std::stod(s.substr(caret + 1));
      return std::pow(base, p);
    }
    return std::stod(s);
  }
  throw std::invalid_argument("stability constant must be a number or a \"2^p\" string");
}

std::string format_sigma(double sigma) {
  if (sigma > 0.0) {
    const double p = std::log2(sigma);
    if (std::abs(p - std::round(p)) < 1e-12) return "2^" + std::to_string(std::lround(p));
  }
  std::ostringstream os;
  os << sigma;
  return os.str();
}

void StudyConfig::validate() const {
  if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("cavity sides must be positive");
  if (families.empty()) throw std::invalid_argument("study needs at least one mesh family");
  if (ns.empty()) throw std::invalid_argument("study needs at least one N");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) throw std::invalid_argument("N must be positive");
    if (i > 0 && ns[i] <= ns[i - 1]) throw std::invalid_argument("N list must be strictly increasing");
  }
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  if (sigmas.empty()) throw std::invalid_argument("study needs at least one sigma");
  for (double s : sigmas)
    if (s < 0.0) throw std::invalid_argument("sigma must be >= 0");
  if (modes < 1) throw std::invalid_argument("modes must be >= 1");
}

StudyConfig StudyConfig::from_json(const nlohmann::json& doc) {
  StudyConfig c;
  c.a = doc.value("a", c.a);
  c.b = doc.value("b", c.b);
  if (doc.contains("families")) {
    c.families.clear();
    for (const auto& f : doc.at("families")) c.families.push_back(parse_family(f.get<std::string>()));
  }
  if (doc.contains("n")) c.ns = doc.at("n").get<std::vector<int>>();
  c.k = doc.value("k", c.k);
  if (doc.contains("sigma")) {
    c.sigmas.clear();
    const auto& s = doc.at("sigma");
    if (s.is_array())
      for (const auto& v : s) c.sigmas.push_back(parse_sigma(v));
    else
      c.sigmas.push_back(parse_sigma(s));
  }
  c.modes = doc.value("modes", c.modes);
  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    if (s.contains("method")) c.solver.method = parse_method(s.at("method").get<std::string>());
    c.solver.shift = s.value("shift", c.solver.shift);
    c.solver.tolerance = s.value("tolerance", c.solver.tolerance);
    c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
    c.solver.dense_cutoff = s.value("dense_cutoff", c.solver.dense_cutoff);
    c.solver.zero_threshold = s.value("zero_threshold", c.solver.zero_threshold);
  }
  c.raw = doc.value("raw", c.raw);
  c.csv_path = doc.value("csv", c.csv_path);
  c.table_path = doc.value("table", c.table_path);
  c.validate();
  return c;
}

namespace {

int thread_budget(int tasks) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VEM_THREADS")) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("VEM_THREADS must be an integer");
    }
  }
  return std::clamp(n, 1, std::max(1, tasks));
}

std::string fmt(double v, int precision) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

ConvergenceReport run_study(const StudyConfig& config) {
  config.validate();
  ConvergenceReport rep;
  rep.config = config;

  struct Task {
    MeshFamily family;
    double sigma;
    int n;
  };
  std::vector<Task> tasks;
  for (auto f : config.families)
    for (double s : config.sigmas)
      for (int n : config.ns) tasks.push_back({f, s, n});
  rep.runs.resize(tasks.size());

  const double unit = config.raw ? 1.0 : std::numbers::pi * std::numbers::pi;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      try {
        const auto start = std::chrono::steady_clock::now();
        const PolygonalMesh mesh = generate_mesh(t.family, config.a, config.b, t.n);
        const GlobalSystem sys = assemble(mesh, config.k, t.sigma);
        EigenOptions opts = config.solver;
        opts.modes = config.modes;
        const Spectrum spectrum = solve(sys, opts);
        RunRecord& r = rep.runs[i];
        r.family = t.family;
        r.sigma = t.sigma;
        r.n = t.n;
        r.dofs = sys.size();
        r.kernel_multiplicity = spectrum.kernel_multiplicity;
        r.method = spectrum.method;
        for (double lam : spectrum.eigenvalues) r.eigenvalues.push_back(lam / unit);
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        const std::string msg = to_string(t.family) + " N=" + std::to_string(t.n) +
                                " sigma=" + format_sigma(t.sigma) + ": " + e.what();
        if (first_error.empty()) first_error = msg;
      }
    }
  };
  const int threads = thread_budget(static_cast<int>(tasks.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (!first_error.empty()) throw std::runtime_error("study failed: " + first_error);

  const auto exact = exact_eigenvalues(config.a, config.b, config.modes);
  std::size_t idx = 0;
  for (auto f : config.families)
    for (double s : config.sigmas) {
      for (int mode = 1; mode <= config.modes; ++mode) {
        ModeSeries series;
        series.family = f;
        series.sigma = s;
        series.mode = mode;
        series.exact = exact[mode - 1];
        if (config.raw) series.exact.value *= unit;
        for (std::size_t j = 0; j < config.ns.size(); ++j) {
          const auto& ev = rep.runs[idx + j].eigenvalues;
          series.values.push_back(static_cast<int>(ev.size()) >= mode
                                      ? ev[mode - 1]
                                      : std::numeric_limits<double>::quiet_NaN());
        }
        series.order = observed_order(config.ns, series.values, series.exact.value);
        rep.series.push_back(std::move(series));
      }
      idx += config.ns.size();
    }
  return rep;
}

const ModeSeries& ConvergenceReport::find(MeshFamily family, double sigma, int mode) const {
  for (const auto& s : series)
    if (s.family == family && s.sigma == sigma && s.mode == mode) return s;
  throw std::out_of_range("no such series in the report");
}

std::string ConvergenceReport::to_csv() const {
  std::ostringstream os;
  os << "family,sigma,N,dofs,method,kernel,mode,n,m,value,exact,order\n";
  os << std::setprecision(12);
  for (const auto& s : series)
    for (std::size_t j = 0; j < s.values.size(); ++j) {
      const RunRecord* run = nullptr;
      for (const auto& r : runs)
        if (r.family == s.family && r.sigma == s.sigma && r.n == config.ns[j]) run = &r;
      os << to_string(s.family) << ',' << s.sigma << ',' << config.ns[j] << ','
         << (run ? run->dofs : 0) << ',' << (run ? run->method : "") << ',';
      if (run && run->kernel_multiplicity) os << *run->kernel_multiplicity;
      os << ',' << s.mode << ',' << s.exact.n << ',' << s.exact.m << ',';
      if (!std::isnan(s.values[j])) os << s.values[j];
      os << ',' << s.exact.value << ',';
      if (s.order.slope) os << *s.order.slope;
      else os << "n/a";
      os << '\n';
    }
  return os.str();
}

std::string ConvergenceReport::to_table() const {
  std::ostringstream os;
  const int w = 10;
  for (auto f : config.families)
    for (double sigma : config.sigmas) {
      os << "family " << to_string(f) << ", sigma = " << format_sigma(sigma) << ", k = " << config.k
         << (config.raw ? ", lambda\n" : ", lambda/pi^2\n");
      os << std::left << std::setw(6) << "mode" << std::right;
      for (int n : config.ns) os << std::setw(w) << ("N=" + std::to_string(n));
      os << std::setw(w) << "Order" << std::setw(w) << "Exact" << '\n';
      for (const auto& s : series) {
        if (s.family != f || s.sigma != sigma) continue;
        os << std::left << std::setw(6) << s.mode << std::right;
        for (double v : s.values) os << std::setw(w) << fmt(v, 4);
        os << std::setw(w) << (s.order.slope ? fmt(*s.order.slope, 2) : std::string("n/a"))
           << std::setw(w) << fmt(s.exact.value, 4) << '\n';
      }
      os << '\n';
    }
  return os.str();
}

void export_eigenfunction(const GlobalSystem& system, const Eigen::VectorXd& eigenvector,
                          const std::string& path) {
  const PolygonalMesh& mesh = *system.mesh;
  const auto locals = local_dof_vectors(system, eigenvector);
  const auto pressure = pressure_field(system, eigenvector);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << std::setprecision(12);
  out << "# vtk DataFile Version 3.0\nacoustic cavity eigenfunction\nASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.num_vertices() << " double\n";
  for (const Point& p : mesh.vertices()) out << p.x() << ' ' << p.y() << " 0\n";
  std::size_t size = 0;
  for (const auto& c : mesh.cells()) size += c.size() + 1;
  out << "CELLS " << mesh.num_cells() << ' ' << size << '\n';
  for (const auto& c : mesh.cells()) {
    out << c.size();
    for (int v : c) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << mesh.num_cells() << '\n';
  for (int c = 0; c < mesh.num_cells(); ++c) out << "7\n";

  out << "CELL_DATA " << mesh.num_cells() << '\n';
  out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementGeometry geom = mesh.geometry(c);
    const Eigen::VectorXd moments = polygon_moments(geom, system.k);
    out << pressure[c].dot(moments.head(pressure[c].size())) / geom.area << '\n';
  }
  out << "VECTORS displacement double\n";
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const ElementGeometry geom = mesh.geometry(c);
    const Eigen::MatrixXd pi = projector_matrices(geom, system.k).coeff;
    const Eigen::Vector2d w = gradient_basis(geom, system.k, geom.center) * (pi * locals[c]);
    out << w.x() << ' ' << w.y() << " 0\n";
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

VtkSummary read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  VtkSummary s;
  std::string word;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) throw std::runtime_error(path + ": malformed VTK (" + what + ")");
  };
  while (in >> word) {
    if (word == "POINTS") {
      std::string type;
      in >> s.num_points >> type;
      double x;
      for (int i = 0; i < 3 * s.num_points; ++i) expect(bool(in >> x), "points");
    } else if (word == "CELLS") {
      int size = 0;
      in >> s.num_cells >> size;
      int v;
      for (int i = 0; i < size; ++i) expect(bool(in >> v), "cells");
    } else if (word == "CELL_TYPES") {
      int n = 0;
      in >> n;
      expect(n == s.num_cells, "cell type count");
      s.cell_types.resize(n);
      for (int& t : s.cell_types) expect(bool(in >> t), "cell types");
    } else if (word == "SCALARS") {
      std::string name, type, lut, table;
      int comps = 1;
      in >> name >> type >> comps >> lut >> table;
      s.pressure.resize(s.num_cells);
      for (double& p : s.pressure) expect(bool(in >> p), "scalars");
    } else if (word == "VECTORS") {
      std::string name, type;
      in >> name >> type;
      s.displacement.resize(s.num_cells);
      double z;
      for (auto& d : s.displacement) expect(bool(in >> d.x() >> d.y() >> z), "vectors");
    }
  }
  return s;
}

}  // namespace vem
