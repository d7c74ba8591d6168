#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vem/assembly.hpp"
#include "vem/eigensolve.hpp"
#include "vem/element.hpp"
#include "vem/interp.hpp"
#include "vem/mesh.hpp"
#include "vem/study.hpp"

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& A) {
  json rows = json::array();
  for (int i = 0; i < A.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
    rows.push_back(row);
  }
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual element eigenmodes of an acoustic cavity"};
  app.require_subcommand(1);

  // vem mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "Generate a structured polygonal mesh");
  std::string family = "rect", out_path;
  double a = 1.0, b = 1.1;
  int n = 8;
  mesh_cmd->add_option("--family", family, "tri, rect or hex")->capture_default_str();
  mesh_cmd->add_option("--a", a, "cavity width")->capture_default_str();
  mesh_cmd->add_option("--b", b, "cavity height")->capture_default_str();
  mesh_cmd->add_option("--n", n, "cells per side")->capture_default_str();
  mesh_cmd->add_option("--out", out_path, "output JSON (stdout if omitted)");

  // vem solve
  auto* solve_cmd = app.add_subcommand("solve", "Assemble and solve the eigenproblem");
  std::string mesh_path, method = "auto", vtk_path, dump_system;
  int k = 0, modes = 5, vtk_mode = 1, dump_element = -1;
  double sigma = 1.0, shift = 4.0;
  bool raw = false, kernel = false;
  solve_cmd->add_option("--mesh", mesh_path, "mesh JSON")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--k", k, "polynomial order")->capture_default_str();
  solve_cmd->add_option("--sigma", sigma, "stability constant")->capture_default_str();
  solve_cmd->add_option("--modes", modes, "number of eigenpairs")->capture_default_str();
  solve_cmd->add_option("--method", method, "auto, dense or si")->capture_default_str();
  solve_cmd->add_option("--shift", shift, "shift-invert shift, in units of lambda")
      ->capture_default_str();
  solve_cmd->add_option("--vtk", vtk_path, "export an eigenfunction as VTK");
  solve_cmd->add_option("--vtk-mode", vtk_mode, "1-based mode to export")->capture_default_str();
  solve_cmd->add_option("--dump-element", dump_element, "print the local matrices of a cell");
  solve_cmd->add_option("--dump-system", dump_system,
                        "write K and M as <prefix>.K.mtx and <prefix>.M.mtx");
  solve_cmd->add_flag("--raw", raw, "print only raw eigenvalues");
  solve_cmd->add_flag("--kernel", kernel, "shift-invert: also compute the kernel dimension");

  // vem interp-check
  auto* interp_cmd = app.add_subcommand("interp-check", "Interpolation and commuting checks");
  std::string field = "w11";
  std::vector<int> ns{4, 8, 16, 32};
  int refinement = 4;
  interp_cmd->add_option("--family", family, "tri, rect or hex")->capture_default_str();
  interp_cmd->add_option("--a", a)->capture_default_str();
  interp_cmd->add_option("--b", b)->capture_default_str();
  interp_cmd->add_option("--k", k)->capture_default_str();
  interp_cmd->add_option("--field", field, "w<n><m>, const or saddle")->capture_default_str();
  interp_cmd->add_option("--n", ns, "mesh levels")->delimiter(',')->capture_default_str();
  interp_cmd->add_option("--refinement", refinement, "local sub-mesh refinement")
      ->capture_default_str();

  // vem study
  auto* study_cmd = app.add_subcommand("study", "Run a convergence study");
  std::string config_path, csv_path, table_path;
  study_cmd->add_option("--config", config_path, "study JSON")->required()->check(
      CLI::ExistingFile);
  study_cmd->add_option("--csv", csv_path, "CSV output");
  study_cmd->add_option("--table", table_path, "aligned table output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mesh_cmd) {
      const auto mesh = vem::generate_mesh(vem::parse_family(family), a, b, n);
      const auto report = vem::check_mesh_assumptions(mesh);
      const std::string doc = vem::mesh_to_json(mesh).dump() + "\n";
      if (out_path.empty()) std::cout << doc;
      else write_text(out_path, doc);
      std::cerr << mesh.num_cells() << " cells, " << mesh.num_edges() << " edges, C_T "
                << report.c_t << (report.star_shaped ? "" : ", NOT star-shaped") << '\n';
    } else if (*solve_cmd) {
      const auto mesh = vem::mesh_from_json(read_json(mesh_path));
      if (dump_element >= 0) {
        if (dump_element >= mesh.num_cells()) throw std::invalid_argument("--dump-element out of range");
        const auto ops = vem::compute_local_ops(mesh.geometry(dump_element), k, sigma);
        json d{{"cell", dump_element}, {"D", matrix_json(ops.D)}, {"K", matrix_json(ops.K)},
               {"Pi", matrix_json(ops.pi_coeff)}, {"S", matrix_json(ops.S)},
               {"B", matrix_json(ops.B)}};
        std::cerr << d.dump(2) << '\n';
      }
      const auto sys = vem::assemble(mesh, k, sigma);
      if (!dump_system.empty()) {
        vem::write_matrix_market(sys.K, dump_system + ".K.mtx");
        vem::write_matrix_market(sys.M, dump_system + ".M.mtx");
      }
      vem::EigenOptions opts;
      opts.method = vem::parse_method(method);
      opts.modes = modes;
      opts.shift = shift;
      opts.compute_kernel = kernel;
      const auto spectrum = vem::solve(sys, opts);
      json out;
      out["eigenvalues"] = spectrum.eigenvalues;
      if (!raw) {
        out["scaled"] = spectrum.scaled();
        out["kernel_multiplicity"] =
            spectrum.kernel_multiplicity ? json(*spectrum.kernel_multiplicity) : json("not computed");
        out["residuals"] = spectrum.residuals;
        out["dofs"] = sys.size();
        out["method"] = spectrum.method;
        if (spectrum.method != "dense") out["shift"] = spectrum.shift;
      }
      std::cout << out.dump(2) << '\n';
      if (!vtk_path.empty()) {
        if (vtk_mode < 1 || vtk_mode > static_cast<int>(spectrum.eigenvalues.size()))
          throw std::invalid_argument("--vtk-mode out of range");
        vem::export_eigenfunction(sys, spectrum.eigenvectors.col(vtk_mode - 1), vtk_path);
      }
    } else if (*interp_cmd) {
      const auto f = vem::AnalyticField::parse(field, a, b);
      const auto fam = vem::parse_family(family);
      const auto rep = vem::interpolation_rate_study(fam, a, b, k, f, ns, refinement);
      json levels = json::array();
      json residuals = json::array();
      for (const auto& l : rep.levels) {
        levels.push_back({{"n", l.n}, {"h", l.h}, {"commuting_residual", l.commuting_residual},
                          {"l2_error", l.l2_error}, {"projected_error", l.projected_error}});
        residuals.push_back(l.commuting_residual);
      }
      json out{{"field", f.name}, {"family", vem::to_string(fam)}, {"k", k},
               {"levels", levels}, {"residuals", residuals}};
      out["rates"] = {{"l2", rep.rate ? json(*rep.rate) : json("n/a")},
                      {"projected", rep.projected_rate ? json(*rep.projected_rate) : json("n/a")}};
      std::cout << out.dump(2) << '\n';
    } else if (*study_cmd) {
      auto config = vem::StudyConfig::from_json(read_json(config_path));
      if (!csv_path.empty()) config.csv_path = csv_path;
      if (!table_path.empty()) config.table_path = table_path;
      const auto report = vem::run_study(config);
      const std::string table = report.to_table();
      std::cout << table;
      if (!config.csv_path.empty()) write_text(config.csv_path, report.to_csv());
      if (!config.table_path.empty()) write_text(config.table_path, table);
      for (const auto& r : report.runs)
        std::cerr << vem::to_string(r.family) << " N=" << r.n << " sigma=" << vem::format_sigma(r.sigma)
                  << ": " << r.dofs << " dofs, " << r.method << ", " << r.seconds << " s\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
