// pdrb: command-line driver for the primal-dual reduced basis library.
//
// Exit codes: 0 success, 1 runtime failure (I/O, solver), 2 usage or config error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdrb/convergence.hpp"
#include "pdrb/fe/vtk.hpp"
#include "pdrb/greedy/greedy.hpp"
#include "pdrb/mesh/mesh_io.hpp"
#include "pdrb/rb/serialize.hpp"
#include "run_config.hpp"

#ifndef PDRB_VERSION
#define PDRB_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace pdrb;
using Clock = std::chrono::steady_clock;

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void warn_outside(const ParameterBox& box, const Parameter& mu) {
  if (!box.contains(mu))
    std::cerr << "warning: mu = (" << mu[0] << ", " << mu[1] << ") lies outside the parameter domain [" << box.lo[0]
              << ", " << box.hi[0] << "] x [" << box.lo[1] << ", " << box.hi[1] << "]; evaluating anyway\n";
}

void write_validation_csv(const std::string& path, const greedy::ValidationResult& v) {
  std::ofstream os(path);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "cannot open '" + path + "' for writing");
  os << "i,mu1,mu2,eta_rb\n";
  char buf[128];
  for (std::size_t i = 0; i < v.samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g\n", i, v.samples[i][0], v.samples[i][1], v.errors[i]);
    os << buf;
  }
  PDRB_THROW_IF(!os, ErrorCode::io_error, "write to '" + path + "' failed");
}

/// RB fields at mu on the model's own mesh, with the local gap indicators.
void save_rb_vtk(const std::string& path, const rb::RBModel& m, const rb::OnlineSolution& s) {
  const fe::FESpaces sp(*m.mesh);
  const auto [u, sigma] = rb::reconstruct(m, s, sp);
  const Problem prob = problem_by_name(m.problem);
  const DiscreteData data = discretize(prob, sp);
  const auto ind = local_gap(sp, data, u, sigma, s.mu);
  fe::VtkOutput out{&u, &sigma, {{"eta_local", &ind.local}}};
  fe::save_vtk(path, sp, out);
}

nlohmann::json versions() {
  return {{"pdrb", PDRB_VERSION},
          {"model_format", rb::model_version},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"cli11", CLI11_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

int cmd_greedy(const std::string& config_path, std::optional<unsigned> threads) {
  cli::RunConfig rc;
  try {
    rc = cli::parse_run_config_file(config_path);
  } catch (const cli::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_usage;
  }
  if (threads) rc.greedy.threads = *threads;
  const unsigned workers = greedy::worker_count(rc.greedy.threads);
  const fs::path dir(rc.out_dir);
  fs::create_directories(dir);

  const auto t0 = Clock::now();
  std::cout << "greedy: algorithm=" << greedy::to_string(rc.greedy.algorithm) << " problem=" << rc.greedy.problem
            << " train=" << rc.greedy.train_size << " seed=" << rc.greedy.train_seed << " threads=" << workers << '\n';
  auto res = greedy::run_greedy(rc.greedy);
  const double t_greedy = seconds_since(t0);

  auto& rows = res.history.rows;
  for (const auto& r : rows)
    std::cout << "  n=" << r.n << " mu=(" << fmt("%.4f", r.mu[0]) << ", " << fmt("%.4f", r.mu[1])
              << ") eps_h=" << fmt("%.4g", r.eps_h) << " eps_rb=" << fmt("%.4g", r.eps_rb)
              << " maxerror=" << fmt("%.4g", r.maxerror) << " ndof=" << r.ndof_p << "/" << r.ndof_d
              << " skipped=" << r.skipped << " refined=" << r.refined << " enough=" << r.enough << '\n';
  std::cout << "termination: " << greedy::to_string(res.history.reason) << '\n';

  double t_validate = 0.0;
  std::optional<greedy::ValidationResult> val;
  if (rc.validate_samples > 0 && !rows.empty()) {
    const auto tv = Clock::now();
    val = greedy::validate_random(res.model, rc.validate_samples, rc.validate_seed, rc.greedy.box, rc.greedy.threads);
    t_validate = seconds_since(tv);
    rows.back().test_error = val->max_error;
    write_validation_csv((dir / "validate.csv").string(), *val);
    std::cout << "test error: max " << fmt("%.6g", val->max_error) << " mean " << fmt("%.6g", val->mean_error)
              << " over " << rc.validate_samples << " samples\n";
  }

  greedy::save_history_csv((dir / "history.csv").string(), res.history);
  rb::save_model((dir / "model.pdrb").string(), res.model);

  // one mesh file per distinct mesh of the run
  nlohmann::json mesh_files = nlohmann::json::array();
  std::string last_file;
  std::uint64_t last_gen = ~std::uint64_t{0};
  for (std::size_t i = 0; i < res.meshes.size(); ++i) {
    const auto gen = res.meshes[i]->generation();
    if (gen != last_gen) {
      last_file = "mesh_" + std::to_string(i + 1) + ".mesh";
      mesh::save_mesh((dir / last_file).string(), *res.meshes[i]);
      last_gen = gen;
    }
    mesh_files.push_back(last_file);
  }
  mesh::save_mesh((dir / "mesh_final.mesh").string(), *res.model.mesh);

  std::vector<std::string> vtk_files;
  if (rc.vtk) {
    for (std::size_t i = 0; i < res.model.N(); ++i) {
      const std::string f = "rb_mu" + std::to_string(i + 1) + ".vtk";
      save_rb_vtk((dir / f).string(), res.model, rb::online_solve(res.model, res.model.mus[i]));
      vtk_files.push_back(f);
    }
  }

  {
    std::ofstream os(dir / "config.toml");
    os << cli::to_toml(rc);
  }
  nlohmann::json manifest = {
      {"command", "greedy"},
      {"config_file", config_path},
      {"config", cli::to_json(rc)},
      {"train_seed", res.history.train_seed},
      {"train_size", res.history.train_size},
      {"training_generator", "mt19937_64, u = (x >> 11) * 2^-53"},
      {"validate_seed", rc.validate_seed},
      {"threads", workers},
      {"termination", greedy::to_string(res.history.reason)},
      {"N", res.model.N()},
      {"versions", versions()},
      {"timings_s", {{"greedy", t_greedy}, {"validate", t_validate}, {"total", seconds_since(t0)}}},
      {"files",
       {{"history", "history.csv"},
        {"model", "model.pdrb"},
        {"config", "config.toml"},
        {"mesh_final", "mesh_final.mesh"},
        {"mesh_per_row", mesh_files},
        {"validate", val ? "validate.csv" : ""},
        {"vtk", vtk_files}}},
  };
  if (val) manifest["test_error"] = {{"max", val->max_error}, {"mean", val->mean_error}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  std::cout << "wrote " << dir.string() << "/{history.csv, model.pdrb, manifest.json, ...}\n";
  return 0;
}

int cmd_online(const std::string& model_path, const std::vector<double>& mu_in, const std::string& vtk) {
  const auto m = rb::load_model(model_path);
  const Parameter mu(mu_in[0], mu_in[1]);
  warn_outside(ParameterBox{}, mu);
  const auto s = rb::online_solve(m, mu);
  std::cout.precision(17);
  std::cout << "N = " << m.N() << "\nmu = " << mu[0] << ' ' << mu[1] << "\nc =";
  for (Eigen::Index i = 0; i < s.c.size(); ++i) std::cout << ' ' << s.c[i];
  std::cout << "\nd =";
  for (Eigen::Index i = 0; i < s.d.size(); ++i) std::cout << ' ' << s.d[i];
  std::cout << "\neta_rb = " << s.eta_rb << '\n';
  if (!vtk.empty()) {
    save_rb_vtk(vtk, m, s);
    std::cout << "wrote " << vtk << '\n';
  }
  return 0;
}

int cmd_validate(const std::string& model_path, std::size_t n, std::uint64_t seed, const std::string& out,
                 std::optional<unsigned> threads) {
  const auto m = rb::load_model(model_path);
  const auto v = greedy::validate_random(m, n, seed, {}, threads.value_or(0));
  write_validation_csv(out, v);
  std::cout.precision(6);
  std::cout << "samples = " << n << "\nseed = " << seed << "\nmax test error = " << v.max_error
            << "\nmean test error = " << v.mean_error << "\nargmax mu = " << v.argmax[0] << ' '
            << v.argmax[1] << "\nwrote " << out << '\n';
  return 0;
}

int cmd_convergence(const std::string& problem, std::size_t first, std::size_t last, const std::vector<double>& mu_in,
                    const std::string& csv) {
  const Parameter mu(mu_in[0], mu_in[1]);
  const auto rows = convergence_study(problem_by_name(problem), first, last, mu);
  std::printf("%5s %9s %11s %12s %12s %12s %11s %11s %11s %7s %7s %7s\n", "level", "triangles", "h", "err_primal",
              "err_dual", "eta", "identity", "osc", "div_gap", "rate_p", "rate_d", "rate_eta");
  for (const auto& r : rows)
    std::printf("%5zu %9zu %11.4e %12.5e %12.5e %12.5e %11.3e %11.3e %11.3e %7.3f %7.3f %7.3f\n", r.level, r.triangles,
                r.h, r.err_primal, r.err_dual, r.eta, r.identity, r.osc, r.div_gap, r.rate_primal, r.rate_dual,
                r.rate_eta);
  if (!csv.empty()) {
    std::ofstream os(csv);
    PDRB_THROW_IF(!os, ErrorCode::io_error, "cannot open '" + csv + "' for writing");
    os << "level,triangles,h,err_primal,err_dual,eta,identity,osc,div_gap,rate_primal,rate_dual,rate_eta\n";
    char buf[512];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n", r.level,
                    r.triangles, r.h, r.err_primal, r.err_dual, r.eta, r.identity, r.osc, r.div_gap, r.rate_primal,
                    r.rate_dual, r.rate_eta);
      os << buf;
    }
  }
  return 0;
}

/// Truth FE solution at mu on the model's mesh, or just the mesh.
int cmd_export_vtk(const std::string& model_path, const std::string& mesh_path, const std::string& problem,
                   const std::vector<double>& mu_in, const std::string& out) {
  if (!model_path.empty()) {
    const auto m = rb::load_model(model_path);
    const Parameter mu(mu_in[0], mu_in[1]);
    warn_outside(ParameterBox{}, mu);
    const Discretization d(problem_by_name(m.problem), *m.mesh);
    const auto p = d.solve(mu);
    const auto ind = d.estimate(p);
    fe::save_vtk(out, d.spaces(), {&p.u, &p.sigma, {{"eta_local", &ind.local}}});
    std::cout << "eta_h = " << fmt("%.10g", ind.global) << "\nwrote " << out << '\n';
    return 0;
  }
  auto m = mesh::load_mesh(mesh_path);
  if (!problem.empty()) {
    const Parameter mu(mu_in[0], mu_in[1]);
    const Discretization d(problem_by_name(problem), std::move(m));
    const auto p = d.solve(mu);
    const auto ind = d.estimate(p);
    fe::save_vtk(out, d.spaces(), {&p.u, &p.sigma, {{"eta_local", &ind.local}}});
    std::cout << "eta_h = " << fmt("%.10g", ind.global) << '\n';
  } else {
    fe::save_vtk(out, fe::FESpaces(std::move(m)), {});
  }
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Primal-dual reduced basis: greedy training, online evaluation, validation, FE convergence"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PDRB_VERSION);

  std::optional<unsigned> threads;
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads (default: PDRB_THREADS, else all cores)")
        ->check(CLI::PositiveNumber);
  };

  std::string config;
  auto* greedy_cmd = app.add_subcommand("greedy", "Run a greedy training (Algorithm fixed/adaptive_mesh/balanced)");
  greedy_cmd->add_option("--config,config", config, "TOML run configuration")->required();
  add_threads(greedy_cmd);

  std::string model;
  std::vector<double> mu{0.0, 0.0};
  std::string vtk;
  auto* online_cmd = app.add_subcommand("online", "Evaluate a reduced model at one parameter");
  online_cmd->add_option("--model", model, "Model file written by greedy")->required();
  online_cmd->add_option("--mu", mu, "Parameter pair mu1 mu2")->expected(2)->required();
  online_cmd->add_option("--vtk", vtk, "Write the reconstructed fields to this VTK file");

  std::size_t n = 10000;
  std::uint64_t seed = 2;
  std::string out = "validate.csv";
  auto* validate_cmd = app.add_subcommand("validate", "Random online test cases against a reduced model");
  validate_cmd->add_option("--model", model, "Model file written by greedy")->required();
  validate_cmd->add_option("--n", n, "Number of random parameters")->check(CLI::PositiveNumber)->capture_default_str();
  validate_cmd->add_option("--seed", seed, "Seed of the parameter sampler")->capture_default_str();
  validate_cmd->add_option("--out", out, "CSV output")->capture_default_str();
  add_threads(validate_cmd);

  std::string problem = "unit_square";
  std::size_t first = 1, last = 6;
  std::string csv;
  auto* conv_cmd = app.add_subcommand("convergence", "Uniform-refinement study with errors, gap and rates");
  conv_cmd->add_option("--problem", problem, "lshape or unit_square")
      ->check(CLI::IsMember({"lshape", "unit_square"}))
      ->capture_default_str();
  conv_cmd->add_option("--first", first, "First uniform level")->capture_default_str();
  conv_cmd->add_option("--last", last, "Last uniform level")->capture_default_str();
  conv_cmd->add_option("--mu", mu, "Parameter pair (exact errors only at 0 0)")->expected(2);
  conv_cmd->add_option("--csv", csv, "Also write the table as CSV");

  std::string mesh_path, vtk_out = "out.vtk", vtk_problem;
  auto* export_cmd = app.add_subcommand("export-vtk", "Write a mesh or a truth FE solution as legacy VTK");
  auto* model_opt = export_cmd->add_option("--model", model, "Solve on the model's mesh for its problem");
  auto* mesh_opt = export_cmd->add_option("--mesh", mesh_path, "Mesh file");
  model_opt->excludes(mesh_opt);
  export_cmd->add_option("--problem", vtk_problem, "With --mesh: solve this problem on it")
      ->check(CLI::IsMember({"lshape", "unit_square"}))
      ->needs(mesh_opt);
  export_cmd->add_option("--mu", mu, "Parameter pair")->expected(2);
  export_cmd->add_option("--out", vtk_out, "VTK output")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    (void)app.exit(e);
    return exit_usage;
  }
  if (export_cmd->parsed() && model.empty() && mesh_path.empty()) {
    std::cerr << "error: export-vtk needs --model or --mesh\n";
    return exit_usage;
  }
  if (conv_cmd->parsed() && first > last) {
    std::cerr << "error: --first exceeds --last\n";
    return exit_usage;
  }

  try {
    if (greedy_cmd->parsed()) return cmd_greedy(config, threads);
    if (online_cmd->parsed()) return cmd_online(model, mu, vtk);
    if (validate_cmd->parsed()) return cmd_validate(model, n, seed, out, threads);
    if (conv_cmd->parsed()) return cmd_convergence(problem, first, last, mu, csv);
    if (export_cmd->parsed()) return cmd_export_vtk(model, mesh_path, vtk_problem, mu, vtk_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_usage;
}
