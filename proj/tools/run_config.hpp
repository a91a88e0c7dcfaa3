#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdrb/greedy/greedy.hpp"

namespace pdrb::cli {

/// Raised for anything wrong in a run configuration; maps to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything `pdrb greedy` reads from its TOML file. Defaults:
///   [problem]    domain = "lshape", uniform_levels = 1
///   [parameters] mu1_min = mu2_min = -2, mu1_max = mu2_max = 2
///   [greedy]     algorithm = "fixed", train_size = 100000, train_seed = 1,
///                eps_h0 = 0, eps_rb0 = 1e-3, r_rbfe = 2, N_max = 20,
///                dof_max = 0, theta = 0.5, mu_1 = [0, 0], saturation = true,
///                chunk = 256, max_adapt_steps = 100
///   [solver]     spd_method = "cholesky", saddle_method = "automatic",
///                spd_tolerance = 1e-12, saddle_tolerance = 1e-10,
///                max_iterations = 0, dense_threshold = 500, refinement_steps = 2
///   [validate]   samples = 10000 (0 = skip), seed = 2
///   [output]     directory = "pdrb_out", vtk = false
struct RunConfig {
  greedy::GreedyConfig greedy;
  std::size_t validate_samples = 10000;
  std::uint64_t validate_seed = 2;
  std::string out_dir = "pdrb_out";
  bool vtk = false;
};

namespace detail {

inline std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
  return s;
}

template <class T>
T parse_number(const std::string& key, const std::string& raw) {
  const std::string s = unquote(raw);
  T v{};
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || s.empty()) throw ConfigError("config key '" + key + "': cannot parse '" + s + "'");
  return v;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string s = unquote(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" + s + "'");
}

inline linalg::SpdMethod spd_method_from(const std::string& key, const std::string& s) {
  if (s == "pcg") return linalg::SpdMethod::pcg;
  if (s == "cholesky") return linalg::SpdMethod::cholesky;
  throw ConfigError("config key '" + key + "': expected pcg or cholesky, got '" + s + "'");
}

inline const char* to_string(linalg::SpdMethod m) { return m == linalg::SpdMethod::pcg ? "pcg" : "cholesky"; }

inline linalg::SaddleMethod saddle_method_from(const std::string& key, const std::string& s) {
  if (s == "automatic") return linalg::SaddleMethod::automatic;
  if (s == "dense") return linalg::SaddleMethod::dense;
  if (s == "schur_cg") return linalg::SaddleMethod::schur_cg;
  if (s == "sparse_lu") return linalg::SaddleMethod::sparse_lu;
  throw ConfigError("config key '" + key + "': expected automatic, dense, schur_cg or sparse_lu, got '" + s + "'");
}

inline const char* to_string(linalg::SaddleMethod m) {
  switch (m) {
    case linalg::SaddleMethod::automatic: return "automatic";
    case linalg::SaddleMethod::dense: return "dense";
    case linalg::SaddleMethod::schur_cg: return "schur_cg";
    case linalg::SaddleMethod::sparse_lu: return "sparse_lu";
  }
  return "automatic";
}

}  // namespace detail

/// Parses TOML-style text. Unknown sections and keys are rejected by name.
inline RunConfig parse_run_config(std::istream& is) {
  using detail::parse_bool;
  using detail::parse_number;
  RunConfig rc;
  auto& g = rc.greedy;
  using Setter = std::function<void(const std::string&, const std::vector<std::string>&)>;
  auto one = [](const std::string& key, const std::vector<std::string>& in) -> const std::string& {
    if (in.size() != 1) throw ConfigError("config key '" + key + "': expected a single value");
    return in.front();
  };
  auto num = [&](auto& field) {
    return Setter([&, one](const std::string& k, const std::vector<std::string>& in) {
      field = parse_number<std::decay_t<decltype(field)>>(k, one(k, in));
    });
  };
  auto flag = [&](bool& field) {
    return Setter([&field, one](const std::string& k, const std::vector<std::string>& in) { field = parse_bool(k, one(k, in)); });
  };
  auto text = [&](std::string& field) {
    return Setter([&field, one](const std::string& k, const std::vector<std::string>& in) {
      field = detail::unquote(one(k, in));
    });
  };
  std::string algorithm = greedy::to_string(g.algorithm), spd = detail::to_string(g.solver.spd_method),
              saddle = detail::to_string(g.solver.saddle_method);

  const std::map<std::string, Setter> setters = {
      {"problem.domain", text(g.problem)},
      {"problem.uniform_levels", num(g.uniform_levels)},
      {"parameters.mu1_min", num(g.box.lo[0])},
      {"parameters.mu1_max", num(g.box.hi[0])},
      {"parameters.mu2_min", num(g.box.lo[1])},
      {"parameters.mu2_max", num(g.box.hi[1])},
      {"greedy.algorithm", text(algorithm)},
      {"greedy.train_size", num(g.train_size)},
      {"greedy.train_seed", num(g.train_seed)},
      {"greedy.eps_h0", num(g.eps_h0)},
      {"greedy.eps_rb0", num(g.eps_rb0)},
      {"greedy.r_rbfe", num(g.r_rbfe)},
      {"greedy.N_max", num(g.N_max)},
      {"greedy.dof_max", num(g.dof_max)},
      {"greedy.theta", num(g.theta)},
      {"greedy.mu_1",
       [&](const std::string& k, const std::vector<std::string>& in) {
         if (in.size() != 2) throw ConfigError("config key '" + k + "': expected [mu1, mu2]");
         g.mu_1 = Parameter(parse_number<double>(k, in[0]), parse_number<double>(k, in[1]));
       }},
      {"greedy.saturation", flag(g.saturation)},
      {"greedy.chunk", num(g.chunk)},
      {"greedy.max_adapt_steps", num(g.max_adapt_steps)},
      {"solver.spd_method", text(spd)},
      {"solver.saddle_method", text(saddle)},
      {"solver.spd_tolerance", num(g.solver.spd_tolerance)},
      {"solver.saddle_tolerance", num(g.solver.saddle_tolerance)},
      {"solver.max_iterations", num(g.solver.max_iterations)},
      {"solver.dense_threshold", num(g.solver.dense_threshold)},
      {"solver.refinement_steps", num(g.solver.refinement_steps)},
      {"validate.samples", num(rc.validate_samples)},
      {"validate.seed", num(rc.validate_seed)},
      {"output.directory", text(rc.out_dir)},
      {"output.vtk", flag(rc.vtk)},
  };

  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_config(is);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;  // section markers
    const std::string key = it.fullname();
    const auto s = setters.find(key);
    if (s == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    s->second(key, it.inputs);
  }

  try {
    g.algorithm = greedy::algorithm_from_string(algorithm);
    (void)problem_by_name(g.problem);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  g.solver.spd_method = detail::spd_method_from("solver.spd_method", spd);
  g.solver.saddle_method = detail::saddle_method_from("solver.saddle_method", saddle);
  for (int i = 0; i < 2; ++i)
    if (!(g.box.lo[i] < g.box.hi[i])) throw ConfigError("config: empty parameter range for mu" + std::to_string(i + 1));
  try {
    g.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (rc.out_dir.empty()) throw ConfigError("config key 'output.directory' is empty");
  return rc;
}

inline RunConfig parse_run_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  return parse_run_config(is);
}

/// The effective configuration as TOML, so a run can be repeated from its
/// output directory.
inline std::string to_toml(const RunConfig& rc) {
  const auto& g = rc.greedy;
  std::ostringstream os;
  os.precision(17);
  os << "[problem]\ndomain = \"" << g.problem << "\"\nuniform_levels = " << g.uniform_levels << "\n\n";
  os << "[parameters]\nmu1_min = " << g.box.lo[0] << "\nmu1_max = " << g.box.hi[0] << "\nmu2_min = " << g.box.lo[1]
     << "\nmu2_max = " << g.box.hi[1] << "\n\n";
  os << "[greedy]\nalgorithm = \"" << greedy::to_string(g.algorithm) << "\"\ntrain_size = " << g.train_size
     << "\ntrain_seed = " << g.train_seed << "\neps_h0 = " << g.eps_h0 << "\neps_rb0 = " << g.eps_rb0
     << "\nr_rbfe = " << g.r_rbfe << "\nN_max = " << g.N_max << "\ndof_max = " << g.dof_max << "\ntheta = " << g.theta
     << "\nmu_1 = [" << g.mu_1[0] << ", " << g.mu_1[1] << "]\nsaturation = " << (g.saturation ? "true" : "false")
     << "\nchunk = " << g.chunk << "\nmax_adapt_steps = " << g.max_adapt_steps << "\n\n";
  os << "[solver]\nspd_method = \"" << detail::to_string(g.solver.spd_method) << "\"\nsaddle_method = \""
     << detail::to_string(g.solver.saddle_method) << "\"\nspd_tolerance = " << g.solver.spd_tolerance
     << "\nsaddle_tolerance = " << g.solver.saddle_tolerance << "\nmax_iterations = " << g.solver.max_iterations
     << "\ndense_threshold = " << g.solver.dense_threshold << "\nrefinement_steps = " << g.solver.refinement_steps
     << "\n\n";
  os << "[validate]\nsamples = " << rc.validate_samples << "\nseed = " << rc.validate_seed << "\n\n";
  os << "[output]\ndirectory = \"" << rc.out_dir << "\"\nvtk = " << (rc.vtk ? "true" : "false") << "\n";
  return os.str();
}

inline nlohmann::json to_json(const RunConfig& rc) {
  const auto& g = rc.greedy;
  return {
      {"problem", {{"domain", g.problem}, {"uniform_levels", g.uniform_levels}}},
      {"parameters",
       {{"mu1_min", g.box.lo[0]}, {"mu1_max", g.box.hi[0]}, {"mu2_min", g.box.lo[1]}, {"mu2_max", g.box.hi[1]}}},
      {"greedy",
       {{"algorithm", greedy::to_string(g.algorithm)},
        {"train_size", g.train_size},
        {"train_seed", g.train_seed},
        {"eps_h0", g.eps_h0},
        {"eps_rb0", g.eps_rb0},
        {"r_rbfe", g.r_rbfe},
        {"N_max", g.N_max},
        {"dof_max", g.dof_max},
        {"theta", g.theta},
        {"mu_1", {g.mu_1[0], g.mu_1[1]}},
        {"saturation", g.saturation},
        {"chunk", g.chunk},
        {"max_adapt_steps", g.max_adapt_steps}}},
      {"solver",
       {{"spd_method", detail::to_string(g.solver.spd_method)},
        {"saddle_method", detail::to_string(g.solver.saddle_method)},
        {"spd_tolerance", g.solver.spd_tolerance},
        {"saddle_tolerance", g.solver.saddle_tolerance},
        {"max_iterations", g.solver.max_iterations},
        {"dense_threshold", g.solver.dense_threshold},
        {"refinement_steps", g.solver.refinement_steps}}},
      {"validate", {{"samples", rc.validate_samples}, {"seed", rc.validate_seed}}},
      {"output", {{"directory", rc.out_dir}, {"vtk", rc.vtk}}},
  };
}

}  // namespace pdrb::cli
