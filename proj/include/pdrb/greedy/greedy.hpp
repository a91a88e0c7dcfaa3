#pragma once

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "pdrb/greedy/adaptive.hpp"
#include "pdrb/greedy/argmax.hpp"
#include "pdrb/greedy/training.hpp"
#include "pdrb/rb/model.hpp"

namespace pdrb::greedy {

enum class Algorithm { fixed, adaptive_mesh, balanced };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::fixed: return "fixed";
    case Algorithm::adaptive_mesh: return "adaptive_mesh";
    case Algorithm::balanced: return "balanced";
  }
  return "unknown";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "fixed") return Algorithm::fixed;
  if (s == "adaptive_mesh") return Algorithm::adaptive_mesh;
  if (s == "balanced") return Algorithm::balanced;
  throw Error(ErrorCode::invalid_argument, "unknown algorithm '" + s + "' (expected fixed, adaptive_mesh or balanced)");
}

/// eps_h0: ε_h⁰ for fixed (normally 0) and balanced, the fixed ε_h for
/// adaptive_mesh. eps_rb0 is used by fixed only; the other two start from
/// r_rbfe·eps_h0. dof_max = 0 means no cap.
struct GreedyConfig {
  Algorithm algorithm = Algorithm::fixed;
  std::string problem = "lshape";
  std::size_t uniform_levels = 1;  // T_0 = initial mesh refined uniformly this often (level 0 of the L-shape has no free vertex)
  ParameterBox box;
  std::size_t train_size = 100000;
  std::uint64_t train_seed = 1;
  double eps_h0 = 0.0;
  double eps_rb0 = 1e-3;
  double r_rbfe = 2.0;
  std::size_t N_max = 20;
  std::size_t dof_max = 0;
  double theta = 0.5;
  Parameter mu_1{0.0, 0.0};
  bool saturation = true;
  std::size_t chunk = 256;
  unsigned threads = 0;
  std::size_t max_adapt_steps = 100;
  linalg::SolverOptions solver = fe_solver_options();

  void validate() const {
    PDRB_THROW_IF(!(r_rbfe > 1.0), ErrorCode::invalid_argument, "greedy: r_rbfe must exceed 1");
    PDRB_THROW_IF(N_max == 0, ErrorCode::invalid_argument, "greedy: N_max must be at least 1");
    PDRB_THROW_IF(train_size == 0, ErrorCode::invalid_argument, "greedy: train_size must be at least 1");
    PDRB_THROW_IF(!(theta > 0.0 && theta <= 1.0), ErrorCode::invalid_argument, "greedy: theta must lie in (0,1]");
    PDRB_THROW_IF(algorithm == Algorithm::fixed && !(eps_h0 >= 0.0 && eps_rb0 > 0.0), ErrorCode::invalid_argument,
                  "greedy: fixed needs eps_h0 >= 0 and eps_rb0 > 0");
    PDRB_THROW_IF(algorithm != Algorithm::fixed && !(eps_h0 > 0.0), ErrorCode::invalid_argument,
                  "greedy: eps_h0 must be positive for adaptive_mesh and balanced");
    PDRB_THROW_IF(algorithm == Algorithm::balanced && dof_max == 0, ErrorCode::invalid_argument,
                  "greedy: balanced needs dof_max");
    PDRB_THROW_IF(!box.contains(mu_1), ErrorCode::invalid_argument, "greedy: mu_1 lies outside the parameter box");
  }
};

struct GreedyRow {
  std::size_t n = 0;
  Parameter mu;  // μ_n
  double eps_h = 0.0;
  double eps_rb = 0.0;
  double maxerror = 0.0;  // max η_rb over Ξ_train with n basis functions
  std::size_t ndof_p = 0;
  std::size_t ndof_d = 0;
  std::size_t skipped = 0;
  bool refined = false;
  bool enough = true;
  double test_error = std::numeric_limits<double>::quiet_NaN();
  double eta_h = 0.0;  // η_h(μ_n) on the mesh of this row
  std::uint64_t generation = 0;
  std::size_t verified = 0;
};

enum class Termination { tolerance_met, N_max_reached, basis_degenerate };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::tolerance_met: return "tolerance_met";
    case Termination::N_max_reached: return "N_max_reached";
    case Termination::basis_degenerate: return "basis_degenerate";
  }
  return "unknown";
}

struct GreedyHistory {
  std::vector<GreedyRow> rows;
  Termination reason = Termination::N_max_reached;
  std::uint64_t train_seed = 0;
  std::size_t train_size = 0;
};

struct GreedyResult {
  rb::RBModel model;
  GreedyHistory history;
  std::shared_ptr<const Discretization> disc;               // final mesh
  std::vector<std::shared_ptr<const mesh::Mesh>> meshes;    // mesh of each row
  std::vector<Parameter> train;
};

/// ε_h = max(ε_h_prev, new values), ε_rb = max(r·ε_h, ε_rb_prev).
inline std::pair<double, double> update_tolerances(double eps_h_prev, double eps_rb_prev,
                                                   std::span<const double> new_eta_h, double r_rbfe) {
  PDRB_THROW_IF(!(r_rbfe > 1.0), ErrorCode::invalid_argument, "update_tolerances: r_rbfe must exceed 1");
  double eps_h = eps_h_prev;
  for (double v : new_eta_h) eps_h = std::max(eps_h, v);
  return {eps_h, std::max(r_rbfe * eps_h, eps_rb_prev)};
}

namespace detail {

inline std::vector<rb::Snapshot> to_snapshots(std::vector<SolvedPair> pairs) {
  std::vector<rb::Snapshot> s;
  s.reserve(pairs.size());
  for (auto& p : pairs) s.push_back({p.mu, std::move(p.u), std::move(p.sigma)});
  return s;
}

inline std::vector<rb::Snapshot> recompute(const Discretization& d, const std::vector<rb::Snapshot>& old,
                                           unsigned threads) {
  std::vector<rb::Snapshot> s(old.size());
  parallel_for(0, old.size(), threads, [&](std::size_t i) {
    auto p = d.solve(old[i].mu);
    s[i] = {p.mu, std::move(p.u), std::move(p.sigma)};
  });
  return s;
}

/// The shared loop of all three algorithms. `enrich` adds μ_n to the basis
/// (possibly changing the mesh) and fills the tolerance and mesh columns of
/// the row; the argmax and the stopping test happen here.
class Driver {
 public:
  explicit Driver(const GreedyConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    res_.train = make_training_set(cfg.train_size, cfg.train_seed, cfg.box);
    res_.history.train_seed = cfg.train_seed;
    res_.history.train_size = cfg.train_size;
    const Problem p = problem_by_name(cfg.problem);
    t0_ = std::make_shared<const Discretization>(p, mesh::refine_uniform(p.initial_mesh(), cfg.uniform_levels),
                                                 cfg.solver);
    disc_ = t0_;
    threads_ = worker_count(cfg.threads);
    adapt_.theta = cfg.theta;
    adapt_.max_steps = cfg.max_adapt_steps;
    adapt_.threads = cfg.threads;
    adapt_.solver = cfg.solver;
  }

  template <class Enrich>
  GreedyResult run(Enrich&& enrich) {
    Parameter mu = cfg_.mu_1;
    ArgmaxOptions ao;
    ao.use_cache = cfg_.saturation;
    ao.chunk = cfg_.chunk;
    ao.threads = cfg_.threads;
    for (std::size_t n = 1;; ++n) {
      GreedyRow row;
      row.n = n;
      row.mu = mu;
      const auto prev_snaps = snaps_;
      const auto prev_disc = disc_;
      enrich(mu, row);
      rb::RBModel model = rb::build_offline(*disc_, snaps_);
      ArgmaxResult am;
      try {
        am = argmax_train(model, res_.train, &cache_, ao);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::singular_reduced_system || n == 1) throw;
        // μ_n added nothing numerically independent; keep the previous basis
        snaps_ = prev_snaps;
        disc_ = prev_disc;
        res_.history.reason = Termination::basis_degenerate;
        break;
      }
      row.maxerror = am.eta;
      row.skipped = am.skipped;
      row.verified = am.verified;
      row.ndof_p = disc_->ndof_primal();
      row.ndof_d = disc_->ndof_dual();
      row.generation = disc_->mesh().generation();
      res_.history.rows.push_back(row);
      res_.meshes.push_back(std::make_shared<const mesh::Mesh>(disc_->mesh()));
      if (!(am.eta > row.eps_rb)) {
        res_.history.reason = Termination::tolerance_met;
        break;
      }
      if (n >= cfg_.N_max) {
        res_.history.reason = Termination::N_max_reached;
        break;
      }
      mu = am.mu;
    }
    res_.model = rb::build_offline(*disc_, snaps_);
    res_.disc = disc_;
    return std::move(res_);
  }

  const GreedyConfig& cfg() const { return cfg_; }
  std::shared_ptr<const Discretization> t0_;
  std::shared_ptr<const Discretization> disc_;
  std::vector<rb::Snapshot> snaps_;
  AdaptiveOptions adapt_;
  unsigned threads_ = 1;

 private:
  GreedyConfig cfg_;
  GreedyResult res_;
  SaturationCache cache_;
};

}  // namespace detail

/// Algorithm 1: fixed mesh, ε_h^n = max η_h over S_n, ε_rb^n = max(r·ε_h^n, ε_rb^{n−1}).
inline GreedyResult greedy_fixed(GreedyConfig cfg) {
  cfg.algorithm = Algorithm::fixed;
  detail::Driver d(cfg);
  double eps_h = cfg.eps_h0, eps_rb = cfg.eps_rb0;
  return d.run([&](const Parameter& mu, GreedyRow& row) {
    auto p = d.disc_->solve(mu);
    const double eta = d.disc_->estimate(p).global;
    d.snaps_.push_back({mu, std::move(p.u), std::move(p.sigma)});
    std::tie(eps_h, eps_rb) = update_tolerances(eps_h, eps_rb, std::span<const double>(&eta, 1), cfg.r_rbfe);
    row.eta_h = eta;
    row.eps_h = eps_h;
    row.eps_rb = eps_rb;
  });
}

/// Algorithm 2: fixed ε_h and ε_rb = r·ε_h. μ_n is solved adaptively from
/// the previous mesh; after a refinement every earlier snapshot is
/// recomputed on the new mesh.
inline GreedyResult greedy_adaptive(GreedyConfig cfg) {
  cfg.algorithm = Algorithm::adaptive_mesh;
  detail::Driver d(cfg);
  const double eps_h = cfg.eps_h0, eps_rb = cfg.r_rbfe * cfg.eps_h0;
  return d.run([&](const Parameter& mu, GreedyRow& row) {
    auto ad = adaptive_fe_solve(d.disc_, mu, eps_h, std::nullopt, d.adapt_);
    if (ad.refined) {
      d.disc_ = ad.disc;
      d.snaps_ = detail::recompute(*d.disc_, d.snaps_, d.threads_);
    }
    d.snaps_.push_back({mu, std::move(ad.pairs[0].u), std::move(ad.pairs[0].sigma)});
    row.eta_h = ad.eta[0];
    row.eps_h = eps_h;
    row.eps_rb = eps_rb;
    row.refined = ad.refined;
    row.enough = ad.enough;
  });
}

/// Algorithm 3: like Algorithm 2 while the DOF cap allows η_h(μ_n) ≤ ε_h^{n−1}.
/// Otherwise the mesh is rebuilt from T_0 with the sum indicator over S_n
/// under the cap and ε_h is raised to the worst snapshot estimator.
inline GreedyResult greedy_balanced(GreedyConfig cfg) {
  cfg.algorithm = Algorithm::balanced;
  detail::Driver d(cfg);
  double eps_h = cfg.eps_h0;
  PDRB_THROW_IF(count_dofs(d.t0_->mesh()).binding() > cfg.dof_max, ErrorCode::invalid_argument,
                "greedy_balanced: the initial mesh already exceeds dof_max");
  return d.run([&](const Parameter& mu, GreedyRow& row) {
    auto ad = adaptive_fe_solve(d.disc_, mu, eps_h, cfg.dof_max, d.adapt_);
    row.enough = ad.enough;
    if (ad.enough) {
      if (ad.refined) {
        d.disc_ = ad.disc;
        d.snaps_ = detail::recompute(*d.disc_, d.snaps_, d.threads_);
      }
      d.snaps_.push_back({mu, std::move(ad.pairs[0].u), std::move(ad.pairs[0].sigma)});
      row.eta_h = ad.eta[0];
      row.refined = ad.refined;
    } else {
      std::vector<Parameter> s;
      for (const auto& sn : d.snaps_) s.push_back(sn.mu);
      s.push_back(mu);
      auto rb = adaptive_fe_solve(d.t0_, s, eps_h, cfg.dof_max, d.adapt_);
      d.disc_ = rb.disc;
      d.snaps_ = detail::to_snapshots(std::move(rb.pairs));
      eps_h = std::max(eps_h, rb.max_eta());
      row.eta_h = rb.eta.back();
      row.refined = false;
    }
    row.eps_h = eps_h;
    row.eps_rb = cfg.r_rbfe * eps_h;
  });
}

inline GreedyResult run_greedy(const GreedyConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::fixed: return greedy_fixed(cfg);
    case Algorithm::adaptive_mesh: return greedy_adaptive(cfg);
    case Algorithm::balanced: return greedy_balanced(cfg);
  }
  throw Error(ErrorCode::invalid_argument, "run_greedy: unknown algorithm");
}

struct ValidationResult {
  double max_error = 0.0;
  double mean_error = 0.0;
  Parameter argmax;
  std::vector<Parameter> samples;
  std::vector<double> errors;  // η_rb per sample
};

/// η_rb over `samples` (in order).
inline ValidationResult validate_on(const rb::RBModel& m, std::vector<Parameter> samples, unsigned threads = 0) {
  PDRB_THROW_IF(samples.empty(), ErrorCode::invalid_argument, "validate: no samples");
  ValidationResult v;
  v.samples = std::move(samples);
  v.errors.assign(v.samples.size(), 0.0);
  parallel_for(0, v.samples.size(), worker_count(threads),
               [&](std::size_t i) { v.errors[i] = rb::online_solve(m, v.samples[i]).eta_rb; });
  long double sum = 0.0L;
  v.max_error = -1.0;
  for (std::size_t i = 0; i < v.errors.size(); ++i) {
    sum += v.errors[i];
    if (v.errors[i] > v.max_error) {
      v.max_error = v.errors[i];
      v.argmax = v.samples[i];
    }
  }
  v.mean_error = static_cast<double>(sum / static_cast<long double>(v.errors.size()));
  return v;
}

/// n fresh uniform samples from `seed`.
inline ValidationResult validate_random(const rb::RBModel& m, std::size_t n, std::uint64_t seed,
                                        const ParameterBox& box = {}, unsigned threads = 0) {
  PDRB_THROW_IF(n == 0, ErrorCode::invalid_argument, "validate_random: n must be at least 1");
  return validate_on(m, make_training_set(n, seed, box), threads);
}

/// The columns of Tables 1–3, six significant digits, test_error blank
/// where not measured.
inline void write_history_csv(std::ostream& os, const GreedyHistory& h) {
  os << "n,mu1,mu2,eps_h,eps_rb,maxerror,ndof_p,ndof_d,skipped,refined,enough,test_error\n";
  char buf[512];
  for (const auto& r : h.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.6g,%.6g,%.6g,%.6g,%.6g,%zu,%zu,%zu,%d,%d,", r.n, r.mu[0], r.mu[1], r.eps_h,
                  r.eps_rb, r.maxerror, r.ndof_p, r.ndof_d, r.skipped, r.refined ? 1 : 0, r.enough ? 1 : 0);
    os << buf;
    if (!std::isnan(r.test_error)) {
      std::snprintf(buf, sizeof buf, "%.6g", r.test_error);
      os << buf;
    }
    os << '\n';
  }
}

inline void save_history_csv(const std::string& path, const GreedyHistory& h) {
  std::ofstream os(path);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "cannot open '" + path + "' for writing");
  write_history_csv(os, h);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "write to '" + path + "' failed");
}

}  // namespace pdrb::greedy
