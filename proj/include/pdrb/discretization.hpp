#pragma once

#include <memory>
#include <utility>

#include "pdrb/dual.hpp"
#include "pdrb/estimator.hpp"
#include "pdrb/fe/assembly.hpp"
#include "pdrb/primal.hpp"
#include "pdrb/problem.hpp"

namespace pdrb {

/// Everything parameter-independent on one mesh: spaces, unit operators,
/// discrete data and the liftings u_g, σ_fg. Rebuilt whenever the mesh changes.
class Discretization {
 public:
  Discretization(const Problem& problem, mesh::Mesh m, linalg::SolverOptions opts = fe_solver_options())
      : problem_(problem),
        spaces_(std::make_shared<const fe::FESpaces>(std::move(m))),
        ops_(fe::build_operators(*spaces_)),
        data_(discretize(problem_, *spaces_)),
        opts_(opts),
        u_g_(build_primal_lifting(*spaces_, ops_, data_, opts_)),
        lift_(build_dual_lifting(*spaces_, ops_, data_, opts_)),
        sigma_fg_(lift_.combined()) {}

  [[nodiscard]] const Problem& problem() const noexcept { return problem_; }
  [[nodiscard]] const fe::FESpaces& spaces() const noexcept { return *spaces_; }
  [[nodiscard]] const mesh::Mesh& mesh() const noexcept { return spaces_->mesh(); }
  [[nodiscard]] const fe::Operators& ops() const noexcept { return ops_; }
  [[nodiscard]] const DiscreteData& data() const noexcept { return data_; }
  [[nodiscard]] const fe::PrimalField& u_g() const noexcept { return u_g_; }
  [[nodiscard]] const DualLifting& dual_lifting() const noexcept { return lift_; }
  [[nodiscard]] const fe::DualField& sigma_fg() const noexcept { return sigma_fg_; }
  [[nodiscard]] const linalg::SolverOptions& options() const noexcept { return opts_; }

  [[nodiscard]] std::size_t ndof_primal() const { return spaces_->num_p1(); }
  [[nodiscard]] std::size_t ndof_dual() const { return spaces_->num_dual_dofs(); }

  [[nodiscard]] fe::PrimalField solve_primal(const Parameter& mu) const {
    return pdrb::solve_primal(*spaces_, ops_, data_, mu, u_g_, opts_);
  }
  [[nodiscard]] fe::DualField solve_dual(const Parameter& mu) const {
    return pdrb::solve_dual(*spaces_, ops_, data_, mu, sigma_fg_, opts_);
  }
  [[nodiscard]] SolvedPair solve(const Parameter& mu) const { return {solve_primal(mu), solve_dual(mu), mu}; }

  [[nodiscard]] IndicatorField estimate(const SolvedPair& p) const {
    return local_gap(*spaces_, data_, p.u, p.sigma, p.mu);
  }

  [[nodiscard]] double primal_energy(const fe::PrimalField& u, const Parameter& mu) const {
    return pdrb::primal_energy(*spaces_, data_, u, mu);
  }
  [[nodiscard]] double dual_energy(const fe::DualField& s, const Parameter& mu) const {
    return pdrb::dual_energy(*spaces_, data_, s, mu);
  }

 private:
  Problem problem_;
  std::shared_ptr<const fe::FESpaces> spaces_;
  fe::Operators ops_;
  DiscreteData data_;
  linalg::SolverOptions opts_;
  fe::PrimalField u_g_;
  DualLifting lift_;
  fe::DualField sigma_fg_;
};

}  // namespace pdrb
