#pragma once

#include <cstdint>
#include <optional>

#include "linorl/model.hpp"

namespace linorl {

// Plain tabular MDP/MG: transitions[h] is (S*A*B) x S (opponent action
// fastest-varying in the row index), rewards[h] is S x (A*B).
struct TabularModel {
  Kind kind = Kind::Mdp;
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  int num_opp_actions = 1;
  std::vector<Mat> transitions;
  std::vector<Mat> rewards;
  Vec initial_dist;
};

// One-hot embedding with d = S*A*B: measures reproduce the kernel exactly and
// every feature has unit norm.
LinearInstance tabular_embed(const TabularModel& tab,
                             const std::string& id = "tabular");

struct GeneratedInstance {
  LinearInstance instance;
  Policy behavior_max;
  Policy behavior_min;  // empty for MDPs
};

// Random well-conditioned instance: simplex features (mixture-of-anchors
// transitions, so linearity is exact), rewards linear in [0,1], and a
// behavior policy with exact coverage kappa > 0.01 (resampled up to 100
// times, then throws).
GeneratedInstance random_linear_instance(Kind kind, int d, int horizon,
                                         int num_states, int num_actions,
                                         int num_opp_actions,
                                         std::uint64_t seed);

// Random dense tabular model (every kernel entry positive) embedded one-hot,
// with a uniform behavior policy. max_reward caps the mean rewards.
GeneratedInstance random_tabular_instance(Kind kind, int num_states,
                                          int num_actions, int num_opp_actions,
                                          int horizon, std::uint64_t seed,
                                          double max_reward = 1.0);

// Hard-instance family: two states, actions {-1,0,1}^(d-2), uniform
// action-independent chain, Gaussian reward observations with mean
// s/sqrt(6) + zeta <a, u_h>/sqrt(2d).
struct LowerBoundSpec {
  int d = 4;
  int horizon = 2;
  double zeta = 0.0;  // must lie in [0, 1/sqrt(3d)]
  std::vector<Eigen::VectorXi> u;  // per-step sign vectors; drawn from seed if empty
  std::uint64_t seed = 0;
};

// Closed-form quantities valid for any d (no enumeration needed).
struct LowerBoundAnalytic {
  int d = 0;
  int horizon = 0;
  double zeta = 0.0;
  std::vector<Eigen::VectorXi> u;
  Mat chain;                 // induced 2x2 transition matrix
  std::vector<Vec> v_star;   // optimal values per step, indexed by state
  Mat second_moment;         // E[phi phi^T] under the behavior policy

  // Gap of a policy whose mean action at step h is mean_actions[h-1],
  // conditioned on x_1 = state: (zeta/sqrt(2d)) * sum_h (d-2 - <m_h, u_h>).
  double gap_from_mean_actions(const std::vector<Vec>& mean_actions) const;
};

struct LowerBoundFamily {
  LinearInstance instance;
  Policy behavior_max;
  Policy behavior_min;  // point mass on the zero action (games only)
  LowerBoundAnalytic analytic;
};

// Enumerated construction; requires d <= 6 (3^(d-2) actions). Use
// lower_bound_analytic for larger d.
LowerBoundFamily lower_bound_family(const LowerBoundSpec& spec, Kind kind);
LowerBoundAnalytic lower_bound_analytic(const LowerBoundSpec& spec, Kind kind);

// Mean action of a policy over the enumerated action grid, conditioned on
// x_1 = state (step 1 uses that state, later steps the uniform marginal).
std::vector<Vec> mean_actions_on_grid(const LowerBoundAnalytic& analytic,
                                      const Policy& pi, int state);

// Maps grid index <-> action vector in {-1,0,1}^(d-2); index 0 is all -1.
Eigen::VectorXi lower_bound_action(int index, int d);
int lower_bound_action_index(const Eigen::VectorXi& action);

}  // namespace linorl
