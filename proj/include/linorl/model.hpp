#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace linorl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Kind { Mdp, Game };

// Per-step joint-action cap for everything that enumerates the full
// (state, action[, opponent action]) table.
inline constexpr long kEnumerationBudget = 1'000'000;

// Feature map phi(x, a[, b]) of a linear MDP/MG. Vectors are stored as
// columns of a d x (S*A*B) matrix so a single feature lookup is contiguous.
// num_opp_actions is 1 for MDPs.
struct FeatureMap {
  int d = 0;
  int num_states = 0;
  int num_actions = 0;
  int num_opp_actions = 1;

  Mat columns;  // d x (S*A*B)

  int flat(int x, int a, int b = 0) const {
    return (x * num_actions + a) * num_opp_actions + b;
  }
  auto col(int x, int a, int b = 0) const { return columns.col(flat(x, a, b)); }
  Vec feature(int x, int a, int b = 0) const { return columns.col(flat(x, a, b)); }
  long table_size() const {
    return static_cast<long>(num_states) * num_actions * num_opp_actions;
  }
};

struct RewardNoise {
  enum class Type { None, Gaussian };
  Type type = Type::None;
  double sigma = 0.0;
};

// A linear MDP (kind == Mdp) or two-player zero-sum linear MG (kind == Game)
// over finite enumerable spaces. Transitions are P_h(x'|x,a[,b]) =
// phi(x,a[,b])^T measures[h][:,x'] and mean rewards phi^T thetas[h], so the
// linear structure holds exactly by construction.
struct LinearInstance {
  Kind kind = Kind::Mdp;
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  int num_opp_actions = 1;  // 1 for MDPs

  FeatureMap features;
  std::vector<Mat> measures;  // horizon entries, each d x num_states
  std::vector<Vec> thetas;    // horizon entries, each d
  RewardNoise reward_noise;
  Vec initial_dist;

  std::string id = "instance";

  int feature_dim() const { return features.d; }
  long joint_actions() const {
    return static_cast<long>(num_actions) * num_opp_actions;
  }
};

// Per-step stochastic policy for one player: probs[h-1] is
// num_states x num_own_actions.
struct Policy {
  std::vector<Mat> probs;

  int horizon() const { return static_cast<int>(probs.size()); }
  static Policy uniform(int horizon, int num_states, int num_actions);
  static Policy deterministic(const std::vector<std::vector<int>>& actions,
                              int num_actions);
};

// Backward-induction output. v has horizon+1 entries with v[H] == 0;
// q[h-1] is num_states x (num_actions * num_opp_actions), opponent action
// fastest-varying.
struct ValueTable {
  std::vector<Vec> v;
  std::vector<Mat> q;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

ValidationReport validate_instance(const LinearInstance& instance);
void require_valid(const LinearInstance& instance);

// Exact transition kernel at step h (1-based): (S*A*B) x S, rows indexed by
// FeatureMap::flat. Entries within -1e-12 of zero are clamped to zero and the
// row renormalized; anything worse throws.
Mat transition_matrix(const LinearInstance& instance, int h);

// Mean rewards at step h: num_states x (A*B).
Mat reward_table(const LinearInstance& instance, int h);

inline double clip_to(double x, double lo, double hi) {
  return std::max(lo, std::min(hi, x));
}

// (T_h v_next)(x,a[,b]) = r_h + P_h v_next, exact.
Mat apply_bellman(const LinearInstance& instance, const Vec& v_next, int h);

// Exact V^pi (or V^{pi,nu}) by backward recursion. nu is required iff the
// instance is a game.
ValueTable evaluate_policy(const LinearInstance& instance, const Policy& pi,
                           const Policy* nu = nullptr);

// Optimal values and greedy policy (smallest-index tie break).
std::pair<ValueTable, Policy> optimal_values_mdp(const LinearInstance& instance);

struct NashResult {
  ValueTable values;
  Policy max_policy;
  Policy min_policy;
  double max_exploitability = 0.0;  // worst stage-game certificate
};

// Nash values of a zero-sum MG via backward induction over stage matrix games.
NashResult ne_values_mg(const LinearInstance& instance, double tol = 1e-9);

enum class Side { Max, Min };

// Best response of `side` against the other player's fixed policy.
std::pair<Policy, ValueTable> best_response(const LinearInstance& instance,
                                            const Policy& fixed, Side side);

// Gap((pi,nu), x) = V_1^{*,nu}(x) - V_1^{pi,*}(x), via two best responses.
double duality_gap(const LinearInstance& instance, const Policy& pi,
                   const Policy& nu, int state);

// ([Var_h v], max{1, [Var_h v]}) as num_states x (A*B) tables.
std::pair<Mat, Mat> conditional_variance(const LinearInstance& instance,
                                         const Vec& v, int h);

// Exact state marginals d_h(x) under (pi[, nu]); horizon entries.
std::vector<Vec> state_occupancy(const LinearInstance& instance,
                                 const Policy& pi, const Policy* nu = nullptr);

// Exact (x, a[, b]) occupancies d_h^b; horizon entries of S x (A*B).
std::vector<Mat> state_action_occupancy(const LinearInstance& instance,
                                        const Policy& pi,
                                        const Policy* nu = nullptr);

}  // namespace linorl
