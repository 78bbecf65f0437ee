#include "linorl/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "linorl/matrix_game.hpp"

namespace linorl {

namespace {

constexpr double kNegativeTol = 1e-12;
constexpr double kRowSumTol = 1e-9;
constexpr double kNormTol = 1e-9;

void check_step(const LinearInstance& inst, int h) {
  if (h < 1 || h > inst.horizon)
    throw std::invalid_argument("step h=" + std::to_string(h) +
                                " outside [1, H=" + std::to_string(inst.horizon) + "]");
}

void check_budget(const LinearInstance& inst) {
  if (static_cast<long>(inst.num_states) * inst.joint_actions() >
      kEnumerationBudget)
    throw std::invalid_argument(
        "instance exceeds the per-step enumeration budget");
}

void check_policy_shape(const LinearInstance& inst, const Policy& p,
                        int num_own, const char* name) {
  if (p.horizon() != inst.horizon)
    throw std::invalid_argument(std::string(name) + ": policy covers " +
                                std::to_string(p.horizon()) + " steps, need " +
                                std::to_string(inst.horizon));
  for (int h = 0; h < inst.horizon; ++h) {
    const Mat& m = p.probs[h];
    if (m.rows() != inst.num_states || m.cols() != num_own)
      throw std::invalid_argument(std::string(name) +
                                  ": policy/state-action shape mismatch at step " +
                                  std::to_string(h + 1));
    for (int x = 0; x < inst.num_states; ++x) {
      double s = m.row(x).sum();
      if (m.row(x).minCoeff() < -1e-12 || std::abs(s - 1.0) > 1e-12)
        throw std::invalid_argument(std::string(name) +
                                    ": policy row is not a distribution");
    }
  }
}

}  // namespace

Policy Policy::uniform(int horizon, int num_states, int num_actions) {
  Policy p;
  p.probs.assign(horizon,
                 Mat::Constant(num_states, num_actions, 1.0 / num_actions));
  return p;
}

Policy Policy::deterministic(const std::vector<std::vector<int>>& actions,
                             int num_actions) {
  Policy p;
  p.probs.reserve(actions.size());
  for (const auto& per_state : actions) {
    Mat m = Mat::Zero(static_cast<int>(per_state.size()), num_actions);
    for (int x = 0; x < static_cast<int>(per_state.size()); ++x)
      m(x, per_state[x]) = 1.0;
    p.probs.push_back(std::move(m));
  }
  return p;
}

ValidationReport validate_instance(const LinearInstance& inst) {
  ValidationReport rep;
  auto fail = [&rep](const std::string& msg) {
    rep.ok = false;
    rep.errors.push_back(msg);
  };

  if (inst.horizon < 1) fail("horizon must be positive");
  if (inst.num_states < 1 || inst.num_actions < 1 || inst.num_opp_actions < 1)
    fail("state/action space sizes must be positive");
  if (inst.kind == Kind::Mdp && inst.num_opp_actions != 1)
    fail("MDP instances must have num_opp_actions == 1");
  const int d = inst.features.d;
  if (d < 1) fail("feature dimension must be positive");
  if (inst.features.columns.rows() != d ||
      inst.features.columns.cols() !=
          static_cast<long>(inst.num_states) * inst.joint_actions())
    fail("feature table shape mismatch");
  if (static_cast<int>(inst.measures.size()) != inst.horizon ||
      static_cast<int>(inst.thetas.size()) != inst.horizon)
    fail("measures/thetas must have one entry per step");
  if (inst.initial_dist.size() != inst.num_states)
    fail("initial distribution size mismatch");
  if (!rep.ok) return rep;

  if (inst.initial_dist.minCoeff() < -kNegativeTol ||
      std::abs(inst.initial_dist.sum() - 1.0) > kRowSumTol)
    fail("initial distribution is not a probability vector");

  for (long i = 0; i < inst.features.columns.cols(); ++i) {
    if (inst.features.columns.col(i).norm() > 1.0 + kNormTol) {
      fail("feature norm exceeds 1 at flat index " + std::to_string(i));
      break;
    }
  }

  const double sqrt_d = std::sqrt(static_cast<double>(d));
  for (int h = 1; h <= inst.horizon; ++h) {
    const Mat& M = inst.measures[h - 1];
    const Vec& theta = inst.thetas[h - 1];
    if (M.rows() != d || M.cols() != inst.num_states || theta.size() != d) {
      fail("measure/theta shape mismatch at step " + std::to_string(h));
      continue;
    }
    if (theta.norm() > sqrt_d + kNormTol)
      fail("|theta| exceeds sqrt(d) at step " + std::to_string(h));
    if ((M * Vec::Ones(inst.num_states)).norm() > sqrt_d + kNormTol)
      fail("|mu(S)| exceeds sqrt(d) at step " + std::to_string(h));

    // Transition rows: entrywise >= -1e-12, sums within 1e-9 of one.
    Mat probs = inst.features.columns.transpose() * M;  // (S*A*B) x S
    for (long row = 0; row < probs.rows(); ++row) {
      if (probs.row(row).minCoeff() < -kNegativeTol) {
        fail("negative transition probability beyond tolerance at step " +
             std::to_string(h));
        break;
      }
      if (std::abs(probs.row(row).sum() - 1.0) > kRowSumTol) {
        fail("transition row does not sum to 1 at step " + std::to_string(h));
        break;
      }
    }

    if (inst.reward_noise.type == RewardNoise::Type::None) {
      Vec rewards = inst.features.columns.transpose() * theta;
      if (rewards.minCoeff() < -kNegativeTol ||
          rewards.maxCoeff() > 1.0 + kNegativeTol) {
        fail("mean reward outside [0,1] at step " + std::to_string(h));
      }
    }
  }
  return rep;
}

void require_valid(const LinearInstance& inst) {
  ValidationReport rep = validate_instance(inst);
  if (!rep.ok) {
    std::ostringstream oss;
    oss << "invalid instance '" << inst.id << "':";
    for (const auto& e : rep.errors) oss << "\n  - " << e;
    throw std::invalid_argument(oss.str());
  }
}

Mat transition_matrix(const LinearInstance& inst, int h) {
  check_step(inst, h);
  Mat probs = inst.features.columns.transpose() * inst.measures[h - 1];
  for (long row = 0; row < probs.rows(); ++row) {
    double sum = 0.0;
    for (long col = 0; col < probs.cols(); ++col) {
      double p = probs(row, col);
      if (p < 0.0) {
        if (p < -kNegativeTol)
          throw std::invalid_argument(
              "negative transition probability beyond tolerance");
        p = 0.0;
        probs(row, col) = 0.0;
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw std::invalid_argument("transition row does not sum to 1");
    probs.row(row) /= sum;
  }
  return probs;
}

Mat reward_table(const LinearInstance& inst, int h) {
  check_step(inst, h);
  Vec r = inst.features.columns.transpose() * inst.thetas[h - 1];
  return Eigen::Map<const Mat>(r.data(), inst.joint_actions(), inst.num_states)
      .transpose();
}

Mat apply_bellman(const LinearInstance& inst, const Vec& v_next, int h) {
  check_step(inst, h);
  check_budget(inst);
  if (v_next.size() != inst.num_states)
    throw std::invalid_argument("apply_bellman: V_next has " +
                                std::to_string(v_next.size()) +
                                " entries, expected one per state");
  // Q = phi^T (theta + M v_next), exact in the linear parameters.
  Vec w = inst.thetas[h - 1] + inst.measures[h - 1] * v_next;
  Vec q = inst.features.columns.transpose() * w;
  return Eigen::Map<const Mat>(q.data(), inst.joint_actions(), inst.num_states)
      .transpose();
}

ValueTable evaluate_policy(const LinearInstance& inst, const Policy& pi,
                           const Policy* nu) {
  check_budget(inst);
  if (inst.kind == Kind::Game && nu == nullptr)
    throw std::invalid_argument("evaluate_policy: game instance needs nu");
  if (inst.kind == Kind::Mdp && nu != nullptr)
    throw std::invalid_argument("evaluate_policy: nu given for an MDP");
  check_policy_shape(inst, pi, inst.num_actions, "pi");
  if (nu) check_policy_shape(inst, *nu, inst.num_opp_actions, "nu");

  ValueTable out;
  out.v.assign(inst.horizon + 1, Vec::Zero(inst.num_states));
  out.q.assign(inst.horizon, Mat());
  for (int h = inst.horizon; h >= 1; --h) {
    Mat q = apply_bellman(inst, out.v[h], h);
    for (int x = 0; x < inst.num_states; ++x) {
      double vx = 0.0;
      for (int a = 0; a < inst.num_actions; ++a)
        for (int b = 0; b < inst.num_opp_actions; ++b) {
          double w = pi.probs[h - 1](x, a) *
                     (nu ? nu->probs[h - 1](x, b) : 1.0);
          vx += w * q(x, a * inst.num_opp_actions + b);
        }
      out.v[h - 1](x) = vx;
    }
    out.q[h - 1] = std::move(q);
  }
  return out;
}

std::pair<ValueTable, Policy> optimal_values_mdp(const LinearInstance& inst) {
  if (inst.kind != Kind::Mdp)
    throw std::invalid_argument("optimal_values_mdp: instance is not an MDP");
  check_budget(inst);
  ValueTable out;
  out.v.assign(inst.horizon + 1, Vec::Zero(inst.num_states));
  out.q.assign(inst.horizon, Mat());
  std::vector<std::vector<int>> greedy(inst.horizon);
  for (int h = inst.horizon; h >= 1; --h) {
    Mat q = apply_bellman(inst, out.v[h], h);
    greedy[h - 1].assign(inst.num_states, 0);
    for (int x = 0; x < inst.num_states; ++x) {
      int best = 0;
      for (int a = 1; a < inst.num_actions; ++a)
        if (q(x, a) > q(x, best)) best = a;  // smallest-index tie break
      greedy[h - 1][x] = best;
      out.v[h - 1](x) = q(x, best);
    }
    out.q[h - 1] = std::move(q);
  }
  return {std::move(out), Policy::deterministic(greedy, inst.num_actions)};
}

NashResult ne_values_mg(const LinearInstance& inst, double tol) {
  if (inst.kind != Kind::Game)
    throw std::invalid_argument("ne_values_mg: instance is not a game");
  check_budget(inst);
  NashResult res;
  res.values.v.assign(inst.horizon + 1, Vec::Zero(inst.num_states));
  res.values.q.assign(inst.horizon, Mat());
  res.max_policy.probs.assign(inst.horizon,
                              Mat::Zero(inst.num_states, inst.num_actions));
  res.min_policy.probs.assign(inst.horizon,
                              Mat::Zero(inst.num_states, inst.num_opp_actions));
  for (int h = inst.horizon; h >= 1; --h) {
    Mat q = apply_bellman(inst, res.values.v[h], h);
    for (int x = 0; x < inst.num_states; ++x) {
      Vec row = q.row(x).transpose();
      Mat stage = Eigen::Map<const Mat>(row.data(), inst.num_opp_actions,
                                        inst.num_actions)
                      .transpose();
      MatrixGameSolution sol = solve_matrix_game(stage, tol);
      res.values.v[h - 1](x) = sol.value;
      res.max_policy.probs[h - 1].row(x) = sol.row_strategy.transpose();
      res.min_policy.probs[h - 1].row(x) = sol.col_strategy.transpose();
      res.max_exploitability =
          std::max(res.max_exploitability, sol.exploitability);
    }
    res.values.q[h - 1] = std::move(q);
  }
  return res;
}

std::pair<Policy, ValueTable> best_response(const LinearInstance& inst,
                                            const Policy& fixed, Side side) {
  if (inst.kind != Kind::Game)
    throw std::invalid_argument("best_response: instance is not a game");
  check_budget(inst);
  // `side` is the player of the returned policy; `fixed` belongs to the
  // opponent.
  const int own = side == Side::Max ? inst.num_actions : inst.num_opp_actions;
  const int opp = side == Side::Max ? inst.num_opp_actions : inst.num_actions;
  check_policy_shape(inst, fixed, opp,
                     side == Side::Max ? "fixed(min)" : "fixed(max)");

  ValueTable out;
  out.v.assign(inst.horizon + 1, Vec::Zero(inst.num_states));
  out.q.assign(inst.horizon, Mat());
  std::vector<std::vector<int>> greedy(inst.horizon);
  for (int h = inst.horizon; h >= 1; --h) {
    Mat q = apply_bellman(inst, out.v[h], h);
    greedy[h - 1].assign(inst.num_states, 0);
    for (int x = 0; x < inst.num_states; ++x) {
      // Marginalize the opponent, then optimize over own actions.
      Vec marg = Vec::Zero(own);
      for (int a = 0; a < inst.num_actions; ++a)
        for (int b = 0; b < inst.num_opp_actions; ++b) {
          double qv = q(x, a * inst.num_opp_actions + b);
          if (side == Side::Max)
            marg(a) += fixed.probs[h - 1](x, b) * qv;
          else
            marg(b) += fixed.probs[h - 1](x, a) * qv;
        }
      int best = 0;
      for (int i = 1; i < own; ++i) {
        bool better = side == Side::Max ? marg(i) > marg(best)
                                        : marg(i) < marg(best);
        if (better) best = i;
      }
      greedy[h - 1][x] = best;
      out.v[h - 1](x) = marg(best);
    }
    out.q[h - 1] = std::move(q);
  }
  return {Policy::deterministic(greedy, own), std::move(out)};
}

double duality_gap(const LinearInstance& inst, const Policy& pi,
                   const Policy& nu, int state) {
  if (state < 0 || state >= inst.num_states)
    throw std::invalid_argument("duality_gap: state out of range");
  auto [br_max, upper] = best_response(inst, nu, Side::Max);
  auto [br_min, lower] = best_response(inst, pi, Side::Min);
  (void)br_max;
  (void)br_min;
  return upper.v[0](state) - lower.v[0](state);
}

std::pair<Mat, Mat> conditional_variance(const LinearInstance& inst,
                                         const Vec& v, int h) {
  check_step(inst, h);
  check_budget(inst);
  if (v.size() != inst.num_states)
    throw std::invalid_argument("conditional_variance: V size mismatch");
  Vec w1 = inst.measures[h - 1] * v;
  Vec w2 = inst.measures[h - 1] * v.cwiseProduct(v);
  Vec mean = inst.features.columns.transpose() * w1;
  Vec second = inst.features.columns.transpose() * w2;
  Vec flat_var = second - mean.cwiseProduct(mean);
  Mat var = Eigen::Map<const Mat>(flat_var.data(), inst.joint_actions(),
                                  inst.num_states)
                .transpose();
  Mat truncated = var.cwiseMax(1.0);
  return {std::move(var), std::move(truncated)};
}

std::vector<Vec> state_occupancy(const LinearInstance& inst, const Policy& pi,
                                 const Policy* nu) {
  check_budget(inst);
  if (inst.kind == Kind::Game && nu == nullptr)
    throw std::invalid_argument("state_occupancy: game instance needs nu");
  std::vector<Vec> occ(inst.horizon);
  Vec cur = inst.initial_dist;
  for (int h = 1; h <= inst.horizon; ++h) {
    occ[h - 1] = cur;
    if (h == inst.horizon) break;
    Mat trans = transition_matrix(inst, h);
    Vec next = Vec::Zero(inst.num_states);
    for (int x = 0; x < inst.num_states; ++x) {
      if (cur(x) == 0.0) continue;
      for (int a = 0; a < inst.num_actions; ++a)
        for (int b = 0; b < inst.num_opp_actions; ++b) {
          double w = cur(x) * pi.probs[h - 1](x, a) *
                     (nu ? nu->probs[h - 1](x, b) : 1.0);
          if (w == 0.0) continue;
          next += w * trans.row(inst.features.flat(x, a, b)).transpose();
        }
    }
    cur = next;
  }
  return occ;
}

std::vector<Mat> state_action_occupancy(const LinearInstance& inst,
                                        const Policy& pi, const Policy* nu) {
  std::vector<Vec> marg = state_occupancy(inst, pi, nu);
  std::vector<Mat> occ(inst.horizon);
  for (int h = 1; h <= inst.horizon; ++h) {
    Mat m = Mat::Zero(inst.num_states, inst.joint_actions());
    for (int x = 0; x < inst.num_states; ++x)
      for (int a = 0; a < inst.num_actions; ++a)
        for (int b = 0; b < inst.num_opp_actions; ++b)
          m(x, a * inst.num_opp_actions + b) =
              marg[h - 1](x) * pi.probs[h - 1](x, a) *
              (nu ? nu->probs[h - 1](x, b) : 1.0);
    occ[h - 1] = std::move(m);
  }
  return occ;
}

}  // namespace linorl
