#include "linorl/instances.hpp"

#include <cmath>
#include <stdexcept>

#include "linorl/data.hpp"
#include "linorl/rng.hpp"

namespace linorl {

LinearInstance tabular_embed(const TabularModel& tab, const std::string& id) {
  const int S = tab.num_states, A = tab.num_actions, B = tab.num_opp_actions;
  if (S < 1 || A < 1 || B < 1 || tab.horizon < 1)
    throw std::invalid_argument("tabular_embed: bad sizes");
  if (static_cast<int>(tab.transitions.size()) != tab.horizon ||
      static_cast<int>(tab.rewards.size()) != tab.horizon)
    throw std::invalid_argument("tabular_embed: per-step tables missing");

  const int d = S * A * B;
  LinearInstance inst;
  inst.kind = tab.kind;
  inst.horizon = tab.horizon;
  inst.num_states = S;
  inst.num_actions = A;
  inst.num_opp_actions = B;
  inst.features.d = d;
  inst.features.num_states = S;
  inst.features.num_actions = A;
  inst.features.num_opp_actions = B;
  inst.features.columns = Mat::Identity(d, d);  // phi(x,a,b) = e_{flat(x,a,b)}
  inst.initial_dist = tab.initial_dist.size() == S
                          ? tab.initial_dist
                          : Vec::Constant(S, 1.0 / S);
  inst.id = id;

  for (int h = 1; h <= tab.horizon; ++h) {
    const Mat& trans = tab.transitions[h - 1];
    const Mat& rew = tab.rewards[h - 1];
    if (trans.rows() != d || trans.cols() != S || rew.rows() != S ||
        rew.cols() != A * B)
      throw std::invalid_argument("tabular_embed: table shape mismatch");
    for (long row = 0; row < trans.rows(); ++row) {
      if (trans.row(row).minCoeff() < 0.0 ||
          std::abs(trans.row(row).sum() - 1.0) > 1e-9)
        throw std::invalid_argument("tabular_embed: invalid kernel row");
    }
    // One-hot features make M_h the kernel transposed and theta the flat
    // reward table.
    inst.measures.push_back(trans);
    Vec theta(d);
    for (int x = 0; x < S; ++x)
      for (int a = 0; a < A; ++a)
        for (int b = 0; b < B; ++b)
          theta(inst.features.flat(x, a, b)) = rew(x, a * B + b);
    inst.thetas.push_back(std::move(theta));
  }
  require_valid(inst);
  return inst;
}

GeneratedInstance random_linear_instance(Kind kind, int d, int horizon,
                                         int num_states, int num_actions,
                                         int num_opp_actions,
                                         std::uint64_t seed) {
  if (kind == Kind::Mdp) num_opp_actions = 1;
  if (d < 1 || horizon < 1 || num_states < 1 || num_actions < 1 ||
      num_opp_actions < 1)
    throw std::invalid_argument("random_linear_instance: bad sizes");

  const long table = static_cast<long>(num_states) * num_actions * num_opp_actions;
  for (int attempt = 0; attempt < 100; ++attempt) {
    rng::Stream stream(seed, 0x9e3779b9u + attempt);

    LinearInstance inst;
    inst.kind = kind;
    inst.horizon = horizon;
    inst.num_states = num_states;
    inst.num_actions = num_actions;
    inst.num_opp_actions = num_opp_actions;
    inst.features.d = d;
    inst.features.num_states = num_states;
    inst.features.num_actions = num_actions;
    inst.features.num_opp_actions = num_opp_actions;
    inst.initial_dist = Vec::Constant(num_states, 1.0 / num_states);
    inst.id = "random-" + std::string(kind == Kind::Mdp ? "mdp" : "mg") + "-d" +
              std::to_string(d) + "-s" + std::to_string(seed);

    // Simplex features: each phi(x,a,b) is a point on the d-simplex, so
    // |phi|_2 <= 1 and transitions below are convex mixtures of d anchors.
    Mat cols(d, table);
    for (long c = 0; c < table; ++c) {
      double sum = 0.0;
      for (int i = 0; i < d; ++i) {
        double e = -std::log(1.0 - stream.next_unit());
        cols(i, c) = e;
        sum += e;
      }
      cols.col(c) /= sum;
    }
    inst.features.columns = cols;

    for (int h = 1; h <= horizon; ++h) {
      // Anchor next-state distributions, one per feature coordinate.
      Mat anchors(d, num_states);
      for (int i = 0; i < d; ++i) {
        double sum = 0.0;
        for (int x = 0; x < num_states; ++x) {
          double e = -std::log(1.0 - stream.next_unit());
          anchors(i, x) = e;
          sum += e;
        }
        anchors.row(i) /= sum;
      }
      inst.measures.push_back(anchors);
      Vec theta(d);
      for (int i = 0; i < d; ++i) theta(i) = stream.next_unit();
      inst.thetas.push_back(std::move(theta));
    }

    GeneratedInstance gen;
    gen.instance = std::move(inst);
    gen.behavior_max = Policy::uniform(horizon, num_states, num_actions);
    if (kind == Kind::Game)
      gen.behavior_min = Policy::uniform(horizon, num_states, num_opp_actions);

    require_valid(gen.instance);
    CoverageResult cov = coverage_kappa_exact(
        gen.instance, gen.behavior_max,
        kind == Kind::Game ? &gen.behavior_min : nullptr);
    if (cov.kappa > 0.01) return gen;
  }
  throw std::runtime_error(
      "random_linear_instance: coverage floor 0.01 unreachable after 100 "
      "resamples");
}

GeneratedInstance random_tabular_instance(Kind kind, int num_states,
                                          int num_actions, int num_opp_actions,
                                          int horizon, std::uint64_t seed,
                                          double max_reward) {
  if (kind == Kind::Mdp) num_opp_actions = 1;
  if (max_reward <= 0.0 || max_reward > 1.0)
    throw std::invalid_argument("random_tabular_instance: max_reward in (0,1]");
  rng::Stream stream(seed, 0x7ab);
  TabularModel tab;
  tab.kind = kind;
  tab.horizon = horizon;
  tab.num_states = num_states;
  tab.num_actions = num_actions;
  tab.num_opp_actions = num_opp_actions;
  tab.initial_dist = Vec::Constant(num_states, 1.0 / num_states);
  const int rows = num_states * num_actions * num_opp_actions;
  for (int h = 0; h < horizon; ++h) {
    Mat trans(rows, num_states);
    for (int r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (int x = 0; x < num_states; ++x) {
        double e = -std::log(1.0 - stream.next_unit());
        trans(r, x) = e;
        sum += e;
      }
      trans.row(r) /= sum;
    }
    Mat rew(num_states, num_actions * num_opp_actions);
    for (int x = 0; x < num_states; ++x)
      for (int c = 0; c < num_actions * num_opp_actions; ++c)
        rew(x, c) = max_reward * stream.next_unit();
    tab.transitions.push_back(std::move(trans));
    tab.rewards.push_back(std::move(rew));
  }
  GeneratedInstance gen;
  gen.instance = tabular_embed(
      tab, "random-tabular-" + std::string(kind == Kind::Mdp ? "mdp" : "mg") +
               "-s" + std::to_string(seed));
  gen.behavior_max = Policy::uniform(horizon, num_states, num_actions);
  if (kind == Kind::Game)
    gen.behavior_min = Policy::uniform(horizon, num_states, num_opp_actions);
  return gen;
}

Eigen::VectorXi lower_bound_action(int index, int d) {
  const int m = d - 2;
  Eigen::VectorXi a(m);
  for (int i = 0; i < m; ++i) {
    a(i) = index % 3 - 1;
    index /= 3;
  }
  return a;
}

int lower_bound_action_index(const Eigen::VectorXi& action) {
  int idx = 0;
  for (int i = static_cast<int>(action.size()) - 1; i >= 0; --i)
    idx = idx * 3 + (action(i) + 1);
  return idx;
}

namespace {

// States are indexed 0 -> s=+1, 1 -> s=-1 throughout this family.
std::vector<Eigen::VectorXi> resolve_u(const LowerBoundSpec& spec) {
  if (!spec.u.empty()) {
    if (static_cast<int>(spec.u.size()) != spec.horizon)
      throw std::invalid_argument("lower_bound_family: u needs H entries");
    for (const auto& uh : spec.u) {
      if (uh.size() != spec.d - 2 || (uh.cwiseAbs().array() != 1).any())
        throw std::invalid_argument(
            "lower_bound_family: u entries must be in {-1,+1}^(d-2)");
    }
    return spec.u;
  }
  std::vector<Eigen::VectorXi> u(spec.horizon);
  rng::Stream stream(spec.seed, 0x10f2c);
  for (int h = 0; h < spec.horizon; ++h) {
    u[h].resize(spec.d - 2);
    for (int i = 0; i < spec.d - 2; ++i)
      u[h](i) = stream.next_u64() & 1 ? 1 : -1;
  }
  return u;
}

}  // namespace

LowerBoundAnalytic lower_bound_analytic(const LowerBoundSpec& spec, Kind kind) {
  if (spec.d < 3)
    throw std::invalid_argument("lower_bound_family: need d >= 3");
  if (spec.horizon < 1)
    throw std::invalid_argument("lower_bound_family: need H >= 1");
  const double zeta_max = 1.0 / std::sqrt(3.0 * spec.d);
  if (spec.zeta < 0.0 || spec.zeta > zeta_max + 1e-12)
    throw std::invalid_argument("lower_bound_family: zeta outside [0, 1/sqrt(3d)]");

  LowerBoundAnalytic an;
  an.d = spec.d;
  an.horizon = spec.horizon;
  an.zeta = spec.zeta;
  an.u = resolve_u(spec);
  an.chain = Mat::Constant(2, 2, 0.5);

  // V*_h(s) = s/sqrt(6) + (H-h+1) * zeta (d-2) / sqrt(2d): the optimal action
  // is u_h every step and the chain is uniform regardless of actions.
  const int m = spec.d - 2;
  const double per_step = spec.zeta * m / std::sqrt(2.0 * spec.d);
  an.v_star.resize(spec.horizon);
  for (int h = 1; h <= spec.horizon; ++h) {
    an.v_star[h - 1] = Vec(2);
    an.v_star[h - 1](0) = 1.0 / std::sqrt(6.0) + (spec.horizon - h + 1) * per_step;
    an.v_star[h - 1](1) = -1.0 / std::sqrt(6.0) + (spec.horizon - h + 1) * per_step;
  }

  // E[phi phi^T] under the behavior policy, by enumerating its d atoms:
  // a = e_j with probability 1/d and a = 0 with probability 2/d, states
  // uniform. Identical for the MDP variant (features never see b).
  (void)kind;
  an.second_moment = Mat::Zero(spec.d, spec.d);
  for (int j = 0; j < m; ++j)
    an.second_moment(j, j) = 1.0 / (spec.d * 2.0 * spec.d);
  for (int j = 0; j < m; ++j) {
    double cross = 1.0 / (2.0 * spec.d) / std::sqrt(2.0 * spec.d) / std::sqrt(2.0);
    an.second_moment(j, m) = an.second_moment(m, j) = cross;
    an.second_moment(j, m + 1) = an.second_moment(m + 1, j) = cross;
  }
  an.second_moment(m, m) = 0.25;
  an.second_moment(m + 1, m + 1) = 0.25;
  return an;
}

double LowerBoundAnalytic::gap_from_mean_actions(
    const std::vector<Vec>& mean_actions) const {
  if (static_cast<int>(mean_actions.size()) != horizon)
    throw std::invalid_argument("gap_from_mean_actions: need H mean actions");
  double total = 0.0;
  for (int h = 1; h <= horizon; ++h) {
    if (mean_actions[h - 1].size() != d - 2)
      throw std::invalid_argument("gap_from_mean_actions: dimension mismatch");
    total += (d - 2) - mean_actions[h - 1].dot(u[h - 1].cast<double>());
  }
  return zeta / std::sqrt(2.0 * d) * total;
}

std::vector<Vec> mean_actions_on_grid(const LowerBoundAnalytic& analytic,
                                      const Policy& pi, int state) {
  const int m = analytic.d - 2;
  const int num_actions = static_cast<int>(std::pow(3.0, m) + 0.5);
  std::vector<Vec> mean(analytic.horizon);
  for (int h = 1; h <= analytic.horizon; ++h) {
    Vec acc = Vec::Zero(m);
    for (int x = 0; x < 2; ++x) {
      // Step 1 conditions on the given start state; the uniform chain makes
      // later steps uniform over states.
      double wx = h == 1 ? (x == state ? 1.0 : 0.0) : 0.5;
      if (wx == 0.0) continue;
      for (int a = 0; a < num_actions; ++a) {
        double p = pi.probs[h - 1](x, a);
        if (p != 0.0)
          acc += wx * p * lower_bound_action(a, analytic.d).cast<double>();
      }
    }
    mean[h - 1] = acc;
  }
  return mean;
}

LowerBoundFamily lower_bound_family(const LowerBoundSpec& spec, Kind kind) {
  LowerBoundAnalytic an = lower_bound_analytic(spec, kind);
  if (spec.d > 6)
    throw std::invalid_argument(
        "lower_bound_family: enumerated mode needs d <= 6 (3^(d-2) actions); "
        "use lower_bound_analytic for larger d");
  if (spec.d < 4)
    throw std::invalid_argument(
        "lower_bound_family: d=3 makes |mu(S)| = 2 > sqrt(3), violating the "
        "measure-norm bound; use d >= 4");

  const int m = spec.d - 2;
  int na = 1;
  for (int i = 0; i < m; ++i) na *= 3;
  const int nb = kind == Kind::Game ? na : 1;
  const int S = 2;
  const double inv_sqrt2d = 1.0 / std::sqrt(2.0 * spec.d);

  LinearInstance inst;
  inst.kind = kind;
  inst.horizon = spec.horizon;
  inst.num_states = S;
  inst.num_actions = na;
  inst.num_opp_actions = nb;
  inst.features.d = spec.d;
  inst.features.num_states = S;
  inst.features.num_actions = na;
  inst.features.num_opp_actions = nb;
  inst.reward_noise = {RewardNoise::Type::Gaussian, 1.0};
  inst.initial_dist = Vec::Constant(2, 0.5);
  inst.id = "lower-bound-" + std::string(kind == Kind::Mdp ? "mdp" : "mg") +
            "-d" + std::to_string(spec.d) + "-H" + std::to_string(spec.horizon);

  // phi(s, a, b) = (a / sqrt(2d), 1{s=+1}/sqrt(2), 1{s=-1}/sqrt(2)); the
  // opponent's action never enters.
  Mat cols(spec.d, static_cast<long>(S) * na * nb);
  for (int x = 0; x < S; ++x)
    for (int a = 0; a < na; ++a) {
      Vec phi = Vec::Zero(spec.d);
      phi.head(m) = lower_bound_action(a, spec.d).cast<double>() * inv_sqrt2d;
      phi(m + (x == 0 ? 0 : 1)) = 1.0 / std::sqrt(2.0);
      for (int b = 0; b < nb; ++b)
        cols.col(inst.features.flat(x, a, b)) = phi;
    }
  inst.features.columns = std::move(cols);

  // mu_h(+1) = mu_h(-1) = (0, 1/sqrt(2), 1/sqrt(2)): the uniform chain.
  Mat measure = Mat::Zero(spec.d, S);
  measure(m, 0) = measure(m, 1) = 1.0 / std::sqrt(2.0);
  measure(m + 1, 0) = measure(m + 1, 1) = 1.0 / std::sqrt(2.0);

  for (int h = 1; h <= spec.horizon; ++h) {
    inst.measures.push_back(measure);
    Vec theta(spec.d);
    theta.head(m) = an.u[h - 1].cast<double>().array() * spec.zeta;
    theta(m) = 1.0 / std::sqrt(3.0);
    theta(m + 1) = -1.0 / std::sqrt(3.0);
    inst.thetas.push_back(std::move(theta));
  }

  LowerBoundFamily fam;
  fam.analytic = std::move(an);

  // Behavior: a = e_j with probability 1/d each, a = 0 with probability 2/d;
  // the opponent always plays 0.
  Vec max_row = Vec::Zero(na);
  Eigen::VectorXi zero_action = Eigen::VectorXi::Zero(m);
  max_row(lower_bound_action_index(zero_action)) = 2.0 / spec.d;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXi ej = Eigen::VectorXi::Zero(m);
    ej(j) = 1;
    max_row(lower_bound_action_index(ej)) = 1.0 / spec.d;
  }
  fam.behavior_max.probs.assign(spec.horizon, Mat::Zero(S, na));
  for (int h = 0; h < spec.horizon; ++h)
    for (int x = 0; x < S; ++x)
      fam.behavior_max.probs[h].row(x) = max_row.transpose();
  if (kind == Kind::Game) {
    fam.behavior_min.probs.assign(spec.horizon, Mat::Zero(S, nb));
    for (int h = 0; h < spec.horizon; ++h)
      for (int x = 0; x < S; ++x)
        fam.behavior_min.probs[h](x, lower_bound_action_index(zero_action)) = 1.0;
  }

  fam.instance = std::move(inst);
  require_valid(fam.instance);
  return fam;
}

}  // namespace linorl
