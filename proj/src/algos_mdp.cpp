#include "linorl/algos_mdp.hpp"

#include <cmath>
#include <stdexcept>

#include "linorl/regression.hpp"
#include "linorl/variance.hpp"

namespace linorl {

namespace {

void check_mdp_dataset(const Dataset& ds, const FeatureMap& features) {
  if (ds.size() < 1) throw std::invalid_argument("algorithm: empty dataset");
  if (ds.kind != Kind::Mdp)
    throw std::invalid_argument("algorithm: expected an MDP dataset");
  if (features.num_opp_actions != 1)
    throw std::invalid_argument("algorithm: feature map is not an MDP map");
  (void)features;
}

// Greedy step: fills policy/V from the clipped Q table (smallest-index ties).
void greedy_from_q(const Mat& q_hat, Mat& policy_row_out, Vec& v_out) {
  const int S = static_cast<int>(q_hat.rows());
  const int A = static_cast<int>(q_hat.cols());
  policy_row_out = Mat::Zero(S, A);
  v_out = Vec::Zero(S);
  for (int x = 0; x < S; ++x) {
    int best = 0;
    for (int a = 1; a < A; ++a)
      if (q_hat(x, a) > q_hat(x, best)) best = a;
    policy_row_out(x, best) = 1.0;
    v_out(x) = q_hat(x, best);
  }
}

struct BackwardState {
  PolicyBundle bundle;
  int S, A, d, H;
};

BackwardState init_bundle(const std::string& algo, const FeatureMap& features,
                          int horizon, double lambda, const BonusConfig& cfg) {
  BackwardState st;
  st.S = features.num_states;
  st.A = features.num_actions;
  st.d = features.d;
  st.H = horizon;
  st.bundle.algo = algo;
  st.bundle.lambda = lambda;
  st.bundle.config = cfg;
  st.bundle.policy.probs.assign(horizon, Mat());
  st.bundle.values.v.assign(horizon + 1, Vec::Zero(st.S));
  st.bundle.values.q.assign(horizon, Mat());
  st.bundle.bonus.assign(horizon, Mat());
  st.bundle.t_hat.assign(horizon, Mat());
  st.bundle.w_main.assign(horizon, Vec());
  st.bundle.rows_per_step.assign(horizon, 0);
  st.bundle.beta.assign(horizon, 0.0);
  return st;
}

}  // namespace

double burn_in_threshold(int d, int horizon, double delta, double kappa) {
  double h = horizon;
  double first = 512.0 * h * std::log(4.0 * h * d / (delta * kappa * kappa));
  double second = d * std::pow(h, 13) / std::pow(kappa, 4);
  return std::max(first, second);
}

double resolve_kappa(const BonusConfig& cfg, const Dataset& ds,
                     const FeatureMap& features) {
  switch (cfg.kappa_source) {
    case KappaSource::Supplied:
    case KappaSource::Exact:
      if (!(cfg.kappa > 0.0))
        throw std::invalid_argument(
            "bonus config: exact/supplied kappa must be positive (the runner "
            "fills it from the coverage oracle)");
      return cfg.kappa;
    case KappaSource::Empirical: {
      double k = coverage_kappa_empirical(ds, features).kappa;
      if (!(k > 0.0))
        throw std::invalid_argument(
            "bonus config: empirical coverage is singular; supply kappa");
      return k;
    }
  }
  throw std::logic_error("unreachable kappa source");
}

PolicyBundle pevi(const Dataset& ds, const FeatureMap& features, double lambda,
                  const BonusConfig& cfg) {
  check_mdp_dataset(ds, features);
  if (ds.tag.base != SplitBase::Whole || ds.tag.is_folded())
    throw std::invalid_argument("pevi: expects the untagged (whole) dataset");
  if (!(lambda > 0.0)) throw std::invalid_argument("pevi: lambda must be > 0");

  BackwardState st = init_bundle("pevi", features, ds.horizon, lambda, cfg);
  PolicyBundle& out = st.bundle;
  const double k = static_cast<double>(ds.size());
  // Uniform-concentration radius of the shared-dataset baseline.
  const double beta =
      cfg.c_hoeff * st.d * st.H * std::sqrt(std::log(2.0 * st.d * k / cfg.delta));

  for (int h = st.H; h >= 1; --h) {
    RidgeAccumulator acc(st.d, lambda);
    for (const auto& traj : ds.trajectories) {
      const Step& s = traj.steps[h - 1];
      acc.add(features.feature(s.x, s.a), s.r + out.values.v[h](s.xn), 1.0);
    }
    RidgeFit fit = acc.finish();
    Mat t_hat(st.S, st.A), gamma(st.S, st.A), q_hat(st.S, st.A);
    for (int x = 0; x < st.S; ++x)
      for (int a = 0; a < st.A; ++a) {
        Vec phi = features.feature(x, a);
        t_hat(x, a) = phi.dot(fit.w);
        gamma(x, a) = beta * fit.elliptical_norm(phi);
        q_hat(x, a) =
            clip_to(t_hat(x, a) - gamma(x, a), 0.0, double(st.H - h + 1));
      }
    greedy_from_q(q_hat, out.policy.probs[h - 1], out.values.v[h - 1]);
    out.values.q[h - 1] = std::move(q_hat);
    out.bonus[h - 1] = std::move(gamma);
    out.t_hat[h - 1] = std::move(t_hat);
    out.w_main[h - 1] = fit.w;
    out.rows_per_step[h - 1] = fit.n_rows;
    out.beta[h - 1] = beta;
  }
  return out;
}

PolicyBundle spevi(const Dataset& ds, const FeatureMap& features,
                   double lambda, const BonusConfig& cfg) {
  check_mdp_dataset(ds, features);
  if (!(lambda > 0.0)) throw std::invalid_argument("spevi: lambda must be > 0");
  HFoldSplit folds = split_h_fold(ds, ds.horizon);

  BackwardState st = init_bundle("spevi", features, ds.horizon, lambda, cfg);
  PolicyBundle& out = st.bundle;

  for (int h = st.H; h >= 1; --h) {
    const Dataset& fold = folds.parts[h - 1];
    const double n = static_cast<double>(fold.size());
    // Hoeffding radius with R = H, L = 1, t = K/H, union bound over steps.
    const double beta =
        cfg.c_hoeff * st.H *
        std::sqrt(st.d * std::log((lambda + n) * st.H / (lambda * cfg.delta)));

    RidgeAccumulator acc(st.d, lambda);
    for (const auto& traj : fold.trajectories) {
      const Step& s = traj.steps[h - 1];
      acc.add(features.feature(s.x, s.a), s.r + out.values.v[h](s.xn), 1.0);
    }
    RidgeFit fit = acc.finish();
    Mat t_hat(st.S, st.A), gamma(st.S, st.A), q_hat(st.S, st.A);
    for (int x = 0; x < st.S; ++x)
      for (int a = 0; a < st.A; ++a) {
        Vec phi = features.feature(x, a);
        t_hat(x, a) = phi.dot(fit.w);
        gamma(x, a) = beta * fit.elliptical_norm(phi);
        q_hat(x, a) =
            clip_to(t_hat(x, a) - gamma(x, a), 0.0, double(st.H - h + 1));
      }
    greedy_from_q(q_hat, out.policy.probs[h - 1], out.values.v[h - 1]);
    out.values.q[h - 1] = std::move(q_hat);
    out.bonus[h - 1] = std::move(gamma);
    out.t_hat[h - 1] = std::move(t_hat);
    out.w_main[h - 1] = fit.w;
    out.rows_per_step[h - 1] = fit.n_rows;
    out.beta[h - 1] = beta;
  }
  return out;
}

PolicyBundle spevi_plus(const Dataset& dref, const Dataset& d0,
                        const Dataset& d1, const Dataset& d0prime,
                        const FeatureMap& features, double lambda,
                        const BonusConfig& cfg) {
  check_mdp_dataset(dref, features);
  check_mdp_dataset(d0, features);
  check_mdp_dataset(d1, features);
  check_mdp_dataset(d0prime, features);
  if (dref.tag.base != SplitBase::Ref || d0.tag.base != SplitBase::D0 ||
      d1.tag.base != SplitBase::D1 || d0prime.tag.base != SplitBase::D0Prime)
    throw std::invalid_argument(
        "spevi_plus: datasets must carry the ref/d0/d1/d0prime split tags");
  if (dref.size() != d0.size() || d0.size() != d1.size() ||
      d1.size() != d0prime.size())
    throw std::invalid_argument("spevi_plus: the four parts must be equal size");
  if (!(lambda > 0.0))
    throw std::invalid_argument("spevi_plus: lambda must be > 0");

  BackwardState st = init_bundle("spevi_plus", features, d0.horizon, lambda, cfg);
  PolicyBundle& out = st.bundle;
  const int H = st.H, S = st.S, A = st.A, d = st.d;

  const double kappa = resolve_kappa(cfg, d0, features);
  out.kappa_used = kappa;
  if (!(lambda < kappa))
    out.warnings.push_back("lambda >= kappa: outside the 0 < lambda < kappa "
                           "range of the analysis");
  const double k0 = static_cast<double>(d0.size());
  const double k1 = static_cast<double>(d1.size());
  const double burn_in = burn_in_threshold(d, H, cfg.delta, kappa);
  if (k0 < burn_in)
    out.warnings.push_back("below burn-in threshold K > " +
                           std::to_string(burn_in));

  // One failure budget split over the three concentration families
  // (reference SPEVI, variance fits, main bonuses).
  const double delta_part = cfg.delta / 3.0;
  BonusConfig ref_cfg = cfg;
  ref_cfg.delta = delta_part;
  PolicyBundle ref = spevi(dref, features, lambda, ref_cfg);

  // Bernstein radius for the reference fit (t = K0, L = 1, R = H, union
  // bound over steps) and the constant advantage bonus.
  const double log_bern = std::log(4.0 * k0 * k0 * H / delta_part);
  const double bern_radius =
      cfg.c_bern * (8.0 * cfg.sigma_bar *
                        std::sqrt(d * std::log(1.0 + k0 / (lambda * d)) * log_bern) +
                    4.0 * H * log_bern);
  const double b0_tail = 4.0 * lambda * std::pow(double(H), 3) * std::sqrt(double(d)) /
                         (k0 * kappa);
  const double b1 = cfg.c_adv * d * std::pow(double(H), 3) *
                    std::log(4.0 * k1 * k1 * H / delta_part) / (k1 * kappa);

  HFoldSplit adv_folds = split_h_fold(d1, H);
  out.w_adv.assign(H, Vec());

  for (int h = H; h >= 1; --h) {
    // Variance estimator from D0' targeting the reference values.
    VarianceEstimator var_est =
        fit_variance_estimator(d0prime, h, ref.values.v[h], lambda, features);

    // Variance-weighted reference fit on D0; regression target uses the next
    // state x_{h+1}.
    RidgeAccumulator ref_acc(d, lambda);
    for (const auto& traj : d0.trajectories) {
      const Step& s = traj.steps[h - 1];
      Vec phi = features.feature(s.x, s.a);
      ref_acc.add(phi, s.r + ref.values.v[h](s.xn), var_est.evaluate(phi));
    }
    RidgeFit ref_fit = ref_acc.finish();

    // Unweighted advantage fit on the h-th fold of D1.
    RidgeAccumulator adv_acc(d, lambda);
    for (const auto& traj : adv_folds.parts[h - 1].trajectories) {
      const Step& s = traj.steps[h - 1];
      adv_acc.add(features.feature(s.x, s.a),
                  s.r + out.values.v[h](s.xn) - ref.values.v[h](s.xn), 1.0);
    }
    RidgeFit adv_fit = adv_acc.finish();

    Mat t_hat(S, A), gamma(S, A), q_hat(S, A);
    for (int x = 0; x < S; ++x)
      for (int a = 0; a < A; ++a) {
        Vec phi = features.feature(x, a);
        double b0 = bern_radius * ref_fit.elliptical_norm(phi) + b0_tail;
        t_hat(x, a) = phi.dot(ref_fit.w) + phi.dot(adv_fit.w);
        gamma(x, a) = b0 + b1;
        q_hat(x, a) =
            clip_to(t_hat(x, a) - gamma(x, a), 0.0, double(H - h + 1));
      }
    greedy_from_q(q_hat, out.policy.probs[h - 1], out.values.v[h - 1]);
    out.values.q[h - 1] = std::move(q_hat);
    out.bonus[h - 1] = std::move(gamma);
    out.t_hat[h - 1] = std::move(t_hat);
    out.w_main[h - 1] = ref_fit.w;
    out.w_adv[h - 1] = adv_fit.w;
    out.rows_per_step[h - 1] = ref_fit.n_rows;
    out.beta[h - 1] = bern_radius;
  }
  return out;
}

}  // namespace linorl
