#include "linorl/algos_mg.hpp"

#include <cmath>
#include <stdexcept>

#include "linorl/regression.hpp"
#include "linorl/variance.hpp"

namespace linorl {

namespace {

void check_mg_dataset(const Dataset& ds, const FeatureMap& features) {
  if (ds.size() < 1) throw std::invalid_argument("algorithm: empty dataset");
  if (ds.kind != Kind::Game)
    throw std::invalid_argument("algorithm: expected a game dataset");
  if (features.num_opp_actions < 1)
    throw std::invalid_argument("algorithm: bad feature map");
}

struct MgState {
  GameBundle bundle;
  int S, A, B, d, H;
};

MgState init_bundle(const std::string& algo, const FeatureMap& features,
                    int horizon, double lambda, const BonusConfig& cfg) {
  MgState st;
  st.S = features.num_states;
  st.A = features.num_actions;
  st.B = features.num_opp_actions;
  st.d = features.d;
  st.H = horizon;
  st.bundle.algo = algo;
  st.bundle.lambda = lambda;
  st.bundle.config = cfg;
  st.bundle.max_policy.probs.assign(horizon, Mat());
  st.bundle.min_policy.probs.assign(horizon, Mat());
  st.bundle.lower.v.assign(horizon + 1, Vec::Zero(st.S));
  st.bundle.upper.v.assign(horizon + 1, Vec::Zero(st.S));
  st.bundle.lower.q.assign(horizon, Mat());
  st.bundle.upper.q.assign(horizon, Mat());
  st.bundle.lower_bonus.assign(horizon, Mat());
  st.bundle.upper_bonus.assign(horizon, Mat());
  st.bundle.lower_t_hat.assign(horizon, Mat());
  st.bundle.upper_t_hat.assign(horizon, Mat());
  st.bundle.rows_per_step.assign(horizon, 0);
  return st;
}

// Solves the two stage games for step h and fills policies and V-envelopes.
void stage_nash(MgState& st, int h, const Mat& q_lower, const Mat& q_upper) {
  GameBundle& out = st.bundle;
  out.max_policy.probs[h - 1] = Mat::Zero(st.S, st.A);
  out.min_policy.probs[h - 1] = Mat::Zero(st.S, st.B);
  for (int x = 0; x < st.S; ++x) {
    Vec row_lo = q_lower.row(x).transpose();
    Vec row_up = q_upper.row(x).transpose();
    Mat stage_lo =
        Eigen::Map<const Mat>(row_lo.data(), st.B, st.A).transpose();
    Mat stage_up =
        Eigen::Map<const Mat>(row_up.data(), st.B, st.A).transpose();
    MatrixGameSolution lo = solve_matrix_game(stage_lo);
    MatrixGameSolution up = solve_matrix_game(stage_up);
    out.max_policy.probs[h - 1].row(x) = lo.row_strategy.transpose();
    out.min_policy.probs[h - 1].row(x) = up.col_strategy.transpose();
    out.lower.v[h - 1](x) = lo.value;
    out.upper.v[h - 1](x) = up.value;
    out.max_stage_exploitability = std::max(
        {out.max_stage_exploitability, lo.exploitability, up.exploitability});
  }
}

}  // namespace

GameBundle spmvi(const Dataset& ds, const FeatureMap& features, double lambda,
                 const BonusConfig& cfg) {
  check_mg_dataset(ds, features);
  if (!(lambda > 0.0)) throw std::invalid_argument("spmvi: lambda must be > 0");
  HFoldSplit folds = split_h_fold(ds, ds.horizon);

  MgState st = init_bundle("spmvi", features, ds.horizon, lambda, cfg);
  GameBundle& out = st.bundle;
  const int H = st.H, S = st.S, A = st.A, B = st.B, d = st.d;

  for (int h = H; h >= 1; --h) {
    const Dataset& fold = folds.parts[h - 1];
    const double n = static_cast<double>(fold.size());
    const double beta =
        cfg.c_hoeff * H *
        std::sqrt(d * std::log((lambda + n) * H / (lambda * cfg.delta)));

    // Both players share one Lambda_h; only the regression targets differ.
    RidgeAccumulator acc_lo(d, lambda);
    RidgeAccumulator acc_up(d, lambda);
    for (const auto& traj : fold.trajectories) {
      const Step& s = traj.steps[h - 1];
      Vec phi = features.feature(s.x, s.a, s.b);
      acc_lo.add(phi, s.r + out.lower.v[h](s.xn), 1.0);
      acc_up.add(phi, s.r + out.upper.v[h](s.xn), 1.0);
    }
    RidgeFit fit_lo = acc_lo.finish();
    RidgeFit fit_up = acc_up.finish();

    Mat t_lo(S, A * B), t_up(S, A * B), gamma(S, A * B);
    Mat q_lo(S, A * B), q_up(S, A * B);
    for (int x = 0; x < S; ++x)
      for (int a = 0; a < A; ++a)
        for (int b = 0; b < B; ++b) {
          Vec phi = features.feature(x, a, b);
          const int c = a * B + b;
          double g = beta * fit_lo.elliptical_norm(phi);
          t_lo(x, c) = phi.dot(fit_lo.w);
          t_up(x, c) = phi.dot(fit_up.w);
          gamma(x, c) = g;
          q_lo(x, c) = clip_to(t_lo(x, c) - g, 0.0, double(H - h + 1));
          q_up(x, c) = clip_to(t_up(x, c) + g, 0.0, double(H - h + 1));
        }
    stage_nash(st, h, q_lo, q_up);
    out.lower.q[h - 1] = std::move(q_lo);
    out.upper.q[h - 1] = std::move(q_up);
    out.lower_bonus[h - 1] = gamma;
    out.upper_bonus[h - 1] = std::move(gamma);
    out.lower_t_hat[h - 1] = std::move(t_lo);
    out.upper_t_hat[h - 1] = std::move(t_up);
    out.rows_per_step[h - 1] = fit_lo.n_rows;
  }
  return out;
}

GameBundle spmvi_plus(const Dataset& dref, const Dataset& d0,
                      const Dataset& d1, const Dataset& d0prime,
                      const FeatureMap& features, double lambda,
                      const BonusConfig& cfg) {
  check_mg_dataset(dref, features);
  check_mg_dataset(d0, features);
  check_mg_dataset(d1, features);
  check_mg_dataset(d0prime, features);
  if (dref.tag.base != SplitBase::Ref || d0.tag.base != SplitBase::D0 ||
      d1.tag.base != SplitBase::D1 || d0prime.tag.base != SplitBase::D0Prime)
    throw std::invalid_argument(
        "spmvi_plus: datasets must carry the ref/d0/d1/d0prime split tags");
  if (dref.size() != d0.size() || d0.size() != d1.size() ||
      d1.size() != d0prime.size())
    throw std::invalid_argument("spmvi_plus: the four parts must be equal size");
  if (!(lambda > 0.0))
    throw std::invalid_argument("spmvi_plus: lambda must be > 0");

  MgState st = init_bundle("spmvi_plus", features, d0.horizon, lambda, cfg);
  GameBundle& out = st.bundle;
  const int H = st.H, S = st.S, A = st.A, B = st.B, d = st.d;

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

  const double delta_part = cfg.delta / 3.0;
  BonusConfig ref_cfg = cfg;
  ref_cfg.delta = delta_part;
  GameBundle ref = spmvi(dref, features, lambda, ref_cfg);

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

  for (int h = H; h >= 1; --h) {
    // One variance estimator and one weighted reference fit per envelope.
    VarianceEstimator var_lo =
        fit_variance_estimator(d0prime, h, ref.lower.v[h], lambda, features);
    VarianceEstimator var_up =
        fit_variance_estimator(d0prime, h, ref.upper.v[h], lambda, features);

    RidgeAccumulator ref_lo(d, lambda), ref_up(d, lambda);
    for (const auto& traj : d0.trajectories) {
      const Step& s = traj.steps[h - 1];
      Vec phi = features.feature(s.x, s.a, s.b);
      ref_lo.add(phi, s.r + ref.lower.v[h](s.xn), var_lo.evaluate(phi));
      ref_up.add(phi, s.r + ref.upper.v[h](s.xn), var_up.evaluate(phi));
    }
    RidgeFit fit_lo = ref_lo.finish();
    RidgeFit fit_up = ref_up.finish();

    // Shared W_h for the two advantage fits.
    RidgeAccumulator adv_lo(d, lambda), adv_up(d, lambda);
    for (const auto& traj : adv_folds.parts[h - 1].trajectories) {
      const Step& s = traj.steps[h - 1];
      Vec phi = features.feature(s.x, s.a, s.b);
      adv_lo.add(phi, s.r + out.lower.v[h](s.xn) - ref.lower.v[h](s.xn), 1.0);
      adv_up.add(phi, s.r + out.upper.v[h](s.xn) - ref.upper.v[h](s.xn), 1.0);
    }
    RidgeFit adv_fit_lo = adv_lo.finish();
    RidgeFit adv_fit_up = adv_up.finish();

    Mat t_lo(S, A * B), t_up(S, A * B);
    Mat gam_lo(S, A * B), gam_up(S, A * B);
    Mat q_lo(S, A * B), q_up(S, A * B);
    for (int x = 0; x < S; ++x)
      for (int a = 0; a < A; ++a)
        for (int b = 0; b < B; ++b) {
          Vec phi = features.feature(x, a, b);
          const int c = a * B + b;
          double b0_lo = bern_radius * fit_lo.elliptical_norm(phi) + b0_tail;
          double b0_up = bern_radius * fit_up.elliptical_norm(phi) + b0_tail;
          t_lo(x, c) = phi.dot(fit_lo.w) + phi.dot(adv_fit_lo.w);
          t_up(x, c) = phi.dot(fit_up.w) + phi.dot(adv_fit_up.w);
          gam_lo(x, c) = b0_lo + b1;
          gam_up(x, c) = b0_up + b1;
          // The paper leaves these unclipped; clipping keeps the value-range
          // invariants and matches the MDP treatment.
          q_lo(x, c) = clip_to(t_lo(x, c) - gam_lo(x, c), 0.0, double(H - h + 1));
          q_up(x, c) = clip_to(t_up(x, c) + gam_up(x, c), 0.0, double(H - h + 1));
        }
    stage_nash(st, h, q_lo, q_up);
    out.lower.q[h - 1] = std::move(q_lo);
    out.upper.q[h - 1] = std::move(q_up);
    out.lower_bonus[h - 1] = std::move(gam_lo);
    out.upper_bonus[h - 1] = std::move(gam_up);
    out.lower_t_hat[h - 1] = std::move(t_lo);
    out.upper_t_hat[h - 1] = std::move(t_up);
    out.rows_per_step[h - 1] = fit_lo.n_rows;
  }
  return out;
}

}  // namespace linorl
