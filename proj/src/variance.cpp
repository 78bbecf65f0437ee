#include "linorl/variance.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

namespace linorl {

double VarianceEstimator::evaluate(const Vec& phi) const {
  double h2 = static_cast<double>(horizon) * horizon;
  double second = clip_to(phi.dot(beta2), 0.0, h2);
  double first = clip_to(phi.dot(beta1), 0.0, static_cast<double>(horizon));
  // Clip before subtracting; the order matters and is part of the contract.
  return std::max(1.0, second - first * first);
}

VarianceEstimator fit_variance_estimator(const Dataset& held_out, int h,
                                         const Vec& v_target, double lambda,
                                         const FeatureMap& features) {
  if (held_out.tag.base == SplitBase::D0)
    throw std::invalid_argument(
        "variance estimator must not be fit on the D0 part that consumes it");
  if (h < 1 || h > held_out.horizon)
    throw std::invalid_argument("fit_variance_estimator: step out of range");
  if (v_target.size() != features.num_states)
    throw std::invalid_argument("fit_variance_estimator: target size mismatch");
  if (v_target.minCoeff() < -1e-9 ||
      v_target.maxCoeff() > held_out.horizon + 1e-9)
    throw std::invalid_argument(
        "fit_variance_estimator: target outside [0, H]");
  if (!(lambda > 0.0))
    throw std::invalid_argument("fit_variance_estimator: lambda must be > 0");
  if (held_out.trajectories.empty())
    throw std::invalid_argument("fit_variance_estimator: empty step slice");

  // Both regressions see the identical design matrix with sigma^2 == 1, so
  // one Gram factorization serves the two right-hand sides.
  const int d = features.d;
  Mat gram = Mat::Zero(d, d);
  Vec rhs1 = Vec::Zero(d);
  Vec rhs2 = Vec::Zero(d);
  for (const auto& traj : held_out.trajectories) {
    const Step& s = traj.steps[h - 1];
    auto phi = features.col(s.x, s.a, std::max(s.b, 0));
    gram.selfadjointView<Eigen::Lower>().rankUpdate(phi, 1.0);
    double val = v_target(s.xn);
    rhs1 += phi * val;
    rhs2 += phi * (val * val);
  }
  Mat cov = Mat(gram.selfadjointView<Eigen::Lower>()) +
            lambda * Mat::Identity(d, d);
  Eigen::LLT<Mat> chol(cov);
  if (chol.info() != Eigen::Success)
    throw std::runtime_error("fit_variance_estimator: factorization failed");

  VarianceEstimator est;
  est.beta1 = chol.solve(rhs1);
  est.beta2 = chol.solve(rhs2);
  est.horizon = held_out.horizon;
  return est;
}

}  // namespace linorl
