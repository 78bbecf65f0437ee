#pragma once

#include "linorl/data.hpp"
#include "linorl/model.hpp"

namespace linorl {

// Conditional-variance estimator: two ridge fits against V^2 and V on held
// out data, combined as max{1, clip(phi^T beta2, [0,H^2]) -
// clip(phi^T beta1, [0,H])^2}. Output is always in [1, H^2].
struct VarianceEstimator {
  Vec beta2;  // second-moment coefficients
  Vec beta1;  // first-moment coefficients
  int horizon = 0;

  double evaluate(const Vec& phi) const;
  template <typename Col>
  double evaluate_col(const Col& phi) const {
    return evaluate(Vec(phi));
  }
};

// Fits both regressions on the step-h slice of `held_out` (one shared design
// matrix, sigma^2 == 1), targeting v_target(x_{h+1}) and its square.
// v_target must live in [0, H]. The dataset must not be the one whose
// regression will consume the weights; passing a D0-tagged part throws.
VarianceEstimator fit_variance_estimator(const Dataset& held_out, int h,
                                         const Vec& v_target, double lambda,
                                         const FeatureMap& features);

}  // namespace linorl
