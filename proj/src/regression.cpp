#include "linorl/regression.hpp"

#include <cmath>
#include <stdexcept>

namespace linorl {

double RidgeFit::elliptical_norm(const Vec& phi) const {
  if (phi.size() != w.size())
    throw std::invalid_argument("elliptical_norm: dimension mismatch");
  // phi^T cov^{-1} phi = |L^{-1} phi|^2 with cov = L L^T.
  Vec half = chol.matrixL().solve(phi);
  return half.norm();
}

RidgeAccumulator::RidgeAccumulator(int dim, double lambda)
    : dim_(dim),
      lambda_(lambda),
      gram_(Mat::Zero(dim, dim)),
      rhs_(Vec::Zero(dim)),
      rhs_comp_(Vec::Zero(dim)) {
  if (dim < 1) throw std::invalid_argument("ridge: dimension must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("ridge: lambda must be > 0");
}

void RidgeAccumulator::add(const Vec& phi, double y, double sigma2) {
  if (phi.size() != dim_)
    throw std::invalid_argument("ridge: row dimension mismatch");
  if (!(sigma2 >= 1.0))
    throw std::invalid_argument("ridge: sigma^2 must be >= 1 (got " +
                                std::to_string(sigma2) + ")");
  if (!phi.allFinite() || !std::isfinite(y) || !std::isfinite(sigma2))
    throw std::invalid_argument("ridge: non-finite input row");
  double inv = 1.0 / sigma2;
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(phi, inv);
  // Kahan summation on the right-hand side; sigma^2 spans [1, H^2] so naive
  // accumulation loses digits when magnitudes differ.
  for (int i = 0; i < dim_; ++i) {
    double term = phi(i) * y * inv - rhs_comp_(i);
    double sum = rhs_(i) + term;
    rhs_comp_(i) = (sum - rhs_(i)) - term;
    rhs_(i) = sum;
  }
  ++n_rows_;
}

RidgeFit RidgeAccumulator::finish() const {
  RidgeFit fit;
  fit.lambda = lambda_;
  fit.n_rows = n_rows_;
  fit.cov = Mat(gram_.selfadjointView<Eigen::Lower>()) +
            lambda_ * Mat::Identity(dim_, dim_);
  fit.chol.compute(fit.cov);
  if (fit.chol.info() != Eigen::Success)
    throw std::runtime_error("ridge: covariance factorization failed");
  fit.w = fit.chol.solve(rhs_);

  double residual = (fit.cov * fit.w - rhs_).cwiseAbs().maxCoeff();
  if (residual > 1e-9 * (1.0 + fit.w.norm()))
    throw std::runtime_error("ridge: solve residual " +
                             std::to_string(residual) + " too large");
  return fit;
}

RidgeFit weighted_ridge(const std::vector<RidgeRow>& rows, int dim,
                        double lambda) {
  RidgeAccumulator acc(dim, lambda);
  for (const auto& row : rows) acc.add(row.phi, row.y, row.sigma2);
  return acc.finish();
}

}  // namespace linorl
