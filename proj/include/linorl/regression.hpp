#pragma once

#include <Eigen/Cholesky>
#include <cstddef>
#include <vector>

#include "linorl/model.hpp"

namespace linorl {

// Weighted ridge solution w = Lambda^{-1} sum_k phi_k y_k / sigma_k^2 with
// Lambda = sum_k phi_k phi_k^T / sigma_k^2 + lambda I. The Cholesky factor of
// Lambda is kept so elliptical-norm probes reuse one factorization.
struct RidgeFit {
  Vec w;
  double lambda = 0.0;
  Mat cov;  // Lambda (or Z-hat / W / Z*), symmetric positive definite
  Eigen::LLT<Mat> chol;
  std::size_t n_rows = 0;

  // sqrt(phi^T cov^{-1} phi); always in [0, |phi|/sqrt(lambda)].
  double elliptical_norm(const Vec& phi) const;
};

struct RidgeRow {
  Vec phi;
  double y = 0.0;
  double sigma2 = 1.0;
};

// Streaming builder: rows are accumulated in call order with compensated
// summation on the right-hand side (sigma^2 may span [1, H^2], which
// otherwise costs digits).
class RidgeAccumulator {
 public:
  RidgeAccumulator(int dim, double lambda);

  void add(const Vec& phi, double y, double sigma2 = 1.0);
  template <typename Col>
  void add_col(const Col& phi, double y, double sigma2 = 1.0) {
    add(Vec(phi), y, sigma2);
  }

  std::size_t rows() const { return n_rows_; }
  RidgeFit finish() const;

 private:
  int dim_;
  double lambda_;
  Mat gram_;
  Vec rhs_, rhs_comp_;  // Kahan-compensated right-hand side
  std::size_t n_rows_ = 0;
};

// Closed-form weighted ridge regression. Requires lambda > 0 and every
// sigma2 >= 1 (the variance estimator's floor); throws otherwise.
RidgeFit weighted_ridge(const std::vector<RidgeRow>& rows, int dim,
                        double lambda);

}  // namespace linorl
