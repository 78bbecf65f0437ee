#include <random>

#include "doctest.h"
#include "linorl/regression.hpp"
#include "oracles.hpp"

using namespace linorl;

namespace {

std::vector<RidgeRow> random_rows(int n, int d, unsigned seed,
                                  double sigma_max = 9.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> sig(1.0, sigma_max);
  std::vector<RidgeRow> rows;
  for (int i = 0; i < n; ++i) {
    RidgeRow row;
    row.phi = Vec(d);
    for (int j = 0; j < d; ++j) row.phi(j) = unif(rng);
    row.y = 2.0 * unif(rng);
    row.sigma2 = sig(rng);
    rows.push_back(std::move(row));
  }
  return rows;
}

// Normal-equations oracle via Gauss-Jordan elimination, assembled
// independently of RidgeAccumulator.
Vec elimination_solution(const std::vector<RidgeRow>& rows, int d,
                         double lambda) {
  Mat a = lambda * Mat::Identity(d, d);
  Vec b = Vec::Zero(d);
  for (const auto& r : rows) {
    a += r.phi * r.phi.transpose() / r.sigma2;
    b += r.phi * (r.y / r.sigma2);
  }
  return oracles::gauss_solve(a, b);
}

}  // namespace

TEST_CASE("weighted_ridge: empty rows give w = 0, cov = lambda I") {
  RidgeFit fit = weighted_ridge({}, 3, 0.5);
  CHECK(fit.w.norm() == 0.0);
  CHECK((fit.cov - 0.5 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.n_rows == 0);
}

TEST_CASE("weighted_ridge: one-row hand solve") {
  RidgeRow row;
  row.phi = Vec(2);
  row.phi << 1.0, 0.0;
  row.y = 2.0;
  row.sigma2 = 1.0;
  RidgeFit fit = weighted_ridge({row}, 2, 1.0);
  CHECK(fit.cov(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(fit.cov(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fit.w(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.w(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("weighted_ridge matches the elimination oracle") {
  auto rows = random_rows(50, 6, 42);
  RidgeFit fit = weighted_ridge(rows, 6, 0.7);
  Vec oracle = elimination_solution(rows, 6, 0.7);
  CHECK((fit.w - oracle).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("weighted_ridge input validation") {
  auto rows = random_rows(3, 2, 1);
  CHECK_THROWS_AS(weighted_ridge(rows, 2, 0.0), std::invalid_argument);
  rows[1].sigma2 = 0.5;
  CHECK_THROWS_AS(weighted_ridge(rows, 2, 1.0), std::invalid_argument);
  rows[1].sigma2 = 1.0;
  rows[2].y = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(weighted_ridge(rows, 2, 1.0), std::invalid_argument);
}

TEST_CASE("elliptical_norm: identity covariance and zero probe") {
  RidgeFit fit = weighted_ridge({}, 4, 0.25);
  Vec phi = Vec::Zero(4);
  CHECK(fit.elliptical_norm(phi) == 0.0);
  phi(2) = 1.0;  // unit norm
  CHECK(fit.elliptical_norm(phi) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("elliptical_norm matches the explicit-inverse oracle") {
  auto rows = random_rows(30, 5, 123);
  RidgeFit fit = weighted_ridge(rows, 5, 1.3);
  Mat inv = oracles::gauss_inverse(fit.cov);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    Vec phi(5);
    for (int j = 0; j < 5; ++j) phi(j) = unif(rng);
    double direct = std::sqrt(phi.dot(inv * phi));
    CHECK(fit.elliptical_norm(phi) == doctest::Approx(direct).epsilon(1e-10));
    CHECK(fit.elliptical_norm(phi) <= phi.norm() / std::sqrt(1.3) + 1e-12);
  }
}

TEST_CASE("property: adding a row never inflates the ellipsoid") {
  auto rows = random_rows(20, 4, 77);
  RidgeFit before = weighted_ridge(rows, 4, 1.0);
  auto extra = random_rows(1, 4, 78);
  rows.push_back(extra[0]);
  RidgeFit after = weighted_ridge(rows, 4, 1.0);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    Vec phi(4);
    for (int j = 0; j < 4; ++j) phi(j) = unif(rng);
    CHECK(after.elliptical_norm(phi) <= before.elliptical_norm(phi) + 1e-12);
  }
}

TEST_CASE("property: unit weights coincide with unweighted ridge") {
  auto rows = random_rows(25, 3, 55);
  for (auto& r : rows) r.sigma2 = 1.0;
  RidgeFit weighted = weighted_ridge(rows, 3, 2.0);
  // Unweighted normal equations, assembled without the 1/sigma^2 factor.
  Mat a = 2.0 * Mat::Identity(3, 3);
  Vec b = Vec::Zero(3);
  for (const auto& r : rows) {
    a += r.phi * r.phi.transpose();
    b += r.phi * r.y;
  }
  Vec unweighted = oracles::gauss_solve(a, b);
  CHECK((weighted.w - unweighted).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("property: row order does not change the fit") {
  auto rows = random_rows(40, 5, 66);
  RidgeFit forward = weighted_ridge(rows, 5, 0.9);
  std::reverse(rows.begin(), rows.end());
  RidgeFit backward = weighted_ridge(rows, 5, 0.9);
  CHECK((forward.w - backward.w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((forward.cov - backward.cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cov stays above lambda and symmetric") {
  auto rows = random_rows(64, 4, 88, 25.0);
  RidgeFit fit = weighted_ridge(rows, 4, 0.3);
  CHECK((fit.cov - fit.cov.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Mat> es(fit.cov, Eigen::EigenvaluesOnly);
  CHECK(es.eigenvalues().minCoeff() >= 0.3 - 1e-10);
}
