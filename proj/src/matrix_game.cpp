#include "linorl/matrix_game.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace linorl {

namespace {

constexpr double kPivotTol = 1e-12;

// Primal simplex with Bland's rule on
//   max 1^T q  s.t.  Q' q <= 1, q >= 0,
// where Q' is the payoff shifted entrywise positive. Slack variables give the
// initial basis. At the optimum, q/|q|_1 is the minimizer's strategy, the
// duals on the slack rows give the maximizer's, and the game value is
// 1/|q|_1 - shift.
struct TableauResult {
  Vec row_strategy;
  Vec col_strategy;
  double value;
};

TableauResult solve_shifted(const Mat& payoff) {
  const int na = static_cast<int>(payoff.rows());
  const int nb = static_cast<int>(payoff.cols());

  double shift = 1.0 - payoff.minCoeff();
  Mat q = payoff.array() + shift;  // entries >= 1

  // Tableau: columns [q-vars | slacks | rhs], rows [constraints | objective].
  const int cols = nb + na + 1;
  Mat t = Mat::Zero(na + 1, cols);
  t.block(0, 0, na, nb) = q;
  t.block(0, nb, na, na) = Mat::Identity(na, na);
  t.col(cols - 1).head(na).setOnes();
  t.row(na).head(nb).setConstant(-1.0);  // minimize -1^T q

  std::vector<int> basis(na);
  for (int i = 0; i < na; ++i) basis[i] = nb + i;

  const int max_iters = 50 * (na + nb + 10);
  for (int iter = 0; iter < max_iters; ++iter) {
    // Bland: entering variable = smallest index with negative reduced cost.
    int enter = -1;
    for (int j = 0; j < nb + na; ++j) {
      if (t(na, j) < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;  // optimal

    // Ratio test, ties by smallest basis index (Bland).
    int leave = -1;
    double best_ratio = 0.0;
    for (int i = 0; i < na; ++i) {
      if (t(i, enter) > kPivotTol) {
        double ratio = t(i, cols - 1) / t(i, enter);
        if (leave < 0 || ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol && basis[i] < basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
    }
    if (leave < 0)
      throw std::runtime_error("matrix game LP is unbounded");  // cannot happen

    double pivot = t(leave, enter);
    t.row(leave) /= pivot;
    for (int i = 0; i <= na; ++i) {
      if (i == leave) continue;
      double f = t(i, enter);
      if (f != 0.0) t.row(i) -= f * t.row(leave);
    }
    basis[leave] = enter;
  }

  Vec qvar = Vec::Zero(nb);
  for (int i = 0; i < na; ++i)
    if (basis[i] < nb) qvar(basis[i]) = t(i, cols - 1);
  double total = qvar.sum();
  if (total <= 0.0)
    throw std::runtime_error("matrix game LP degenerate: zero objective");

  TableauResult res;
  res.col_strategy = qvar / total;
  // Duals: reduced costs of the slack columns.
  Vec p(na);
  for (int i = 0; i < na; ++i) p(i) = t(na, nb + i);
  double psum = p.sum();
  if (psum <= 0.0)
    throw std::runtime_error("matrix game LP degenerate: zero dual");
  res.row_strategy = p / psum;
  res.value = 1.0 / total - shift;
  return res;
}

}  // namespace

MatrixGameSolution solve_matrix_game(const Mat& payoff, double tol) {
  if (payoff.rows() < 1 || payoff.cols() < 1)
    throw std::invalid_argument("solve_matrix_game: empty payoff matrix");
  if (!payoff.allFinite())
    throw std::invalid_argument("solve_matrix_game: non-finite payoff");

  TableauResult t = solve_shifted(payoff);

  MatrixGameSolution sol;
  sol.row_strategy = t.row_strategy;
  sol.col_strategy = t.col_strategy;
  sol.value = t.value;
  double best_row = (payoff * sol.col_strategy).maxCoeff();
  double best_col = (sol.row_strategy.transpose() * payoff).minCoeff();
  sol.exploitability = best_row - best_col;
  if (sol.exploitability > tol)
    throw std::runtime_error("matrix game solver certificate " +
                             std::to_string(sol.exploitability) +
                             " exceeds tolerance");
  return sol;
}

}  // namespace linorl
