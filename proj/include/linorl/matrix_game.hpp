#pragma once

#include "linorl/model.hpp"

namespace linorl {

struct MatrixGameSolution {
  Vec row_strategy;  // maximizer
  Vec col_strategy;  // minimizer
  double value = 0.0;
  double exploitability = 0.0;  // max_a (Q y)_a - min_b (x^T Q)_b
};

// Exact value and equilibrium strategies of the zero-sum matrix game with
// payoff Q (row player maximizes). Solved as a dense LP with Bland's rule,
// so identical inputs give identical outputs. Throws on non-finite payoffs
// or if the certificate exceeds tol.
MatrixGameSolution solve_matrix_game(const Mat& payoff, double tol = 1e-9);

}  // namespace linorl
