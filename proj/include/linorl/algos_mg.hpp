#pragma once

#include "linorl/algos_mdp.hpp"
#include "linorl/matrix_game.hpp"

namespace linorl {

// Output of the Markov-game algorithms: a mixed policy pair, the lower/upper
// value envelopes, and the same per-step diagnostics as PolicyBundle, one set
// per envelope.
struct GameBundle {
  std::string algo;
  Policy max_policy;  // pi-hat
  Policy min_policy;  // nu-hat
  ValueTable lower;   // V-underbar / Q-underbar
  ValueTable upper;   // V-overbar / Q-overbar

  std::vector<Mat> lower_bonus, upper_bonus;
  std::vector<Mat> lower_t_hat, upper_t_hat;
  std::vector<std::size_t> rows_per_step;
  double max_stage_exploitability = 0.0;
  double kappa_used = 0.0;
  double lambda = 0.0;
  BonusConfig config;
  std::vector<std::string> warnings;
};

// H-fold split minimax value iteration: shared Lambda_h, LCB/UCB estimates
// for the two players, stage Nash solves per state.
GameBundle spmvi(const Dataset& ds, const FeatureMap& features, double lambda,
                 const BonusConfig& cfg);

// Two-sided reference-advantage variant on a four-way split; envelopes from
// SPMVI on D_ref, one variance estimator and one weighted fit per envelope.
GameBundle spmvi_plus(const Dataset& dref, const Dataset& d0,
                      const Dataset& d1, const Dataset& d0prime,
                      const FeatureMap& features, double lambda,
                      const BonusConfig& cfg);

}  // namespace linorl
