#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linorl/algos_mdp.hpp"
#include "linorl/algos_mg.hpp"
#include "linorl/instances.hpp"

namespace linorl {

enum class Algo { Pevi, Spevi, SpeviPlus, Spmvi, SpmviPlus };

std::string algo_name(Algo a);
Algo algo_from_name(const std::string& name);

// One experiment grid: instance x algorithms x K x seeds.
struct ExperimentConfig {
  GeneratedInstance instance;  // instance plus its behavior policy
  std::vector<Algo> algorithms;
  std::vector<std::size_t> k_grid;        // strictly increasing
  std::vector<std::uint64_t> seeds;
  double lambda = 1.0;
  BonusConfig bonus;
  std::string out_dir;
  double cell_time_budget_s = 300.0;
  bool zero_wall_time = false;  // for byte-identical CSV comparisons
};

struct ResultRecord {
  std::string algo;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double metric = 0.0;  // suboptimality (MDP) or duality gap (MG)
  bool pessimism_event = false;
  double bonus_sum = 0.0;  // sum_h E_{pi*}[Gamma_h]
  bool burn_in = false;
  double wall_time_s = 0.0;
  std::string error;
};

inline constexpr const char* kCsvHeader =
    "algo,K,seed,metric,pessimism_event,bonus_sum,burn_in,wall_time_s,error";

// Runs every (algo, K, seed) cell: collect -> split -> run -> measure against
// the exact oracle. Per-cell failures land in the error column; the sweep
// itself never aborts. Cells are independent, so `jobs` workers give the same
// records as a serial run (records are sorted before writing).
std::vector<ResultRecord> sweep(const ExperimentConfig& cfg, int jobs = 1);

std::string records_to_csv(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> records_from_csv(const std::string& text);

struct SlopeFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
};

// Least-squares fit of log(median metric) vs log K. Requires >= 3 distinct
// K values with positive medians.
std::optional<SlopeFit> fit_log_log_slope(const std::vector<double>& ks,
                                          const std::vector<double>& medians);

// Per-algo summary: median/IQR curves, slope +- stderr, pessimism frequency
// and burn-in coverage, serialized as JSON.
std::string report_from_csv(const std::string& csv_text);

// Runs one algorithm on one freshly collected dataset and measures it
// against the exact oracle; used by both `run` and `sweep`.
ResultRecord run_cell(const GeneratedInstance& gen, Algo algo, std::size_t k,
                      std::uint64_t seed, double lambda,
                      const BonusConfig& bonus, std::string* bundle_json);

}  // namespace linorl
