#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linorl/model.hpp"

namespace linorl {

struct Step {
  int x = 0;
  int a = 0;
  int b = -1;  // -1 for MDP datasets
  double r = 0.0;
  int xn = 0;
};

struct Trajectory {
  std::uint64_t index = 0;  // position in the parent collection
  std::vector<Step> steps;
};

enum class SplitBase { Whole, Ref, D0, D1, D0Prime };

// Split bookkeeping. fold >= 0 marks an H-fold part (fold j of num_folds).
struct SplitTag {
  SplitBase base = SplitBase::Whole;
  int fold = -1;
  int num_folds = 0;

  bool is_folded() const { return fold >= 0; }
  std::string str() const;
  static SplitTag parse(const std::string& s);
};

struct Dataset {
  std::string instance_id;
  std::string behavior_id;
  std::uint64_t seed = 0;
  int horizon = 0;
  Kind kind = Kind::Mdp;
  SplitTag tag;
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
};

// Draws K i.i.d. trajectories under the behavior policy. behavior_min is
// required iff the instance is a game. Trajectory tau consumes only the
// counter stream (seed, tau), so identical inputs give byte-identical
// datasets and prefixes are stable under K changes.
Dataset collect(const LinearInstance& instance, const Policy& behavior_max,
                const Policy* behavior_min, std::size_t num_trajectories,
                std::uint64_t seed, const std::string& behavior_id = "behavior");

struct HFoldSplit {
  std::vector<Dataset> parts;  // part j holds indices == j (mod H)
  std::size_t discarded = 0;
};

// Splits into H equal parts of floor(K/H) trajectories each; the remainder is
// discarded. Rejects datasets that are already H-folded.
HFoldSplit split_h_fold(const Dataset& ds, int num_folds);

struct FourWaySplit {
  Dataset ref, d0, d1, d0prime;
  std::size_t effective_k = 0;  // per-part trajectory count
  std::size_t discarded = 0;
};

// Equal quarters by stride (index mod 4) over the first 4*floor(K/4)
// trajectories.
FourWaySplit split_four_way(const Dataset& ds);

struct CoverageResult {
  double kappa = 0.0;
  std::vector<double> lambda_min;  // per step
};

// kappa = min_h lambda_min(E_{d_h^b}[phi phi^T]) via exact occupancy
// propagation.
CoverageResult coverage_kappa_exact(const LinearInstance& instance,
                                    const Policy& behavior_max,
                                    const Policy* behavior_min = nullptr);

// Empirical counterpart using (1/K) sum_tau phi phi^T per step.
CoverageResult coverage_kappa_empirical(const Dataset& ds,
                                        const FeatureMap& features);

// JSON-lines dataset file: one metadata line, then one trajectory per line.
// Floats carry 17 significant digits.
void save_dataset(const Dataset& ds, const std::string& path);
std::string dataset_to_jsonl(const Dataset& ds);
Dataset load_dataset(const std::string& path);
Dataset dataset_from_jsonl(const std::string& text);

}  // namespace linorl
