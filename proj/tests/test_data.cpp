#include <set>

#include "doctest.h"
#include "linorl/data.hpp"
#include "linorl/instances.hpp"
#include "oracles.hpp"

using namespace linorl;

namespace {

// 2-state 2-action uniform-everything tabular MDP.
TabularModel uniform_2x2(int horizon) {
  TabularModel tab;
  tab.kind = Kind::Mdp;
  tab.horizon = horizon;
  tab.num_states = 2;
  tab.num_actions = 2;
  tab.initial_dist = Vec::Constant(2, 0.5);
  for (int h = 0; h < horizon; ++h) {
    tab.transitions.push_back(Mat::Constant(4, 2, 0.5));
    tab.rewards.push_back(Mat::Constant(2, 2, 0.25));
  }
  return tab;
}

}  // namespace

TEST_CASE("collect: deterministic single-path MDP gives identical trajectories") {
  TabularModel tab;
  tab.kind = Kind::Mdp;
  tab.horizon = 3;
  tab.num_states = 2;
  tab.num_actions = 1;
  tab.initial_dist = Vec::Zero(2);
  tab.initial_dist(0) = 1.0;
  Mat trans(2, 2);
  trans << 0, 1, 1, 0;  // deterministic swap
  for (int h = 0; h < 3; ++h) {
    tab.transitions.push_back(trans);
    tab.rewards.push_back(Mat::Constant(2, 1, 0.5));
  }
  LinearInstance inst = tabular_embed(tab);
  Dataset ds = collect(inst, Policy::uniform(3, 2, 1), nullptr, 16, 4);
  for (const auto& traj : ds.trajectories) {
    CHECK(traj.steps[0].x == 0);
    CHECK(traj.steps[0].xn == 1);
    CHECK(traj.steps[1].xn == 0);
    CHECK(traj.steps[2].xn == 1);
    for (const auto& s : traj.steps) CHECK(s.r == 0.5);
  }
}

TEST_CASE("collect: empirical frequencies match exact occupancy propagation") {
  GeneratedInstance gen = random_linear_instance(Kind::Mdp, 4, 3, 3, 2, 1, 13);
  const LinearInstance& inst = gen.instance;
  const std::size_t k = 100000;
  Dataset ds = collect(inst, gen.behavior_max, nullptr, k, 2718);
  std::vector<Mat> occ = state_action_occupancy(inst, gen.behavior_max);
  for (int h = 1; h <= 3; ++h) {
    Mat counts = Mat::Zero(3, 2);
    for (const auto& traj : ds.trajectories)
      counts(traj.steps[h - 1].x, traj.steps[h - 1].a) += 1.0;
    counts /= static_cast<double>(k);
    for (int x = 0; x < 3; ++x)
      for (int a = 0; a < 2; ++a) {
        double p = occ[h - 1](x, a);
        double se = std::sqrt(p * (1 - p) / k);
        CHECK(std::abs(counts(x, a) - p) <= 3.0 * se + 1e-6);
      }
  }
}

TEST_CASE("collect: same seed twice gives byte-identical datasets") {
  GeneratedInstance gen = random_linear_instance(Kind::Mdp, 3, 2, 2, 2, 1, 5);
  Dataset a = collect(gen.instance, gen.behavior_max, nullptr, 64, 99);
  Dataset b = collect(gen.instance, gen.behavior_max, nullptr, 64, 99);
  CHECK(dataset_to_jsonl(a) == dataset_to_jsonl(b));
  Dataset c = collect(gen.instance, gen.behavior_max, nullptr, 64, 100);
  CHECK(dataset_to_jsonl(a) != dataset_to_jsonl(c));
}

TEST_CASE("collect: rewards stay in [0,1] without observation noise") {
  GeneratedInstance gen = random_linear_instance(Kind::Mdp, 4, 3, 3, 2, 1, 21);
  Dataset ds = collect(gen.instance, gen.behavior_max, nullptr, 256, 7);
  for (const auto& traj : ds.trajectories)
    for (const auto& s : traj.steps) {
      CHECK(s.r >= 0.0);
      CHECK(s.r <= 1.0);
    }
}

TEST_CASE("collect validates the behavior policy") {
  LinearInstance inst = tabular_embed(oracles::small_mdp());
  Policy bad = Policy::uniform(2, 3, 2);  // wrong horizon
  CHECK_THROWS(collect(inst, bad, nullptr, 4, 0));
  LinearInstance mg = tabular_embed(oracles::small_mg());
  CHECK_THROWS_AS(collect(mg, Policy::uniform(2, 2, 2), nullptr, 4, 0),
                  std::invalid_argument);
}

TEST_CASE("split_h_fold: exact sizes and the floor rule") {
  LinearInstance inst = tabular_embed(uniform_2x2(3));
  Policy uni = Policy::uniform(3, 2, 2);

  Dataset exact = collect(inst, uni, nullptr, 3, 1);
  HFoldSplit s1 = split_h_fold(exact, 3);
  CHECK(s1.discarded == 0);
  for (const auto& part : s1.parts) CHECK(part.size() == 1);

  Dataset plus_one = collect(inst, uni, nullptr, 7, 1);
  HFoldSplit s2 = split_h_fold(plus_one, 3);
  CHECK(s2.discarded == 1);
  for (const auto& part : s2.parts) CHECK(part.size() == 2);

  Dataset tiny = collect(inst, uni, nullptr, 2, 1);
  CHECK_THROWS_AS(split_h_fold(tiny, 3), std::invalid_argument);
}

TEST_CASE("split_h_fold: parts plus discards partition the trajectory ids") {
  LinearInstance inst = tabular_embed(uniform_2x2(3));
  Dataset ds = collect(inst, Policy::uniform(3, 2, 2), nullptr, 17, 2);
  HFoldSplit split = split_h_fold(ds, 3);
  std::set<std::uint64_t> seen;
  std::size_t total = 0;
  for (const auto& part : split.parts) {
    for (const auto& traj : part.trajectories) {
      CHECK(seen.insert(traj.index).second);  // pairwise disjoint
      ++total;
    }
    CHECK(part.tag.is_folded());
  }
  CHECK(total + split.discarded == ds.size());
  CHECK_THROWS_AS(split_h_fold(split.parts[0], 3), std::invalid_argument);
}

TEST_CASE("split_four_way: quarters, discards, disjointness") {
  LinearInstance inst = tabular_embed(uniform_2x2(2));
  Policy uni = Policy::uniform(2, 2, 2);

  Dataset four = collect(inst, uni, nullptr, 4, 3);
  FourWaySplit s = split_four_way(four);
  CHECK(s.effective_k == 1);
  CHECK(s.discarded == 0);

  Dataset nine = collect(inst, uni, nullptr, 9, 3);
  FourWaySplit s9 = split_four_way(nine);
  CHECK(s9.effective_k == 2);
  CHECK(s9.discarded == 1);
  CHECK(s9.ref.size() == 2);
  CHECK(s9.d0.size() == 2);
  CHECK(s9.d1.size() == 2);
  CHECK(s9.d0prime.size() == 2);

  std::set<std::uint64_t> seen;
  for (const Dataset* part : {&s9.ref, &s9.d0, &s9.d1, &s9.d0prime})
    for (const auto& traj : part->trajectories)
      CHECK(seen.insert(traj.index).second);

  CHECK(s9.ref.tag.base == SplitBase::Ref);
  CHECK(s9.d0.tag.base == SplitBase::D0);
  CHECK(s9.d1.tag.base == SplitBase::D1);
  CHECK(s9.d0prime.tag.base == SplitBase::D0Prime);

  Dataset three = collect(inst, uni, nullptr, 3, 3);
  CHECK_THROWS_AS(split_four_way(three), std::invalid_argument);
}

TEST_CASE("coverage: hand-computed kappa for one-hot uniform instance") {
  // Uniform behavior and uniform transitions: every (x,a) has occupancy 1/4,
  // and one-hot features make G_h diagonal.
  LinearInstance inst = tabular_embed(uniform_2x2(2));
  CoverageResult cov = coverage_kappa_exact(inst, Policy::uniform(2, 2, 2));
  CHECK(cov.kappa == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("coverage: d=1 constant feature has kappa 1") {
  LinearInstance inst;
  inst.kind = Kind::Mdp;
  inst.horizon = 2;
  inst.num_states = 1;
  inst.num_actions = 1;
  inst.features.d = 1;
  inst.features.num_states = 1;
  inst.features.num_actions = 1;
  inst.features.columns = Mat::Ones(1, 1);
  inst.measures.assign(2, Mat::Ones(1, 1));
  inst.thetas.assign(2, Vec::Constant(1, 0.5));
  inst.initial_dist = Vec::Ones(1);
  CoverageResult cov = coverage_kappa_exact(inst, Policy::uniform(2, 1, 1));
  CHECK(cov.kappa == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coverage: empirical close to exact at K = 1e5") {
  GeneratedInstance gen = random_linear_instance(Kind::Mdp, 4, 2, 3, 2, 1, 37);
  CoverageResult exact =
      coverage_kappa_exact(gen.instance, gen.behavior_max);
  Dataset ds = collect(gen.instance, gen.behavior_max, nullptr, 100000, 11);
  CoverageResult emp = coverage_kappa_empirical(ds, gen.instance.features);
  CHECK(std::abs(exact.kappa - emp.kappa) < 0.05);
  // Empirical second-moment must be PSD: lambda_min >= 0 up to roundoff.
  for (double lm : emp.lambda_min) CHECK(lm >= -1e-10);
}

TEST_CASE("dataset JSONL round trip") {
  GeneratedInstance gen = random_linear_instance(Kind::Game, 3, 2, 2, 2, 2, 43);
  Dataset ds = collect(gen.instance, gen.behavior_max, &gen.behavior_min, 32, 17);
  std::string text = dataset_to_jsonl(ds);
  Dataset back = dataset_from_jsonl(text);
  CHECK(dataset_to_jsonl(back) == text);
  CHECK(back.size() == ds.size());
  CHECK(back.kind == Kind::Game);
  CHECK(back.tag.base == SplitBase::Whole);
  for (std::size_t t = 0; t < ds.size(); ++t)
    for (int h = 0; h < ds.horizon; ++h) {
      CHECK(back.trajectories[t].steps[h].x == ds.trajectories[t].steps[h].x);
      CHECK(back.trajectories[t].steps[h].r == ds.trajectories[t].steps[h].r);
      CHECK(back.trajectories[t].steps[h].b == ds.trajectories[t].steps[h].b);
    }
}

TEST_CASE("split tags parse and print") {
  SplitTag tag;
  tag.base = SplitBase::D1;
  tag.fold = 2;
  tag.num_folds = 5;
  CHECK(tag.str() == "d1/h2of5");
  SplitTag back = SplitTag::parse("d1/h2of5");
  CHECK(back.base == SplitBase::D1);
  CHECK(back.fold == 2);
  CHECK(back.num_folds == 5);
  CHECK(SplitTag::parse("whole").base == SplitBase::Whole);
  CHECK_THROWS_AS(SplitTag::parse("bogus"), std::invalid_argument);
}
