#include "linorl/data.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "linorl/rng.hpp"
#include "linorl/serialize.hpp"

namespace linorl {

std::string SplitTag::str() const {
  std::string base_str;
  switch (base) {
    case SplitBase::Whole: base_str = "whole"; break;
    case SplitBase::Ref: base_str = "ref"; break;
    case SplitBase::D0: base_str = "d0"; break;
    case SplitBase::D1: base_str = "d1"; break;
    case SplitBase::D0Prime: base_str = "d0prime"; break;
  }
  if (is_folded())
    base_str += "/h" + std::to_string(fold) + "of" + std::to_string(num_folds);
  return base_str;
}

SplitTag SplitTag::parse(const std::string& s) {
  SplitTag tag;
  std::string base_str = s;
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    base_str = s.substr(0, slash);
    std::string fold_str = s.substr(slash + 1);  // "h<j>of<n>"
    auto of = fold_str.find("of");
    if (fold_str.size() < 4 || fold_str[0] != 'h' || of == std::string::npos)
      throw std::invalid_argument("bad split tag: " + s);
    tag.fold = std::stoi(fold_str.substr(1, of - 1));
    tag.num_folds = std::stoi(fold_str.substr(of + 2));
  }
  if (base_str == "whole") tag.base = SplitBase::Whole;
  else if (base_str == "ref") tag.base = SplitBase::Ref;
  else if (base_str == "d0") tag.base = SplitBase::D0;
  else if (base_str == "d1") tag.base = SplitBase::D1;
  else if (base_str == "d0prime") tag.base = SplitBase::D0Prime;
  else throw std::invalid_argument("bad split tag: " + s);
  return tag;
}

namespace {

void check_behavior(const LinearInstance& inst, const Policy& p, int num_own,
                    const char* name) {
  if (p.horizon() != inst.horizon)
    throw std::invalid_argument(std::string("collect: ") + name +
                                " does not cover all steps");
  for (int h = 0; h < inst.horizon; ++h) {
    if (p.probs[h].rows() != inst.num_states || p.probs[h].cols() != num_own)
      throw std::invalid_argument(std::string("collect: ") + name +
                                  " shape mismatch");
    for (int x = 0; x < inst.num_states; ++x)
      if (p.probs[h].row(x).minCoeff() < -1e-12 ||
          std::abs(p.probs[h].row(x).sum() - 1.0) > 1e-12)
        throw std::invalid_argument(std::string("collect: ") + name +
                                    " rows must be distributions");
  }
}

}  // namespace

Dataset collect(const LinearInstance& inst, const Policy& behavior_max,
                const Policy* behavior_min, std::size_t num_trajectories,
                std::uint64_t seed, const std::string& behavior_id) {
  require_valid(inst);
  if (num_trajectories < 1)
    throw std::invalid_argument("collect: need at least one trajectory");
  if ((inst.kind == Kind::Game) != (behavior_min != nullptr))
    throw std::invalid_argument(
        "collect: behavior_min required exactly for game instances");
  check_behavior(inst, behavior_max, inst.num_actions, "behavior_max");
  if (behavior_min)
    check_behavior(inst, *behavior_min, inst.num_opp_actions, "behavior_min");

  // Kernel rows computed with plain index-order loops (not vectorized
  // products) so the sampled streams are identical on every platform.
  const int S = inst.num_states, A = inst.num_actions, B = inst.num_opp_actions;
  const int d = inst.features.d;
  std::vector<Mat> kernels(inst.horizon);
  std::vector<Mat> mean_rewards(inst.horizon);
  for (int h = 1; h <= inst.horizon; ++h) {
    Mat k(S * A * B, S);
    Mat r(S, A * B);
    for (int x = 0; x < S; ++x)
      for (int a = 0; a < A; ++a)
        for (int b = 0; b < B; ++b) {
          const int row = inst.features.flat(x, a, b);
          double rsum = 0.0;
          for (int i = 0; i < d; ++i)
            rsum += inst.features.columns(i, row) * inst.thetas[h - 1](i);
          r(x, a * B + b) = rsum;
          double total = 0.0;
          for (int xn = 0; xn < S; ++xn) {
            double p = 0.0;
            for (int i = 0; i < d; ++i)
              p += inst.features.columns(i, row) * inst.measures[h - 1](i, xn);
            if (p < 0.0) p = 0.0;  // validated to be >= -1e-12
            k(row, xn) = p;
            total += p;
          }
          for (int xn = 0; xn < S; ++xn) k(row, xn) /= total;
        }
    kernels[h - 1] = std::move(k);
    mean_rewards[h - 1] = std::move(r);
  }

  Dataset ds;
  ds.instance_id = inst.id;
  ds.behavior_id = behavior_id;
  ds.seed = seed;
  ds.horizon = inst.horizon;
  ds.kind = inst.kind;
  ds.trajectories.resize(num_trajectories);

  const bool gaussian = inst.reward_noise.type == RewardNoise::Type::Gaussian;
  for (std::size_t tau = 0; tau < num_trajectories; ++tau) {
    rng::Stream stream(seed, tau);
    Trajectory traj;
    traj.index = tau;
    traj.steps.resize(inst.horizon);
    int x = stream.next_categorical(inst.initial_dist, S);
    for (int h = 1; h <= inst.horizon; ++h) {
      Step& st = traj.steps[h - 1];
      st.x = x;
      st.a = stream.next_categorical(behavior_max.probs[h - 1].row(x), A);
      st.b = inst.kind == Kind::Game
                 ? stream.next_categorical(behavior_min->probs[h - 1].row(x), B)
                 : -1;
      const int flat = inst.features.flat(x, st.a, std::max(st.b, 0));
      st.r = mean_rewards[h - 1](x, st.a * B + std::max(st.b, 0));
      if (gaussian) st.r += inst.reward_noise.sigma * stream.next_gaussian();
      x = stream.next_categorical(kernels[h - 1].row(flat), S);
      st.xn = x;
    }
    ds.trajectories[tau] = std::move(traj);
  }
  return ds;
}

HFoldSplit split_h_fold(const Dataset& ds, int num_folds) {
  if (num_folds < 1) throw std::invalid_argument("split_h_fold: H must be >= 1");
  if (ds.tag.is_folded())
    throw std::invalid_argument("split_h_fold: dataset is already folded");
  if (ds.size() < static_cast<std::size_t>(num_folds))
    throw std::invalid_argument("split_h_fold: K=" + std::to_string(ds.size()) +
                                " < H=" + std::to_string(num_folds));
  const std::size_t per = ds.size() / num_folds;
  HFoldSplit out;
  out.discarded = ds.size() - per * num_folds;
  out.parts.assign(num_folds, Dataset{});
  for (int j = 0; j < num_folds; ++j) {
    Dataset& part = out.parts[j];
    part.instance_id = ds.instance_id;
    part.behavior_id = ds.behavior_id;
    part.seed = ds.seed;
    part.horizon = ds.horizon;
    part.kind = ds.kind;
    part.tag = ds.tag;
    part.tag.fold = j;
    part.tag.num_folds = num_folds;
    part.trajectories.reserve(per);
  }
  for (std::size_t i = 0; i < per * num_folds; ++i)
    out.parts[i % num_folds].trajectories.push_back(ds.trajectories[i]);
  return out;
}

FourWaySplit split_four_way(const Dataset& ds) {
  if (ds.tag.base != SplitBase::Whole || ds.tag.is_folded())
    throw std::invalid_argument("split_four_way: dataset must be whole");
  if (ds.size() < 4)
    throw std::invalid_argument("split_four_way: need K >= 4");
  const std::size_t per = ds.size() / 4;
  FourWaySplit out;
  out.effective_k = per;
  out.discarded = ds.size() - 4 * per;
  Dataset* parts[4] = {&out.ref, &out.d0, &out.d1, &out.d0prime};
  const SplitBase bases[4] = {SplitBase::Ref, SplitBase::D0, SplitBase::D1,
                              SplitBase::D0Prime};
  for (int p = 0; p < 4; ++p) {
    parts[p]->instance_id = ds.instance_id;
    parts[p]->behavior_id = ds.behavior_id;
    parts[p]->seed = ds.seed;
    parts[p]->horizon = ds.horizon;
    parts[p]->kind = ds.kind;
    parts[p]->tag.base = bases[p];
    parts[p]->trajectories.reserve(per);
  }
  for (std::size_t i = 0; i < 4 * per; ++i)
    parts[i % 4]->trajectories.push_back(ds.trajectories[i]);
  return out;
}

namespace {

double min_eigenvalue(const Mat& sym) {
  Mat s = 0.5 * (sym + sym.transpose());
  if ((s - sym).cwiseAbs().maxCoeff() > 1e-10)
    throw std::logic_error("coverage: accumulated matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

CoverageResult coverage_kappa_exact(const LinearInstance& inst,
                                    const Policy& behavior_max,
                                    const Policy* behavior_min) {
  std::vector<Mat> occ = state_action_occupancy(inst, behavior_max, behavior_min);
  CoverageResult res;
  res.lambda_min.resize(inst.horizon);
  for (int h = 1; h <= inst.horizon; ++h) {
    Mat g = Mat::Zero(inst.features.d, inst.features.d);
    for (int x = 0; x < inst.num_states; ++x)
      for (int a = 0; a < inst.num_actions; ++a)
        for (int b = 0; b < inst.num_opp_actions; ++b) {
          double w = occ[h - 1](x, a * inst.num_opp_actions + b);
          if (w > 0.0)
            g.selfadjointView<Eigen::Lower>().rankUpdate(
                Vec(inst.features.col(x, a, b)), w);
        }
    res.lambda_min[h - 1] = min_eigenvalue(Mat(g.selfadjointView<Eigen::Lower>()));
  }
  res.kappa = *std::min_element(res.lambda_min.begin(), res.lambda_min.end());
  return res;
}

CoverageResult coverage_kappa_empirical(const Dataset& ds,
                                        const FeatureMap& features) {
  if (ds.size() < 1)
    throw std::invalid_argument("coverage: empty dataset");
  CoverageResult res;
  res.lambda_min.resize(ds.horizon);
  for (int h = 1; h <= ds.horizon; ++h) {
    Mat g = Mat::Zero(features.d, features.d);
    for (const auto& traj : ds.trajectories) {
      const Step& s = traj.steps[h - 1];
      g.selfadjointView<Eigen::Lower>().rankUpdate(
          Vec(features.col(s.x, s.a, std::max(s.b, 0))), 1.0);
    }
    g = Mat(g.selfadjointView<Eigen::Lower>()) / static_cast<double>(ds.size());
    res.lambda_min[h - 1] = min_eigenvalue(g);
  }
  res.kappa = *std::min_element(res.lambda_min.begin(), res.lambda_min.end());
  return res;
}

std::string dataset_to_jsonl(const Dataset& ds) {
  std::string out;
  out.reserve(64 * (ds.size() + 1));
  out += "{\"instance_id\":" + nlohmann::json(ds.instance_id).dump() +
         ",\"behavior_id\":" + nlohmann::json(ds.behavior_id).dump() +
         ",\"seed\":" + std::to_string(ds.seed) +
         ",\"K\":" + std::to_string(ds.size()) +
         ",\"H\":" + std::to_string(ds.horizon) + ",\"kind\":\"" +
         (ds.kind == Kind::Mdp ? "mdp" : "mg") + "\",\"split_tag\":\"" +
         ds.tag.str() + "\"}\n";
  for (const auto& traj : ds.trajectories) {
    out += "{\"t\":" + std::to_string(traj.index) + ",\"steps\":[";
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      const Step& s = traj.steps[i];
      if (i) out += ',';
      out += "{\"x\":" + std::to_string(s.x) + ",\"a\":" + std::to_string(s.a);
      if (ds.kind == Kind::Game) out += ",\"b\":" + std::to_string(s.b);
      out += ",\"r\":" + format_double17(s.r) +
             ",\"xn\":" + std::to_string(s.xn) + "}";
    }
    out += "]}\n";
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  write_file(path, dataset_to_jsonl(ds));
}

Dataset dataset_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("dataset file: missing metadata line");
  nlohmann::json meta = nlohmann::json::parse(line);
  Dataset ds;
  ds.instance_id = meta.at("instance_id").get<std::string>();
  ds.behavior_id = meta.at("behavior_id").get<std::string>();
  ds.seed = meta.at("seed").get<std::uint64_t>();
  ds.horizon = meta.at("H").get<int>();
  ds.kind = meta.at("kind").get<std::string>() == "mdp" ? Kind::Mdp : Kind::Game;
  ds.tag = SplitTag::parse(meta.at("split_tag").get<std::string>());
  const std::size_t k = meta.at("K").get<std::size_t>();
  ds.trajectories.reserve(k);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    Trajectory traj;
    traj.index = j.at("t").get<std::uint64_t>();
    for (const auto& js : j.at("steps")) {
      Step s;
      s.x = js.at("x").get<int>();
      s.a = js.at("a").get<int>();
      s.b = js.contains("b") ? js.at("b").get<int>() : -1;
      s.r = js.at("r").get<double>();
      s.xn = js.at("xn").get<int>();
      traj.steps.push_back(s);
    }
    if (traj.steps.size() != static_cast<std::size_t>(ds.horizon))
      throw std::invalid_argument("dataset file: trajectory length mismatch");
    ds.trajectories.push_back(std::move(traj));
  }
  if (ds.trajectories.size() != k)
    throw std::invalid_argument("dataset file: K does not match line count");
  return ds;
}

Dataset load_dataset(const std::string& path) {
  return dataset_from_jsonl(read_file(path));
}

}  // namespace linorl
