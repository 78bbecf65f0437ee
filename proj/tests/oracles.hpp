#pragma once

// Test-only oracles, deliberately independent of the library's
// implementation paths: plain tabular DP on raw (P, r) arrays, Gauss-Jordan
// elimination, Monte-Carlo rollouts with std::mt19937_64, and brute-force
// policy enumeration.

#include <random>
#include <stdexcept>
#include <vector>

#include "linorl/instances.hpp"
#include "linorl/model.hpp"

namespace oracles {

using linorl::Mat;
using linorl::Vec;

// Tabular policy evaluation on raw arrays: transitions[h] is (S*A) x S with
// row x*A+a, rewards[h] is S x A. Returns V_1..V_H as rows of an H x S matrix.
inline Mat tabular_policy_value(const std::vector<Mat>& transitions,
                                const std::vector<Mat>& rewards,
                                const std::vector<Mat>& policy) {
  const int H = static_cast<int>(transitions.size());
  const int S = static_cast<int>(rewards[0].rows());
  const int A = static_cast<int>(rewards[0].cols());
  Mat values(H, S);
  Vec next = Vec::Zero(S);
  for (int h = H; h >= 1; --h) {
    Vec cur(S);
    for (int x = 0; x < S; ++x) {
      double v = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = rewards[h - 1](x, a);
        for (int xn = 0; xn < S; ++xn)
          q += transitions[h - 1](x * A + a, xn) * next(xn);
        v += policy[h - 1](x, a) * q;
      }
      cur(x) = v;
    }
    values.row(h - 1) = cur.transpose();
    next = cur;
  }
  return values;
}

// All deterministic Markov policies (A^(S*H) of them) as per-step action
// tables.
inline std::vector<std::vector<std::vector<int>>> all_deterministic_policies(
    int H, int S, int A) {
  long total = 1;
  for (int i = 0; i < H * S; ++i) total *= A;
  std::vector<std::vector<std::vector<int>>> out;
  out.reserve(total);
  for (long code = 0; code < total; ++code) {
    long rem = code;
    std::vector<std::vector<int>> actions(H, std::vector<int>(S));
    for (int h = 0; h < H; ++h)
      for (int x = 0; x < S; ++x) {
        actions[h][x] = static_cast<int>(rem % A);
        rem /= A;
      }
    out.push_back(std::move(actions));
  }
  return out;
}

// Gauss-Jordan solve with partial pivoting; throws on singular systems.
inline Vec gauss_solve(Mat a, Vec b) {
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    if (std::abs(a(pivot, col)) < 1e-14)
      throw std::runtime_error("gauss_solve: singular matrix");
    a.row(col).swap(a.row(pivot));
    std::swap(b(col), b(pivot));
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a(r, col) / a(col, col);
      a.row(r) -= f * a.row(col);
      b(r) -= f * b(col);
    }
  }
  Vec x(n);
  for (int i = 0; i < n; ++i) x(i) = b(i) / a(i, i);
  return x;
}

inline Mat gauss_inverse(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  Mat inv(n, n);
  for (int c = 0; c < n; ++c) {
    Vec e = Vec::Zero(n);
    e(c) = 1.0;
    inv.col(c) = gauss_solve(a, e);
  }
  return inv;
}

// Monte-Carlo estimate of V^pi(x1) (or V^{pi,nu}) from rollouts on the exact
// kernel tables; mean rewards, no observation noise. Returns (mean, stderr).
struct McResult {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline McResult mc_policy_value(const linorl::LinearInstance& inst,
                                const linorl::Policy& pi,
                                const linorl::Policy* nu, int x1,
                                std::size_t num_rollouts, unsigned rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Mat> kernels, rewards;
  for (int h = 1; h <= inst.horizon; ++h) {
    kernels.push_back(linorl::transition_matrix(inst, h));
    rewards.push_back(linorl::reward_table(inst, h));
  }
  auto sample = [&](const auto& row, int n) {
    double u = unif(rng);
    double cum = 0.0;
    for (int i = 0; i < n; ++i) {
      cum += row[i];
      if (u < cum) return i;
    }
    return n - 1;
  };
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t t = 0; t < num_rollouts; ++t) {
    int x = x1;
    double ret = 0.0;
    for (int h = 1; h <= inst.horizon; ++h) {
      int a = sample(pi.probs[h - 1].row(x), inst.num_actions);
      int b = nu ? sample(nu->probs[h - 1].row(x), inst.num_opp_actions) : 0;
      ret += rewards[h - 1](x, a * inst.num_opp_actions + b);
      x = sample(kernels[h - 1].row(inst.features.flat(x, a, b)),
                 inst.num_states);
    }
    sum += ret;
    sumsq += ret * ret;
  }
  McResult res;
  res.mean = sum / num_rollouts;
  double var = sumsq / num_rollouts - res.mean * res.mean;
  res.stderr_ = std::sqrt(std::max(var, 0.0) / num_rollouts);
  return res;
}

// Monte-Carlo estimate of Var[V(x')] given (x,a[,b]) at step h.
inline McResult mc_conditional_variance(const linorl::LinearInstance& inst,
                                        const Vec& v, int h, int x, int a,
                                        int b, std::size_t draws,
                                        unsigned rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mat kernel = linorl::transition_matrix(inst, h);
  auto row = kernel.row(inst.features.flat(x, a, b));
  double sum = 0.0, sumsq = 0.0;
  std::vector<double> vals;
  vals.reserve(draws);
  for (std::size_t t = 0; t < draws; ++t) {
    double u = unif(rng);
    double cum = 0.0;
    int xn = inst.num_states - 1;
    for (int i = 0; i < inst.num_states; ++i) {
      cum += row(i);
      if (u < cum) {
        xn = i;
        break;
      }
    }
    double val = v(xn);
    vals.push_back(val);
    sum += val;
    sumsq += val * val;
  }
  double mean = sum / draws;
  double var = sumsq / draws - mean * mean;
  // Standard error of the sample variance via the fourth central moment.
  double m4 = 0.0;
  for (double val : vals) m4 += std::pow(val - mean, 4);
  m4 /= draws;
  McResult res;
  res.mean = var;
  res.stderr_ = std::sqrt(
      std::max(m4 - var * var * (draws - 3.0) / (draws - 1.0), 0.0) / draws);
  return res;
}

// Fixed 3-state, 2-action tabular MDP used across the tests; dense kernel,
// distinct rewards, optimal first action is index 1 so the all-zeros tie
// break policy is strictly suboptimal.
inline linorl::TabularModel small_mdp(int horizon = 3) {
  linorl::TabularModel tab;
  tab.kind = linorl::Kind::Mdp;
  tab.horizon = horizon;
  tab.num_states = 3;
  tab.num_actions = 2;
  tab.num_opp_actions = 1;
  tab.initial_dist = Vec::Constant(3, 1.0 / 3.0);
  Mat trans(6, 3);
  trans << 0.6, 0.3, 0.1,   // (x0,a0)
           0.1, 0.2, 0.7,   // (x0,a1)
           0.25, 0.5, 0.25, // (x1,a0)
           0.4, 0.1, 0.5,   // (x1,a1)
           0.2, 0.6, 0.2,   // (x2,a0)
           0.05, 0.15, 0.8; // (x2,a1)
  Mat rew(3, 2);
  rew << 0.05, 0.45,
         0.30, 0.10,
         0.20, 0.70;
  for (int h = 0; h < horizon; ++h) {
    tab.transitions.push_back(trans);
    tab.rewards.push_back(rew);
  }
  return tab;
}

// Fixed 2-state, 2x2-action tabular MG with b-dependent rewards.
inline linorl::TabularModel small_mg(int horizon = 2) {
  linorl::TabularModel tab;
  tab.kind = linorl::Kind::Game;
  tab.horizon = horizon;
  tab.num_states = 2;
  tab.num_actions = 2;
  tab.num_opp_actions = 2;
  tab.initial_dist = Vec::Constant(2, 0.5);
  Mat trans(8, 2);
  trans << 0.7, 0.3,  // (x0,a0,b0)
           0.4, 0.6,  // (x0,a0,b1)
           0.2, 0.8,  // (x0,a1,b0)
           0.5, 0.5,  // (x0,a1,b1)
           0.6, 0.4,  // (x1,a0,b0)
           0.3, 0.7,  // (x1,a0,b1)
           0.8, 0.2,  // (x1,a1,b0)
           0.1, 0.9;  // (x1,a1,b1)
  Mat rew(2, 4);
  rew << 0.60, 0.10, 0.20, 0.50,
         0.30, 0.70, 0.40, 0.05;
  for (int h = 0; h < horizon; ++h) {
    tab.transitions.push_back(trans);
    tab.rewards.push_back(rew);
  }
  return tab;
}

}  // namespace oracles
