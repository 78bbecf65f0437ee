#include "linorl/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "linorl/serialize.hpp"

namespace linorl {

using nlohmann::json;

std::string algo_name(Algo a) {
  switch (a) {
    case Algo::Pevi: return "pevi";
    case Algo::Spevi: return "spevi";
    case Algo::SpeviPlus: return "spevi_plus";
    case Algo::Spmvi: return "spmvi";
    case Algo::SpmviPlus: return "spmvi_plus";
  }
  throw std::logic_error("unreachable algo");
}

Algo algo_from_name(const std::string& name) {
  if (name == "pevi") return Algo::Pevi;
  if (name == "spevi") return Algo::Spevi;
  if (name == "spevi_plus") return Algo::SpeviPlus;
  if (name == "spmvi") return Algo::Spmvi;
  if (name == "spmvi_plus") return Algo::SpmviPlus;
  throw std::invalid_argument("unknown algorithm: " + name);
}

namespace {

bool is_mdp_algo(Algo a) {
  return a == Algo::Pevi || a == Algo::Spevi || a == Algo::SpeviPlus;
}

// |T_h V_{h+1} - t_hat_h| <= Gamma_h at every entry, checked exactly.
bool bellman_event(const LinearInstance& inst, const std::vector<Vec>& v,
                   const std::vector<Mat>& t_hat,
                   const std::vector<Mat>& gamma) {
  for (int h = 1; h <= inst.horizon; ++h) {
    Mat exact = apply_bellman(inst, v[h], h);
    if (((exact - t_hat[h - 1]).cwiseAbs() - gamma[h - 1]).maxCoeff() > 1e-9)
      return false;
  }
  return true;
}

double expected_bonus(const LinearInstance& inst, const std::vector<Mat>& occ,
                      const std::vector<Mat>& gamma) {
  double total = 0.0;
  for (int h = 0; h < inst.horizon; ++h)
    total += occ[h].cwiseProduct(gamma[h]).sum();
  return total;
}

}  // namespace

ResultRecord run_cell(const GeneratedInstance& gen, Algo algo, std::size_t k,
                      std::uint64_t seed, double lambda,
                      const BonusConfig& bonus, std::string* bundle_json) {
  const LinearInstance& inst = gen.instance;
  const bool game = inst.kind == Kind::Game;

  ResultRecord rec;
  rec.algo = algo_name(algo);
  rec.k = k;
  rec.seed = seed;

  BonusConfig cfg = bonus;
  if (cfg.kappa_source == KappaSource::Exact) {
    cfg.kappa = coverage_kappa_exact(inst, gen.behavior_max,
                                     game ? &gen.behavior_min : nullptr)
                    .kappa;
  }

  Dataset ds = collect(inst, gen.behavior_max,
                       game ? &gen.behavior_min : nullptr, k, seed);

  if (is_mdp_algo(algo)) {
    if (game)
      throw std::invalid_argument(rec.algo + " needs an MDP instance");
    PolicyBundle bundle;
    if (algo == Algo::Pevi) {
      bundle = pevi(ds, inst.features, lambda, cfg);
    } else if (algo == Algo::Spevi) {
      bundle = spevi(ds, inst.features, lambda, cfg);
    } else {
      FourWaySplit parts = split_four_way(ds);
      bundle = spevi_plus(parts.ref, parts.d0, parts.d1, parts.d0prime,
                          inst.features, lambda, cfg);
    }
    auto [opt_values, opt_policy] = optimal_values_mdp(inst);
    ValueTable achieved = evaluate_policy(inst, bundle.policy);
    rec.metric = inst.initial_dist.dot(opt_values.v[0] - achieved.v[0]);
    rec.pessimism_event =
        bellman_event(inst, bundle.values.v, bundle.t_hat, bundle.bonus);
    rec.bonus_sum = expected_bonus(
        inst, state_action_occupancy(inst, opt_policy), bundle.bonus);
    double kappa_for_burn_in =
        bundle.kappa_used > 0.0
            ? bundle.kappa_used
            : coverage_kappa_exact(inst, gen.behavior_max).kappa;
    rec.burn_in = static_cast<double>(k) >= burn_in_threshold(
        inst.feature_dim(), inst.horizon, cfg.delta, kappa_for_burn_in);
    if (bundle_json) *bundle_json = bundle_to_json(bundle);
  } else {
    if (!game)
      throw std::invalid_argument(rec.algo + " needs a game instance");
    GameBundle bundle;
    if (algo == Algo::Spmvi) {
      bundle = spmvi(ds, inst.features, lambda, cfg);
    } else {
      FourWaySplit parts = split_four_way(ds);
      bundle = spmvi_plus(parts.ref, parts.d0, parts.d1, parts.d0prime,
                          inst.features, lambda, cfg);
    }
    auto [br_max_policy, upper] = best_response(inst, bundle.min_policy, Side::Max);
    auto [br_min_policy, lower] = best_response(inst, bundle.max_policy, Side::Min);
    (void)br_max_policy;
    (void)br_min_policy;
    rec.metric = inst.initial_dist.dot(upper.v[0] - lower.v[0]);
    rec.pessimism_event =
        bellman_event(inst, bundle.lower.v, bundle.lower_t_hat,
                      bundle.lower_bonus) &&
        bellman_event(inst, bundle.upper.v, bundle.upper_t_hat,
                      bundle.upper_bonus);
    NashResult ne = ne_values_mg(inst);
    std::vector<Mat> occ =
        state_action_occupancy(inst, ne.max_policy, &ne.min_policy);
    rec.bonus_sum = expected_bonus(inst, occ, bundle.lower_bonus) +
                    expected_bonus(inst, occ, bundle.upper_bonus);
    double kappa_for_burn_in =
        bundle.kappa_used > 0.0
            ? bundle.kappa_used
            : coverage_kappa_exact(inst, gen.behavior_max, &gen.behavior_min)
                  .kappa;
    rec.burn_in = static_cast<double>(k) >= burn_in_threshold(
        inst.feature_dim(), inst.horizon, cfg.delta, kappa_for_burn_in);
    if (bundle_json) *bundle_json = bundle_to_json(bundle);
  }
  return rec;
}

std::vector<ResultRecord> sweep(const ExperimentConfig& cfg, int jobs) {
  if (cfg.k_grid.empty() || cfg.seeds.empty() || cfg.algorithms.empty())
    throw std::invalid_argument("sweep: empty grid");
  for (std::size_t i = 1; i < cfg.k_grid.size(); ++i)
    if (cfg.k_grid[i] <= cfg.k_grid[i - 1])
      throw std::invalid_argument("sweep: K grid must be strictly increasing");
  if (!(cfg.lambda > 0.0))
    throw std::invalid_argument("sweep: lambda must be > 0");
  require_valid(cfg.instance.instance);

  struct Cell {
    Algo algo;
    std::size_t k;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Algo algo : cfg.algorithms)
    for (std::size_t k : cfg.k_grid)
      for (std::uint64_t seed : cfg.seeds) cells.push_back({algo, k, seed});

  std::vector<ResultRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      auto start = std::chrono::steady_clock::now();
      ResultRecord rec;
      try {
        rec = run_cell(cfg.instance, cell.algo, cell.k, cell.seed, cfg.lambda,
                       cfg.bonus, nullptr);
      } catch (const std::exception& e) {
        rec.algo = algo_name(cell.algo);
        rec.k = cell.k;
        rec.seed = cell.seed;
        std::string msg = e.what();
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        rec.error = msg;
      }
      double elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      if (rec.error.empty() && elapsed > cfg.cell_time_budget_s)
        rec.error = "exceeded cell time budget of " +
                    std::to_string(cfg.cell_time_budget_s) + " s";
      rec.wall_time_s = cfg.zero_wall_time ? 0.0 : elapsed;
      records[i] = std::move(rec);
    }
  };
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::sort(records.begin(), records.end(),
            [](const ResultRecord& a, const ResultRecord& b) {
              return std::tie(a.algo, a.k, a.seed) <
                     std::tie(b.algo, b.k, b.seed);
            });
  return records;
}

std::string records_to_csv(const std::vector<ResultRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += r.algo;
    out += ',' + std::to_string(r.k);
    out += ',' + std::to_string(r.seed);
    out += ',' + format_double17(r.metric);
    out += ',';
    out += r.pessimism_event ? '1' : '0';
    out += ',' + format_double17(r.bonus_sum);
    out += ',';
    out += r.burn_in ? '1' : '0';
    out += ',' + format_double17(r.wall_time_s);
    out += ',' + r.error;
    out += '\n';
  }
  return out;
}

std::vector<ResultRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::invalid_argument("csv: unexpected header");
  std::vector<ResultRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (int f = 0; f < 8; ++f) {
      auto comma = line.find(',', pos);
      if (comma == std::string::npos)
        throw std::invalid_argument("csv: short row");
      fields.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    fields.push_back(line.substr(pos));  // error field may be empty
    ResultRecord r;
    r.algo = fields[0];
    r.k = std::stoull(fields[1]);
    r.seed = std::stoull(fields[2]);
    r.metric = std::stod(fields[3]);
    r.pessimism_event = fields[4] == "1";
    r.bonus_sum = std::stod(fields[5]);
    r.burn_in = fields[6] == "1";
    r.wall_time_s = std::stod(fields[7]);
    r.error = fields[8];
    records.push_back(std::move(r));
  }
  return records;
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  if (v.empty()) return std::nan("");
  double pos = q * (v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace

std::optional<SlopeFit> fit_log_log_slope(const std::vector<double>& ks,
                                          const std::vector<double>& medians) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (medians[i] > 0.0 && ks[i] > 0.0) {
      xs.push_back(std::log(ks[i]));
      ys.push_back(std::log(medians[i]));
    }
  }
  if (xs.size() < 3) return std::nullopt;
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double resid = ys[i] - fit.intercept - fit.slope * xs[i];
    ssr += resid * resid;
  }
  fit.stderr_ = n > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return fit;
}

std::string report_from_csv(const std::string& csv_text) {
  std::vector<ResultRecord> records = records_from_csv(csv_text);
  std::map<std::string, std::vector<const ResultRecord*>> by_algo;
  for (const auto& r : records) by_algo[r.algo].push_back(&r);

  json out;
  for (const auto& [algo, recs] : by_algo) {
    std::map<std::size_t, std::vector<double>> by_k;
    std::size_t errors = 0, events = 0, burn_ins = 0, good = 0;
    for (const auto* r : recs) {
      if (!r->error.empty()) {
        ++errors;
        continue;
      }
      ++good;
      by_k[r->k].push_back(r->metric);
      if (r->pessimism_event) ++events;
      if (r->burn_in) ++burn_ins;
    }
    json curve = json::array();
    std::vector<double> ks, medians;
    for (const auto& [k, vals] : by_k) {
      double med = quantile(vals, 0.5);
      curve.push_back(json{{"K", k},
                           {"median", med},
                           {"q25", quantile(vals, 0.25)},
                           {"q75", quantile(vals, 0.75)},
                           {"n", vals.size()}});
      ks.push_back(static_cast<double>(k));
      medians.push_back(med);
    }
    json entry;
    entry["curve"] = curve;
    if (auto fit = fit_log_log_slope(ks, medians)) {
      entry["slope"] = json{{"slope", fit->slope},
                            {"stderr", fit->stderr_},
                            {"intercept", fit->intercept}};
    } else {
      entry["slope"] = nullptr;
      entry["slope_notice"] =
          "slope omitted: fewer than 3 distinct K values with positive medians";
    }
    entry["pessimism_frequency"] =
        good ? static_cast<double>(events) / good : 0.0;
    entry["burn_in_coverage"] =
        good ? static_cast<double>(burn_ins) / good : 0.0;
    entry["errors"] = errors;
    out[algo] = entry;
  }
  return out.dump(2);
}

}  // namespace linorl
