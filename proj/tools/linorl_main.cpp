#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "linorl/bench.hpp"
#include "linorl/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace linorl;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitPartialFailure = 3;

GeneratedInstance instance_from_generator(const json& spec) {
  const std::string type = spec.at("type").get<std::string>();
  Kind kind = spec.value("kind", "mdp") == "mdp" ? Kind::Mdp : Kind::Game;
  std::uint64_t seed = spec.value("seed", 0ull);
  if (type == "random_linear") {
    return random_linear_instance(
        kind, spec.at("d").get<int>(), spec.at("H").get<int>(),
        spec.at("num_states").get<int>(), spec.at("num_actions").get<int>(),
        spec.value("num_actions_min", 1), seed);
  }
  if (type == "random_tabular") {
    return random_tabular_instance(
        kind, spec.at("num_states").get<int>(), spec.at("num_actions").get<int>(),
        spec.value("num_actions_min", 1), spec.at("H").get<int>(), seed,
        spec.value("max_reward", 1.0));
  }
  if (type == "lower_bound") {
    LowerBoundSpec lb;
    lb.d = spec.at("d").get<int>();
    lb.horizon = spec.at("H").get<int>();
    lb.zeta = spec.at("zeta").get<double>();
    lb.seed = seed;
    LowerBoundFamily fam = lower_bound_family(lb, kind);
    GeneratedInstance gen;
    gen.instance = std::move(fam.instance);
    gen.behavior_max = std::move(fam.behavior_max);
    gen.behavior_min = std::move(fam.behavior_min);
    return gen;
  }
  throw std::invalid_argument("unknown generator type: " + type);
}

BonusConfig bonus_from_json(const json& j) {
  BonusConfig cfg;
  cfg.delta = j.value("delta", cfg.delta);
  cfg.c_hoeff = j.value("c_hoeff", cfg.c_hoeff);
  cfg.c_bern = j.value("c_bern", cfg.c_bern);
  cfg.c_adv = j.value("c_adv", cfg.c_adv);
  cfg.sigma_bar = j.value("sigma_bar", cfg.sigma_bar);
  std::string src = j.value("kappa_source", "empirical");
  if (src == "exact") cfg.kappa_source = KappaSource::Exact;
  else if (src == "empirical") cfg.kappa_source = KappaSource::Empirical;
  else if (src == "supplied") cfg.kappa_source = KappaSource::Supplied;
  else throw std::invalid_argument("bad kappa_source: " + src);
  cfg.kappa = j.value("kappa", 0.0);
  return cfg;
}

GeneratedInstance load_generated(const json& cfg, const fs::path& base) {
  GeneratedInstance gen;
  if (cfg.contains("generator")) {
    gen = instance_from_generator(cfg.at("generator"));
  } else {
    gen.instance = load_instance((base / cfg.at("instance").get<std::string>()).string());
    gen.behavior_max = load_policy((base / cfg.at("behavior").get<std::string>()).string());
    if (gen.instance.kind == Kind::Game)
      gen.behavior_min =
          load_policy((base / cfg.at("behavior_min").get<std::string>()).string());
  }
  return gen;
}

int cmd_gen_instance(const std::string& config_path, const std::string& out_dir,
                     std::uint64_t seed_override, bool has_seed) {
  json spec = json::parse(read_file(config_path));
  if (has_seed) spec["seed"] = seed_override;
  GeneratedInstance gen = instance_from_generator(spec);
  fs::create_directories(out_dir);
  save_instance(gen.instance, (fs::path(out_dir) / "instance.json").string());
  save_policy(gen.behavior_max, (fs::path(out_dir) / "behavior.json").string());
  if (gen.instance.kind == Kind::Game)
    save_policy(gen.behavior_min,
                (fs::path(out_dir) / "behavior_min.json").string());
  if (spec.at("type").get<std::string>() == "lower_bound") {
    LowerBoundSpec lb;
    lb.d = spec.at("d").get<int>();
    lb.horizon = spec.at("H").get<int>();
    lb.zeta = spec.at("zeta").get<double>();
    lb.seed = spec.value("seed", 0ull);
    Kind kind = spec.value("kind", "mdp") == "mdp" ? Kind::Mdp : Kind::Game;
    write_file((fs::path(out_dir) / "analytic.json").string(),
               analytic_to_json(lower_bound_analytic(lb, kind)));
  }
  std::cout << "wrote instance '" << gen.instance.id << "' to " << out_dir
            << "\n";
  return 0;
}

int cmd_collect(const std::string& instance_path, const std::string& behavior_path,
                const std::string& behavior_min_path, std::size_t k,
                std::uint64_t seed, const std::string& out_path) {
  LinearInstance inst = load_instance(instance_path);
  Policy behavior = load_policy(behavior_path);
  Policy behavior_min;
  const bool game = inst.kind == Kind::Game;
  if (game) {
    if (behavior_min_path.empty())
      throw std::invalid_argument("--behavior-min required for game instances");
    behavior_min = load_policy(behavior_min_path);
  }
  Dataset ds = collect(inst, behavior, game ? &behavior_min : nullptr, k, seed);
  save_dataset(ds, out_path);
  std::cout << "collected K=" << k << " trajectories to " << out_path << "\n";
  return 0;
}

int cmd_run(const std::string& algo_str, const std::string& instance_path,
            const std::string& dataset_path, double lambda,
            const std::string& bonus_path, const std::string& out_path) {
  Algo algo = algo_from_name(algo_str);
  LinearInstance inst = load_instance(instance_path);
  require_valid(inst);
  Dataset ds = load_dataset(dataset_path);
  if (ds.instance_id != inst.id)
    std::cerr << "warning: dataset was collected on '" << ds.instance_id
              << "', running against '" << inst.id << "'\n";
  BonusConfig cfg;
  if (!bonus_path.empty()) cfg = bonus_from_json(json::parse(read_file(bonus_path)));

  std::string bundle_json;
  if (algo == Algo::Pevi) {
    bundle_json = bundle_to_json(pevi(ds, inst.features, lambda, cfg));
  } else if (algo == Algo::Spevi) {
    bundle_json = bundle_to_json(spevi(ds, inst.features, lambda, cfg));
  } else if (algo == Algo::SpeviPlus) {
    FourWaySplit parts = split_four_way(ds);
    bundle_json = bundle_to_json(spevi_plus(parts.ref, parts.d0, parts.d1,
                                            parts.d0prime, inst.features,
                                            lambda, cfg));
  } else if (algo == Algo::Spmvi) {
    bundle_json = bundle_to_json(spmvi(ds, inst.features, lambda, cfg));
  } else {
    FourWaySplit parts = split_four_way(ds);
    bundle_json = bundle_to_json(spmvi_plus(parts.ref, parts.d0, parts.d1,
                                            parts.d0prime, inst.features,
                                            lambda, cfg));
  }
  if (out_path.empty())
    std::cout << bundle_json << "\n";
  else
    write_file(out_path, bundle_json);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              int jobs, std::uint64_t seed_override, bool has_seed) {
  json j = json::parse(read_file(config_path));
  fs::path base = fs::path(config_path).parent_path();

  ExperimentConfig cfg;
  cfg.instance = load_generated(j, base);
  for (const auto& name : j.at("algorithms"))
    cfg.algorithms.push_back(algo_from_name(name.get<std::string>()));
  for (const auto& k : j.at("k_grid"))
    cfg.k_grid.push_back(k.get<std::size_t>());
  if (j.contains("seeds")) {
    for (const auto& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
  } else {
    std::uint64_t base_seed = has_seed ? seed_override : j.value("base_seed", 0ull);
    std::size_t n = j.value("num_seeds", std::size_t{1});
    for (std::size_t i = 0; i < n; ++i) cfg.seeds.push_back(base_seed + i);
  }
  cfg.lambda = j.value("lambda", 1.0);
  if (j.contains("bonus")) cfg.bonus = bonus_from_json(j.at("bonus"));
  cfg.cell_time_budget_s = j.value("cell_time_budget_s", 300.0);
  cfg.zero_wall_time = j.value("zero_wall_time", false);
  cfg.out_dir = out_dir;

  std::vector<ResultRecord> records = sweep(cfg, jobs);
  fs::create_directories(out_dir);
  std::string csv = records_to_csv(records);
  write_file((fs::path(out_dir) / "results.csv").string(), csv);
  std::size_t failures = 0;
  for (const auto& r : records)
    if (!r.error.empty()) ++failures;
  std::cout << "wrote " << records.size() << " records ("
            << failures << " failed cells) to " << out_dir << "/results.csv\n";
  return failures == 0 ? 0 : kExitPartialFailure;
}

int cmd_report(const std::string& csv_path, const std::string& out_path) {
  std::string summary = report_from_csv(read_file(csv_path));
  if (out_path.empty())
    std::cout << summary << "\n";
  else
    write_file(out_path, summary);
  return 0;
}

int cmd_validate_impl(const std::string& instance_path,
                      const std::string& dataset_path) {
  LinearInstance inst = load_instance(instance_path);
  ValidationReport rep = validate_instance(inst);
  for (const auto& e : rep.errors) std::cout << "error: " << e << "\n";
  for (const auto& w : rep.warnings) std::cout << "warning: " << w << "\n";
  if (!dataset_path.empty()) {
    Dataset ds = load_dataset(dataset_path);
    if (ds.instance_id != inst.id) {
      std::cout << "error: dataset instance id '" << ds.instance_id
                << "' does not match '" << inst.id << "'\n";
      rep.ok = false;
    }
    if (ds.horizon != inst.horizon) {
      std::cout << "error: dataset horizon mismatch\n";
      rep.ok = false;
    }
    for (const auto& traj : ds.trajectories) {
      for (const auto& s : traj.steps) {
        bool in_range = s.x >= 0 && s.x < inst.num_states && s.xn >= 0 &&
                        s.xn < inst.num_states && s.a >= 0 &&
                        s.a < inst.num_actions &&
                        (inst.kind == Kind::Mdp ||
                         (s.b >= 0 && s.b < inst.num_opp_actions));
        if (!in_range) {
          std::cout << "error: trajectory " << traj.index
                    << " has out-of-range indices\n";
          rep.ok = false;
          break;
        }
      }
      if (!rep.ok) break;
    }
  }
  std::cout << (rep.ok ? "valid" : "invalid") << "\n";
  return rep.ok ? 0 : kExitValidation;
}

// Anything that stops validation (unreadable or malformed files included)
// counts as a validation failure.
int cmd_validate(const std::string& instance_path,
                 const std::string& dataset_path) {
  try {
    return cmd_validate_impl(instance_path, dataset_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linorl: pessimistic offline RL benchmark for linear MDPs and games"};
  app.require_subcommand(1);

  std::string config_path, out_path, instance_path, behavior_path,
      behavior_min_path, dataset_path, algo_str, bonus_path, csv_path;
  std::size_t k = 0;
  std::uint64_t seed = 0;
  double lambda = 1.0;
  int jobs = 1;

  auto* gen = app.add_subcommand("gen-instance", "generate an instance bundle");
  gen->add_option("--config", config_path, "generator spec JSON")->required();
  gen->add_option("--out", out_path, "output directory")->required();
  auto* gen_seed = gen->add_option("--seed", seed, "override generator seed");

  auto* col = app.add_subcommand("collect", "collect an offline dataset");
  col->add_option("--instance", instance_path)->required();
  col->add_option("--behavior", behavior_path)->required();
  col->add_option("--behavior-min", behavior_min_path);
  col->add_option("--k", k, "number of trajectories")->required();
  col->add_option("--seed", seed)->required();
  col->add_option("--out", out_path)->required();

  auto* run = app.add_subcommand("run", "run one algorithm on a dataset");
  run->add_option("--algo", algo_str)->required();
  run->add_option("--instance", instance_path)->required();
  run->add_option("--dataset", dataset_path)->required();
  run->add_option("--lambda", lambda);
  run->add_option("--bonus", bonus_path, "bonus config JSON");
  run->add_option("--out", out_path);

  auto* sw = app.add_subcommand("sweep", "run a seeded experiment grid");
  sw->add_option("--config", config_path)->required();
  sw->add_option("--out", out_path, "output directory")->required();
  sw->add_option("--jobs", jobs, "worker threads");
  auto* sw_seed = sw->add_option("--seed", seed, "override base seed");

  auto* rep = app.add_subcommand("report", "summarize a sweep CSV");
  rep->add_option("--csv", csv_path)->required();
  rep->add_option("--out", out_path);

  auto* val = app.add_subcommand("validate", "validate instance (and dataset)");
  val->add_option("--instance", instance_path)->required();
  val->add_option("--dataset", dataset_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen_instance(config_path, out_path, seed, gen_seed->count() > 0);
    if (col->parsed())
      return cmd_collect(instance_path, behavior_path, behavior_min_path, k,
                         seed, out_path);
    if (run->parsed())
      return cmd_run(algo_str, instance_path, dataset_path, lambda, bonus_path,
                     out_path);
    if (sw->parsed())
      return cmd_sweep(config_path, out_path, jobs, seed, sw_seed->count() > 0);
    if (rep->parsed()) return cmd_report(csv_path, out_path);
    if (val->parsed()) return cmd_validate(instance_path, dataset_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
