#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "linorl/bench.hpp"
#include "linorl/serialize.hpp"

namespace py = pybind11;
using namespace linorl;

namespace {

Policy policy_from_list(const std::vector<Mat>& probs) {
  Policy p;
  p.probs = probs;
  return p;
}

}  // namespace

PYBIND11_MODULE(_linorl, m) {
  m.doc() =
      "Pessimistic offline RL for linear MDPs and zero-sum linear Markov "
      "games: exact oracles, split-dataset value iteration, and "
      "variance-reduced estimators.";

  py::enum_<Kind>(m, "Kind")
      .value("MDP", Kind::Mdp)
      .value("GAME", Kind::Game);

  py::enum_<Side>(m, "Side").value("MAX", Side::Max).value("MIN", Side::Min);

  py::enum_<KappaSource>(m, "KappaSource")
      .value("EXACT", KappaSource::Exact)
      .value("EMPIRICAL", KappaSource::Empirical)
      .value("SUPPLIED", KappaSource::Supplied);

  py::class_<Policy>(m, "Policy")
      .def(py::init(&policy_from_list), py::arg("probs"))
      .def_static("uniform", &Policy::uniform, py::arg("horizon"),
                  py::arg("num_states"), py::arg("num_actions"))
      .def_readonly("probs", &Policy::probs);

  py::class_<ValueTable>(m, "ValueTable")
      .def_readonly("v", &ValueTable::v)
      .def_readonly("q", &ValueTable::q);

  py::class_<FeatureMap>(m, "FeatureMap")
      .def_readonly("d", &FeatureMap::d)
      .def_readonly("num_states", &FeatureMap::num_states)
      .def_readonly("num_actions", &FeatureMap::num_actions)
      .def_readonly("num_opp_actions", &FeatureMap::num_opp_actions)
      .def("feature", &FeatureMap::feature, py::arg("x"), py::arg("a"),
           py::arg("b") = 0);

  py::class_<LinearInstance>(m, "LinearInstance")
      .def_readonly("kind", &LinearInstance::kind)
      .def_readonly("horizon", &LinearInstance::horizon)
      .def_readonly("num_states", &LinearInstance::num_states)
      .def_readonly("num_actions", &LinearInstance::num_actions)
      .def_readonly("num_opp_actions", &LinearInstance::num_opp_actions)
      .def_readonly("features", &LinearInstance::features)
      .def_readonly("initial_dist", &LinearInstance::initial_dist)
      .def_readonly("id", &LinearInstance::id)
      .def_property_readonly("d", &LinearInstance::feature_dim)
      .def("to_json", [](const LinearInstance& inst) {
        return instance_to_json(inst);
      })
      .def_static("from_json", [](const std::string& text) {
        return instance_from_json(text);
      });

  py::class_<TabularModel>(m, "TabularModel")
      .def(py::init<>())
      .def_readwrite("kind", &TabularModel::kind)
      .def_readwrite("horizon", &TabularModel::horizon)
      .def_readwrite("num_states", &TabularModel::num_states)
      .def_readwrite("num_actions", &TabularModel::num_actions)
      .def_readwrite("num_opp_actions", &TabularModel::num_opp_actions)
      .def_readwrite("transitions", &TabularModel::transitions)
      .def_readwrite("rewards", &TabularModel::rewards)
      .def_readwrite("initial_dist", &TabularModel::initial_dist);

  py::class_<GeneratedInstance>(m, "GeneratedInstance")
      .def_readonly("instance", &GeneratedInstance::instance)
      .def_readonly("behavior_max", &GeneratedInstance::behavior_max)
      .def_readonly("behavior_min", &GeneratedInstance::behavior_min);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("instance_id", &Dataset::instance_id)
      .def_readonly("seed", &Dataset::seed)
      .def_readonly("horizon", &Dataset::horizon)
      .def("__len__", &Dataset::size)
      .def_property_readonly("split_tag",
                             [](const Dataset& ds) { return ds.tag.str(); })
      .def("to_jsonl", &dataset_to_jsonl)
      .def_static("from_jsonl", &dataset_from_jsonl);

  py::class_<BonusConfig>(m, "BonusConfig")
      .def(py::init<>())
      .def_readwrite("delta", &BonusConfig::delta)
      .def_readwrite("c_hoeff", &BonusConfig::c_hoeff)
      .def_readwrite("c_bern", &BonusConfig::c_bern)
      .def_readwrite("c_adv", &BonusConfig::c_adv)
      .def_readwrite("sigma_bar", &BonusConfig::sigma_bar)
      .def_readwrite("kappa_source", &BonusConfig::kappa_source)
      .def_readwrite("kappa", &BonusConfig::kappa);

  py::class_<PolicyBundle>(m, "PolicyBundle")
      .def_readonly("algo", &PolicyBundle::algo)
      .def_readonly("policy", &PolicyBundle::policy)
      .def_readonly("values", &PolicyBundle::values)
      .def_readonly("bonus", &PolicyBundle::bonus)
      .def_readonly("t_hat", &PolicyBundle::t_hat)
      .def_readonly("warnings", &PolicyBundle::warnings)
      .def_readonly("kappa_used", &PolicyBundle::kappa_used)
      .def("to_json",
           [](const PolicyBundle& b) { return bundle_to_json(b); });

  py::class_<GameBundle>(m, "GameBundle")
      .def_readonly("algo", &GameBundle::algo)
      .def_readonly("max_policy", &GameBundle::max_policy)
      .def_readonly("min_policy", &GameBundle::min_policy)
      .def_readonly("lower", &GameBundle::lower)
      .def_readonly("upper", &GameBundle::upper)
      .def_readonly("max_stage_exploitability",
                    &GameBundle::max_stage_exploitability)
      .def_readonly("warnings", &GameBundle::warnings)
      .def("to_json", [](const GameBundle& b) { return bundle_to_json(b); });

  py::class_<MatrixGameSolution>(m, "MatrixGameSolution")
      .def_readonly("row_strategy", &MatrixGameSolution::row_strategy)
      .def_readonly("col_strategy", &MatrixGameSolution::col_strategy)
      .def_readonly("value", &MatrixGameSolution::value)
      .def_readonly("exploitability", &MatrixGameSolution::exploitability);

  py::class_<NashResult>(m, "NashResult")
      .def_readonly("values", &NashResult::values)
      .def_readonly("max_policy", &NashResult::max_policy)
      .def_readonly("min_policy", &NashResult::min_policy)
      .def_readonly("max_exploitability", &NashResult::max_exploitability);

  py::class_<CoverageResult>(m, "CoverageResult")
      .def_readonly("kappa", &CoverageResult::kappa)
      .def_readonly("lambda_min", &CoverageResult::lambda_min);

  // Exact oracles.
  m.def("apply_bellman", &apply_bellman, py::arg("instance"),
        py::arg("v_next"), py::arg("h"));
  m.def(
      "evaluate_policy",
      [](const LinearInstance& inst, const Policy& pi, const Policy* nu) {
        return evaluate_policy(inst, pi, nu);
      },
      py::arg("instance"), py::arg("pi"), py::arg("nu") = nullptr);
  m.def("optimal_values_mdp", &optimal_values_mdp, py::arg("instance"));
  m.def("ne_values_mg", &ne_values_mg, py::arg("instance"),
        py::arg("tol") = 1e-9);
  m.def("best_response", &best_response, py::arg("instance"), py::arg("fixed"),
        py::arg("side"));
  m.def("duality_gap", &duality_gap, py::arg("instance"), py::arg("pi"),
        py::arg("nu"), py::arg("state"));
  m.def("conditional_variance", &conditional_variance, py::arg("instance"),
        py::arg("v"), py::arg("h"));
  m.def("validate_instance", [](const LinearInstance& inst) {
    ValidationReport rep = validate_instance(inst);
    return py::make_tuple(rep.ok, rep.errors);
  });

  // Instance generators.
  m.def("tabular_embed", &tabular_embed, py::arg("tabular"),
        py::arg("id") = "tabular");
  m.def("random_linear_instance", &random_linear_instance, py::arg("kind"),
        py::arg("d"), py::arg("horizon"), py::arg("num_states"),
        py::arg("num_actions"), py::arg("num_opp_actions"), py::arg("seed"));
  m.def("random_tabular_instance", &random_tabular_instance, py::arg("kind"),
        py::arg("num_states"), py::arg("num_actions"),
        py::arg("num_opp_actions"), py::arg("horizon"), py::arg("seed"),
        py::arg("max_reward") = 1.0);

  // Data collection and splits.
  m.def(
      "collect",
      [](const LinearInstance& inst, const Policy& bmax, const Policy* bmin,
         std::size_t k, std::uint64_t seed) {
        return collect(inst, bmax, bmin, k, seed);
      },
      py::arg("instance"), py::arg("behavior_max"), py::arg("behavior_min"),
      py::arg("k"), py::arg("seed"));
  m.def("split_four_way", [](const Dataset& ds) {
    FourWaySplit s = split_four_way(ds);
    return py::make_tuple(s.ref, s.d0, s.d1, s.d0prime);
  });
  m.def("split_h_fold", [](const Dataset& ds, int folds) {
    HFoldSplit s = split_h_fold(ds, folds);
    return py::make_tuple(s.parts, s.discarded);
  });
  m.def(
      "coverage_kappa_exact",
      [](const LinearInstance& inst, const Policy& bmax, const Policy* bmin) {
        return coverage_kappa_exact(inst, bmax, bmin);
      },
      py::arg("instance"), py::arg("behavior_max"),
      py::arg("behavior_min") = nullptr);
  m.def("coverage_kappa_empirical", &coverage_kappa_empirical,
        py::arg("dataset"), py::arg("features"));

  // Matrix games and the algorithms.
  m.def("solve_matrix_game", &solve_matrix_game, py::arg("payoff"),
        py::arg("tol") = 1e-9);
  m.def("pevi", &pevi, py::arg("dataset"), py::arg("features"),
        py::arg("lam"), py::arg("config") = BonusConfig{});
  m.def("spevi", &spevi, py::arg("dataset"), py::arg("features"),
        py::arg("lam"), py::arg("config") = BonusConfig{});
  m.def("spevi_plus", &spevi_plus, py::arg("d_ref"), py::arg("d0"),
        py::arg("d1"), py::arg("d0prime"), py::arg("features"), py::arg("lam"),
        py::arg("config") = BonusConfig{});
  m.def("spmvi", &spmvi, py::arg("dataset"), py::arg("features"),
        py::arg("lam"), py::arg("config") = BonusConfig{});
  m.def("spmvi_plus", &spmvi_plus, py::arg("d_ref"), py::arg("d0"),
        py::arg("d1"), py::arg("d0prime"), py::arg("features"), py::arg("lam"),
        py::arg("config") = BonusConfig{});
}
