#include "linorl/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace linorl {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string format_double17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

namespace {

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (long i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vec vec_from_json(const json& arr) {
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
  return v;
}

json mat_rows_to_json(const Mat& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r)
    rows.push_back(vec_to_json(m.row(r).transpose()));
  return rows;
}

Mat mat_rows_from_json(const json& rows) {
  if (rows.empty()) return Mat();
  Mat m(rows.size(), rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(r, c) = rows[r][c].get<double>();
  return m;
}

}  // namespace

std::string instance_to_json(const LinearInstance& inst) {
  json j;
  j["kind"] = inst.kind == Kind::Mdp ? "mdp" : "mg";
  j["d"] = inst.features.d;
  j["H"] = inst.horizon;
  j["num_states"] = inst.num_states;
  j["num_actions"] = inst.num_actions;
  if (inst.kind == Kind::Game) j["num_actions_min"] = inst.num_opp_actions;

  // features: [x][a][d] for MDPs, [x][a][b][d] for games.
  json feats = json::array();
  for (int x = 0; x < inst.num_states; ++x) {
    json per_a = json::array();
    for (int a = 0; a < inst.num_actions; ++a) {
      if (inst.kind == Kind::Game) {
        json per_b = json::array();
        for (int b = 0; b < inst.num_opp_actions; ++b)
          per_b.push_back(vec_to_json(inst.features.feature(x, a, b)));
        per_a.push_back(per_b);
      } else {
        per_a.push_back(vec_to_json(inst.features.feature(x, a)));
      }
    }
    feats.push_back(per_a);
  }
  j["features"] = feats;

  json measures = json::array();
  for (const Mat& m : inst.measures) measures.push_back(mat_rows_to_json(m));
  j["measures"] = measures;

  json thetas = json::array();
  for (const Vec& t : inst.thetas) thetas.push_back(vec_to_json(t));
  j["thetas"] = thetas;

  if (inst.reward_noise.type == RewardNoise::Type::None)
    j["reward_noise"] = "none";
  else
    j["reward_noise"] = json{{"gaussian", inst.reward_noise.sigma}};

  j["initial_dist"] = vec_to_json(inst.initial_dist);
  j["metadata"] = json{{"id", inst.id}};
  return j.dump(2);
}

LinearInstance instance_from_json(const std::string& text) {
  json j = json::parse(text);
  LinearInstance inst;
  inst.kind = j.at("kind").get<std::string>() == "mdp" ? Kind::Mdp : Kind::Game;
  inst.horizon = j.at("H").get<int>();
  inst.num_states = j.at("num_states").get<int>();
  inst.num_actions = j.at("num_actions").get<int>();
  inst.num_opp_actions =
      inst.kind == Kind::Game ? j.at("num_actions_min").get<int>() : 1;
  const int d = j.at("d").get<int>();

  inst.features.d = d;
  inst.features.num_states = inst.num_states;
  inst.features.num_actions = inst.num_actions;
  inst.features.num_opp_actions = inst.num_opp_actions;
  inst.features.columns =
      Mat(d, static_cast<long>(inst.num_states) * inst.joint_actions());
  const json& feats = j.at("features");
  for (int x = 0; x < inst.num_states; ++x)
    for (int a = 0; a < inst.num_actions; ++a) {
      if (inst.kind == Kind::Game) {
        for (int b = 0; b < inst.num_opp_actions; ++b)
          inst.features.columns.col(inst.features.flat(x, a, b)) =
              vec_from_json(feats[x][a][b]);
      } else {
        inst.features.columns.col(inst.features.flat(x, a)) =
            vec_from_json(feats[x][a]);
      }
    }

  for (const auto& m : j.at("measures"))
    inst.measures.push_back(mat_rows_from_json(m));
  for (const auto& t : j.at("thetas")) inst.thetas.push_back(vec_from_json(t));

  const json& noise = j.at("reward_noise");
  if (noise.is_string() && noise.get<std::string>() == "none")
    inst.reward_noise = {RewardNoise::Type::None, 0.0};
  else
    inst.reward_noise = {RewardNoise::Type::Gaussian,
                         noise.at("gaussian").get<double>()};

  inst.initial_dist = vec_from_json(j.at("initial_dist"));
  if (j.contains("metadata") && j["metadata"].contains("id"))
    inst.id = j["metadata"]["id"].get<std::string>();
  return inst;
}

void save_instance(const LinearInstance& inst, const std::string& path) {
  write_file(path, instance_to_json(inst));
}

LinearInstance load_instance(const std::string& path) {
  return instance_from_json(read_file(path));
}

std::string policy_to_json(const Policy& policy) {
  json j;
  json steps = json::array();
  for (const Mat& m : policy.probs) steps.push_back(mat_rows_to_json(m));
  j["probs"] = steps;
  return j.dump();
}

Policy policy_from_json(const std::string& text) {
  json j = json::parse(text);
  Policy p;
  for (const auto& m : j.at("probs")) p.probs.push_back(mat_rows_from_json(m));
  return p;
}

void save_policy(const Policy& policy, const std::string& path) {
  write_file(path, policy_to_json(policy));
}

Policy load_policy(const std::string& path) {
  return policy_from_json(read_file(path));
}

namespace {

json bonus_summary(const std::vector<Mat>& bonuses) {
  json arr = json::array();
  for (const Mat& b : bonuses) {
    arr.push_back(json{{"min", b.minCoeff()},
                       {"max", b.maxCoeff()},
                       {"mean", b.mean()}});
  }
  return arr;
}

json config_echo(const BonusConfig& cfg, double lambda, double kappa_used) {
  json j{{"delta", cfg.delta},       {"c_hoeff", cfg.c_hoeff},
         {"c_bern", cfg.c_bern},     {"c_adv", cfg.c_adv},
         {"sigma_bar", cfg.sigma_bar}, {"lambda", lambda}};
  switch (cfg.kappa_source) {
    case KappaSource::Exact: j["kappa_source"] = "exact"; break;
    case KappaSource::Empirical: j["kappa_source"] = "empirical"; break;
    case KappaSource::Supplied: j["kappa_source"] = "supplied"; break;
  }
  if (kappa_used > 0.0) j["kappa_used"] = kappa_used;
  return j;
}

json values_json(const ValueTable& vt, int horizon) {
  json v = json::array();
  for (int h = 0; h < horizon; ++h) v.push_back(vec_to_json(vt.v[h]));
  return v;
}

}  // namespace

std::string bundle_to_json(const PolicyBundle& bundle) {
  json j;
  j["algo"] = bundle.algo;
  // Greedy MDP policies are deterministic: store the action index table.
  json policy = json::array();
  for (const Mat& m : bundle.policy.probs) {
    json per_state = json::array();
    for (long x = 0; x < m.rows(); ++x) {
      int arg = 0;
      m.row(x).maxCoeff(&arg);
      per_state.push_back(arg);
    }
    policy.push_back(per_state);
  }
  j["policy"] = policy;
  j["V"] = values_json(bundle.values, static_cast<int>(bundle.policy.probs.size()));
  j["bonuses"] = bonus_summary(bundle.bonus);
  j["config"] = config_echo(bundle.config, bundle.lambda, bundle.kappa_used);
  j["warnings"] = bundle.warnings;
  return j.dump(2);
}

namespace {

// The game-bundle floats (mixed strategies included) are written with 17
// significant digits, so this one is assembled by hand.
void append_mat17(std::string& out, const Mat& m) {
  out += '[';
  for (long r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    out += '[';
    for (long c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      out += format_double17(m(r, c));
    }
    out += ']';
  }
  out += ']';
}

void append_vec17(std::string& out, const Vec& v) {
  out += '[';
  for (long i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double17(v(i));
  }
  out += ']';
}

void append_policy17(std::string& out, const Policy& p) {
  out += '[';
  for (std::size_t h = 0; h < p.probs.size(); ++h) {
    if (h) out += ',';
    append_mat17(out, p.probs[h]);
  }
  out += ']';
}

}  // namespace

std::string bundle_to_json(const GameBundle& bundle) {
  const int horizon = static_cast<int>(bundle.max_policy.probs.size());
  std::string out = "{\n  \"algo\": " + json(bundle.algo).dump() + ",\n";
  out += "  \"policy\": {\"max\": ";
  append_policy17(out, bundle.max_policy);
  out += ", \"min\": ";
  append_policy17(out, bundle.min_policy);
  out += "},\n  \"V\": {\"lower\": [";
  for (int h = 0; h < horizon; ++h) {
    if (h) out += ',';
    append_vec17(out, bundle.lower.v[h]);
  }
  out += "], \"upper\": [";
  for (int h = 0; h < horizon; ++h) {
    if (h) out += ',';
    append_vec17(out, bundle.upper.v[h]);
  }
  out += "]},\n";
  auto bonuses17 = [&out](const std::vector<Mat>& bonuses) {
    out += '[';
    for (std::size_t h = 0; h < bonuses.size(); ++h) {
      if (h) out += ',';
      out += "{\"min\": " + format_double17(bonuses[h].minCoeff()) +
             ", \"max\": " + format_double17(bonuses[h].maxCoeff()) +
             ", \"mean\": " + format_double17(bonuses[h].mean()) + "}";
    }
    out += ']';
  };
  out += "  \"bonuses\": {\"lower\": ";
  bonuses17(bundle.lower_bonus);
  out += ", \"upper\": ";
  bonuses17(bundle.upper_bonus);
  out += "},\n  \"stage_exploitability\": " +
         format_double17(bundle.max_stage_exploitability) + ",\n";
  out += "  \"config\": " +
         config_echo(bundle.config, bundle.lambda, bundle.kappa_used).dump() +
         ",\n";
  out += "  \"warnings\": " + json(bundle.warnings).dump() + "\n}";
  return out;
}

std::string analytic_to_json(const LowerBoundAnalytic& analytic) {
  json j;
  json v = json::array();
  for (const Vec& vh : analytic.v_star) v.push_back(vec_to_json(vh));
  j["v_star"] = v;
  json u = json::array();
  for (const auto& uh : analytic.u) {
    json row = json::array();
    for (long i = 0; i < uh.size(); ++i) row.push_back(uh(i));
    u.push_back(row);
  }
  j["u"] = u;
  j["zeta"] = analytic.zeta;
  // gap(pi) = coefficient * sum_h (d-2 - <E_pi[a_h], u_h>)
  j["gap_coefficients"] =
      json{{"scale", analytic.zeta / std::sqrt(2.0 * analytic.d)},
           {"offset_per_step", analytic.d - 2}};
  j["chain"] = mat_rows_to_json(analytic.chain);
  j["second_moment"] = mat_rows_to_json(analytic.second_moment);
  return j.dump(2);
}

}  // namespace linorl
