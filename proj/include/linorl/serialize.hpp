#pragma once

#include <string>

#include "linorl/algos_mdp.hpp"
#include "linorl/algos_mg.hpp"
#include "linorl/data.hpp"
#include "linorl/instances.hpp"
#include "linorl/model.hpp"

namespace linorl {

// Shortest round-trip decimal formatting (bit-exact for finite doubles) and
// a fixed 17-significant-digit form for the dataset files.
std::string format_double(double v);
std::string format_double17(double v);

std::string instance_to_json(const LinearInstance& instance);
LinearInstance instance_from_json(const std::string& text);
void save_instance(const LinearInstance& instance, const std::string& path);
LinearInstance load_instance(const std::string& path);

std::string policy_to_json(const Policy& policy);
Policy policy_from_json(const std::string& text);
void save_policy(const Policy& policy, const std::string& path);
Policy load_policy(const std::string& path);

std::string bundle_to_json(const PolicyBundle& bundle);
std::string bundle_to_json(const GameBundle& bundle);

std::string analytic_to_json(const LowerBoundAnalytic& analytic);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace linorl
