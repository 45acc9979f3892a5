#pragma once

#include <string>

#include "json.hpp"
#include "kal/model.hpp"

namespace kal {

// Missing keys fall back to default_problem(); unknown keys and wrong types
// raise ConfigError. Hypothesis violations are left to validate_hypotheses.
ProblemSpec load_problem(const nlohmann::json& j);
ProblemSpec load_problem_file(const std::string& path);

nlohmann::json read_json_file(const std::string& path);

// FNV-1a over the canonical dump; object keys are sorted, so the digest does
// not depend on key order in the file
std::string config_digest(const nlohmann::json& j);

}  // namespace kal
