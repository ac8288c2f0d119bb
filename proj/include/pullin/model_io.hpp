#pragma once

#include <string>

#include "json.hpp"
#include "pullin/models.hpp"

namespace pullin {

struct ModelSpec {
    GModel g;
    FModel f;
};

// Parses {"g": {"family": ...}, "beta": ..., "f": {"family": ...}}.
// Strict: unknown keys anywhere are rejected, all numbers must be finite.
// Throws ConfigError.
ModelSpec model_from_json(const nlohmann::json& doc);

nlohmann::json model_to_json(const ModelSpec& spec);

// Finite-number extraction with ConfigError reporting.
double config_number(const nlohmann::json& obj, const std::string& key);

}  // namespace pullin
