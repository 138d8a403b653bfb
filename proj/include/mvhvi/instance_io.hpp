#pragma once

#include <string>

#include "mvhvi/types.hpp"

namespace mvhvi {

/// Parses and validates an instance document.  Unknown keys are rejected.
ProblemInstance parse_instance(const std::string& json_text);

/// Loads an instance from a file path.
ProblemInstance load_instance(const std::string& path);

/// Serializes an instance back to the document schema.
std::string instance_to_json(const ProblemInstance& inst);

void save_instance(const ProblemInstance& inst, const std::string& path);

} // namespace mvhvi
