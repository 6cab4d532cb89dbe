#pragma once

#include <string>
#include <vector>

#include "ttalab/harness.hpp"

namespace ttalab {

// Grid config text: `key = value` lines, `#` comments, comma-separated
// lists.  Each `[grid]` line opens a fresh block with default values;
// keys before the first `[grid]` form an implicit block.  Unknown keys
// throw.  Returns one GridSpec per block, validated.
std::vector<GridSpec> parse_grid_config(const std::string& text);

std::vector<GridSpec> load_grid_config(const std::string& path);

}  // namespace ttalab
