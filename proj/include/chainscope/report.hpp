#pragma once

#include <span>
#include <string>

#include <json.hpp>

#include "chainscope/geometry.hpp"
#include "chainscope/reachability.hpp"

namespace chainscope {

// Floats at 12 significant digits, e.g. 0.1 + 0.2 -> 0.300000000000.
std::string format_real(double x);

// Sorted keys, two-space indent, fixed float formatting, trailing newline.
std::string canonical_json(const nlohmann::json& doc);

void write_report(const nlohmann::json& report, const std::string& path);
void write_text(const std::string& text, const std::string& path);

// Header `step,coord0[,coord1],dist_to_image`, one row per step.
std::string witness_csv(std::span<const ChainStep> chain, int dim);

// Cell runs as [[first, last], ...].
nlohmann::json runs_json(const CellSet& set);

}  // namespace chainscope
