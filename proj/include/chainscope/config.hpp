#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chainscope/error.hpp"
#include "chainscope/geometry.hpp"
#include "chainscope/systems.hpp"

namespace chainscope {

// Malformed or invalid configuration text.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct BoxSpec {
  int dim = 1;
  Point lo{};
  Point hi{};
};

struct VerifySpec {
  std::string property;  // lemma2 | initial-fattening | semicontinuity
  std::size_t instances = 1;
  std::string mode = "usc";
  int n_max = 50;
};

struct RunConfig {
  std::string system;
  std::map<std::string, double> params;
  std::optional<std::vector<double>> controls;
  std::optional<BoxSpec> domain;
  std::array<int, 2> cells{0, 1};

  std::optional<double> eps0;
  std::optional<double> eps;
  std::optional<double> v_eps;
  int levels = 1;
  std::vector<double> delta_schedule;

  std::vector<Point> start_points;
  std::optional<BoxSpec> start_box;
  std::optional<Point> point;
  std::optional<BoxSpec> safe_set;
  std::optional<BoxSpec> target;
  std::vector<Point> samples;
  std::optional<VerifySpec> verify;

  std::size_t max_steps = 100000;
  int q_max = 64;
  bool fatten_start = false;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = auto

  // Canonical echo of the parsed document, minus `threads`.
  nlohmann::json echo;

  System make_system() const;
  Grid make_grid() const;
  CellSet start_set(const Grid& grid) const;
};

// Parses and validates; errors carry line and column for syntax errors and
// name the offending key otherwise.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

}  // namespace chainscope
