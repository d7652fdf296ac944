#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainscope/geometry.hpp"
#include "chainscope/reachability.hpp"
#include "chainscope/systems.hpp"

namespace chainscope {

enum class OrbitKind { FixedPoint, Periodic, Other };

struct Classification {
  OrbitKind kind = OrbitKind::Other;
  int period = 0;  // 1 for fixed points, q for periodic(q), 0 otherwise
  Point representative{};
  // Set when a multi-valued system was classified under one fixed control.
  bool fixed_control = false;
  double control = 0.0;

  std::string label() const;
};

// Least q <= q_max with d(f^q(x), x) <= tol under control u.
Classification classify_point(const System& sys, const Point& x, int q_max, double tol,
                              std::optional<double> control = std::nullopt);

/// Searches the component for the point (cell center) with the smallest
/// return period under f and classifies it.
Classification classify_component(const System& sys, const CellSet& comp, int q_max, double tol);

enum class Stability { StableCertified, UnstableWitnessed, Inconclusive };
std::string to_string(Stability s);

struct LyapunovReport {
  Stability flag = Stability::Inconclusive;
  // Stable: W = fatten(A, w_radius) has graph reach inside V.
  std::optional<double> w_radius;
  double graph_eps = 0.0;
  double v_eps = 0.0;
  // Unstable: a true orbit from a point of A that leaves V.
  std::vector<ChainStep> escape;
  std::string note;
};

/// Tests Lyapunov stability of A against V = fatten(A, v_eps), with W ranging
/// over the metric fattenings fatten(A, w) for w in `w_schedule`.
LyapunovReport lyapunov_stability(const System& sys, const CellSet& a_set, double v_eps,
                                  std::span<const double> w_schedule, std::size_t max_steps = 100000);
LyapunovReport lyapunov_stability(const System& sys, const CellSet& a_set, double v_eps);

// Whether a stable certificate still holds on a fresh graph.
bool replay_stability(const System& sys, const CellSet& a_set, const LyapunovReport& report);

struct OmegaResult {
  CellSet cells{Grid{Domain::interval(0.0, 1.0), 1}};
  bool stabilized = false;
  std::size_t steps = 0;
};

/// Cell cover of the orbit tail after `burn_in` steps, grown one window at
/// a time until a window adds no cell (or moves the cover by at most tol).
OmegaResult omega_limit(const System& sys, const Grid& grid, const Point& x, std::size_t burn_in, std::size_t window,
                        double tol, std::optional<double> control = std::nullopt, std::size_t max_windows = 64);

enum class Isolation { Yes, No, Unknown };
std::string to_string(Isolation i);

struct MinimalSetApprox {
  CellSet cells;
  Classification classification;
  Stability stability = Stability::Inconclusive;
  Isolation isolated = Isolation::Unknown;
  // The component holds many distinct invariant orbit closures, i.e. a
  // continuum of minimal sets at this resolution.
  bool continuum = false;
  // No sampled orbit stays in the component; it is reported on recurrence
  // evidence alone, and `cells` covers the periodic orbit found in it.
  bool recurrence_only = false;
  bool nested = true;  // inside the fattened coarser-level components
  LyapunovReport lyapunov;
};

enum class CensusCount { One, Finite, UnboundedAtResolution, None };
std::string to_string(CensusCount c);

struct CensusOptions {
  int q_max = 64;
  std::size_t samples = 32;
  // Neighborhood radius for the stability test; defaults to eps0.
  std::optional<double> v_eps;
  std::size_t max_steps = 200000;
};

struct Census {
  std::vector<MinimalSetApprox> sets;
  CensusCount count = CensusCount::None;
  std::vector<std::size_t> components_per_level;
  Grid finest_grid{Domain::interval(0.0, 1.0), 1};
  double finest_eps = 0.0;
  bool partial = false;  // a level hit the grid cap
  // Components with no invariant sample orbit and no periodic point.
  std::size_t discarded = 0;
};

/// Approximates the minimal sets by chain-recurrent components of the
/// finest level graph, refined by sampled orbit closures within each
/// component.
Census minimal_sets(const System& sys, const Grid& base, double eps0, int levels, const CensusOptions& options = {});

/// Graph-level weak basin of A: backward reach of A at each level,
/// intersected on the finest grid. A must be forward-invariant at the
/// coarsest level.
CellSet weak_basin(const System& sys, const CellSet& a_set, double eps0, int levels);

struct SampleVerdict {
  Point point;
  RobustVerdict verdict = RobustVerdict::NonRobustAtResolution;
  std::optional<double> delta;
  bool witness_valid = false;
  // Added by the report: a fixed point of an unstable minimal set.
  bool census_point = false;
};

struct DichotomyOptions {
  double eps0 = 0.05;
  int levels = 2;
  std::optional<double> robust_eps;  // defaults to eps0
  CensusOptions census;
  std::size_t burn_in = 10000;
  std::size_t window = 0;  // 0: 4 x finest grid size
};

struct DichotomyReport {
  std::string system;
  Census census;
  std::vector<SampleVerdict> samples;
  bool all_robust = false;
  bool hypothesis_holds = false;  // robust samples and a continuous system
  bool verdict_consistent = false;
  std::optional<bool> global_attraction;
  std::vector<std::string> notes;
};

DichotomyReport dichotomy_report(const System& sys, const Grid& base, std::span<const Point> samples,
                                 const DichotomyOptions& options = {});

}  // namespace chainscope
