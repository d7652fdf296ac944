#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chainscope/geometry.hpp"
#include "chainscope/systems.hpp"
#include "chainscope/transition.hpp"

namespace chainscope {

/// Which controls an orbit may use: every control in U (the reachable tree
/// of the multifunction), or a fixed sequence repeated cyclically.
struct ControlPolicy {
  bool all = true;
  std::vector<double> sequence;

  static ControlPolicy every() { return {}; }
  static ControlPolicy fixed(std::vector<double> seq) { return {false, std::move(seq)}; }
};

enum class ReachMode { OrbitSampled, Graph };

struct ReachResult {
  ReachMode mode = ReachMode::OrbitSampled;
  CellSet cells{Grid{Domain::interval(0.0, 1.0), 1}};
  std::size_t steps_used = 0;
  bool converged = false;
  // Sampled orbit points (orbit mode only).
  std::vector<Point> points;
};

// Default orbit return tolerance: half the smallest cell width.
double default_orbit_tol(const Grid& grid);

/// Cell cover of the sampled reachable set {F^n(x) : n <= max_steps}. A
/// single-valued orbit converges once an iterate returns within `tol` of an
/// earlier iterate without adding cells; a control tree converges when
/// every branch lands in an already visited cell.
ReachResult orbit_reach(const System& sys, const Grid& grid, const Point& x,
                        const ControlPolicy& policy = ControlPolicy::every(), std::size_t max_steps = 100000,
                        std::optional<double> tol = std::nullopt);

// Reach in the graph built at eps, as a ReachResult in graph mode.
ReachResult graph_reach(const System& sys, const CellSet& start, double eps);

struct ChainLevel {
  double eps;
  Grid grid;
  CellSet cells;
};

struct ChainReachResult {
  std::vector<ChainLevel> levels;
  std::optional<CellSet> final;
  bool stabilized = false;
  std::size_t graph_cells = 0;  // total cells over all level graphs
};

// Grid cap, taken from CHAINSCOPE_MAX_CELLS (default 2^22).
std::size_t max_grid_cells();

class ChainReachResourceError : public ResourceError {
 public:
  ChainReachResourceError(const std::string& what, ChainReachResult partial)
      : ResourceError(what), partial_(std::move(partial)) {}
  const ChainReachResult& partial() const { return partial_; }

 private:
  ChainReachResult partial_;
};

/// Nested approximations of the chain reachable set: level k uses
/// eps0 / 2^k on the start grid refined k times. With `fatten_start`, the
/// start set of level k is first fattened by eps_k.
ChainReachResult chain_reach(const System& sys, const CellSet& start, double eps0, int levels,
                             bool fatten_start = false);

// eps/2, eps/4, ... down to the last value >= 4 x cell diameter.
std::vector<double> default_delta_schedule(double eps, const Grid& grid);
// Schedules must be strictly decreasing, positive, and end at or above the
// resolution coupling threshold.
void validate_schedule(std::span<const double> schedule, const Grid& grid);

enum class RobustVerdict { RobustAtResolution, NonRobustAtResolution };
std::string to_string(RobustVerdict v);

struct ChainStep {
  Point point;
  double dist_to_image;  // distance to the nearest true image of the previous point
};

struct RobustnessCertificate {
  RobustVerdict verdict = RobustVerdict::NonRobustAtResolution;
  double eps = 0.0;
  std::optional<double> delta;
  Grid grid{Domain::interval(0.0, 1.0), 1};
  double delta_min = 0.0;
  std::vector<double> schedule;
  // Non-robust only: a delta_min-chain from x ending farther than eps
  // from the sampled reach set.
  std::vector<ChainStep> witness;
  double witness_endpoint_distance = 0.0;
  bool witness_valid = false;
  std::size_t reach_cells = 0;    // size of the sampled reach cover
  std::size_t target_cells = 0;   // size of its eps-fattening
};

RobustnessCertificate robustness_check(const System& sys, const Grid& grid, const Point& x, double eps,
                                       std::span<const double> schedule, std::size_t max_steps = 100000);
RobustnessCertificate robustness_check(const System& sys, const Grid& grid, const Point& x, double eps);

// Re-verifies a certificate against a freshly built graph (robust) or by
// stepping the witness chain (non-robust).
bool replay_certificate(const System& sys, const Point& x, const RobustnessCertificate& cert,
                        std::size_t max_steps = 100000);

// Whether `chain` starts at x and every step lies strictly within delta of
// some true image of its predecessor.
bool is_delta_chain(const System& sys, const Point& x, std::span<const ChainStep> chain, double delta);

// Builds a delta-chain from x that follows `cells` (cell centers), moving
// each step at most 0.999 delta from the true image; then continues with
// unperturbed iterates until it is more than `escape` away from every
// point of `avoid`, or `max_free` steps pass.
std::vector<ChainStep> steer_chain(const System& sys, const Grid& grid, const Point& x, std::span<const CellId> cells,
                                   double delta, std::span<const Point> avoid, double escape,
                                   std::size_t max_free = 10000);

struct Lemma2Report {
  std::optional<double> delta;
  // (delta, first failing step) for every rejected delta.
  std::vector<std::pair<double, int>> rejected;
  int steps_checked = 0;
};

/// Searches the schedule for delta with
/// F_delta^n(fatten(start, delta)) within F_eps^n(start) for all n <= n_max,
/// comparing exact per-step frontiers of the graphs at delta and eps.
Lemma2Report verify_lemma2(const System& sys, const CellSet& start, double eps, int n_max,
                           std::span<const double> schedule);

struct InitialFatteningReport {
  ChainReachResult plain;
  ChainReachResult fattened;
  std::vector<double> hausdorff_per_level;
  double finest_eps = 0.0;
  double finest_diameter = 0.0;
  // Hausdorff excess over the initial fattening radius at the finest level.
  double residual = 0.0;
  bool equal = false;
};

/// Runs chain_reach from start and from its eps_k-fattening at every level
/// and compares the finest levels. The fattened run necessarily contains
/// B_{eps_k}(start); that excess vanishes with eps_k, so agreement means the
/// Hausdorff distance exceeds eps_finest by at most one cell diameter.
InitialFatteningReport verify_initial_fattening(const System& sys, const CellSet& start, double eps0, int levels);

enum class ProbeMode { Usc, Lsc };
std::string to_string(ProbeMode m);

struct ProbeReport {
  ProbeMode mode = ProbeMode::Usc;
  std::optional<double> delta;
  std::optional<Point> violating;
  std::size_t samples_per_delta = 32;
};

// Deterministic low-discrepancy samples of the closed delta-ball around x,
// mapped into the domain.
std::vector<Point> ball_samples(const Domain& domain, const Point& x, double delta, std::size_t count);

/// USC: sampled y in B_delta(x) have reach(y) inside the eps-fattening of
/// reach(x). LSC: reach(x) lies inside the eps-fattening of reach(y).
/// Throws InconclusiveError if any orbit fails to converge.
ProbeReport semicontinuity_probe(const System& sys, const Grid& grid, const Point& x, double eps, ProbeMode mode,
                                 std::span<const double> schedule, std::size_t max_steps = 100000);

struct SafetyReport {
  bool safe = false;
  bool eps_safe = false;
  bool perturbed_guarantee = false;
  std::optional<double> delta;
  std::optional<RobustnessCertificate> robustness;
};

SafetyReport safety_check(const System& sys, const Grid& grid, const Point& x, const CellSet& safe, double eps,
                          std::size_t max_steps = 100000);

}  // namespace chainscope
