#include "chainscope/reachability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <numbers>
#include <sstream>
#include <unordered_map>

namespace chainscope {

namespace {

// Nearest-point queries against a fixed point cloud. One-dimensional clouds
// are sorted; planar ones are scanned.
class PointCloud {
 public:
  PointCloud(const Domain& domain, std::span<const Point> points) : domain_(domain) {
    if (domain.dim() == 1) {
      for (const auto& p : points) xs_.push_back(p[0]);
      std::sort(xs_.begin(), xs_.end());
    } else {
      pts_.assign(points.begin(), points.end());
    }
  }

  double distance(const Point& p) const {
    double best = std::numeric_limits<double>::infinity();
    if (domain_.dim() == 1) {
      if (xs_.empty()) return best;
      auto consider = [&](double v) { best = std::min(best, domain_.raw_distance(p, {v, 0.0})); };
      auto it = std::lower_bound(xs_.begin(), xs_.end(), p[0]);
      if (it != xs_.end()) consider(*it);
      if (it != xs_.begin()) consider(*std::prev(it));
      consider(xs_.front());
      consider(xs_.back());
      return best;
    }
    for (const auto& q : pts_) best = std::min(best, domain_.raw_distance(p, q));
    return best;
  }

 private:
  const Domain& domain_;
  std::vector<double> xs_;
  std::vector<Point> pts_;
};

double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

ReachResult orbit_single(const System& sys, const Grid& grid, const Point& x0, const ControlPolicy& policy,
                         std::size_t max_steps, double tol) {
  const Domain& dom = grid.domain();
  const std::size_t period = policy.all ? 1 : policy.sequence.size();
  auto control_at = [&](std::size_t n) { return policy.all ? sys.controls().front() : policy.sequence[n % period]; };

  ReachResult res{ReachMode::OrbitSampled, CellSet(grid), 0, false, {}};
  // Orbit point indices by cell, for return detection.
  std::unordered_map<CellId, std::vector<std::size_t>> by_cell;
  const int reach = std::max(1, static_cast<int>(std::ceil(tol / grid.min_cell_width())));

  auto returned = [&](const Point& p, CellId c, std::size_t step) {
    const auto ij = grid.coords(c);
    for (int dj = (grid.dim() == 2 ? -reach : 0); dj <= (grid.dim() == 2 ? reach : 0); ++dj) {
      for (int di = -reach; di <= reach; ++di) {
        int i = ij[0] + di, j = ij[1] + dj;
        if (dom.kind() == DomainKind::Circle) {
          i = ((i % grid.cells(0)) + grid.cells(0)) % grid.cells(0);
        } else if (i < 0 || i >= grid.cells(0)) {
          continue;
        }
        if (j < 0 || j >= grid.cells(1)) continue;
        auto it = by_cell.find(grid.id({i, j}));
        if (it == by_cell.end()) continue;
        for (std::size_t k : it->second) {
          if (k % period == step % period && dom.raw_distance(res.points[k], p) <= tol) return true;
        }
      }
    }
    return false;
  };

  Point x = x0;
  CellId c = grid.cell_of(x);
  res.cells.insert(c);
  res.points.push_back(x);
  by_cell[c].push_back(0);
  for (std::size_t n = 1; n <= max_steps; ++n) {
    x = sys.image(x, control_at(n - 1));
    c = grid.cell_of(x);
    const bool new_cell = !res.cells.contains(c);
    if (!new_cell && returned(x, c, n)) {
      res.steps_used = n;
      res.converged = true;
      return res;
    }
    res.cells.insert(c);
    res.points.push_back(x);
    by_cell[c].push_back(res.points.size() - 1);
    res.steps_used = n;
  }
  return res;
}

ReachResult orbit_tree(const System& sys, const Grid& grid, const Point& x0, std::size_t max_steps) {
  ReachResult res{ReachMode::OrbitSampled, CellSet(grid), 0, false, {}};
  std::deque<std::pair<Point, std::size_t>> queue;
  res.cells.insert(grid.cell_of(x0));
  res.points.push_back(x0);
  queue.emplace_back(x0, 0);
  std::size_t expansions = 0;
  while (!queue.empty()) {
    if (expansions >= max_steps) return res;
    auto [p, depth] = queue.front();
    queue.pop_front();
    ++expansions;
    for (double u : sys.controls()) {
      const Point y = sys.image(p, u);
      const CellId c = grid.cell_of(y);
      if (res.cells.contains(c)) continue;
      res.cells.insert(c);
      res.points.push_back(y);
      res.steps_used = std::max(res.steps_used, depth + 1);
      queue.emplace_back(y, depth + 1);
    }
  }
  res.converged = true;
  return res;
}

}  // namespace

double default_orbit_tol(const Grid& grid) { return 0.5 * grid.min_cell_width(); }

ReachResult orbit_reach(const System& sys, const Grid& grid, const Point& x, const ControlPolicy& policy,
                        std::size_t max_steps, std::optional<double> tol) {
  if (!(sys.domain() == grid.domain())) throw DomainError("grid domain differs from the system domain");
  sys.domain().require(x);
  if (!policy.all) {
    if (policy.sequence.empty()) throw PreconditionError("fixed control policy needs a nonempty sequence");
    for (double u : policy.sequence) {
      if (!sys.has_control(u)) throw ControlError("policy uses a control outside U");
    }
  }
  const double t = tol.value_or(default_orbit_tol(grid));
  if (!(t > 0.0)) throw PreconditionError("orbit tolerance must be positive");
  if (policy.all && !sys.single_valued()) return orbit_tree(sys, grid, x, max_steps);
  return orbit_single(sys, grid, x, policy, max_steps, t);
}

ReachResult graph_reach(const System& sys, const CellSet& start, double eps) {
  const auto g = build_graph(sys, start.grid(), eps);
  return {ReachMode::Graph, forward_reach(g, start), 0, true, {}};
}

std::size_t max_grid_cells() {
  if (const char* env = std::getenv("CHAINSCOPE_MAX_CELLS")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::size_t{1} << 22;
}

ChainReachResult chain_reach(const System& sys, const CellSet& start, double eps0, int levels, bool fatten_start) {
  if (levels < 1) throw PreconditionError("chain_reach needs at least one level");
  if (start.empty()) throw EmptySetError("start set must be nonempty");
  ChainReachResult result;
  const std::size_t cap = max_grid_cells();
  Grid grid = start.grid();
  double eps = eps0;
  for (int k = 0; k < levels; ++k) {
    if (k > 0) {
      grid = grid.refined();
      eps *= 0.5;
    }
    if (grid.size() > cap) {
      std::ostringstream os;
      os << "level " << k << " grid has " << grid.size() << " cells, above the cap of " << cap;
      throw ChainReachResourceError(os.str(), result);
    }
    CellSet s = start.refined_to(grid);
    if (fatten_start) s = fatten(s, eps);
    const auto g = build_graph(sys, grid, eps);
    result.graph_cells += grid.size();
    result.levels.push_back({eps, grid, forward_reach(g, s)});
  }
  result.final = result.levels.back().cells;
  if (levels >= 2) {
    const auto& last = result.levels.back();
    const auto prev = result.levels[result.levels.size() - 2].cells.refined_to(last.grid);
    result.stabilized = hausdorff(prev, last.cells) <= last.grid.cell_diameter() * (1.0 + 1e-12);
  }
  return result;
}

std::vector<double> default_delta_schedule(double eps, const Grid& grid) {
  std::vector<double> out;
  const double floor = kResolutionCoupling * grid.cell_diameter();
  for (double d = 0.5 * eps; d >= floor * (1.0 - 1e-12); d *= 0.5) out.push_back(d);
  if (out.empty()) {
    std::ostringstream os;
    os << "no delta in [" << floor << ", " << 0.5 * eps << "]; refine the grid";
    throw ResolutionError(os.str());
  }
  return out;
}

void validate_schedule(std::span<const double> schedule, const Grid& grid) {
  if (schedule.empty()) throw PreconditionError("delta schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 0.0)) throw PreconditionError("delta schedule entries must be positive");
    if (i > 0 && !(schedule[i] < schedule[i - 1])) throw PreconditionError("delta schedule must be strictly decreasing");
  }
  if (schedule.back() < kResolutionCoupling * grid.cell_diameter() * (1.0 - 1e-12)) {
    throw ResolutionError("smallest delta is below the resolution coupling threshold");
  }
}

std::string to_string(RobustVerdict v) {
  return v == RobustVerdict::RobustAtResolution ? "robust-at-resolution" : "non-robust-at-resolution";
}

std::string to_string(ProbeMode m) { return m == ProbeMode::Usc ? "usc" : "lsc"; }

bool is_delta_chain(const System& sys, const Point& x, std::span<const ChainStep> chain, double delta) {
  const Domain& dom = sys.domain();
  if (chain.empty() || dom.raw_distance(chain.front().point, x) != 0.0) return false;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (!dom.contains(chain[i].point)) return false;
    double best = std::numeric_limits<double>::infinity();
    for (double u : sys.controls()) best = std::min(best, dom.raw_distance(chain[i].point, sys.apply(chain[i - 1].point, u)));
    if (!(best < delta)) return false;
  }
  return true;
}

std::vector<ChainStep> steer_chain(const System& sys, const Grid& grid, const Point& x, std::span<const CellId> cells,
                                   double delta, std::span<const Point> avoid, double escape, std::size_t max_free) {
  const Domain& dom = sys.domain();
  const PointCloud cloud(dom, avoid);
  std::vector<ChainStep> chain{{x, 0.0}};
  Point y = x;
  for (CellId c : cells) {
    const Point t = grid.cell_center(c);
    Point img{};
    double best = std::numeric_limits<double>::infinity();
    for (double u : sys.controls()) {
      const Point cand = sys.apply(y, u);
      const double d = dom.raw_distance(cand, t);
      if (d < best) {
        best = d;
        img = cand;
      }
    }
    Point next = img;
    if (best > 0.0) {
      const double step = std::min(best, 0.999 * delta);
      const Point disp = dom.displacement(img, t);
      const double scale = step / best;
      next = dom.normalize({img[0] + disp[0] * scale, img[1] + disp[1] * scale});
    }
    chain.push_back({next, dom.raw_distance(next, img)});
    y = next;
    if (cloud.distance(y) > escape) return chain;
  }
  for (std::size_t k = 0; k < max_free && cloud.distance(y) <= escape; ++k) {
    Point img{};
    double far = -1.0;
    for (double u : sys.controls()) {
      const Point cand = sys.apply(y, u);
      const double d = cloud.distance(cand);
      if (d > far) {
        far = d;
        img = cand;
      }
    }
    chain.push_back({img, 0.0});
    y = img;
  }
  return chain;
}

RobustnessCertificate robustness_check(const System& sys, const Grid& grid, const Point& x, double eps,
                                       std::span<const double> schedule, std::size_t max_steps) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  validate_schedule(schedule, grid);
  const auto orbit = orbit_reach(sys, grid, x, ControlPolicy::every(), max_steps);
  if (!orbit.converged) throw InconclusiveError("orbit did not converge; raise max_steps");
  const CellSet target = fatten(orbit.cells, eps);
  const CellSet start = CellSet::of_point(grid, x);

  RobustnessCertificate cert{RobustVerdict::NonRobustAtResolution, eps, std::nullopt, grid, schedule.back(),
                             std::vector<double>(schedule.begin(), schedule.end()), {}, 0.0, false,
                             orbit.cells.count(), target.count()};
  std::optional<ReachTree> last;
  for (double delta : schedule) {
    const auto g = build_graph(sys, grid, delta);
    auto tree = forward_reach_tree(g, start);
    if (tree.cells.subset_of(target)) {
      cert.verdict = RobustVerdict::RobustAtResolution;
      cert.delta = delta;
      return cert;
    }
    last = std::move(tree);
  }

  // Shortest graph path to the first escaping cell, realized as a chain.
  CellId escape_cell = 0;
  for (CellId c : last->order) {
    if (!target.contains(c)) {
      escape_cell = c;
      break;
    }
  }
  auto path = last->path_to(escape_cell);
  path.erase(path.begin());
  cert.witness = steer_chain(sys, grid, x, path, cert.delta_min, orbit.points, eps);
  const PointCloud cloud(sys.domain(), orbit.points);
  cert.witness_endpoint_distance = cloud.distance(cert.witness.back().point);
  cert.witness_valid = is_delta_chain(sys, x, cert.witness, cert.delta_min) && cert.witness_endpoint_distance > eps;
  return cert;
}

RobustnessCertificate robustness_check(const System& sys, const Grid& grid, const Point& x, double eps) {
  const auto schedule = default_delta_schedule(eps, grid);
  return robustness_check(sys, grid, x, eps, schedule);
}

bool replay_certificate(const System& sys, const Point& x, const RobustnessCertificate& cert, std::size_t max_steps) {
  const auto orbit = orbit_reach(sys, cert.grid, x, ControlPolicy::every(), max_steps);
  if (!orbit.converged) return false;
  if (cert.verdict == RobustVerdict::RobustAtResolution) {
    if (!cert.delta) return false;
    const auto g = build_graph(sys, cert.grid, *cert.delta);
    return forward_reach(g, CellSet::of_point(cert.grid, x)).subset_of(fatten(orbit.cells, cert.eps));
  }
  if (!is_delta_chain(sys, x, cert.witness, cert.delta_min)) return false;
  const PointCloud cloud(sys.domain(), orbit.points);
  return cloud.distance(cert.witness.back().point) > cert.eps;
}

Lemma2Report verify_lemma2(const System& sys, const CellSet& start, double eps, int n_max,
                           std::span<const double> schedule) {
  if (start.empty()) throw EmptySetError("start set must be nonempty");
  if (n_max < 1) throw PreconditionError("n_max must be at least 1");
  const Grid& grid = start.grid();
  validate_schedule(schedule, grid);
  const auto big = build_graph(sys, grid, eps);

  // Frontiers F_eps^n(start), n = 0..n_max; a repeated frontier is a fixed
  // point of the set map, so the tail is implicit.
  std::vector<CellSet> reference{start};
  while (static_cast<int>(reference.size()) <= n_max) {
    CellSet next = step_image(big, reference.back());
    if (next == reference.back()) break;
    reference.push_back(std::move(next));
  }
  auto reference_at = [&](int n) -> const CellSet& {
    return reference[std::min<std::size_t>(static_cast<std::size_t>(n), reference.size() - 1)];
  };

  Lemma2Report report;
  for (double delta : schedule) {
    const auto small = build_graph(sys, grid, delta);
    CellSet frontier = fatten(start, delta);
    int failed_at = 0;
    for (int n = 1; n <= n_max; ++n) {
      CellSet next = step_image(small, frontier);
      ++report.steps_checked;
      if (!next.subset_of(reference_at(n))) {
        failed_at = n;
        break;
      }
      const bool settled = next == frontier && static_cast<std::size_t>(n) >= reference.size();
      frontier = std::move(next);
      if (settled) break;
    }
    if (failed_at == 0) {
      report.delta = delta;
      return report;
    }
    report.rejected.emplace_back(delta, failed_at);
  }
  return report;
}

InitialFatteningReport verify_initial_fattening(const System& sys, const CellSet& start, double eps0, int levels) {
  InitialFatteningReport report{chain_reach(sys, start, eps0, levels, false),
                                chain_reach(sys, start, eps0, levels, true), {}, 0.0, 0.0, 0.0, false};
  for (std::size_t k = 0; k < report.plain.levels.size(); ++k) {
    report.hausdorff_per_level.push_back(hausdorff(report.plain.levels[k].cells, report.fattened.levels[k].cells));
  }
  const auto& finest = report.plain.levels.back();
  report.finest_eps = finest.eps;
  report.finest_diameter = finest.grid.cell_diameter();
  report.residual = std::max(0.0, report.hausdorff_per_level.back() - finest.eps);
  report.equal = report.residual <= report.finest_diameter * (1.0 + 1e-9);
  return report;
}

std::vector<Point> ball_samples(const Domain& domain, const Point& x, double delta, std::size_t count) {
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 1; i <= count; ++i) {
    Point y = x;
    if (domain.dim() == 1) {
      y[0] = x[0] + delta * (2.0 * radical_inverse(i, 2) - 1.0);
    } else {
      const double r = delta * std::sqrt(radical_inverse(i, 2));
      const double theta = 2.0 * std::numbers::pi * radical_inverse(i, 3);
      y = {x[0] + r * std::cos(theta), x[1] + r * std::sin(theta)};
    }
    out.push_back(domain.normalize(y));
  }
  return out;
}

ProbeReport semicontinuity_probe(const System& sys, const Grid& grid, const Point& x, double eps, ProbeMode mode,
                                 std::span<const double> schedule, std::size_t max_steps) {
  if (!(eps > 0.0)) throw PreconditionError("eps must be positive");
  if (schedule.empty()) throw PreconditionError("delta schedule is empty");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] < schedule[i - 1])) throw PreconditionError("delta schedule must be strictly decreasing");
  }
  auto reach = [&](const Point& p) {
    auto r = orbit_reach(sys, grid, p, ControlPolicy::every(), max_steps);
    if (!r.converged) throw InconclusiveError("orbit did not converge during semicontinuity probe");
    return r.cells;
  };
  const CellSet base = reach(x);
  const CellSet base_fat = fatten(base, eps);

  ProbeReport report;
  report.mode = mode;
  for (double delta : schedule) {
    std::optional<Point> bad;
    for (const Point& y : ball_samples(sys.domain(), x, delta, report.samples_per_delta)) {
      const CellSet other = reach(y);
      const bool ok = mode == ProbeMode::Usc ? other.subset_of(base_fat) : base.subset_of(fatten(other, eps));
      if (!ok) {
        bad = y;
        break;
      }
    }
    if (!bad) {
      report.delta = delta;
      report.violating.reset();
      return report;
    }
    report.violating = bad;
  }
  return report;
}

SafetyReport safety_check(const System& sys, const Grid& grid, const Point& x, const CellSet& safe, double eps,
                          std::size_t max_steps) {
  if (!(safe.grid() == grid)) throw DomainError("safe set lives on a different grid");
  const auto orbit = orbit_reach(sys, grid, x, ControlPolicy::every(), max_steps);
  if (!orbit.converged) throw InconclusiveError("orbit did not converge; raise max_steps");
  SafetyReport report;
  report.safe = orbit.cells.subset_of(safe);
  report.eps_safe = fatten(orbit.cells, eps).subset_of(safe);
  if (report.eps_safe) {
    report.robustness = robustness_check(sys, grid, x, eps, default_delta_schedule(eps, grid), max_steps);
    if (report.robustness->verdict == RobustVerdict::RobustAtResolution) {
      report.perturbed_guarantee = true;
      report.delta = report.robustness->delta;
    }
  }
  return report;
}

}  // namespace chainscope
