#include "chainscope/minimal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chainscope/transition.hpp"

namespace chainscope {

namespace {

double default_control(const System& sys) { return sys.has_control(0.0) ? 0.0 : sys.controls().front(); }

// Up to `count` members spread evenly over the member list.
std::vector<CellId> spread(const std::vector<CellId>& members, std::size_t count) {
  if (members.size() <= count) return members;
  std::vector<CellId> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(members[(2 * k + 1) * members.size() / (2 * count)]);
  return out;
}

// W radii: w/2, w/4, ... while at least one cell diameter.
std::vector<double> w_radii(double v_eps, const Grid& grid) {
  std::vector<double> out;
  for (double w = 0.5 * v_eps; w >= grid.cell_diameter(); w *= 0.5) out.push_back(w);
  if (out.empty()) out.push_back(0.5 * v_eps);
  return out;
}

// Bisection for f(x) = x inside the cell of a 1-D fixed-point
// representative; the representative itself when there is no sign change.
Point refine_fixed_point(const System& sys, const Grid& grid, const Classification& cls) {
  if (grid.dim() != 1 || cls.kind != OrbitKind::FixedPoint) return cls.representative;
  const Domain& dom = sys.domain();
  const CellId c = grid.cell_of(cls.representative);
  double a = grid.cell_lo(c)[0];
  double b = std::min(grid.cell_hi(c)[0], dom.kind() == DomainKind::Circle ? std::nextafter(dom.hi(0), 0.0) : dom.hi(0));
  auto g = [&](double x) { return dom.displacement({x, 0.0}, sys.apply({x, 0.0}, cls.control))[0]; };
  double ga = g(a), gb = g(b);
  if (ga == 0.0) return {a, 0.0};
  if (gb == 0.0) return {b, 0.0};
  if ((ga < 0.0) == (gb < 0.0)) return cls.representative;
  for (int i = 0; i < 200 && a < b; ++i) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double gm = g(m);
    if (gm == 0.0) return {m, 0.0};
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return {std::abs(ga) <= std::abs(g(b)) ? a : b, 0.0};
}

}  // namespace

std::string Classification::label() const {
  switch (kind) {
    case OrbitKind::FixedPoint:
      return "fixed-point";
    case OrbitKind::Periodic:
      return "periodic(" + std::to_string(period) + ")";
    case OrbitKind::Other:
      break;
  }
  return "other";
}

Classification classify_point(const System& sys, const Point& x, int q_max, double tol, std::optional<double> control) {
  sys.domain().require(x);
  Classification cls;
  cls.representative = x;
  cls.fixed_control = !sys.single_valued();
  cls.control = control.value_or(default_control(sys));
  if (!sys.has_control(cls.control)) throw ControlError("classification control is not in U");
  Point y = x;
  for (int q = 1; q <= q_max; ++q) {
    y = sys.apply(y, cls.control);
    if (sys.domain().raw_distance(x, y) <= tol) {
      cls.kind = q == 1 ? OrbitKind::FixedPoint : OrbitKind::Periodic;
      cls.period = q;
      return cls;
    }
  }
  return cls;
}

Classification classify_component(const System& sys, const CellSet& comp, int q_max, double tol) {
  if (comp.empty()) throw EmptySetError("component must be nonempty");
  const auto candidates = spread(comp.members(), 4096);
  // Least period first, then the closest return.
  std::optional<Classification> best;
  double best_gap = 0.0;
  int limit = q_max;
  for (CellId c : candidates) {
    const auto cls = classify_point(sys, comp.grid().cell_center(c), limit, tol);
    if (cls.kind == OrbitKind::Other) continue;
    Point y = cls.representative;
    for (int q = 0; q < cls.period; ++q) y = sys.apply(y, cls.control);
    const double gap = sys.domain().raw_distance(y, cls.representative);
    if (!best || cls.period < best->period || gap < best_gap) {
      best = cls;
      best_gap = gap;
      limit = cls.period;
    }
  }
  if (best) return *best;
  return classify_point(sys, comp.grid().cell_center(candidates[candidates.size() / 2]), q_max, tol);
}

std::string to_string(Stability s) {
  switch (s) {
    case Stability::StableCertified:
      return "stable-certified";
    case Stability::UnstableWitnessed:
      return "unstable-witnessed";
    case Stability::Inconclusive:
      break;
  }
  return "inconclusive";
}

std::string to_string(Isolation i) {
  switch (i) {
    case Isolation::Yes:
      return "yes";
    case Isolation::No:
      return "no";
    case Isolation::Unknown:
      break;
  }
  return "unknown-at-resolution";
}

std::string to_string(CensusCount c) {
  switch (c) {
    case CensusCount::One:
      return "1";
    case CensusCount::Finite:
      return "finite>1";
    case CensusCount::UnboundedAtResolution:
      return "unbounded-at-resolution";
    case CensusCount::None:
      break;
  }
  return "none";
}

LyapunovReport lyapunov_stability(const System& sys, const CellSet& a_set, double v_eps,
                                  std::span<const double> w_schedule, std::size_t max_steps) {
  if (a_set.empty()) throw EmptySetError("set A must be nonempty");
  if (!(v_eps > 0.0)) throw PreconditionError("v_eps must be positive");
  if (w_schedule.empty()) throw PreconditionError("W schedule is empty");
  const Grid& grid = a_set.grid();
  LyapunovReport report;
  report.v_eps = v_eps;
  report.graph_eps = kResolutionCoupling * grid.cell_diameter();
  const CellSet v_set = fatten(a_set, v_eps);
  const auto finest = build_graph(sys, grid, report.graph_eps);

  for (double w : w_schedule) {
    if (!(w > 0.0)) throw PreconditionError("W radii must be positive");
    if (forward_reach(finest, fatten(a_set, w)).subset_of(v_set)) {
      report.flag = Stability::StableCertified;
      report.w_radius = w;
      return report;
    }
  }

  // Graph reach of A itself at every admissible fattening.
  bool graph_escapes = !forward_reach(finest, a_set).subset_of(v_set);
  for (double d : w_schedule) {
    if (!graph_escapes) break;
    if (d < report.graph_eps) continue;
    graph_escapes = !forward_reach(build_graph(sys, grid, d), a_set).subset_of(v_set);
  }
  if (!graph_escapes) {
    report.note = "graph reach of A stays in V at some fattening, but no W was certified";
    return report;
  }

  // True orbits from points of A that leave V.
  const auto& dom = sys.domain();
  for (CellId c : spread(a_set.members(), 64)) {
    const Point lo = grid.cell_lo(c);
    std::vector<Point> starts{grid.cell_center(c)};
    for (std::size_t i = 1; i <= 4; ++i) {
      double s = 0.0, t = 0.0, f = 0.5, g = 1.0 / 3.0;
      for (std::size_t k = i; k > 0; k /= 2, f *= 0.5) s += f * static_cast<double>(k % 2);
      for (std::size_t k = i; k > 0; k /= 3, g /= 3.0) t += g * static_cast<double>(k % 3);
      Point p{lo[0] + s * grid.cell_width(0), grid.dim() == 2 ? lo[1] + t * grid.cell_width(1) : 0.0};
      starts.push_back(dom.normalize(p));
    }
    for (const Point& p : starts) {
      if (!dom.contains(p)) continue;
      for (double u : sys.controls()) {
        const auto orbit = orbit_reach(sys, grid, p, ControlPolicy::fixed({u}), max_steps);
        if (orbit.cells.subset_of(v_set)) continue;
        report.escape.push_back({orbit.points.front(), 0.0});
        for (std::size_t k = 1; k < orbit.points.size(); ++k) {
          report.escape.push_back({orbit.points[k], 0.0});
          if (!v_set.contains(grid.cell_of(orbit.points[k]))) break;
        }
        report.flag = Stability::UnstableWitnessed;
        return report;
      }
    }
  }
  report.note =
      "graph reach leaves V at every tested fattening while sampled true orbits stay in V; the escape is an "
      "artifact of the fattening";
  return report;
}

LyapunovReport lyapunov_stability(const System& sys, const CellSet& a_set, double v_eps) {
  const auto radii = w_radii(v_eps, a_set.grid());
  return lyapunov_stability(sys, a_set, v_eps, radii);
}

bool replay_stability(const System& sys, const CellSet& a_set, const LyapunovReport& report) {
  if (report.flag != Stability::StableCertified || !report.w_radius) return false;
  const auto g = build_graph(sys, a_set.grid(), report.graph_eps);
  return forward_reach(g, fatten(a_set, *report.w_radius)).subset_of(fatten(a_set, report.v_eps));
}

OmegaResult omega_limit(const System& sys, const Grid& grid, const Point& x, std::size_t burn_in, std::size_t window,
                        double tol, std::optional<double> control, std::size_t max_windows) {
  if (!(sys.domain() == grid.domain())) throw DomainError("grid domain differs from the system domain");
  if (window == 0) throw PreconditionError("omega window must be positive");
  const double u = control.value_or(default_control(sys));
  if (!sys.has_control(u)) throw ControlError("omega control is not in U");
  Point y = x;
  sys.domain().require(y);
  for (std::size_t n = 0; n < burn_in; ++n) y = sys.image(y, u);
  OmegaResult result{CellSet(grid), false, burn_in};
  for (std::size_t w = 0; w < max_windows; ++w) {
    const CellSet before = result.cells;
    for (std::size_t n = 0; n < window; ++n) {
      y = sys.image(y, u);
      result.cells.insert(grid.cell_of(y));
    }
    result.steps += window;
    if (w > 0 && (result.cells == before || hausdorff(result.cells, before) <= tol)) {
      result.stabilized = true;
      break;
    }
  }
  return result;
}

Census minimal_sets(const System& sys, const Grid& base, double eps0, int levels, const CensusOptions& options) {
  if (levels < 1) throw PreconditionError("minimal_sets needs at least one level");
  Census census{{}, CensusCount::None, {}, base, eps0, false};
  const std::size_t cap = max_grid_cells();

  struct Level {
    Grid grid;
    double eps;
    std::vector<CellSet> comps;
  };
  std::vector<Level> done;
  Grid grid = base;
  double eps = eps0;
  for (int k = 0; k < levels; ++k) {
    if (k > 0) {
      grid = grid.refined();
      eps *= 0.5;
    }
    if (grid.size() > cap) {
      if (done.empty()) throw ResourceError("coarsest census grid exceeds the cell cap");
      census.partial = true;
      break;
    }
    const auto g = build_graph(sys, grid, eps);
    done.push_back({grid, eps, recurrent_cells(g)});
    census.components_per_level.push_back(done.back().comps.size());
  }
  const Level& fine = done.back();
  census.finest_grid = fine.grid;
  census.finest_eps = fine.eps;

  // Components that hold a true periodic point, per level. Short-lived
  // components of the eps-graph (chains that close only because of the
  // fattening) hold none and must not count as splitting.
  auto periodic_components = [&](const Level& lv) {
    const double tol = 2.0 * lv.grid.cell_diameter();
    return static_cast<std::size_t>(std::count_if(lv.comps.begin(), lv.comps.end(), [&](const CellSet& c) {
      return classify_component(sys, c, options.q_max, tol).kind != OrbitKind::Other;
    }));
  };
  bool keeps_splitting = done.size() >= 2;
  for (std::size_t k = 1, prev = periodic_components(done[0]); keeps_splitting && k < done.size(); ++k) {
    const std::size_t now = periodic_components(done[k]);
    if (now <= prev) keeps_splitting = false;
    prev = now;
  }

  std::optional<CellSet> coarse_hull;
  if (done.size() >= 2) {
    const Level& coarse = done[done.size() - 2];
    CellSet hull(coarse.grid);
    for (const auto& c : coarse.comps) hull |= fatten(c, coarse.eps);
    coarse_hull = hull.refined_to(fine.grid);
  }

  const double class_tol = 2.0 * fine.grid.cell_diameter();
  const std::size_t window = std::max<std::size_t>(1000, 4 * fine.grid.size());

  for (const CellSet& comp : fine.comps) {
    const CellSet comp_fat = fatten(comp, fine.eps);
    // Closures of sampled orbits that stay in the component.
    std::vector<CellSet> clusters;
    std::size_t invariant = 0;
    for (CellId c : spread(comp.members(), options.samples)) {
      const Point a = fine.grid.cell_center(c);
      const auto orbit = orbit_reach(sys, fine.grid, a, ControlPolicy::every(), options.max_steps);
      if (!orbit.converged || !orbit.cells.subset_of(comp_fat)) continue;
      CellSet closure = orbit.cells;
      if (sys.single_valued()) {
        auto omega = omega_limit(sys, fine.grid, a, 1000, window, class_tol);
        // A slow drift can pass the orbit return test; the tail must stay too.
        if (!omega.cells.subset_of(comp_fat)) continue;
        closure = std::move(omega.cells);
      }
      ++invariant;
      bool merged = false;
      for (const auto& rep : clusters) {
        if (hausdorff(rep, closure) <= class_tol) {
          merged = true;
          break;
        }
      }
      if (!merged) clusters.push_back(std::move(closure));
    }

    auto base_entry = [&](CellSet cells) {
      MinimalSetApprox m{std::move(cells), {}, Stability::Inconclusive, Isolation::Unknown, false, false, true, {}};
      m.nested = !coarse_hull || m.cells.subset_of(*coarse_hull);
      return m;
    };

    if (clusters.empty()) {
      auto m = base_entry(comp);
      m.recurrence_only = true;
      m.classification = classify_component(sys, comp, options.q_max, class_tol);
      if (m.classification.kind == OrbitKind::Other) {
        ++census.discarded;
        continue;
      }
      // A repelling band is not forward-invariant; its periodic orbit is.
      CellSet orbit(fine.grid);
      Point y = m.classification.representative;
      for (int q = 0; q < m.classification.period; ++q) {
        orbit.insert(fine.grid.cell_of(y));
        y = sys.apply(y, m.classification.control);
      }
      m.cells = std::move(orbit);
      m.nested = !coarse_hull || m.cells.subset_of(*coarse_hull);
      census.sets.push_back(std::move(m));
    } else if (clusters.size() == 1) {
      auto m = base_entry(comp);
      m.classification = classify_component(sys, clusters.front(), options.q_max, class_tol);
      census.sets.push_back(std::move(m));
    } else if (clusters.size() >= 3 && 2 * clusters.size() >= invariant) {
      auto m = base_entry(comp);
      m.continuum = true;
      m.isolated = Isolation::No;
      m.classification = classify_component(sys, comp, options.q_max, class_tol);
      census.sets.push_back(std::move(m));
    } else {
      for (auto& closure : clusters) {
        auto m = base_entry(closure);
        m.classification = classify_component(sys, closure, options.q_max, class_tol);
        census.sets.push_back(std::move(m));
      }
    }
  }

  const double v_eps = options.v_eps.value_or(eps0);
  for (std::size_t i = 0; i < census.sets.size(); ++i) {
    auto& m = census.sets[i];
    m.lyapunov = lyapunov_stability(sys, m.cells, v_eps, w_radii(v_eps, fine.grid), options.max_steps);
    m.stability = m.lyapunov.flag;
    if (m.continuum || keeps_splitting) {
      m.isolated = Isolation::No;
      continue;
    }
    const CellSet nbhd = fatten(m.cells, fine.eps);
    bool alone = true;
    for (std::size_t j = 0; j < census.sets.size(); ++j) {
      if (j != i && census.sets[j].cells.intersects(nbhd)) alone = false;
    }
    m.isolated = alone ? Isolation::Yes : Isolation::No;
  }

  const bool any_continuum =
      std::any_of(census.sets.begin(), census.sets.end(), [](const MinimalSetApprox& m) { return m.continuum; });
  if (census.sets.empty()) {
    census.count = CensusCount::None;
  } else if (any_continuum || keeps_splitting) {
    census.count = CensusCount::UnboundedAtResolution;
  } else if (census.sets.size() == 1) {
    census.count = CensusCount::One;
  } else {
    census.count = CensusCount::Finite;
  }
  return census;
}

CellSet weak_basin(const System& sys, const CellSet& a_set, double eps0, int levels) {
  if (a_set.empty()) throw EmptySetError("set A must be nonempty");
  if (levels < 1) throw PreconditionError("weak_basin needs at least one level");
  const Grid& base = a_set.grid();
  const CellSet a_fat = fatten(a_set, eps0);
  for (CellId c : a_set.members()) {
    for (const auto& r : image_cell_runs(sys, base, c)) {
      for (CellId d = r.first;; ++d) {
        if (!a_fat.contains(d)) throw PreconditionError("set A is not forward-invariant at graph level");
        if (d == r.last) break;
      }
    }
  }
  std::vector<CellSet> per_level;
  Grid grid = base;
  double eps = eps0;
  for (int k = 0; k < levels; ++k) {
    if (k > 0) {
      grid = grid.refined();
      eps *= 0.5;
    }
    if (grid.size() > max_grid_cells()) throw ResourceError("weak_basin grid exceeds the cell cap");
    per_level.push_back(backward_reach(build_graph(sys, grid, eps), a_set.refined_to(grid)));
  }
  CellSet basin = CellSet::full(grid);
  for (const auto& b : per_level) basin &= b.refined_to(grid);
  return basin;
}

DichotomyReport dichotomy_report(const System& sys, const Grid& base, std::span<const Point> samples,
                                 const DichotomyOptions& options) {
  DichotomyReport report;
  report.system = sys.name();
  report.census = minimal_sets(sys, base, options.eps0, options.levels, options.census);
  const Grid& fine = report.census.finest_grid;
  const double robust_eps = options.robust_eps.value_or(options.eps0);
  const auto schedule = default_delta_schedule(robust_eps, fine);

  std::vector<std::pair<Point, bool>> probes;
  for (const Point& p : samples) probes.emplace_back(p, false);
  for (const auto& m : report.census.sets) {
    if (m.stability == Stability::UnstableWitnessed && m.classification.kind == OrbitKind::FixedPoint)
      probes.emplace_back(refine_fixed_point(sys, fine, m.classification), true);
  }

  report.all_robust = !probes.empty();
  bool any_inconclusive = false;
  for (const auto& [p, from_census] : probes) {
    SampleVerdict v{p, RobustVerdict::NonRobustAtResolution, std::nullopt, false, from_census};
    try {
      const auto cert = robustness_check(sys, fine, p, robust_eps, schedule, options.census.max_steps);
      v.verdict = cert.verdict;
      v.delta = cert.delta;
      v.witness_valid = cert.witness_valid;
    } catch (const InconclusiveError&) {
      any_inconclusive = true;
    }
    if (v.verdict != RobustVerdict::RobustAtResolution) report.all_robust = false;
    report.samples.push_back(v);
  }
  report.hypothesis_holds = report.all_robust;

  const auto& sets = report.census.sets;
  const bool none_unstable = std::none_of(sets.begin(), sets.end(), [](const MinimalSetApprox& m) {
    return m.stability == Stability::UnstableWitnessed;
  });
  const bool none_isolated =
      std::none_of(sets.begin(), sets.end(), [](const MinimalSetApprox& m) { return m.isolated == Isolation::Yes; });
  const bool unique_case = report.census.count == CensusCount::One && none_unstable;
  const bool infinite_case = report.census.count == CensusCount::UnboundedAtResolution && none_isolated && none_unstable;
  report.verdict_consistent = !report.all_robust || unique_case || infinite_case;

  if (report.census.count == CensusCount::One && sets.front().stability == Stability::StableCertified &&
      report.all_robust && sys.single_valued()) {
    const CellSet basin = fatten(sets.front().cells, report.census.finest_eps);
    const std::size_t window = options.window ? options.window : 4 * fine.size();
    bool attracted = true;
    for (const Point& p : samples) {
      const auto omega = omega_limit(sys, fine, p, options.burn_in, window, 2.0 * fine.cell_diameter());
      if (!omega.cells.subset_of(basin)) attracted = false;
    }
    report.global_attraction = attracted;
  }

  if (any_inconclusive) report.notes.push_back("some sample orbits did not converge; treated as not robust");
  const bool census_refutes = std::any_of(report.samples.begin(), report.samples.end(), [](const SampleVerdict& v) {
    return v.census_point && v.verdict != RobustVerdict::RobustAtResolution;
  });
  if (census_refutes) report.notes.push_back("not robust at a fixed point of an unstable minimal set");
  if (!report.all_robust) {
    report.notes.push_back("not robust at sampled points: the theorem's hypothesis fails and it is silent");
    if (report.census.count == CensusCount::UnboundedAtResolution) {
      report.notes.push_back(
          "converse fails: the census looks like the infinitely-many case although the system is not robust");
    }
  } else if (report.verdict_consistent) {
    report.notes.push_back(unique_case ? "unique stable minimal set, as the dichotomy requires"
                                       : "no isolated minimal set, as the dichotomy requires");
  } else {
    report.notes.push_back("census contradicts the dichotomy at this resolution");
  }
  return report;
}

}  // namespace chainscope
