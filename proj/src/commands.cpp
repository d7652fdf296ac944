#include "chainscope/commands.hpp"

#include <algorithm>
#include <random>

#include "chainscope/minimal.hpp"
#include "chainscope/reachability.hpp"
#include "chainscope/report.hpp"

namespace chainscope {

using nlohmann::json;

namespace {

struct Context {
  const RunConfig& cfg;
  const std::optional<std::string>& stem;
  CommandOutput out;

  void sidecar(json& files, const std::string& key, const std::string& suffix, std::string contents) {
    if (!stem) return;
    const std::string name = *stem + "." + suffix;
    files[key] = name;
    out.sidecars.emplace_back(name, std::move(contents));
  }
};

double require(const std::optional<double>& v, const char* key) {
  if (!v) throw ConfigError(std::string("this command needs '") + key + "'");
  return *v;
}

Point require_point(const RunConfig& cfg) {
  if (!cfg.point) throw ConfigError("this command needs 'point'");
  return *cfg.point;
}

json point_json(const Point& p, int dim) {
  if (dim == 1) return p[0];
  return json::array({p[0], p[1]});
}

json set_summary(const CellSet& s) {
  return {{"cells", s.count()}, {"fraction", static_cast<double>(s.count()) / static_cast<double>(s.grid().size())}};
}

std::vector<double> schedule_for(const RunConfig& cfg, double eps, const Grid& grid) {
  if (cfg.delta_schedule.empty()) return default_delta_schedule(eps, grid);
  validate_schedule(cfg.delta_schedule, grid);
  return cfg.delta_schedule;
}

json classification_json(const Classification& c, int dim) {
  json j{{"kind", c.label()}, {"period", c.period}, {"representative", point_json(c.representative, dim)}};
  if (c.fixed_control) j["control"] = c.control;
  return j;
}

// reach ---------------------------------------------------------------------

json cmd_reach(Context& ctx, const System& sys, const Grid& grid, json& files) {
  const RunConfig& cfg = ctx.cfg;
  json r;
  ReachResult res;
  if (cfg.eps) {
    const CellSet start = cfg.point ? CellSet::of_point(grid, *cfg.point) | cfg.start_set(grid) : cfg.start_set(grid);
    if (start.empty()) throw ConfigError("reach needs 'point' or 'start'");
    res = graph_reach(sys, start, *cfg.eps);
    r["mode"] = "graph";
    r["eps"] = *cfg.eps;
  } else {
    std::vector<Point> starts = cfg.start_points;
    if (cfg.point) starts.insert(starts.begin(), *cfg.point);
    if (starts.empty()) throw ConfigError("orbit reach needs 'point' or 'start.points'");
    res = ReachResult{ReachMode::OrbitSampled, CellSet(grid), 0, true, {}};
    for (const Point& p : starts) {
      const auto one = orbit_reach(sys, grid, p, ControlPolicy::every(), cfg.max_steps);
      res.cells |= one.cells;
      res.steps_used += one.steps_used;
      res.converged = res.converged && one.converged;
    }
    r["mode"] = "orbit-sampled";
    if (!res.converged) ctx.out.exit_code = kExitInconclusive;
  }
  r["converged"] = res.converged;
  r["steps"] = res.steps_used;
  r["reach"] = set_summary(res.cells);
  ctx.out.work = grid.size();
  ctx.sidecar(files, "cells", "cells.csv", res.cells.dump());
  return r;
}

// chainreach ----------------------------------------------------------------

json chain_json(Context& ctx, const ChainReachResult& res, json& files, const std::string& prefix) {
  json levels = json::array();
  for (std::size_t k = 0; k < res.levels.size(); ++k) {
    const auto& lv = res.levels[k];
    json j = set_summary(lv.cells);
    j["level"] = k;
    j["eps"] = lv.eps;
    j["grid_cells"] = lv.grid.size();
    j["cell_diameter"] = lv.grid.cell_diameter();
    levels.push_back(j);
    ctx.sidecar(files, prefix + "level" + std::to_string(k), prefix + "level" + std::to_string(k) + ".csv",
                lv.cells.dump());
  }
  json r{{"levels", levels}, {"stabilized", res.stabilized}};
  if (res.final) r["final"] = set_summary(*res.final);
  ctx.out.work += res.graph_cells;
  return r;
}

json cmd_chainreach(Context& ctx, const System& sys, const Grid& grid, json& files) {
  const RunConfig& cfg = ctx.cfg;
  CellSet start = cfg.start_set(grid);
  if (cfg.point) start.insert(grid.cell_of(*cfg.point));
  if (start.empty()) throw ConfigError("chainreach needs 'start' or 'point'");
  const auto res = chain_reach(sys, start, require(cfg.eps0, "eps0"), cfg.levels, cfg.fatten_start);
  return chain_json(ctx, res, files, "");
}

// robust --------------------------------------------------------------------

json certificate_json(Context& ctx, const RobustnessCertificate& cert, json& files, int dim) {
  json r{{"verdict", to_string(cert.verdict)},
         {"eps", cert.eps},
         {"delta_min", cert.delta_min},
         {"schedule", cert.schedule},
         {"reach_cells", cert.reach_cells},
         {"target_cells", cert.target_cells}};
  if (cert.delta) r["delta"] = *cert.delta;
  if (cert.verdict == RobustVerdict::NonRobustAtResolution) {
    r["witness_steps"] = cert.witness.size();
    r["witness_valid"] = cert.witness_valid;
    r["witness_endpoint_distance"] = cert.witness_endpoint_distance;
    if (!cert.witness.empty()) r["witness_endpoint"] = point_json(cert.witness.back().point, dim);
    ctx.sidecar(files, "witness", "witness.csv", witness_csv(cert.witness, dim));
  }
  return r;
}

json cmd_robust(Context& ctx, const System& sys, const Grid& grid, json& files) {
  const RunConfig& cfg = ctx.cfg;
  const Point x = require_point(cfg);
  const double eps = require(cfg.eps, "eps");
  const auto schedule = schedule_for(cfg, eps, grid);
  ctx.out.work = grid.size() * schedule.size();
  json r;
  try {
    if (cfg.safe_set) {
      const CellSet safe = CellSet::of_box(grid, cfg.safe_set->lo, cfg.safe_set->hi);
      const auto rep = safety_check(sys, grid, x, safe, eps, cfg.max_steps);
      r["safety"] = {{"safe", rep.safe}, {"eps_safe", rep.eps_safe}, {"perturbed_guarantee", rep.perturbed_guarantee}};
      if (rep.delta) r["safety"]["delta"] = *rep.delta;
    }
    const auto cert = robustness_check(sys, grid, x, eps, schedule, cfg.max_steps);
    r["robustness"] = certificate_json(ctx, cert, files, grid.dim());
  } catch (const InconclusiveError& e) {
    r["robustness"] = {{"verdict", "inconclusive"}, {"reason", e.what()}};
    ctx.out.exit_code = kExitInconclusive;
  }
  return r;
}

// minimal / dichotomy --------------------------------------------------------

json census_json(Context& ctx, const Census& census, json& files, int dim) {
  json sets = json::array();
  for (std::size_t i = 0; i < census.sets.size(); ++i) {
    const auto& m = census.sets[i];
    json j = set_summary(m.cells);
    j["covers_domain"] = m.cells.is_full();
    j["classification"] = classification_json(m.classification, dim);
    j["stability"] = to_string(m.stability);
    j["isolated"] = to_string(m.isolated);
    j["continuum"] = m.continuum;
    j["recurrence_only"] = m.recurrence_only;
    j["nested"] = m.nested;
    if (m.lyapunov.w_radius) j["w_radius"] = *m.lyapunov.w_radius;
    if (!m.lyapunov.note.empty()) j["note"] = m.lyapunov.note;
    if (!m.lyapunov.escape.empty()) {
      j["escape_steps"] = m.lyapunov.escape.size();
      ctx.sidecar(files, "escape" + std::to_string(i), "escape" + std::to_string(i) + ".csv",
                  witness_csv(m.lyapunov.escape, dim));
    }
    ctx.sidecar(files, "set" + std::to_string(i), "set" + std::to_string(i) + ".csv", m.cells.dump());
    sets.push_back(j);
  }
  for (std::size_t k = 0; k < census.components_per_level.size(); ++k) {
    ctx.out.work += census.finest_grid.size() >> (dim * (census.components_per_level.size() - 1 - k));
  }
  return {{"minimal_count", to_string(census.count)},
          {"sets", sets},
          {"components_per_level", census.components_per_level},
          {"finest_eps", census.finest_eps},
          {"finest_grid_cells", census.finest_grid.size()},
          {"partial", census.partial},
          {"discarded_components", census.discarded}};
}

CensusOptions census_options(const RunConfig& cfg) {
  CensusOptions o;
  o.q_max = cfg.q_max;
  o.v_eps = cfg.v_eps;
  o.max_steps = std::max<std::size_t>(cfg.max_steps, 1000);
  return o;
}

json cmd_minimal(Context& ctx, const System& sys, const Grid& grid, json& files) {
  const auto census = minimal_sets(sys, grid, require(ctx.cfg.eps0, "eps0"), ctx.cfg.levels, census_options(ctx.cfg));
  return census_json(ctx, census, files, grid.dim());
}

std::vector<Point> default_samples(const Domain& dom) {
  std::vector<Point> out;
  const double fr[] = {0.1, 0.3, 0.5, 0.7, 0.9};
  for (double a : fr) {
    if (dom.dim() == 1) {
      out.push_back({dom.lo(0) + a * dom.width(0), 0.0});
    } else {
      out.push_back({dom.lo(0) + a * dom.width(0), dom.lo(1) + a * dom.width(1)});
    }
  }
  return out;
}

json cmd_dichotomy(Context& ctx, const System& sys, const Grid& grid, json& files) {
  const RunConfig& cfg = ctx.cfg;
  DichotomyOptions o;
  o.eps0 = require(cfg.eps0, "eps0");
  o.levels = cfg.levels;
  o.robust_eps = cfg.eps;
  o.census = census_options(cfg);
  const auto samples = cfg.samples.empty() ? default_samples(sys.domain()) : cfg.samples;
  const auto rep = dichotomy_report(sys, grid, samples, o);
  json verdicts = json::array();
  for (const auto& s : rep.samples) {
    json v{{"point", point_json(s.point, grid.dim())}, {"verdict", to_string(s.verdict)}};
    if (s.delta) v["delta"] = *s.delta;
    if (s.census_point) v["census_point"] = true;
    verdicts.push_back(v);
  }
  json r{{"census", census_json(ctx, rep.census, files, grid.dim())},
         {"samples", verdicts},
         {"all_robust", rep.all_robust},
         {"hypothesis_holds", rep.hypothesis_holds},
         {"verdict_consistent", rep.verdict_consistent},
         {"notes", rep.notes}};
  if (rep.global_attraction) r["global_attraction"] = *rep.global_attraction;
  return r;
}

// basin -----------------------------------------------------------------------

json cmd_basin(Context& ctx, const System& sys, const Grid& grid, json& files) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.target) throw ConfigError("basin needs 'target'");
  const CellSet a = CellSet::of_box(grid, cfg.target->lo, cfg.target->hi);
  const CellSet basin = weak_basin(sys, a, require(cfg.eps0, "eps0"), cfg.levels);
  ctx.out.work = basin.grid().size();
  ctx.sidecar(files, "basin", "basin.csv", basin.dump());
  json r{{"target", set_summary(a)}, {"basin", set_summary(basin)}, {"contains_target", a.refined_to(basin.grid()).subset_of(basin)}};
  return r;
}

// verify ----------------------------------------------------------------------

// Uniform in [0, 1) from the raw generator, portable across standard libraries.
double unit(std::mt19937_64& gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

json cmd_verify(Context& ctx, const System& sys, const Grid& grid, json& files) {
  const RunConfig& cfg = ctx.cfg;
  if (!cfg.verify) throw ConfigError("verify needs 'verify'");
  const VerifySpec& spec = *cfg.verify;
  json instances = json::array();
  json failures = json::array();
  std::size_t passed = 0;
  const Domain& dom = sys.domain();

  if (spec.property == "lemma2") {
    const double eps_max = require(cfg.eps0, "eps0");
    std::mt19937_64 gen(cfg.seed);
    for (std::size_t i = 0; i < spec.instances; ++i) {
      Point p{dom.lo(0) + unit(gen) * dom.width(0), 0.0};
      if (dom.dim() == 2) p[1] = dom.lo(1) + unit(gen) * dom.width(1);
      p = dom.normalize(p);
      const double eps = eps_max * (0.5 + 0.5 * unit(gen));
      const auto schedule = schedule_for(cfg, eps, grid);
      const auto rep = verify_lemma2(sys, CellSet::of_point(grid, p), eps, spec.n_max, schedule);
      json j{{"start", point_json(p, grid.dim())}, {"eps", eps}, {"steps_checked", rep.steps_checked}};
      if (rep.delta) {
        j["delta"] = *rep.delta;
        ++passed;
      } else {
        failures.push_back(j);
      }
      instances.push_back(j);
      ctx.out.work += grid.size() * (rep.rejected.size() + 1);
    }
  } else if (spec.property == "initial-fattening") {
    CellSet start = cfg.start_set(grid);
    if (cfg.point) start.insert(grid.cell_of(*cfg.point));
    if (start.empty()) throw ConfigError("initial-fattening needs 'start' or 'point'");
    const auto rep = verify_initial_fattening(sys, start, require(cfg.eps0, "eps0"), cfg.levels);
    json j{{"hausdorff_per_level", rep.hausdorff_per_level},
           {"finest_eps", rep.finest_eps},
           {"finest_diameter", rep.finest_diameter},
           {"residual", rep.residual},
           {"equal", rep.equal}};
    if (rep.plain.final) j["plain_final"] = set_summary(*rep.plain.final);
    if (rep.fattened.final) j["fattened_final"] = set_summary(*rep.fattened.final);
    if (rep.equal) {
      ++passed;
    } else {
      failures.push_back(j);
    }
    instances.push_back(j);
    ctx.out.work = rep.plain.graph_cells + rep.fattened.graph_cells;
  } else {
    const Point x = require_point(cfg);
    const double eps = require(cfg.eps, "eps");
    const ProbeMode mode = spec.mode == "lsc" ? ProbeMode::Lsc : ProbeMode::Usc;
    const auto schedule = schedule_for(cfg, eps, grid);
    json j{{"point", point_json(x, grid.dim())}, {"eps", eps}, {"mode", to_string(mode)}};
    try {
      const auto rep = semicontinuity_probe(sys, grid, x, eps, mode, schedule, cfg.max_steps);
      j["samples_per_delta"] = rep.samples_per_delta;
      if (rep.delta) {
        j["delta"] = *rep.delta;
        ++passed;
      } else {
        if (rep.violating) j["violating"] = point_json(*rep.violating, grid.dim());
        failures.push_back(j);
      }
    } catch (const InconclusiveError& e) {
      j["inconclusive"] = e.what();
      ctx.out.exit_code = kExitInconclusive;
    }
    instances.push_back(j);
    ctx.out.work = grid.size() * schedule.size();
  }

  if (!failures.empty()) ctx.out.exit_code = kExitVerifyFailed;
  (void)files;
  return {{"property", spec.property},
          {"instances", instances},
          {"passed", passed},
          {"failed", failures.size()},
          {"failures", failures},
          {"all_passed", failures.empty() && ctx.out.exit_code == kExitOk}};
}

}  // namespace

std::vector<std::string> command_names() {
  return {"reach", "chainreach", "robust", "minimal", "basin", "dichotomy", "verify"};
}

CommandOutput run_command(const std::string& command, const RunConfig& cfg,
                          const std::optional<std::string>& sidecar_stem) {
  Context ctx{cfg, sidecar_stem, {}};
  try {
    const System sys = cfg.make_system();
    const Grid grid = cfg.make_grid();
    if (grid.size() > max_grid_cells()) throw ResourceError("grid exceeds the cell cap");
    json files = json::object();
    json result;
    if (command == "reach") {
      result = cmd_reach(ctx, sys, grid, files);
    } else if (command == "chainreach") {
      result = cmd_chainreach(ctx, sys, grid, files);
    } else if (command == "robust") {
      result = cmd_robust(ctx, sys, grid, files);
    } else if (command == "minimal") {
      result = cmd_minimal(ctx, sys, grid, files);
    } else if (command == "basin") {
      result = cmd_basin(ctx, sys, grid, files);
    } else if (command == "dichotomy") {
      result = cmd_dichotomy(ctx, sys, grid, files);
    } else if (command == "verify") {
      result = cmd_verify(ctx, sys, grid, files);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
    json report{{"tool", "chainscope"},
                {"version", CHAINSCOPE_VERSION},
                {"command", command},
                {"config", cfg.echo},
                {"system", {{"name", sys.name()}, {"domain", sys.domain().describe()}, {"lipschitz", sys.lipschitz()}}},
                {"result", result},
                {"timing", {{"grid_cells_processed", ctx.out.work}}}};
    if (!files.empty()) report["files"] = files;
    ctx.out.report = std::move(report);
  } catch (const InconclusiveError& e) {
    ctx.out = CommandOutput{kExitInconclusive, json{{"tool", "chainscope"}, {"version", CHAINSCOPE_VERSION},
                                                    {"command", command}, {"config", cfg.echo},
                                                    {"result", {{"inconclusive", e.what()}}}},
                            {}, e.what(), 0};
  } catch (const Error& e) {
    ctx.out = CommandOutput{kExitError, json(), {}, e.what(), 0};
  }
  return ctx.out;
}

}  // namespace chainscope
