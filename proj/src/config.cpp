#include "chainscope/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace chainscope {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + key + "' must be finite");
  return x;
}

double positive(const json& v, const std::string& key) {
  const double x = number(v, key);
  if (!(x > 0.0)) throw ConfigError("'" + key + "' must be positive");
  return x;
}

long long integer(const json& v, const std::string& key, long long min) {
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  const long long x = v.get<long long>();
  if (x < min) throw ConfigError("'" + key + "' must be at least " + std::to_string(min));
  return x;
}

// A number (1-D) or an array of one or two numbers.
std::pair<Point, int> point(const json& v, const std::string& key) {
  if (v.is_number()) return {{number(v, key), 0.0}, 1};
  if (!v.is_array() || v.empty() || v.size() > 2) throw ConfigError("'" + key + "' must be a number or a 1-2 element array");
  Point p{number(v[0], key), v.size() == 2 ? number(v[1], key) : 0.0};
  return {p, static_cast<int>(v.size())};
}

BoxSpec box(const json& v, const std::string& key) {
  check_keys(v, key, {"lo", "hi"});
  if (!v.contains("lo") || !v.contains("hi")) throw ConfigError("'" + key + "' needs 'lo' and 'hi'");
  auto [lo, dl] = point(v["lo"], key + ".lo");
  auto [hi, dh] = point(v["hi"], key + ".hi");
  if (dl != dh) throw ConfigError("'" + key + "' bounds differ in dimension");
  for (int d = 0; d < dl; ++d) {
    if (!(lo[d] <= hi[d])) throw ConfigError("'" + key + "' needs lo <= hi");
  }
  return {dl, lo, hi};
}

std::string where_in(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // byte is one past the offending character
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError("parse error at " + where_in(text, byte));
  }
  check_keys(doc, "config",
             {"system", "domain", "grid", "eps0", "eps", "v_eps", "levels", "delta_schedule", "start", "point",
              "safe_set", "target", "samples", "verify", "max_steps", "q_max", "fatten_start", "seed", "threads"});

  RunConfig cfg;
  if (!doc.contains("system")) throw ConfigError("missing 'system'");
  const json& sys = doc["system"];
  check_keys(sys, "system", {"name", "params", "controls"});
  if (!sys.contains("name") || !sys["name"].is_string()) throw ConfigError("'system.name' must be a string");
  cfg.system = sys["name"].get<std::string>();
  if (sys.contains("params")) {
    if (!sys["params"].is_object()) throw ConfigError("'system.params' must be an object");
    for (const auto& [k, v] : sys["params"].items()) cfg.params[k] = number(v, "system.params." + k);
  }
  if (sys.contains("controls")) {
    if (!sys["controls"].is_array() || sys["controls"].empty()) throw ConfigError("'system.controls' must be a nonempty array");
    std::vector<double> u;
    for (const auto& v : sys["controls"]) u.push_back(number(v, "system.controls"));
    cfg.controls = std::move(u);
  }
  if (doc.contains("domain")) cfg.domain = box(doc["domain"], "domain");

  if (!doc.contains("grid")) throw ConfigError("missing 'grid'");
  check_keys(doc["grid"], "grid", {"cells"});
  if (!doc["grid"].contains("cells")) throw ConfigError("missing 'grid.cells'");
  const json& cells = doc["grid"]["cells"];
  if (cells.is_array()) {
    if (cells.empty() || cells.size() > 2) throw ConfigError("'grid.cells' must have 1 or 2 entries");
    for (std::size_t d = 0; d < cells.size(); ++d) cfg.cells[d] = static_cast<int>(integer(cells[d], "grid.cells", 1));
  } else {
    cfg.cells[0] = static_cast<int>(integer(cells, "grid.cells", 1));
  }

  if (doc.contains("eps0")) cfg.eps0 = positive(doc["eps0"], "eps0");
  if (doc.contains("eps")) cfg.eps = positive(doc["eps"], "eps");
  if (doc.contains("v_eps")) cfg.v_eps = positive(doc["v_eps"], "v_eps");
  if (doc.contains("levels")) cfg.levels = static_cast<int>(integer(doc["levels"], "levels", 1));
  if (doc.contains("delta_schedule")) {
    if (!doc["delta_schedule"].is_array() || doc["delta_schedule"].empty())
      throw ConfigError("'delta_schedule' must be a nonempty array");
    for (const auto& v : doc["delta_schedule"]) {
      const double d = positive(v, "delta_schedule");
      if (!cfg.delta_schedule.empty() && !(d < cfg.delta_schedule.back()))
        throw ConfigError("'delta_schedule' must be strictly decreasing");
      cfg.delta_schedule.push_back(d);
    }
  }
  if (doc.contains("start")) {
    const json& st = doc["start"];
    check_keys(st, "start", {"points", "box"});
    if (st.contains("points")) {
      if (!st["points"].is_array()) throw ConfigError("'start.points' must be an array");
      for (const auto& v : st["points"]) cfg.start_points.push_back(point(v, "start.points").first);
    }
    if (st.contains("box")) cfg.start_box = box(st["box"], "start.box");
  }
  if (doc.contains("point")) cfg.point = point(doc["point"], "point").first;
  if (doc.contains("safe_set")) cfg.safe_set = box(doc["safe_set"], "safe_set");
  if (doc.contains("target")) cfg.target = box(doc["target"], "target");
  if (doc.contains("samples")) {
    if (!doc["samples"].is_array()) throw ConfigError("'samples' must be an array");
    for (const auto& v : doc["samples"]) cfg.samples.push_back(point(v, "samples").first);
  }
  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    check_keys(v, "verify", {"property", "instances", "mode", "n_max"});
    VerifySpec spec;
    if (!v.contains("property") || !v["property"].is_string()) throw ConfigError("'verify.property' must be a string");
    spec.property = v["property"].get<std::string>();
    if (spec.property != "lemma2" && spec.property != "initial-fattening" && spec.property != "semicontinuity")
      throw ConfigError("unknown verify property '" + spec.property + "'");
    if (v.contains("instances")) spec.instances = static_cast<std::size_t>(integer(v["instances"], "verify.instances", 1));
    if (v.contains("mode")) {
      if (!v["mode"].is_string()) throw ConfigError("'verify.mode' must be a string");
      spec.mode = v["mode"].get<std::string>();
      if (spec.mode != "usc" && spec.mode != "lsc") throw ConfigError("'verify.mode' must be usc or lsc");
    }
    if (v.contains("n_max")) spec.n_max = static_cast<int>(integer(v["n_max"], "verify.n_max", 1));
    cfg.verify = spec;
  }
  if (doc.contains("max_steps")) cfg.max_steps = static_cast<std::size_t>(integer(doc["max_steps"], "max_steps", 1));
  if (doc.contains("q_max")) cfg.q_max = static_cast<int>(integer(doc["q_max"], "q_max", 1));
  if (doc.contains("fatten_start")) {
    if (!doc["fatten_start"].is_boolean()) throw ConfigError("'fatten_start' must be a boolean");
    cfg.fatten_start = doc["fatten_start"].get<bool>();
  }
  if (doc.contains("seed")) cfg.seed = static_cast<std::uint64_t>(integer(doc["seed"], "seed", 0));
  if (doc.contains("threads")) {
    const json& t = doc["threads"];
    if (t.is_string()) {
      if (t.get<std::string>() != "auto") throw ConfigError("'threads' must be an integer or \"auto\"");
    } else {
      cfg.threads = static_cast<int>(integer(t, "threads", 1));
    }
  }

  cfg.echo = doc;
  cfg.echo.erase("threads");

  // Catalog and domain errors surface as configuration errors.
  try {
    const System s = cfg.make_system();
    const std::size_t entries = cells.is_array() ? cells.size() : 0;
    if (s.domain().dim() == 1 && entries == 2) throw ConfigError("'grid.cells' has two entries for a 1-D domain");
    if (s.domain().dim() == 2 && entries == 1) throw ConfigError("'grid.cells' needs two entries for a 2-D domain");
    if (s.domain().dim() == 2 && entries == 0) cfg.cells[1] = cfg.cells[0];
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

System RunConfig::make_system() const {
  std::optional<Domain> dom;
  if (domain) dom = domain->dim == 1 ? Domain::interval(domain->lo[0], domain->hi[0]) : Domain::box(domain->lo, domain->hi);
  return catalog::make(system, params, controls, dom);
}

Grid RunConfig::make_grid() const { return Grid(make_system().domain(), cells); }

CellSet RunConfig::start_set(const Grid& grid) const {
  CellSet s(grid);
  for (const auto& p : start_points) {
    grid.domain().require(p, "start point");
    s.insert(grid.cell_of(p));
  }
  if (start_box) s |= CellSet::of_box(grid, start_box->lo, start_box->hi);
  return s;
}

}  // namespace chainscope
