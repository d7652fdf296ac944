#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chainscope/commands.hpp"
#include "chainscope/config.hpp"
#include "chainscope/minimal.hpp"
#include "chainscope/reachability.hpp"
#include "chainscope/report.hpp"
#include "chainscope/transition.hpp"

namespace py = pybind11;
using namespace chainscope;

namespace {

Point to_point(const std::vector<double>& x) {
  if (x.empty() || x.size() > 2) throw py::value_error("a point has one or two coordinates");
  return {x[0], x.size() == 2 ? x[1] : 0.0};
}

std::vector<double> from_point(const Point& p, int dim) {
  return dim == 2 ? std::vector<double>{p[0], p[1]} : std::vector<double>{p[0]};
}

Grid make_grid(const System& sys, std::vector<int> cells) {
  if (cells.empty() || cells.size() > 2) throw py::value_error("cells needs one or two entries");
  if (sys.domain().dim() == 2 && cells.size() == 1) cells.push_back(cells[0]);
  return Grid(sys.domain(), {cells[0], cells.size() == 2 ? cells[1] : 1});
}

py::dict chain_dict(const std::vector<ChainStep>& chain, int dim) {
  py::list points, dists;
  for (const auto& s : chain) {
    points.append(from_point(s.point, dim));
    dists.append(s.dist_to_image);
  }
  py::dict d;
  d["points"] = points;
  d["dist_to_image"] = dists;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chain reachability and robustness analysis on cell grids";
  m.attr("__version__") = CHAINSCOPE_VERSION;

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<System>(m, "System")
      .def_property_readonly("name", &System::name)
      .def_property_readonly("params", &System::params)
      .def_property_readonly("controls", &System::controls)
      .def_property_readonly("lipschitz", &System::lipschitz)
      .def_property_readonly("dim", [](const System& s) { return s.domain().dim(); })
      .def_property_readonly("domain", [](const System& s) { return s.domain().describe(); })
      .def("image", [](const System& s, const std::vector<double>& x, double u) {
        return from_point(s.image(to_point(x), u), s.domain().dim());
      });

  m.def("system", [](const std::string& name, const std::map<std::string, double>& params) {
    return catalog::make(name, params);
  }, py::arg("name"), py::arg("params") = std::map<std::string, double>{});
  m.def("systems", &catalog::names);

  py::class_<CellSet>(m, "CellSet")
      .def("__len__", &CellSet::count)
      .def("__contains__", &CellSet::contains)
      .def("__eq__", &CellSet::operator==)
      .def_property_readonly("size", [](const CellSet& s) { return s.grid().size(); })
      .def_property_readonly("cell_diameter", [](const CellSet& s) { return s.grid().cell_diameter(); })
      .def("members", &CellSet::members)
      .def("is_full", &CellSet::is_full)
      .def("subset_of", &CellSet::subset_of)
      .def("centers", [](const CellSet& s) {
        std::vector<std::vector<double>> out;
        for (CellId c : s.members()) out.push_back(from_point(s.grid().cell_center(c), s.grid().dim()));
        return out;
      });

  m.def("cells_of_point", [](const System& sys, std::vector<int> cells, const std::vector<double>& x) {
    return CellSet::of_point(make_grid(sys, std::move(cells)), to_point(x));
  }, py::arg("system"), py::arg("cells"), py::arg("x"));
  m.def("fatten", &fatten, py::arg("set"), py::arg("eps"));
  m.def("hausdorff", &hausdorff);

  m.def("forward_reach", [](const System& sys, const CellSet& start, double eps) {
    return forward_reach(build_graph(sys, start.grid(), eps), start);
  }, py::arg("system"), py::arg("start"), py::arg("eps"));
  m.def("recurrent_components", [](const System& sys, std::vector<int> cells, double eps) {
    return recurrent_cells(build_graph(sys, make_grid(sys, std::move(cells)), eps));
  }, py::arg("system"), py::arg("cells"), py::arg("eps"));

  m.def("chain_reach", [](const System& sys, const CellSet& start, double eps0, int levels) {
    const auto r = chain_reach(sys, start, eps0, levels);
    py::list out;
    for (const auto& lvl : r.levels) {
      py::dict d;
      d["eps"] = lvl.eps;
      d["cells"] = lvl.cells;
      out.append(d);
    }
    return out;
  }, py::arg("system"), py::arg("start"), py::arg("eps0"), py::arg("levels"));

  m.def("robustness", [](const System& sys, std::vector<int> cells, const std::vector<double>& x, double eps) {
    const Grid grid = make_grid(sys, std::move(cells));
    const Point p = to_point(x);
    const auto cert = robustness_check(sys, grid, p, eps);
    py::dict d;
    d["verdict"] = to_string(cert.verdict);
    d["delta"] = cert.delta;
    d["delta_min"] = cert.delta_min;
    d["witness"] = chain_dict(cert.witness, grid.dim());
    d["witness_endpoint_distance"] = cert.witness_endpoint_distance;
    d["replays"] = replay_certificate(sys, p, cert);
    return d;
  }, py::arg("system"), py::arg("cells"), py::arg("x"), py::arg("eps"));

  m.def("classify", [](const System& sys, const std::vector<double>& x, int q_max, double tol) {
    const auto c = classify_point(sys, to_point(x), q_max, tol);
    py::dict d;
    d["label"] = c.label();
    d["period"] = c.period;
    d["representative"] = from_point(c.representative, sys.domain().dim());
    return d;
  }, py::arg("system"), py::arg("x"), py::arg("q_max") = 64, py::arg("tol") = 1e-6);

  m.def("lyapunov", [](const System& sys, const CellSet& a_set, double v_eps) {
    const auto r = lyapunov_stability(sys, a_set, v_eps);
    py::dict d;
    d["stability"] = to_string(r.flag);
    d["w_radius"] = r.w_radius;
    d["escape"] = chain_dict(r.escape, a_set.grid().dim());
    d["note"] = r.note;
    return d;
  }, py::arg("system"), py::arg("set"), py::arg("v_eps"));

  m.def("omega_limit", [](const System& sys, std::vector<int> cells, const std::vector<double>& x,
                          std::size_t burn_in, std::size_t window) {
    const Grid grid = make_grid(sys, std::move(cells));
    return omega_limit(sys, grid, to_point(x), burn_in, window, 2 * grid.cell_diameter()).cells;
  }, py::arg("system"), py::arg("cells"), py::arg("x"), py::arg("burn_in") = 10000, py::arg("window") = 1000);

  m.def("minimal_sets", [](const System& sys, std::vector<int> cells, double eps0, int levels) {
    const auto c = minimal_sets(sys, make_grid(sys, std::move(cells)), eps0, levels);
    py::list sets;
    for (const auto& s : c.sets) {
      py::dict d;
      d["cells"] = s.cells;
      d["kind"] = s.classification.label();
      d["stability"] = to_string(s.stability);
      d["isolated"] = to_string(s.isolated);
      sets.append(d);
    }
    py::dict d;
    d["count"] = to_string(c.count);
    d["sets"] = sets;
    d["components_per_level"] = c.components_per_level;
    return d;
  }, py::arg("system"), py::arg("cells"), py::arg("eps0"), py::arg("levels") = 2);

  // Same as the command-line tool: config text in, (exit code, report text) out.
  m.def("run", [](const std::string& command, const std::string& config) -> std::pair<int, std::string> {
    RunConfig cfg;
    try {
      cfg = parse_config(config);
    } catch (const ConfigError& e) {
      return {kExitError, e.what()};
    }
    const auto out = run_command(command, cfg);
    if (out.report.is_null()) return {out.exit_code, out.error};
    return {out.exit_code, canonical_json(out.report)};
  }, py::arg("command"), py::arg("config"));

  m.def("set_threads", &set_worker_threads);
}
