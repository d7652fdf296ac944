#include "chainscope/systems.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace chainscope {

System::System(std::string name, Domain domain, std::map<std::string, double> params, std::vector<double> controls,
               double lipschitz, MapFn map)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      params_(std::move(params)),
      controls_(std::move(controls)),
      lipschitz_(lipschitz),
      map_(std::move(map)) {
  if (controls_.empty()) throw PreconditionError("control set must be nonempty");
  if (!(lipschitz_ >= 0.0) || !std::isfinite(lipschitz_)) throw PreconditionError("Lipschitz bound must be >= 0");
  std::sort(controls_.begin(), controls_.end());
  controls_.erase(std::unique(controls_.begin(), controls_.end()), controls_.end());
  check_self_map();
}

bool System::has_control(double u) const {
  return std::binary_search(controls_.begin(), controls_.end(), u);
}

Point System::image(const Point& x, double u) const {
  domain_.require(x);
  if (!has_control(u)) {
    std::ostringstream os;
    os << "control " << u << " is not in the control set of " << name_;
    throw ControlError(os.str());
  }
  const Point y = map_(x, u);
  if (!domain_.contains(y)) {
    std::ostringstream os;
    os << name_ << " maps (" << x[0] << (domain_.dim() == 2 ? ", " + std::to_string(x[1]) : std::string()) << ") outside "
       << domain_.describe();
    throw SelfMapError(os.str());
  }
  return y;
}

void System::check_self_map() const {
  const int per_dim = domain_.dim() == 1 ? 1025 : 65;
  const bool circle = domain_.kind() == DomainKind::Circle;
  const int last = circle ? per_dim - 1 : per_dim;
  for (double u : controls_) {
    for (int j = 0; j < (domain_.dim() == 2 ? per_dim : 1); ++j) {
      for (int i = 0; i < last; ++i) {
        Point x{domain_.lo(0) + domain_.width(0) * i / (per_dim - 1), 0.0};
        if (domain_.dim() == 2) x[1] = domain_.lo(1) + domain_.width(1) * j / (per_dim - 1);
        if (!domain_.contains(map_(x, u))) {
          std::ostringstream os;
          os << name_ << " is not a self-map of " << domain_.describe() << " (sampled at x=" << x[0];
          if (domain_.dim() == 2) os << "," << x[1];
          os << ", u=" << u << ")";
          throw SelfMapError(os.str());
        }
      }
    }
  }
}

Point image_point(const System& sys, const Point& x, double u) { return sys.image(x, u); }

std::vector<CellRun> image_cell_runs(const System& sys, const Grid& grid, CellId cell) {
  const Point center = grid.cell_center(cell);
  const double radius = sys.lipschitz() * grid.cell_radius();
  std::vector<CellRun> runs;
  for (double u : sys.controls()) {
    const auto part = ball_cover(grid, sys.apply(center, u), radius);
    runs.insert(runs.end(), part.begin(), part.end());
  }
  normalize_runs(runs);
  return runs;
}

CellSet image_cell(const System& sys, CellId cell, const Grid& grid) {
  if (cell >= grid.size()) throw DomainError("cell id out of range");
  const auto runs = image_cell_runs(sys, grid, cell);
  return CellSet::of_runs(grid, runs);
}

CellSet image_set(const System& sys, const CellSet& set) {
  CellSet out(set.grid());
  for (CellId c : set.members()) {
    for (const auto& r : image_cell_runs(sys, set.grid(), c)) out.insert(r);
  }
  return out;
}

namespace catalog {

namespace {

const Domain kUnit = Domain::interval(0.0, 1.0);

}  // namespace

System rotation(double theta) {
  if (!(theta >= 0.0 && theta < 1.0)) throw PreconditionError("rotation angle must lie in [0,1)");
  return System("rotation", Domain::circle(), {{"theta", theta}}, {0.0}, 1.0, [theta](const Point& x, double) {
    double y = std::fmod(x[0] + theta, 1.0);
    if (y >= 1.0) y = 0.0;
    return Point{y, 0.0};
  });
}

System square() {
  return System("square", kUnit, {}, {0.0}, 2.0, [](const Point& x, double) { return Point{x[0] * x[0], 0.0}; });
}

System identity() {
  return System("identity", kUnit, {}, {0.0}, 1.0, [](const Point& x, double) { return x; });
}

System logistic(double r) {
  if (!(r > 0.0 && r <= 4.0)) throw PreconditionError("logistic parameter must lie in (0,4]");
  return System("logistic", kUnit, {{"r", r}}, {0.0}, r,
                [r](const Point& x, double) { return Point{r * x[0] * (1.0 - x[0]), 0.0}; });
}

System constant(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw PreconditionError("constant value must lie in [0,1]");
  return System("constant", kUnit, {{"c", c}}, {0.0}, 0.0, [c](const Point&, double) { return Point{c, 0.0}; });
}

System affine2d(std::array<double, 4> m, Point b, std::optional<Domain> domain) {
  Domain dom = domain.value_or(Domain::box({0.0, 0.0}, {1.0, 1.0}));
  if (dom.dim() != 2) throw PreconditionError("affine2d needs a two-dimensional box");
  auto f = [m, b](const Point& x, double) {
    return Point{m[0] * x[0] + m[1] * x[1] + b[0], m[2] * x[0] + m[3] * x[1] + b[1]};
  };
  // An affine image of a box is the hull of the corner images.
  for (double cx : {dom.lo(0), dom.hi(0)}) {
    for (double cy : {dom.lo(1), dom.hi(1)}) {
      if (!dom.contains(f({cx, cy}, 0.0))) throw SelfMapError("affine2d does not map the box into itself");
    }
  }
  // Spectral norm from the eigenvalues of M^T M.
  const double a = m[0] * m[0] + m[2] * m[2];
  const double d = m[1] * m[1] + m[3] * m[3];
  const double c = m[0] * m[1] + m[2] * m[3];
  const double lmax = 0.5 * (a + d) + std::sqrt(0.25 * (a - d) * (a - d) + c * c);
  std::map<std::string, double> params{{"m00", m[0]}, {"m01", m[1]}, {"m10", m[2]},
                                       {"m11", m[3]}, {"b0", b[0]},  {"b1", b[1]}};
  return System("affine2d", dom, std::move(params), {0.0}, std::sqrt(lmax), f);
}

System drift_control(double a, std::vector<double> controls) {
  return System("drift_control", Domain::interval(-1.0, 1.0), {{"a", a}}, std::move(controls), std::fabs(a),
                [a](const Point& x, double u) { return Point{a * x[0] + u, 0.0}; });
}

std::vector<std::string> names() {
  return {"affine2d", "constant", "drift_control", "identity", "logistic", "rotation", "square"};
}

System make(const std::string& name, const std::map<std::string, double>& params,
            std::optional<std::vector<double>> controls, std::optional<Domain> domain) {
  auto check_keys = [&](std::set<std::string> allowed) {
    for (const auto& [k, v] : params) {
      if (!allowed.count(k)) throw PreconditionError("system '" + name + "' has no parameter '" + k + "'");
    }
  };
  auto get = [&](const std::string& k, double fallback) {
    auto it = params.find(k);
    return it == params.end() ? fallback : it->second;
  };
  if (controls && name != "drift_control") {
    throw PreconditionError("system '" + name + "' is uncontrolled; controls are not accepted");
  }
  auto rebox = [&](System sys) {
    if (!domain) return sys;
    if (domain->dim() != sys.domain().dim() || domain->kind() != sys.domain().kind()) {
      throw PreconditionError("domain override does not match the system's domain type");
    }
    return System(sys.name(), *domain, sys.params(), sys.controls(), sys.lipschitz(),
                  [sys](const Point& x, double u) { return sys.apply(x, u); });
  };

  if (name == "rotation") {
    check_keys({"theta"});
    if (domain) throw PreconditionError("rotation lives on the circle; no domain override");
    return rotation(get("theta", 0.0));
  }
  if (name == "square") {
    check_keys({});
    return rebox(square());
  }
  if (name == "identity") {
    check_keys({});
    return rebox(identity());
  }
  if (name == "logistic") {
    check_keys({"r"});
    return rebox(logistic(get("r", 2.8)));
  }
  if (name == "constant") {
    check_keys({"c"});
    const double c = get("c", 0.3);
    if (domain) {
      return System("constant", *domain, {{"c", c}}, {0.0}, 0.0, [c](const Point&, double) { return Point{c, 0.0}; });
    }
    return constant(c);
  }
  if (name == "affine2d") {
    check_keys({"m00", "m01", "m10", "m11", "b0", "b1"});
    return affine2d({get("m00", 0.5), get("m01", 0.0), get("m10", 0.0), get("m11", 0.5)}, {get("b0", 0.25), get("b1", 0.25)},
                    domain);
  }
  if (name == "drift_control") {
    check_keys({"a"});
    auto sys = drift_control(get("a", 0.5), controls.value_or(std::vector<double>{-0.1, 0.0, 0.1}));
    return rebox(std::move(sys));
  }
  throw PreconditionError("unknown system '" + name + "'");
}

}  // namespace catalog

}  // namespace chainscope
