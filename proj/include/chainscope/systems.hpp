#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chainscope/geometry.hpp"

namespace chainscope {

using MapFn = std::function<Point(const Point&, double)>;

/// A controlled discrete-time system x' = f(x, u) on a compact domain with
/// a finite control set U and a global Lipschitz bound L in x. The
/// multifunction F(x) = f(x, U) is what the analyses iterate.
class System {
 public:
  System(std::string name, Domain domain, std::map<std::string, double> params, std::vector<double> controls,
         double lipschitz, MapFn map);

  const std::string& name() const { return name_; }
  const Domain& domain() const { return domain_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::vector<double>& controls() const { return controls_; }
  double lipschitz() const { return lipschitz_; }
  bool single_valued() const { return controls_.size() == 1; }
  bool has_control(double u) const;

  // Checked evaluation: x must be in the domain, u in U, and the result
  // is verified to be in the domain.
  Point image(const Point& x, double u) const;
  // Unchecked evaluation for hot loops.
  Point apply(const Point& x, double u) const { return map_(x, u); }

 private:
  void check_self_map() const;

  std::string name_;
  Domain domain_;
  std::map<std::string, double> params_;
  std::vector<double> controls_;
  double lipschitz_;
  MapFn map_;
};

namespace catalog {

System rotation(double theta);
System square();
System identity();
System logistic(double r);
System constant(double c);
// f(x) = M x + b on `domain` (default [0,1]^2). M is row-major.
System affine2d(std::array<double, 4> m, Point b, std::optional<Domain> domain = std::nullopt);
System drift_control(double a, std::vector<double> controls = {-0.1, 0.0, 0.1});

// Builds a catalog system from its name and parameter map. Unknown names
// or parameters raise PreconditionError.
System make(const std::string& name, const std::map<std::string, double>& params,
            std::optional<std::vector<double>> controls = std::nullopt, std::optional<Domain> domain = std::nullopt);

std::vector<std::string> names();

}  // namespace catalog

Point image_point(const System& sys, const Point& x, double u);

// Cells that may contain f(x, u) for some x in `cell` and u in U: for each
// u, the cells meeting the closed ball of radius L * cell_radius around the
// image of the cell center.
std::vector<CellRun> image_cell_runs(const System& sys, const Grid& grid, CellId cell);
CellSet image_cell(const System& sys, CellId cell, const Grid& grid);
// Union of image_cell over the members of `set`.
CellSet image_set(const System& sys, const CellSet& set);

}  // namespace chainscope
