#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "chainscope/error.hpp"

namespace chainscope {

// Points carry two coordinates; one-dimensional domains ignore the second.
using Point = std::array<double, 2>;
using CellId = std::uint32_t;

enum class DomainKind { Box, Circle };

/// A compact metric space: a box in R^1 or R^2, or the circle of
/// circumference 1 parameterized by [0,1) with the wraparound metric.
class Domain {
 public:
  static Domain interval(double lo, double hi);
  static Domain box(Point lo, Point hi);
  static Domain circle();

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double lo(int d) const { return lo_[d]; }
  double hi(int d) const { return hi_[d]; }
  double width(int d) const { return hi_[d] - lo_[d]; }

  bool contains(const Point& x) const;
  // Throws DomainError when x is outside.
  void require(const Point& x, const char* what = "point") const;

  // Wraps circle coordinates into [0,1) and clamps box coordinates.
  Point normalize(Point x) const;

  // Checked metric: both points must lie in the domain.
  double distance(const Point& x, const Point& y) const;
  // Unchecked metric, for hot loops over points already known to be valid.
  double raw_distance(const Point& x, const Point& y) const;
  // Shortest displacement from x to y (signed, wraparound on the circle).
  Point displacement(const Point& x, const Point& y) const;

  bool operator==(const Domain&) const = default;
  std::string describe() const;

 private:
  DomainKind kind_ = DomainKind::Box;
  int dim_ = 1;
  Point lo_{0.0, 0.0};
  Point hi_{1.0, 0.0};
};

// Inclusive range of linear cell ids.
struct CellRun {
  CellId first;
  CellId last;
  bool operator==(const CellRun&) const = default;
};

/// Uniform partition of a domain. Cells are half-open [lo, hi) per
/// dimension, except that the last cell of a box dimension is closed.
/// Linear ids run fastest along dimension 0.
class Grid {
 public:
  Grid(Domain domain, std::array<int, 2> cells);
  Grid(Domain domain, int cells) : Grid(std::move(domain), {cells, 1}) {}

  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  int cells(int d) const { return cells_[d]; }
  std::size_t size() const { return size_; }
  double cell_width(int d) const { return width_[d]; }
  double min_cell_width() const;
  // max_d(width_d / cells_d), times sqrt(n) on boxes.
  double cell_diameter() const { return diameter_; }
  // Bound on the distance from a cell center to any point in the cell.
  double cell_radius() const { return 0.5 * diameter_; }

  CellId cell_of(const Point& x) const;
  Point cell_center(CellId c) const;
  Point cell_lo(CellId c) const;
  Point cell_hi(CellId c) const;
  std::array<int, 2> coords(CellId c) const;
  CellId id(std::array<int, 2> coords) const;

  // Grid with every dimension split twice as finely.
  Grid refined() const;
  // Number of refinement steps from this grid to `finer`, or -1.
  int refinement_depth(const Grid& finer) const;

  bool operator==(const Grid&) const = default;

 private:
  Domain domain_;
  std::array<int, 2> cells_{1, 1};
  std::array<double, 2> width_{1.0, 1.0};
  double diameter_ = 1.0;
  std::size_t size_ = 1;
};

/// Finite set of cells of one grid, stored as a bitset.
class CellSet {
 public:
  explicit CellSet(Grid grid);

  static CellSet full(Grid grid);
  static CellSet of(Grid grid, std::span<const CellId> cells);
  static CellSet of_runs(Grid grid, std::span<const CellRun> runs);
  static CellSet of_point(Grid grid, const Point& x);
  // Cells meeting the closed box [lo, hi].
  static CellSet of_box(Grid grid, const Point& lo, const Point& hi);

  const Grid& grid() const { return grid_; }
  bool contains(CellId c) const { return (bits_[c >> 6] >> (c & 63)) & 1u; }
  void insert(CellId c);
  void insert(const CellRun& run);
  void erase(CellId c);
  std::size_t count() const;
  bool empty() const;
  bool is_full() const { return count() == grid_.size(); }
  std::vector<CellId> members() const;
  std::vector<CellRun> runs() const;
  CellId first() const;

  CellSet& operator|=(const CellSet& other);
  CellSet& operator&=(const CellSet& other);
  CellSet& operator-=(const CellSet& other);
  friend CellSet operator|(CellSet a, const CellSet& b) { return a |= b; }
  friend CellSet operator&(CellSet a, const CellSet& b) { return a &= b; }
  friend CellSet operator-(CellSet a, const CellSet& b) { return a -= b; }

  bool subset_of(const CellSet& other) const;
  bool intersects(const CellSet& other) const;
  bool operator==(const CellSet& other) const;

  // Same region on a grid refined `depth` times.
  CellSet refined_to(const Grid& finer) const;

  // One line per cell: comma-separated per-dimension indices, sorted
  // lexicographically.
  std::string dump() const;

 private:
  void require_same_grid(const CellSet& other) const;

  Grid grid_;
  std::vector<std::uint64_t> bits_;
};

// Cells meeting the closed ball of radius `radius` around x, as sorted,
// merged runs.
std::vector<CellRun> ball_cover(const Grid& grid, const Point& x, double radius);

// Cells meeting the closed eps-neighborhood of the union of `cells`.
std::vector<CellRun> dilate(const Grid& grid, std::span<const CellRun> cells, double eps);

// Sorts and merges overlapping or adjacent runs.
void normalize_runs(std::vector<CellRun>& runs);

double metric_distance(const Domain& domain, const Point& x, const Point& y);
CellId cell_of(const Grid& grid, const Point& x);

// All cells meeting the closed eps-ball around the union of the set.
CellSet fatten(const CellSet& set, double eps);

// Hausdorff distance between the cell-center point sets.
double hausdorff(const CellSet& a, const CellSet& b);
// max over a of the distance to the nearest center of b.
double directed_hausdorff(const CellSet& a, const CellSet& b);

}  // namespace chainscope
