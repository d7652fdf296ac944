#include "chainscope/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace chainscope {

namespace {

// Index-space slack so that cells touching a boundary only up to rounding
// are still counted. Over-inclusion is always sound.
constexpr double kIndexSlack = 1e-9;

std::int64_t floor_index(double t) { return static_cast<std::int64_t>(std::floor(t + kIndexSlack)); }
std::int64_t ceil_index(double t) { return static_cast<std::int64_t>(std::ceil(t - kIndexSlack)); }

// Appends the runs covering index range [lo, hi] of one dimension of
// length n, row offset `base`, wrapping when `wrap` is set and clipping
// otherwise.
void push_range(std::vector<CellRun>& out, std::int64_t lo, std::int64_t hi, std::int64_t n,
                std::int64_t base, bool wrap) {
  if (hi < lo) return;
  if (wrap) {
    if (hi - lo + 1 >= n) {
      out.push_back({static_cast<CellId>(base), static_cast<CellId>(base + n - 1)});
      return;
    }
    auto mod = [n](std::int64_t k) { return ((k % n) + n) % n; };
    const std::int64_t a = mod(lo);
    const std::int64_t b = mod(hi);
    if (a <= b) {
      out.push_back({static_cast<CellId>(base + a), static_cast<CellId>(base + b)});
    } else {
      out.push_back({static_cast<CellId>(base), static_cast<CellId>(base + b)});
      out.push_back({static_cast<CellId>(base + a), static_cast<CellId>(base + n - 1)});
    }
    return;
  }
  lo = std::max<std::int64_t>(lo, 0);
  hi = std::min<std::int64_t>(hi, n - 1);
  if (hi < lo) return;
  out.push_back({static_cast<CellId>(base + lo), static_cast<CellId>(base + hi)});
}

}  // namespace

// ---------------------------------------------------------------- Domain

Domain Domain::interval(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
    throw DomainError("interval bounds must be finite with hi > lo");
  }
  Domain d;
  d.kind_ = DomainKind::Box;
  d.dim_ = 1;
  d.lo_ = {lo, 0.0};
  d.hi_ = {hi, 0.0};
  return d;
}

Domain Domain::box(Point lo, Point hi) {
  for (int k = 0; k < 2; ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]) || !(hi[k] > lo[k])) {
      throw DomainError("box bounds must be finite with positive width in every dimension");
    }
  }
  Domain d;
  d.kind_ = DomainKind::Box;
  d.dim_ = 2;
  d.lo_ = lo;
  d.hi_ = hi;
  return d;
}

Domain Domain::circle() {
  Domain d;
  d.kind_ = DomainKind::Circle;
  d.dim_ = 1;
  d.lo_ = {0.0, 0.0};
  d.hi_ = {1.0, 0.0};
  return d;
}

bool Domain::contains(const Point& x) const {
  if (kind_ == DomainKind::Circle) return x[0] >= 0.0 && x[0] < 1.0;
  for (int k = 0; k < dim_; ++k) {
    if (!(x[k] >= lo_[k] && x[k] <= hi_[k])) return false;
  }
  return true;
}

void Domain::require(const Point& x, const char* what) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << what << " (" << x[0];
    if (dim_ == 2) os << ", " << x[1];
    os << ") lies outside " << describe();
    throw DomainError(os.str());
  }
}

Point Domain::normalize(Point x) const {
  if (kind_ == DomainKind::Circle) {
    double t = x[0] - std::floor(x[0]);
    if (t >= 1.0) t = 0.0;
    return {t, 0.0};
  }
  for (int k = 0; k < dim_; ++k) x[k] = std::clamp(x[k], lo_[k], hi_[k]);
  if (dim_ == 1) x[1] = 0.0;
  return x;
}

double Domain::raw_distance(const Point& x, const Point& y) const {
  if (kind_ == DomainKind::Circle) {
    double t = std::fabs(x[0] - y[0]);
    t -= std::floor(t);
    return std::min(t, 1.0 - t);
  }
  if (dim_ == 1) return std::fabs(x[0] - y[0]);
  return std::hypot(x[0] - y[0], x[1] - y[1]);
}

double Domain::distance(const Point& x, const Point& y) const {
  require(x);
  require(y);
  return raw_distance(x, y);
}

Point Domain::displacement(const Point& x, const Point& y) const {
  if (kind_ == DomainKind::Circle) {
    double d = y[0] - x[0];
    d -= std::round(d);
    return {d, 0.0};
  }
  return {y[0] - x[0], dim_ == 2 ? y[1] - x[1] : 0.0};
}

std::string Domain::describe() const {
  std::ostringstream os;
  if (kind_ == DomainKind::Circle) return "circle[0,1)";
  os << "box[" << lo_[0] << "," << hi_[0] << "]";
  if (dim_ == 2) os << "x[" << lo_[1] << "," << hi_[1] << "]";
  return os.str();
}

double metric_distance(const Domain& domain, const Point& x, const Point& y) {
  return domain.distance(x, y);
}

// ------------------------------------------------------------------ Grid

Grid::Grid(Domain domain, std::array<int, 2> cells) : domain_(std::move(domain)), cells_(cells) {
  if (domain_.dim() == 1) cells_[1] = 1;
  double widest = 0.0;
  size_ = 1;
  for (int k = 0; k < 2; ++k) {
    if (cells_[k] <= 0) throw DomainError("cells per dimension must be positive");
    if (k < domain_.dim()) {
      width_[k] = domain_.width(k) / cells_[k];
      widest = std::max(widest, width_[k]);
    } else {
      width_[k] = 1.0;
    }
    size_ *= static_cast<std::size_t>(cells_[k]);
  }
  if (size_ > std::numeric_limits<CellId>::max()) throw ResourceError("grid too large for 32-bit cell ids");
  diameter_ = domain_.kind() == DomainKind::Box ? widest * std::sqrt(static_cast<double>(domain_.dim())) : widest;
}

double Grid::min_cell_width() const {
  double w = width_[0];
  if (dim() == 2) w = std::min(w, width_[1]);
  return w;
}

CellId Grid::cell_of(const Point& x) const {
  domain_.require(x);
  std::array<int, 2> c{0, 0};
  for (int k = 0; k < dim(); ++k) {
    const double t = (x[k] - domain_.lo(k)) * cells_[k] / domain_.width(k);
    auto i = static_cast<std::int64_t>(std::floor(t));
    c[k] = static_cast<int>(std::clamp<std::int64_t>(i, 0, cells_[k] - 1));
  }
  return id(c);
}

std::array<int, 2> Grid::coords(CellId c) const {
  return {static_cast<int>(c % static_cast<CellId>(cells_[0])), static_cast<int>(c / static_cast<CellId>(cells_[0]))};
}

CellId Grid::id(std::array<int, 2> c) const {
  return static_cast<CellId>(c[0]) + static_cast<CellId>(cells_[0]) * static_cast<CellId>(c[1]);
}

Point Grid::cell_lo(CellId c) const {
  const auto ij = coords(c);
  Point p{0.0, 0.0};
  for (int k = 0; k < dim(); ++k) p[k] = domain_.lo(k) + ij[k] * width_[k];
  return p;
}

Point Grid::cell_hi(CellId c) const {
  const auto ij = coords(c);
  Point p{0.0, 0.0};
  for (int k = 0; k < dim(); ++k) p[k] = domain_.lo(k) + (ij[k] + 1) * width_[k];
  return p;
}

Point Grid::cell_center(CellId c) const {
  const auto ij = coords(c);
  Point p{0.0, 0.0};
  for (int k = 0; k < dim(); ++k) p[k] = domain_.lo(k) + (ij[k] + 0.5) * width_[k];
  return p;
}

Grid Grid::refined() const {
  std::array<int, 2> cells = cells_;
  for (int k = 0; k < dim(); ++k) cells[k] *= 2;
  return Grid(domain_, cells);
}

int Grid::refinement_depth(const Grid& finer) const {
  if (!(finer.domain_ == domain_)) return -1;
  if (finer.cells_[0] % cells_[0] != 0) return -1;
  const int ratio = finer.cells_[0] / cells_[0];
  if (!std::has_single_bit(static_cast<unsigned>(ratio))) return -1;
  if (dim() == 2 && finer.cells_[1] != cells_[1] * ratio) return -1;
  return std::countr_zero(static_cast<unsigned>(ratio));
}

CellId cell_of(const Grid& grid, const Point& x) { return grid.cell_of(x); }

// --------------------------------------------------------------- CellSet

CellSet::CellSet(Grid grid) : grid_(std::move(grid)), bits_((grid_.size() + 63) / 64, 0) {}

CellSet CellSet::full(Grid grid) {
  CellSet s(std::move(grid));
  s.insert(CellRun{0, static_cast<CellId>(s.grid_.size() - 1)});
  return s;
}

CellSet CellSet::of(Grid grid, std::span<const CellId> cells) {
  CellSet s(std::move(grid));
  for (CellId c : cells) s.insert(c);
  return s;
}

CellSet CellSet::of_runs(Grid grid, std::span<const CellRun> runs) {
  CellSet s(std::move(grid));
  for (const auto& r : runs) s.insert(r);
  return s;
}

CellSet CellSet::of_point(Grid grid, const Point& x) {
  const CellId c = grid.cell_of(x);
  CellSet s(std::move(grid));
  s.insert(c);
  return s;
}

CellSet CellSet::of_box(Grid grid, const Point& lo, const Point& hi) {
  const Domain& dom = grid.domain();
  std::vector<CellRun> runs;
  std::array<std::int64_t, 2> first{0, 0}, last{0, 0};
  for (int k = 0; k < grid.dim(); ++k) {
    if (hi[k] < lo[k]) throw DomainError("box with hi < lo");
    first[k] = ceil_index((lo[k] - dom.lo(k)) / grid.cell_width(k)) - 1;
    last[k] = floor_index((hi[k] - dom.lo(k)) / grid.cell_width(k));
    if (dom.kind() == DomainKind::Box) {
      first[k] = std::max<std::int64_t>(first[k], 0);
      last[k] = std::min<std::int64_t>(last[k], grid.cells(k) - 1);
    }
  }
  const bool wrap = dom.kind() == DomainKind::Circle;
  for (std::int64_t j = first[1]; j <= last[1]; ++j) {
    push_range(runs, first[0], last[0], grid.cells(0), j * grid.cells(0), wrap);
  }
  return of_runs(std::move(grid), runs);
}

void CellSet::insert(CellId c) {
  if (c >= grid_.size()) throw DomainError("cell id out of range");
  bits_[c >> 6] |= std::uint64_t{1} << (c & 63);
}

void CellSet::insert(const CellRun& run) {
  if (run.last >= grid_.size() || run.first > run.last) throw DomainError("cell run out of range");
  std::size_t a = run.first;
  const std::size_t b = run.last;
  while (a <= b) {
    const std::size_t word = a >> 6;
    const std::size_t lo = a & 63;
    const std::size_t hi = std::min<std::size_t>(63, lo + (b - a));
    const std::uint64_t mask =
        (hi - lo == 63) ? ~std::uint64_t{0} : (((std::uint64_t{1} << (hi - lo + 1)) - 1) << lo);
    bits_[word] |= mask;
    a += hi - lo + 1;
  }
}

void CellSet::erase(CellId c) {
  if (c >= grid_.size()) throw DomainError("cell id out of range");
  bits_[c >> 6] &= ~(std::uint64_t{1} << (c & 63));
}

std::size_t CellSet::count() const {
  std::size_t n = 0;
  for (auto w : bits_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool CellSet::empty() const {
  return std::all_of(bits_.begin(), bits_.end(), [](std::uint64_t w) { return w == 0; });
}

std::vector<CellId> CellSet::members() const {
  std::vector<CellId> out;
  for (std::size_t w = 0; w < bits_.size(); ++w) {
    std::uint64_t word = bits_[w];
    while (word) {
      const int b = std::countr_zero(word);
      out.push_back(static_cast<CellId>(w * 64 + b));
      word &= word - 1;
    }
  }
  return out;
}

std::vector<CellRun> CellSet::runs() const {
  std::vector<CellRun> out;
  for (CellId c : members()) {
    if (!out.empty() && out.back().last + 1 == c) {
      out.back().last = c;
    } else {
      out.push_back({c, c});
    }
  }
  return out;
}

CellId CellSet::first() const {
  for (std::size_t w = 0; w < bits_.size(); ++w) {
    if (bits_[w]) return static_cast<CellId>(w * 64 + std::countr_zero(bits_[w]));
  }
  throw EmptySetError("first() of an empty cell set");
}

void CellSet::require_same_grid(const CellSet& other) const {
  if (!(grid_ == other.grid_)) throw DomainError("cell sets live on different grids");
}

CellSet& CellSet::operator|=(const CellSet& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

CellSet& CellSet::operator&=(const CellSet& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

CellSet& CellSet::operator-=(const CellSet& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= ~other.bits_[i];
  return *this;
}

bool CellSet::subset_of(const CellSet& other) const {
  require_same_grid(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] & ~other.bits_[i]) return false;
  }
  return true;
}

bool CellSet::intersects(const CellSet& other) const {
  require_same_grid(other);
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] & other.bits_[i]) return true;
  }
  return false;
}

bool CellSet::operator==(const CellSet& other) const { return grid_ == other.grid_ && bits_ == other.bits_; }

CellSet CellSet::refined_to(const Grid& finer) const {
  const int depth = grid_.refinement_depth(finer);
  if (depth < 0) throw DomainError("target grid is not a dyadic refinement");
  if (depth == 0) return *this;
  const int factor = 1 << depth;
  CellSet out(finer);
  for (CellId c : members()) {
    const auto ij = grid_.coords(c);
    const int rows = grid_.dim() == 2 ? factor : 1;
    for (int dj = 0; dj < rows; ++dj) {
      const int j = grid_.dim() == 2 ? ij[1] * factor + dj : 0;
      const CellId a = finer.id({ij[0] * factor, j});
      out.insert(CellRun{a, static_cast<CellId>(a + factor - 1)});
    }
  }
  return out;
}

std::string CellSet::dump() const {
  std::vector<std::array<int, 2>> coords;
  for (CellId c : members()) coords.push_back(grid_.coords(c));
  std::sort(coords.begin(), coords.end());
  std::ostringstream os;
  for (const auto& ij : coords) {
    os << ij[0];
    if (grid_.dim() == 2) os << ',' << ij[1];
    os << '\n';
  }
  return os.str();
}

// ------------------------------------------------------- covers & fatten

void normalize_runs(std::vector<CellRun>& runs) {
  if (runs.empty()) return;
  std::sort(runs.begin(), runs.end(), [](const CellRun& a, const CellRun& b) { return a.first < b.first; });
  std::size_t w = 0;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (static_cast<std::uint64_t>(runs[i].first) <= static_cast<std::uint64_t>(runs[w].last) + 1) {
      runs[w].last = std::max(runs[w].last, runs[i].last);
    } else {
      runs[++w] = runs[i];
    }
  }
  runs.resize(w + 1);
}

std::vector<CellRun> ball_cover(const Grid& grid, const Point& x, double radius) {
  const Domain& dom = grid.domain();
  const bool wrap = dom.kind() == DomainKind::Circle;
  std::vector<CellRun> out;
  auto index_range = [&](int k, double lo, double hi) {
    return std::pair{ceil_index((lo - dom.lo(k)) / grid.cell_width(k)) - 1,
                     floor_index((hi - dom.lo(k)) / grid.cell_width(k))};
  };
  if (grid.dim() == 1) {
    auto [a, b] = index_range(0, x[0] - radius, x[0] + radius);
    push_range(out, a, b, grid.cells(0), 0, wrap);
  } else {
    auto [ja, jb] = index_range(1, x[1] - radius, x[1] + radius);
    ja = std::max<std::int64_t>(ja, 0);
    jb = std::min<std::int64_t>(jb, grid.cells(1) - 1);
    for (std::int64_t j = ja; j <= jb; ++j) {
      const double ylo = dom.lo(1) + j * grid.cell_width(1);
      const double yhi = ylo + grid.cell_width(1);
      const double gap = std::max({0.0, ylo - x[1], x[1] - yhi});
      const double half = std::sqrt(std::max(0.0, radius * radius - gap * gap)) + kIndexSlack * grid.cell_width(1);
      auto [a, b] = index_range(0, x[0] - half, x[0] + half);
      push_range(out, a, b, grid.cells(0), j * grid.cells(0), false);
    }
  }
  normalize_runs(out);
  return out;
}

std::vector<CellRun> dilate(const Grid& grid, std::span<const CellRun> cells, double eps) {
  const Domain& dom = grid.domain();
  const bool wrap = dom.kind() == DomainKind::Circle;
  std::vector<CellRun> out;
  const std::int64_t n0 = grid.cells(0);
  if (grid.dim() == 1) {
    const std::int64_t reach = 1 + floor_index(eps / grid.cell_width(0));
    for (const auto& r : cells) push_range(out, std::int64_t{r.first} - reach, std::int64_t{r.last} + reach, n0, 0, wrap);
    normalize_runs(out);
    return out;
  }
  const std::int64_t n1 = grid.cells(1);
  const std::int64_t reach_y = 1 + floor_index(eps / grid.cell_width(1));
  std::vector<std::int64_t> reach_x(static_cast<std::size_t>(reach_y + 1), -1);
  for (std::int64_t dj = 0; dj <= reach_y; ++dj) {
    const double gap = std::max<std::int64_t>(0, dj - 1) * grid.cell_width(1);
    if (gap > eps * (1.0 + 1e-12)) continue;
    const double rem = std::sqrt(std::max(0.0, eps * eps - gap * gap));
    reach_x[static_cast<std::size_t>(dj)] = 1 + floor_index(rem / grid.cell_width(0));
  }
  for (const auto& r : cells) {
    std::int64_t a = r.first;
    while (a <= std::int64_t{r.last}) {
      const std::int64_t row = a / n0;
      const std::int64_t row_end = std::min<std::int64_t>(r.last, (row + 1) * n0 - 1);
      const std::int64_t i0 = a - row * n0;
      const std::int64_t i1 = row_end - row * n0;
      for (std::int64_t dj = -reach_y; dj <= reach_y; ++dj) {
        const std::int64_t rx = reach_x[static_cast<std::size_t>(std::abs(dj))];
        const std::int64_t j = row + dj;
        if (rx < 0 || j < 0 || j >= n1) continue;
        push_range(out, i0 - rx, i1 + rx, n0, j * n0, false);
      }
      a = row_end + 1;
    }
  }
  normalize_runs(out);
  return out;
}

CellSet fatten(const CellSet& set, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("fatten requires eps > 0");
  if (set.empty() || set.is_full()) return set;
  const auto runs = set.runs();
  return CellSet::of_runs(set.grid(), dilate(set.grid(), runs, eps));
}

double directed_hausdorff(const CellSet& a, const CellSet& b) {
  if (a.empty() || b.empty()) throw EmptySetError("hausdorff distance of an empty cell set");
  if (!(a.grid() == b.grid())) throw DomainError("cell sets live on different grids");
  const Grid& grid = a.grid();
  const Domain& dom = grid.domain();
  const std::int64_t n1 = grid.cells(1);

  // Column indices of b grouped by row.
  std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(n1));
  for (CellId c : b.members()) {
    const auto ij = grid.coords(c);
    rows[static_cast<std::size_t>(ij[1])].push_back(ij[0]);
  }
  const bool wrap = dom.kind() == DomainKind::Circle;

  auto nearest_in_row = [&](const std::vector<std::int64_t>& cols, std::int64_t i, const Point& p, std::int64_t j) {
    double best = std::numeric_limits<double>::infinity();
    if (cols.empty()) return best;
    auto it = std::lower_bound(cols.begin(), cols.end(), i);
    auto consider = [&](std::int64_t col) {
      best = std::min(best, dom.raw_distance(p, grid.cell_center(grid.id({static_cast<int>(col), static_cast<int>(j)}))));
    };
    if (it != cols.end()) consider(*it);
    if (it != cols.begin()) consider(*std::prev(it));
    if (wrap) {
      consider(cols.front());
      consider(cols.back());
    }
    return best;
  };

  double worst = 0.0;
  for (CellId c : a.members()) {
    if (b.contains(c)) continue;
    const auto ij = grid.coords(c);
    const Point p = grid.cell_center(c);
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t dj = 0; dj < n1; ++dj) {
      const double dy = dj * grid.cell_width(1);
      if (grid.dim() == 2 && dy >= best) break;
      for (std::int64_t s : {std::int64_t{-1}, std::int64_t{1}}) {
        if (dj == 0 && s == 1) continue;
        const std::int64_t j = ij[1] + s * dj;
        if (j < 0 || j >= n1) continue;
        best = std::min(best, nearest_in_row(rows[static_cast<std::size_t>(j)], ij[0], p, j));
      }
    }
    worst = std::max(worst, best);
  }
  return worst;
}

double hausdorff(const CellSet& a, const CellSet& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

}  // namespace chainscope
