#pragma once

// Slow, obviously-correct reference implementations used by the tests.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "chainscope/geometry.hpp"
#include "chainscope/systems.hpp"
#include "chainscope/transition.hpp"

namespace oracle {

using namespace chainscope;

// Euclidean (or wraparound) gap between two closed cells.
inline double cell_gap(const Grid& g, CellId a, CellId b) {
  const auto ia = g.coords(a), ib = g.coords(b);
  double sq = 0.0;
  for (int d = 0; d < g.dim(); ++d) {
    long k = std::labs(static_cast<long>(ia[d]) - ib[d]);
    if (g.domain().kind() == DomainKind::Circle) k = std::min<long>(k, g.cells(0) - k);
    const double gap = std::max(0.0, static_cast<double>(k - 1)) * g.cell_width(d);
    sq += gap * gap;
  }
  return std::sqrt(sq);
}

inline CellSet fatten_ref(const CellSet& s, double eps) {
  const Grid& g = s.grid();
  CellSet out(g);
  const auto members = s.members();
  for (CellId c = 0; c < g.size(); ++c) {
    for (CellId m : members) {
      if (cell_gap(g, c, m) <= eps) {
        out.insert(c);
        break;
      }
    }
  }
  return out;
}

inline double directed_hausdorff_ref(const CellSet& a, const CellSet& b) {
  const Grid& g = a.grid();
  double worst = 0.0;
  for (CellId x : a.members()) {
    double best = std::numeric_limits<double>::infinity();
    for (CellId y : b.members()) best = std::min(best, g.domain().raw_distance(g.cell_center(x), g.cell_center(y)));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff_ref(const CellSet& a, const CellSet& b) {
  return std::max(directed_hausdorff_ref(a, b), directed_hausdorff_ref(b, a));
}

// Adjacency matrix read back through has_edge, closed under composition by
// repeated boolean squaring.
using Matrix = std::vector<std::vector<bool>>;

inline Matrix adjacency(const TransitionGraph& g) {
  const std::size_t n = g.size();
  Matrix m(n, std::vector<bool>(n, false));
  for (CellId i = 0; i < n; ++i)
    for (CellId j = 0; j < n; ++j) m[i][j] = g.has_edge(i, j);
  return m;
}

// Successors computed directly from the definition: cells whose closed
// cell is within eps of the image bound of the source cell.
inline Matrix adjacency_from_definition(const System& sys, const Grid& grid, double eps) {
  const std::size_t n = grid.size();
  Matrix m(n, std::vector<bool>(n, false));
  for (CellId i = 0; i < n; ++i) {
    const CellSet img = image_cell(sys, i, grid);
    const CellSet fat = fatten_ref(img, eps);
    for (CellId j = 0; j < n; ++j) m[i][j] = fat.contains(j);
  }
  return m;
}

inline Matrix transitive_closure(Matrix m) {
  const std::size_t n = m.size();
  for (bool changed = true; changed;) {
    changed = false;
    Matrix sq = m;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        if (m[i][k])
          for (std::size_t j = 0; j < n; ++j)
            if (m[k][j] && !sq[i][j]) {
              sq[i][j] = true;
              changed = true;
            }
    m = std::move(sq);
  }
  return m;
}

inline CellSet closure_reach(const Matrix& closure, const CellSet& start) {
  CellSet out = start;
  for (CellId s : start.members())
    for (CellId j = 0; j < closure.size(); ++j)
      if (closure[s][j]) out.insert(j);
  return out;
}

// Sets of mutually reachable cells on cycles, sorted by first member.
inline std::vector<std::vector<CellId>> recurrent_classes(const Matrix& closure) {
  const std::size_t n = closure.size();
  std::vector<bool> used(n, false);
  std::vector<std::vector<CellId>> out;
  for (CellId i = 0; i < n; ++i) {
    if (used[i] || !closure[i][i]) continue;
    std::vector<CellId> cls;
    for (CellId j = i; j < n; ++j) {
      if (closure[i][j] && closure[j][i]) {
        cls.push_back(j);
        used[j] = true;
      }
    }
    out.push_back(cls);
  }
  return out;
}

inline CellSet random_set(const Grid& g, std::mt19937_64& gen, double density) {
  CellSet s(g);
  std::bernoulli_distribution coin(density);
  for (CellId c = 0; c < g.size(); ++c)
    if (coin(gen)) s.insert(c);
  if (s.empty()) s.insert(static_cast<CellId>(gen() % g.size()));
  return s;
}

}  // namespace oracle
