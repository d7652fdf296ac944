#pragma once

#include <span>
#include <string>
#include <vector>

#include "chainscope/geometry.hpp"
#include "chainscope/systems.hpp"

namespace chainscope {

// Minimum ratio eps / cell_diameter accepted by build_graph.
inline constexpr double kResolutionCoupling = 4.0;

// Worker threads used for graph construction. Results never depend on it.
void set_worker_threads(unsigned n);
unsigned worker_threads();

/// Finite over-approximation of F_eps on a grid: successors(c) covers every
/// cell meeting B_eps(f(x, u)) for x in c and u in U. Successor lists are
/// stored as sorted, merged runs of cell ids.
class TransitionGraph {
 public:
  TransitionGraph(Grid grid, double eps, std::vector<std::size_t> offsets, std::vector<CellRun> runs);

  const Grid& grid() const { return grid_; }
  double eps() const { return eps_; }
  std::size_t size() const { return grid_.size(); }

  std::span<const CellRun> successors(CellId c) const {
    return {runs_.data() + offsets_[c], runs_.data() + offsets_[c + 1]};
  }
  bool has_edge(CellId from, CellId to) const;
  std::size_t edge_count() const;
  std::size_t run_count() const { return runs_.size(); }

  // "src -> dst1,dst2,..." per source cell, ascending.
  std::string dump() const;

 private:
  Grid grid_;
  double eps_;
  std::vector<std::size_t> offsets_;
  std::vector<CellRun> runs_;
};

TransitionGraph build_graph(const System& sys, const Grid& grid, double eps);

// Least superset of `start` closed under successors.
CellSet forward_reach(const TransitionGraph& g, const CellSet& start);

// Breadth-first closure that also records, for every reached cell, the
// cell it was first discovered from (itself for start cells).
struct ReachTree {
  CellSet cells;
  std::vector<CellId> parent;  // indexed by cell id; valid for reached cells
  std::vector<CellId> order;   // discovery order

  // Start cell first, `target` last.
  std::vector<CellId> path_to(CellId target) const;
};
ReachTree forward_reach_tree(const TransitionGraph& g, const CellSet& start);

// Cells from which some path reaches `target`.
CellSet backward_reach(const TransitionGraph& g, const CellSet& target);

// Exact one-step image of a set under the graph relation.
CellSet step_image(const TransitionGraph& g, const CellSet& set);

// Nontrivial strongly connected components (two or more cells, or a single
// cell with a self-loop), ordered by smallest member.
std::vector<CellSet> recurrent_cells(const TransitionGraph& g);

}  // namespace chainscope
