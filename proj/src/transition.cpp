#include "chainscope/transition.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <numeric>
#include <sstream>
#include <thread>

namespace chainscope {

namespace {

std::atomic<unsigned> g_threads{1};

// "Next unvisited cell at or after i", with path compression. Lets a BFS
// consume a successor run in time proportional to the newly visited cells.
class UnvisitedIndex {
 public:
  explicit UnvisitedIndex(std::size_t n) : next_(n + 1) { std::iota(next_.begin(), next_.end(), CellId{0}); }

  CellId find(CellId i) {
    CellId root = i;
    while (next_[root] != root) root = next_[root];
    while (next_[i] != root) {
      const CellId up = next_[i];
      next_[i] = root;
      i = up;
    }
    return root;
  }
  void mark(CellId i) { next_[i] = i + 1; }

 private:
  std::vector<CellId> next_;
};

void require_nonempty(const CellSet& s, const char* what) {
  if (s.empty()) throw EmptySetError(std::string(what) + " must be nonempty");
}

void require_graph_grid(const TransitionGraph& g, const CellSet& s) {
  if (!(g.grid() == s.grid())) throw DomainError("cell set and graph live on different grids");
}

}  // namespace

void set_worker_threads(unsigned n) { g_threads = n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n; }
unsigned worker_threads() { return g_threads; }

TransitionGraph::TransitionGraph(Grid grid, double eps, std::vector<std::size_t> offsets, std::vector<CellRun> runs)
    : grid_(std::move(grid)), eps_(eps), offsets_(std::move(offsets)), runs_(std::move(runs)) {}

bool TransitionGraph::has_edge(CellId from, CellId to) const {
  for (const auto& r : successors(from)) {
    if (r.first <= to && to <= r.last) return true;
  }
  return false;
}

std::size_t TransitionGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& r : runs_) n += static_cast<std::size_t>(r.last - r.first) + 1;
  return n;
}

std::string TransitionGraph::dump() const {
  std::ostringstream os;
  for (CellId c = 0; c < size(); ++c) {
    os << c << " ->";
    bool first = true;
    for (const auto& r : successors(c)) {
      for (CellId d = r.first;; ++d) {
        os << (first ? " " : ",") << d;
        first = false;
        if (d == r.last) break;
      }
    }
    os << '\n';
  }
  return os.str();
}

TransitionGraph build_graph(const System& sys, const Grid& grid, double eps) {
  if (!(sys.domain() == grid.domain())) throw DomainError("grid domain differs from the system domain");
  if (!(eps >= kResolutionCoupling * grid.cell_diameter() * (1.0 - 1e-12))) {
    std::ostringstream os;
    os << "eps=" << eps << " is below " << kResolutionCoupling << " x cell diameter (" << grid.cell_diameter() << ")";
    throw ResolutionError(os.str());
  }
  const std::size_t n = grid.size();
  const unsigned workers = std::max(1u, std::min<unsigned>(worker_threads(), static_cast<unsigned>(n / 1024 + 1)));
  std::vector<std::vector<CellRun>> chunk_runs(workers);
  std::vector<std::vector<std::size_t>> chunk_counts(workers);

  auto work = [&](unsigned w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    auto& out = chunk_runs[w];
    auto& counts = chunk_counts[w];
    counts.reserve(hi - lo);
    for (std::size_t c = lo; c < hi; ++c) {
      const auto image = image_cell_runs(sys, grid, static_cast<CellId>(c));
      const auto succ = dilate(grid, image, eps);
      if (succ.empty()) throw PreconditionError("cell without successors; the map is not total on the grid");
      out.insert(out.end(), succ.begin(), succ.end());
      counts.push_back(succ.size());
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<std::size_t> offsets;
  offsets.reserve(n + 1);
  offsets.push_back(0);
  std::vector<CellRun> runs;
  std::size_t total = 0;
  for (const auto& r : chunk_runs) total += r.size();
  runs.reserve(total);
  for (unsigned w = 0; w < workers; ++w) {
    for (std::size_t k : chunk_counts[w]) offsets.push_back(offsets.back() + k);
    runs.insert(runs.end(), chunk_runs[w].begin(), chunk_runs[w].end());
  }
  return TransitionGraph(grid, eps, std::move(offsets), std::move(runs));
}

ReachTree forward_reach_tree(const TransitionGraph& g, const CellSet& start) {
  require_nonempty(start, "start set");
  require_graph_grid(g, start);
  const std::size_t n = g.size();
  ReachTree tree{CellSet(g.grid()), std::vector<CellId>(n, 0), {}};
  UnvisitedIndex unvisited(n);
  std::deque<CellId> queue;
  for (CellId c : start.members()) {
    tree.cells.insert(c);
    tree.parent[c] = c;
    tree.order.push_back(c);
    unvisited.mark(c);
    queue.push_back(c);
  }
  while (!queue.empty()) {
    const CellId c = queue.front();
    queue.pop_front();
    for (const auto& r : g.successors(c)) {
      for (CellId d = unvisited.find(r.first); d <= r.last; d = unvisited.find(d)) {
        tree.cells.insert(d);
        tree.parent[d] = c;
        tree.order.push_back(d);
        unvisited.mark(d);
        queue.push_back(d);
      }
    }
  }
  return tree;
}

std::vector<CellId> ReachTree::path_to(CellId target) const {
  if (!cells.contains(target)) throw PreconditionError("path target was not reached");
  std::vector<CellId> path{target};
  while (parent[path.back()] != path.back()) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

CellSet forward_reach(const TransitionGraph& g, const CellSet& start) { return forward_reach_tree(g, start).cells; }

CellSet backward_reach(const TransitionGraph& g, const CellSet& target) {
  require_nonempty(target, "target set");
  require_graph_grid(g, target);
  const std::size_t n = g.size();

  // Segment tree over destination ids; each successor run of source c is
  // registered at the canonical nodes covering it. A stabbing query at d
  // walks leaf-to-root and yields every source with an edge into d. Node
  // lists are consumed on first visit, so total work is O(runs log n).
  std::size_t leaves = 1;
  while (leaves < n) leaves <<= 1;
  std::vector<std::uint32_t> counts(2 * leaves + 1, 0);
  auto for_each_node = [&](const CellRun& r, auto&& fn) {
    std::size_t lo = r.first + leaves;
    std::size_t hi = r.last + leaves + 1;
    while (lo < hi) {
      if (lo & 1) fn(lo++);
      if (hi & 1) fn(--hi);
      lo >>= 1;
      hi >>= 1;
    }
  };
  for (CellId c = 0; c < n; ++c) {
    for (const auto& r : g.successors(c)) for_each_node(r, [&](std::size_t node) { ++counts[node + 1]; });
  }
  std::vector<std::size_t> start_of(2 * leaves + 1, 0);
  for (std::size_t i = 1; i < start_of.size(); ++i) start_of[i] = start_of[i - 1] + counts[i];
  std::vector<CellId> sources(start_of.back());
  std::vector<std::size_t> fill(start_of.begin(), start_of.end() - 1);
  for (CellId c = 0; c < n; ++c) {
    for (const auto& r : g.successors(c)) for_each_node(r, [&](std::size_t node) { sources[fill[node]++] = c; });
  }
  std::vector<bool> consumed(2 * leaves, false);

  CellSet reached(g.grid());
  std::deque<CellId> queue;
  for (CellId c : target.members()) {
    reached.insert(c);
    queue.push_back(c);
  }
  while (!queue.empty()) {
    const CellId d = queue.front();
    queue.pop_front();
    for (std::size_t node = d + leaves; node >= 1; node >>= 1) {
      if (consumed[node]) continue;
      consumed[node] = true;
      for (std::size_t k = start_of[node]; k < start_of[node + 1]; ++k) {
        const CellId c = sources[k];
        if (!reached.contains(c)) {
          reached.insert(c);
          queue.push_back(c);
        }
      }
    }
  }
  return reached;
}

CellSet step_image(const TransitionGraph& g, const CellSet& set) {
  require_graph_grid(g, set);
  const std::size_t n = g.size();
  std::vector<std::int32_t> delta(n + 1, 0);
  for (CellId c : set.members()) {
    for (const auto& r : g.successors(c)) {
      ++delta[r.first];
      --delta[static_cast<std::size_t>(r.last) + 1];
    }
  }
  CellSet out(g.grid());
  std::int64_t depth = 0;
  for (std::size_t i = 0; i < n; ++i) {
    depth += delta[i];
    if (depth > 0) out.insert(static_cast<CellId>(i));
  }
  return out;
}

std::vector<CellSet> recurrent_cells(const TransitionGraph& g) {
  // Iterative Tarjan, roots and edges visited in ascending id order.
  const std::size_t n = g.size();
  constexpr std::uint32_t kUnset = 0xffffffffu;
  std::vector<std::uint32_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<CellId> stack;
  struct Frame {
    CellId cell;
    std::size_t run;
    CellId next;  // next destination within the current run
  };
  std::vector<Frame> frames;
  std::vector<CellSet> components;
  std::uint32_t counter = 0;

  auto open = [&](CellId c) {
    index[c] = low[c] = counter++;
    stack.push_back(c);
    on_stack[c] = true;
    const auto succ = g.successors(c);
    frames.push_back({c, 0, succ.empty() ? 0 : succ[0].first});
  };

  for (CellId root = 0; root < n; ++root) {
    if (index[root] != kUnset) continue;
    open(root);
    while (!frames.empty()) {
      Frame& f = frames.back();
      const auto succ = g.successors(f.cell);
      bool descended = false;
      while (f.run < succ.size()) {
        const CellId d = f.next;
        if (d == succ[f.run].last) {
          ++f.run;
          if (f.run < succ.size()) f.next = succ[f.run].first;
        } else {
          ++f.next;
        }
        if (index[d] == kUnset) {
          open(d);
          descended = true;
          break;
        }
        if (on_stack[d]) low[f.cell] = std::min(low[f.cell], index[d]);
      }
      if (descended) continue;
      const CellId c = f.cell;
      frames.pop_back();
      if (!frames.empty()) {
        const CellId p = frames.back().cell;
        low[p] = std::min(low[p], low[c]);
      }
      if (low[c] == index[c]) {
        std::vector<CellId> members;
        CellId x;
        do {
          x = stack.back();
          stack.pop_back();
          on_stack[x] = false;
          members.push_back(x);
        } while (x != c);
        if (members.size() >= 2 || g.has_edge(c, c)) components.push_back(CellSet::of(g.grid(), members));
      }
    }
  }
  std::sort(components.begin(), components.end(),
            [](const CellSet& a, const CellSet& b) { return a.first() < b.first(); });
  return components;
}

}  // namespace chainscope
