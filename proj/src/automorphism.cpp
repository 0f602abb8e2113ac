#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <optional>

#include "bvmc/error.hpp"
#include "bvmc/symmetry.hpp"

namespace bvmc {

bool is_automorphism(const ColoredGraph &graph, std::span<const int> perm)
{
  const std::size_t n = graph.size();
  if (perm.size() != n)
    return false;
  std::vector<bool> hit(n, false);
  for (int x : perm) {
    if (x < 0 || static_cast<std::size_t>(x) >= n || hit[static_cast<std::size_t>(x)])
      return false;
    hit[static_cast<std::size_t>(x)] = true;
  }
  for (std::size_t v = 0; v < n; ++v) {
    int pv = perm[v];
    if (graph.color(static_cast<int>(v)) != graph.color(pv))
      return false;
    if (graph.neighbors(static_cast<int>(v)).size() != graph.neighbors(pv).size())
      return false;
    for (int w : graph.neighbors(static_cast<int>(v)))
      if (!graph.has_edge(pv, perm[static_cast<std::size_t>(w)]))
        return false;
  }
  return true;
}

namespace {

// Ordered partition of the vertex set. Cells are contiguous ranges of
// `elems`; a cell is named by its start position.
struct OrderedPartition
{
  std::vector<int> elems;
  std::vector<int> pos;
  std::vector<int> cell_of;
  std::vector<int> cell_len;
  std::size_t num_cells = 0;

  bool discrete() const { return num_cells == elems.size(); }

  int first_nonsingleton() const
  {
    for (std::size_t s = 0; s < elems.size(); s += static_cast<std::size_t>(cell_len[s]))
      if (cell_len[s] > 1)
        return static_cast<int>(s);
    return -1;
  }

  std::vector<int> cell_starts() const
  {
    std::vector<int> out;
    for (std::size_t s = 0; s < elems.size(); s += static_cast<std::size_t>(cell_len[s]))
      out.push_back(static_cast<int>(s));
    return out;
  }

  // Splits `v` off the front of its cell; returns the start of the new singleton.
  int individualize(int v)
  {
    int c = cell_of[static_cast<std::size_t>(v)];
    int len = cell_len[static_cast<std::size_t>(c)];
    int p = pos[static_cast<std::size_t>(v)];
    int first = elems[static_cast<std::size_t>(c)];
    std::swap(elems[static_cast<std::size_t>(c)], elems[static_cast<std::size_t>(p)]);
    pos[static_cast<std::size_t>(v)] = c;
    pos[static_cast<std::size_t>(first)] = p;
    cell_len[static_cast<std::size_t>(c)] = 1;
    cell_len[static_cast<std::size_t>(c + 1)] = len - 1;
    for (int i = c + 1; i < c + len; ++i)
      cell_of[static_cast<std::size_t>(elems[static_cast<std::size_t>(i)])] = c + 1;
    ++num_cells;
    return c;
  }
};

std::uint64_t mix(std::uint64_t h, std::uint64_t x)
{
  h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

class Refiner
{
public:
  explicit Refiner(const ColoredGraph &g)
    : g_(g), count_(g.size(), 0), marked_(g.size(), false), queued_(g.size(), false)
  {}

  OrderedPartition initial() const
  {
    const std::size_t n = g_.size();
    OrderedPartition p;
    p.elems.resize(n);
    std::iota(p.elems.begin(), p.elems.end(), 0);
    std::stable_sort(p.elems.begin(), p.elems.end(),
                     [&](int a, int b) { return g_.color(a) < g_.color(b); });
    p.pos.resize(n);
    p.cell_of.resize(n);
    p.cell_len.assign(n, 0);
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p.pos[static_cast<std::size_t>(p.elems[i])] = static_cast<int>(i);
      if (i > 0 && g_.color(p.elems[i]) != g_.color(p.elems[i - 1])) {
        p.cell_len[start] = static_cast<int>(i - start);
        start = i;
        ++p.num_cells;
      }
      p.cell_of[static_cast<std::size_t>(p.elems[i])] = static_cast<int>(start);
    }
    if (n > 0) {
      p.cell_len[start] = static_cast<int>(n - start);
      ++p.num_cells;
    }
    return p;
  }

  // Refines `p` to the coarsest equitable partition finer than it, starting
  // from the given splitter cells. The returned trace depends only on cell
  // positions and neighbor counts, so isomorphic inputs give equal traces.
  std::uint64_t refine(OrderedPartition &p, const std::vector<int> &splitters)
  {
    std::uint64_t trace = 0x51ed270b27a3c1d5ULL;
    std::deque<int> queue;
    for (int s : splitters) {
      queue.push_back(s);
      queued_[static_cast<std::size_t>(s)] = true;
    }

    std::vector<int> splitter;
    std::vector<int> touched;
    std::vector<int> cells;
    while (!queue.empty() && !p.discrete()) {
      int s = queue.front();
      queue.pop_front();
      queued_[static_cast<std::size_t>(s)] = false;

      splitter.assign(p.elems.begin() + s, p.elems.begin() + s + p.cell_len[static_cast<std::size_t>(s)]);
      for (int u : splitter)
        for (int w : g_.neighbors(u)) {
          if (count_[static_cast<std::size_t>(w)]++ == 0)
            touched.push_back(w);
        }
      for (int w : touched) {
        int c = p.cell_of[static_cast<std::size_t>(w)];
        if (!marked_[static_cast<std::size_t>(c)]) {
          marked_[static_cast<std::size_t>(c)] = true;
          cells.push_back(c);
        }
      }
      std::sort(cells.begin(), cells.end());
      trace = mix(trace, static_cast<std::uint64_t>(s));

      for (int c : cells) {
        marked_[static_cast<std::size_t>(c)] = false;
        int len = p.cell_len[static_cast<std::size_t>(c)];
        if (len == 1) {
          trace = mix(trace, static_cast<std::uint64_t>(count_[static_cast<std::size_t>(p.elems[static_cast<std::size_t>(c)])]));
          continue;
        }
        auto first = p.elems.begin() + c;
        auto last = first + len;
        auto by_count = [&](int a, int b) {
          return count_[static_cast<std::size_t>(a)] < count_[static_cast<std::size_t>(b)];
        };
        auto [lo, hi] = std::minmax_element(first, last, by_count);
        if (count_[static_cast<std::size_t>(*lo)] == count_[static_cast<std::size_t>(*hi)]) {
          trace = mix(trace, static_cast<std::uint64_t>(count_[static_cast<std::size_t>(*lo)]));
          continue;
        }
        std::sort(first, last, by_count);

        std::vector<std::pair<int, int>> fragments; // (start, length)
        int f = c;
        for (int i = c; i < c + len; ++i) {
          int v = p.elems[static_cast<std::size_t>(i)];
          p.pos[static_cast<std::size_t>(v)] = i;
          if (i > c && count_[static_cast<std::size_t>(v)] !=
                           count_[static_cast<std::size_t>(p.elems[static_cast<std::size_t>(i - 1)])]) {
            fragments.emplace_back(f, i - f);
            f = i;
          }
          p.cell_of[static_cast<std::size_t>(v)] = f;
        }
        fragments.emplace_back(f, c + len - f);
        p.num_cells += fragments.size() - 1;

        std::size_t largest = 0;
        for (std::size_t k = 0; k < fragments.size(); ++k) {
          auto [fs, fl] = fragments[k];
          p.cell_len[static_cast<std::size_t>(fs)] = fl;
          trace = mix(trace, (static_cast<std::uint64_t>(fl) << 32) |
                                 static_cast<std::uint64_t>(count_[static_cast<std::size_t>(p.elems[static_cast<std::size_t>(fs)])]));
          if (fl > fragments[largest].second)
            largest = k;
        }
        const bool was_queued = queued_[static_cast<std::size_t>(c)];
        for (std::size_t k = 0; k < fragments.size(); ++k) {
          int fs = fragments[k].first;
          if (queued_[static_cast<std::size_t>(fs)])
            continue;
          if (!was_queued && k == largest)
            continue;
          queued_[static_cast<std::size_t>(fs)] = true;
          queue.push_back(fs);
        }
      }

      for (int w : touched)
        count_[static_cast<std::size_t>(w)] = 0;
      touched.clear();
      cells.clear();
    }
    for (int s : queue)
      queued_[static_cast<std::size_t>(s)] = false;
    return mix(trace, p.num_cells);
  }

private:
  const ColoredGraph &g_;
  std::vector<int> count_;
  std::vector<bool> marked_;
  std::vector<bool> queued_;
};

struct UnionFind
{
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x)
  {
    while (parent[static_cast<std::size_t>(x)] != x)
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  }
  void unite(int a, int b)
  {
    a = find(a);
    b = find(b);
    if (a != b)
      parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

class Search
{
public:
  Search(const ColoredGraph &g, const AutomorphismOptions &options)
    : g_(g), refiner_(g), budget_(options.node_budget)
  {}

  std::vector<GraphAutomorphism> run()
  {
    if (g_.size() == 0)
      return {};

    OrderedPartition root = refiner_.initial();
    std::uint64_t trace = refine(root, root.cell_starts());
    path_.push_back(Level{root, trace, -1});
    while (!path_.back().part.discrete()) {
      Level &top = path_.back();
      top.target = top.part.first_nonsingleton();
      OrderedPartition child = top.part;
      int base = child.elems[static_cast<std::size_t>(top.target)];
      int cell = child.individualize(base);
      std::uint64_t t = refine(child, {cell});
      path_.push_back(Level{std::move(child), t, -1});
    }
    leaf_ = path_.back().part.elems;

    for (std::size_t level = path_.size() - 1; level-- > 0;) {
      const Level &lv = path_[level];
      const int base = path_[level + 1].part.elems[static_cast<std::size_t>(lv.target)];
      UnionFind orbits(g_.size());
      for (const auto &gen : generators_)
        for (std::size_t v = 0; v < g_.size(); ++v)
          orbits.unite(static_cast<int>(v), gen.image[v]);

      std::vector<int> failed;
      const int len = lv.part.cell_len[static_cast<std::size_t>(lv.target)];
      for (int i = 0; i < len; ++i) {
        int v = lv.part.elems[static_cast<std::size_t>(lv.target + i)];
        if (orbits.find(v) == orbits.find(base))
          continue;
        if (std::any_of(failed.begin(), failed.end(),
                        [&](int f) { return orbits.find(f) == orbits.find(v); }))
          continue;
        OrderedPartition child = lv.part;
        int cell = child.individualize(v);
        std::uint64_t t = refine(child, {cell});
        std::optional<std::vector<int>> found;
        if (t == path_[level + 1].trace)
          found = descend(child, level + 1);
        if (!found) {
          failed.push_back(v);
          continue;
        }
        generators_.push_back(GraphAutomorphism{std::move(*found)});
        for (std::size_t x = 0; x < g_.size(); ++x)
          orbits.unite(static_cast<int>(x), generators_.back().image[x]);
      }
    }
    return std::move(generators_);
  }

private:
  struct Level
  {
    OrderedPartition part;
    std::uint64_t trace;
    int target;
  };

  std::uint64_t refine(OrderedPartition &p, const std::vector<int> &splitters)
  {
    if (++nodes_ > budget_)
      throw Error("search_budget", "automorphism search exceeded its node budget of " + std::to_string(budget_));
    return refiner_.refine(p, splitters);
  }

  // Depth-first search below a node that matched the first path's trace at
  // `level`, looking for a leaf equivalent to the first leaf.
  std::optional<std::vector<int>> descend(const OrderedPartition &p, std::size_t level)
  {
    if (p.discrete()) {
      std::vector<int> perm(g_.size());
      for (std::size_t k = 0; k < leaf_.size(); ++k)
        perm[static_cast<std::size_t>(leaf_[k])] = p.elems[k];
      if (is_automorphism(g_, perm))
        return perm;
      return std::nullopt;
    }
    const int target = path_[level].target;
    if (target < 0 || p.cell_len[static_cast<std::size_t>(target)] !=
                          path_[level].part.cell_len[static_cast<std::size_t>(target)])
      return std::nullopt;
    const int len = p.cell_len[static_cast<std::size_t>(target)];
    const std::vector<int> candidates(p.elems.begin() + target, p.elems.begin() + target + len);
    for (int v : candidates) {
      OrderedPartition child = p;
      int cell = child.individualize(v);
      if (refine(child, {cell}) != path_[level + 1].trace)
        continue;
      if (auto found = descend(child, level + 1))
        return found;
    }
    return std::nullopt;
  }

  const ColoredGraph &g_;
  Refiner refiner_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<Level> path_;
  std::vector<int> leaf_;
  std::vector<GraphAutomorphism> generators_;
};

} // namespace

std::vector<GraphAutomorphism> find_automorphism_generators(const ColoredGraph &graph,
                                                            const AutomorphismOptions &options)
{
  auto gens = Search(graph, options).run();
  for (const auto &gen : gens)
    if (!is_automorphism(graph, gen.image))
      throw Error("internal", "automorphism search produced a non-automorphism");
  return gens;
}

} // namespace bvmc
