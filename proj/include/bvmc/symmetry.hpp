#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bvmc/model.hpp"
#include "bvmc/partition.hpp"

namespace bvmc {

enum class NodeKind { Plain, Hub, BVNode, FeatureNode };

// Undirected vertex-colored graph with sorted adjacency lists.
class ColoredGraph
{
public:
  ColoredGraph() = default;

  // `ref` links the node back to the block, BV pair or feature it stands for.
  int add_node(int color, NodeKind kind = NodeKind::Plain, int ref = -1);

  // Rejects self-loops; a repeated edge is ignored.
  void add_edge(int u, int v);

  std::size_t size() const { return colors_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  int color(int v) const { return colors_[static_cast<std::size_t>(v)]; }
  NodeKind kind(int v) const { return kinds_[static_cast<std::size_t>(v)]; }
  int ref(int v) const { return refs_[static_cast<std::size_t>(v)]; }
  std::span<const int> neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
  bool has_edge(int u, int v) const;

  // Every edge once as (u, v) with u < v, sorted.
  std::vector<std::pair<int, int>> edges() const;

  // Equality on colors and edges; node kinds are bookkeeping only.
  friend bool operator==(const ColoredGraph &a, const ColoredGraph &b)
  {
    return a.colors_ == b.colors_ && a.adj_ == b.adj_;
  }

private:
  std::vector<int> colors_;
  std::vector<NodeKind> kinds_;
  std::vector<int> refs_;
  std::vector<std::vector<int>> adj_;
  std::size_t num_edges_ = 0;
};

// Nodes in order: one hub per block, one node per BV pair (block value set
// order), one node per clause. Colors: 0 for hubs, 1 for BV nodes, 2 + rank of
// the clause weight among the distinct weights. A BV node is joined to a clause
// iff the partial assignment satisfies one of the clause's literals.
ColoredGraph build_bv_graph(const GraphicalModel &model, const BlockValueSet &values);

struct GraphAutomorphism
{
  std::vector<int> image;

  friend bool operator==(const GraphAutomorphism &, const GraphAutomorphism &) = default;
};

bool is_automorphism(const ColoredGraph &graph, std::span<const int> perm);

struct AutomorphismOptions
{
  // Search tree nodes (refinement calls) before giving up with "search_budget".
  std::uint64_t node_budget = 50'000'000;
};

// Generators of the full color-preserving automorphism group, found by
// individualization-refinement with orbit pruning. Each generator is checked
// with is_automorphism before it is returned.
std::vector<GraphAutomorphism> find_automorphism_generators(const ColoredGraph &graph,
                                                            const AutomorphismOptions &options = {});

// Bijection on block value set indices, stored densely.
struct BVSymmetry
{
  std::vector<int> image;

  std::size_t size() const { return image.size(); }
  bool is_identity() const;

  friend bool operator==(const BVSymmetry &, const BVSymmetry &) = default;
  friend auto operator<=>(const BVSymmetry &, const BVSymmetry &) = default;
};

// True when `sym` is a bijection mapping all pairs of each block onto the
// pairs of a single block with the same number of assignments.
bool is_valid_bv_permutation(const BlockValueSet &values, const BVSymmetry &sym);

// Restricts graph automorphisms to the BV nodes. Throws
// Error("invalid_symmetry") when a restriction is not a valid BV permutation.
// Identity restrictions are dropped.
std::vector<BVSymmetry> extract_bv_symmetries(const ColoredGraph &graph,
                                              std::span<const GraphAutomorphism> generators,
                                              const BlockValueSet &values);

// Line format: `p <n> <m>`, then `c <node> <color>` per node and `e <u> <v>`
// per edge with u < v.
std::string export_colored_graph(const ColoredGraph &graph);
ColoredGraph parse_colored_graph(std::string_view text);

// Symmetry file: `bvsym <partition-hash>` then one generator per line in
// cycle notation over block value set indices.
std::string format_symmetries(std::string_view partition_hash, std::span<const BVSymmetry> generators);

struct SymmetryFile
{
  std::string partition_hash;
  std::vector<BVSymmetry> generators;
};

SymmetryFile parse_symmetries(std::string_view text, std::size_t domain_size);

std::string format_cycles(const BVSymmetry &sym);

struct BVSymmetries
{
  std::shared_ptr<const BlockValueSet> values;
  std::vector<BVSymmetry> generators;
  std::size_t graph_nodes = 0;
  std::size_t graph_edges = 0;
};

// Graph construction, automorphism search and extraction for one partition.
// The model must be clausal.
BVSymmetries compute_bv_symmetries(const GraphicalModel &model, const BlockPartition &partition,
                                   const AutomorphismOptions &options = {});

} // namespace bvmc
