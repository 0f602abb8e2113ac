#include "bvmc/symmetry.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <sstream>

#include "bvmc/error.hpp"

namespace bvmc {

int ColoredGraph::add_node(int color, NodeKind kind, int ref)
{
  colors_.push_back(color);
  kinds_.push_back(kind);
  refs_.push_back(ref);
  adj_.emplace_back();
  return static_cast<int>(colors_.size() - 1);
}

void ColoredGraph::add_edge(int u, int v)
{
  const auto n = static_cast<int>(size());
  if (u < 0 || v < 0 || u >= n || v >= n)
    throw Error("invalid_graph", "edge endpoint out of range");
  if (u == v)
    throw Error("invalid_graph", "self-loops are not allowed");
  auto &au = adj_[static_cast<std::size_t>(u)];
  auto it = std::lower_bound(au.begin(), au.end(), v);
  if (it != au.end() && *it == v)
    return;
  au.insert(it, v);
  auto &av = adj_[static_cast<std::size_t>(v)];
  av.insert(std::lower_bound(av.begin(), av.end(), u), u);
  ++num_edges_;
}

bool ColoredGraph::has_edge(int u, int v) const
{
  const auto &au = adj_[static_cast<std::size_t>(u)];
  return std::binary_search(au.begin(), au.end(), v);
}

std::vector<std::pair<int, int>> ColoredGraph::edges() const
{
  std::vector<std::pair<int, int>> out;
  out.reserve(num_edges_);
  for (std::size_t u = 0; u < adj_.size(); ++u)
    for (int v : adj_[u])
      if (static_cast<int>(u) < v)
        out.emplace_back(static_cast<int>(u), v);
  return out;
}

ColoredGraph build_bv_graph(const GraphicalModel &model, const BlockValueSet &values)
{
  if (!model.is_clausal())
    throw Error("not_normalized", "model must be normalized to OR clauses first");

  std::vector<double> distinct;
  for (const Feature &f : model.features())
    distinct.push_back(f.weight + 0.0);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  ColoredGraph g;
  const int hub_color = 0;
  const int bv_color = 1;
  for (std::size_t b = 0; b < values.num_blocks(); ++b)
    g.add_node(hub_color, NodeKind::Hub, static_cast<int>(b));
  const int first_bv = static_cast<int>(g.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int node = g.add_node(bv_color, NodeKind::BVNode, static_cast<int>(i));
    g.add_edge(values.block_of(static_cast<int>(i)), node);
  }
  for (std::size_t j = 0; j < model.features().size(); ++j) {
    const Feature &f = model.features()[j];
    auto rank = std::lower_bound(distinct.begin(), distinct.end(), f.weight + 0.0) - distinct.begin();
    int node = g.add_node(2 + static_cast<int>(rank), NodeKind::FeatureNode, static_cast<int>(j));
    // A BV pair satisfies the clause iff it satisfies one of the literals on
    // its own block's variables.
    for (const Literal &l : f.literals) {
      auto b = static_cast<std::size_t>(values.block_of_variable(l.var));
      const Block &block = values.block(b);
      auto slot = static_cast<std::size_t>(std::find(block.vars.begin(), block.vars.end(), l.var) - block.vars.begin());
      for (int k = 0; k < values.count(b); ++k) {
        int index = values.offset(b) + k;
        if (l.holds(values.values(index)[slot]))
          g.add_edge(first_bv + index, node);
      }
    }
  }
  return g;
}

bool BVSymmetry::is_identity() const
{
  for (std::size_t i = 0; i < image.size(); ++i)
    if (image[i] != static_cast<int>(i))
      return false;
  return true;
}

bool is_valid_bv_permutation(const BlockValueSet &values, const BVSymmetry &sym)
{
  if (sym.size() != values.size())
    return false;
  std::vector<bool> hit(values.size(), false);
  for (int x : sym.image) {
    if (x < 0 || static_cast<std::size_t>(x) >= values.size() || hit[static_cast<std::size_t>(x)])
      return false;
    hit[static_cast<std::size_t>(x)] = true;
  }
  for (std::size_t b = 0; b < values.num_blocks(); ++b) {
    int target = values.block_of(sym.image[static_cast<std::size_t>(values.offset(b))]);
    if (values.count(static_cast<std::size_t>(target)) != values.count(b))
      return false;
    for (int k = 0; k < values.count(b); ++k)
      if (values.block_of(sym.image[static_cast<std::size_t>(values.offset(b) + k)]) != target)
        return false;
  }
  return true;
}

std::vector<BVSymmetry> extract_bv_symmetries(const ColoredGraph &graph,
                                              std::span<const GraphAutomorphism> generators,
                                              const BlockValueSet &values)
{
  const int first_bv = static_cast<int>(values.num_blocks());
  std::vector<BVSymmetry> out;
  for (const GraphAutomorphism &gen : generators) {
    BVSymmetry sym;
    sym.image.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      int node = gen.image[static_cast<std::size_t>(first_bv) + i];
      if (graph.kind(node) != NodeKind::BVNode)
        throw Error("invalid_symmetry", "automorphism maps a BV node outside the BV nodes");
      sym.image[i] = graph.ref(node);
    }
    for (std::size_t b = 0; b < values.num_blocks(); ++b) {
      int hub_image = gen.image[b];
      if (graph.kind(hub_image) != NodeKind::Hub)
        throw Error("invalid_symmetry", "automorphism maps a hub outside the hubs");
      int target = graph.ref(hub_image);
      for (int k = 0; k < values.count(b); ++k)
        if (values.block_of(sym.image[static_cast<std::size_t>(values.offset(b) + k)]) != target)
          throw Error("invalid_symmetry", "BV node image does not follow its hub's image");
    }
    if (!is_valid_bv_permutation(values, sym))
      throw Error("invalid_symmetry", "restriction is not a valid BV permutation");
    if (!sym.is_identity())
      out.push_back(std::move(sym));
  }
  return out;
}

std::string export_colored_graph(const ColoredGraph &graph)
{
  std::ostringstream out;
  out << "p " << graph.size() << ' ' << graph.num_edges() << '\n';
  for (std::size_t v = 0; v < graph.size(); ++v)
    out << "c " << v << ' ' << graph.color(static_cast<int>(v)) << '\n';
  for (auto [u, v] : graph.edges())
    out << "e " << u << ' ' << v << '\n';
  return out.str();
}

namespace {

std::vector<long long> parse_ints(std::string_view line, char tag, std::size_t expected)
{
  std::vector<long long> out;
  std::size_t i = 1;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i >= line.size())
      break;
    long long x = 0;
    auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), x);
    if (ec != std::errc())
      throw Error("parse_error", std::string("malformed '") + tag + "' line");
    i = static_cast<std::size_t>(ptr - line.data());
    out.push_back(x);
  }
  if (out.size() != expected)
    throw Error("parse_error", std::string("malformed '") + tag + "' line");
  return out;
}

} // namespace

ColoredGraph parse_colored_graph(std::string_view text)
{
  ColoredGraph g;
  long long n = -1, m = 0;
  std::vector<long long> colors;
  std::vector<std::pair<long long, long long>> edges;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.remove_suffix(1);
    if (line.empty())
      continue;
    char tag = line[0];
    if (tag == 'p') {
      auto v = parse_ints(line, tag, 2);
      n = v[0];
      m = v[1];
      if (n < 0 || m < 0)
        throw Error("parse_error", "negative graph size");
      colors.assign(static_cast<std::size_t>(n), -1);
    } else if (tag == 'c') {
      auto v = parse_ints(line, tag, 2);
      if (v[0] < 0 || v[0] >= n)
        throw Error("parse_error", "color line before header or node out of range");
      colors[static_cast<std::size_t>(v[0])] = v[1];
    } else if (tag == 'e') {
      auto v = parse_ints(line, tag, 2);
      edges.emplace_back(v[0], v[1]);
    } else {
      throw Error("parse_error", std::string("unknown line tag '") + tag + "'");
    }
  }
  if (n < 0)
    throw Error("parse_error", "missing 'p' header");
  for (long long c : colors) {
    if (c < 0)
      throw Error("parse_error", "node without color");
    g.add_node(static_cast<int>(c));
  }
  for (auto [u, v] : edges)
    g.add_edge(static_cast<int>(u), static_cast<int>(v));
  if (static_cast<long long>(g.num_edges()) != m)
    throw Error("parse_error", "edge count does not match header");
  return g;
}

std::string format_cycles(const BVSymmetry &sym)
{
  std::string out;
  std::vector<bool> seen(sym.size(), false);
  for (std::size_t i = 0; i < sym.size(); ++i) {
    if (seen[i] || sym.image[i] == static_cast<int>(i))
      continue;
    out += '(';
    std::size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = true;
      if (!first)
        out += ' ';
      out += std::to_string(j);
      first = false;
      j = static_cast<std::size_t>(sym.image[j]);
    }
    out += ')';
  }
  return out.empty() ? "()" : out;
}

std::string format_symmetries(std::string_view partition_hash, std::span<const BVSymmetry> generators)
{
  std::string out = "bvsym " + std::string(partition_hash) + "\n";
  for (const BVSymmetry &g : generators)
    out += format_cycles(g) + "\n";
  return out;
}

SymmetryFile parse_symmetries(std::string_view text, std::size_t domain_size)
{
  SymmetryFile file;
  bool header = false;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
      line.remove_suffix(1);
    if (line.empty())
      continue;
    if (!header) {
      if (line.substr(0, 6) != "bvsym ")
        throw Error("parse_error", "symmetry file must start with 'bvsym <hash>'");
      file.partition_hash = std::string(line.substr(6));
      header = true;
      continue;
    }
    BVSymmetry sym;
    sym.image.resize(domain_size);
    for (std::size_t i = 0; i < domain_size; ++i)
      sym.image[i] = static_cast<int>(i);
    std::vector<bool> moved(domain_size, false);
    std::size_t i = 0;
    while (i < line.size()) {
      if (std::isspace(static_cast<unsigned char>(line[i]))) {
        ++i;
        continue;
      }
      if (line[i] != '(')
        throw Error("parse_error", "expected '(' in cycle notation");
      auto close = line.find(')', i);
      if (close == std::string_view::npos)
        throw Error("parse_error", "unterminated cycle");
      std::string_view body = line.substr(i + 1, close - i - 1);
      std::vector<int> cycle;
      std::size_t k = 0;
      while (k < body.size()) {
        if (std::isspace(static_cast<unsigned char>(body[k]))) {
          ++k;
          continue;
        }
        int x = 0;
        auto [ptr, ec] = std::from_chars(body.data() + k, body.data() + body.size(), x);
        if (ec != std::errc() || x < 0 || static_cast<std::size_t>(x) >= domain_size)
          throw Error("parse_error", "cycle element out of range");
        if (moved[static_cast<std::size_t>(x)])
          throw Error("parse_error", "element appears in two cycles");
        moved[static_cast<std::size_t>(x)] = true;
        cycle.push_back(x);
        k = static_cast<std::size_t>(ptr - body.data());
      }
      for (std::size_t c = 0; c < cycle.size(); ++c)
        sym.image[static_cast<std::size_t>(cycle[c])] = cycle[(c + 1) % cycle.size()];
      i = close + 1;
    }
    file.generators.push_back(std::move(sym));
  }
  if (!header)
    throw Error("parse_error", "symmetry file must start with 'bvsym <hash>'");
  return file;
}

BVSymmetries compute_bv_symmetries(const GraphicalModel &model, const BlockPartition &partition,
                                   const AutomorphismOptions &options)
{
  BVSymmetries out;
  auto values = std::make_shared<const BlockValueSet>(model, partition);
  ColoredGraph graph = build_bv_graph(model, *values);
  auto autos = find_automorphism_generators(graph, options);
  out.generators = extract_bv_symmetries(graph, autos, *values);
  out.graph_nodes = graph.size();
  out.graph_edges = graph.num_edges();
  out.values = std::move(values);
  return out;
}

} // namespace bvmc
