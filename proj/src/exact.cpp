#include <cmath>
#include <numeric>

#include "bvmc/error.hpp"
#include "bvmc/model.hpp"

namespace bvmc {

std::vector<int> free_variables(const GraphicalModel &model, const Evidence &evidence)
{
  std::vector<int> kept;
  for (const Variable &v : model.variables())
    if (!evidence.count(v.id))
      kept.push_back(v.id);
  return kept;
}

GraphicalModel condition(const GraphicalModel &model, const Evidence &evidence)
{
  validate_evidence(model, evidence);

  std::vector<int> remap(model.num_variables(), -1);
  GraphicalModel out;
  for (const Variable &v : model.variables())
    if (!evidence.count(v.id))
      remap[static_cast<std::size_t>(v.id)] = out.add_variable(v.name, v.domain_size);
  out.add_offset(model.log_offset());

  for (const Feature &f : model.features()) {
    const bool is_or = f.connective == Connective::Or;
    bool decided = false;
    Feature reduced{f.connective, {}, f.weight};
    for (const Literal &l : f.literals) {
      auto ev = evidence.find(l.var);
      if (ev == evidence.end()) {
        reduced.literals.push_back(Literal{remap[static_cast<std::size_t>(l.var)], l.value, l.equals});
        continue;
      }
      // An OR short-circuits on a true literal, an AND on a false one.
      if (l.holds(ev->second) == is_or) {
        decided = true;
        break;
      }
    }
    if (decided) {
      if (is_or)
        out.add_offset(f.weight);
      continue;
    }
    if (reduced.literals.empty()) {
      // Every literal was evidence and none short-circuited.
      if (!is_or)
        out.add_offset(f.weight);
      continue;
    }
    out.add_feature(std::move(reduced));
  }
  return out;
}

namespace {

struct DisjointSets
{
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x)
  {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Enumerates the joint states of one component and accumulates unnormalized
// marginals with a running max for numerical stability.
void enumerate_component(const GraphicalModel &model, const std::vector<int> &vars,
                         const std::vector<const Feature *> &features,
                         std::vector<std::vector<double>> &probs)
{
  State state(model.num_variables(), 0);
  std::vector<std::vector<double>> acc;
  for (int v : vars)
    acc.emplace_back(static_cast<std::size_t>(model.domain_size(v)), 0.0);
  double z = 0.0;
  double max_lw = -INFINITY;

  while (true) {
    double lw = 0.0;
    for (const Feature *f : features)
      if (f->satisfied(state))
        lw += f->weight;
    if (lw > max_lw) {
      double scale = std::isinf(max_lw) ? 0.0 : std::exp(max_lw - lw);
      z *= scale;
      for (auto &row : acc)
        for (double &x : row)
          x *= scale;
      max_lw = lw;
    }
    double p = std::exp(lw - max_lw);
    z += p;
    for (std::size_t i = 0; i < vars.size(); ++i)
      acc[i][static_cast<std::size_t>(state[static_cast<std::size_t>(vars[i])])] += p;

    std::size_t k = 0;
    for (; k < vars.size(); ++k) {
      int &x = state[static_cast<std::size_t>(vars[k])];
      if (++x < model.domain_size(vars[k]))
        break;
      x = 0;
    }
    if (k == vars.size())
      break;
  }

  for (std::size_t i = 0; i < vars.size(); ++i) {
    auto &row = probs[static_cast<std::size_t>(vars[i])];
    for (std::size_t v = 0; v < row.size(); ++v)
      row[v] = acc[i][v] / z;
  }
}

} // namespace

MarginalEstimate exact_marginals(const GraphicalModel &model, const Evidence &evidence,
                                 std::uint64_t cap)
{
  GraphicalModel reduced = condition(model, evidence);
  const std::size_t n = reduced.num_variables();

  DisjointSets sets(n);
  for (const Feature &f : reduced.features())
    for (const Literal &l : f.literals)
      sets.unite(l.var, f.literals.front().var);

  std::vector<std::vector<int>> members(n);
  for (std::size_t v = 0; v < n; ++v)
    members[static_cast<std::size_t>(sets.find(static_cast<int>(v)))].push_back(static_cast<int>(v));
  std::vector<std::vector<const Feature *>> component_features(n);
  for (const Feature &f : reduced.features())
    component_features[static_cast<std::size_t>(sets.find(f.literals.front().var))].push_back(&f);

  for (const auto &vars : members) {
    std::uint64_t count = 1;
    for (int v : vars) {
      auto d = static_cast<std::uint64_t>(reduced.domain_size(v));
      if (count > cap / d)
        throw Error("cap_exceeded", "joint state space of a connected component exceeds the cap of " +
                                        std::to_string(cap));
      count *= d;
    }
  }

  std::vector<std::vector<double>> reduced_probs(n);
  for (std::size_t v = 0; v < n; ++v)
    reduced_probs[v].assign(static_cast<std::size_t>(reduced.domain_size(static_cast<int>(v))), 0.0);
  for (std::size_t root = 0; root < n; ++root)
    if (!members[root].empty())
      enumerate_component(reduced, members[root], component_features[root], reduced_probs);

  MarginalEstimate out;
  out.probs.resize(model.num_variables());
  std::size_t next = 0;
  for (const Variable &v : model.variables()) {
    auto &row = out.probs[static_cast<std::size_t>(v.id)];
    if (auto ev = evidence.find(v.id); ev != evidence.end()) {
      row.assign(static_cast<std::size_t>(v.domain_size), 0.0);
      row[static_cast<std::size_t>(ev->second)] = 1.0;
    } else {
      row = std::move(reduced_probs[next++]);
    }
  }
  return out;
}

} // namespace bvmc
