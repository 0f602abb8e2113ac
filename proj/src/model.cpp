#include "bvmc/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>

#include "bvmc/error.hpp"

namespace bvmc {

bool Feature::satisfied(std::span<const int> state) const
{
  if (connective == Connective::Or) {
    return std::any_of(literals.begin(), literals.end(), [&](const Literal &l) {
      return l.holds(state[static_cast<std::size_t>(l.var)]);
    });
  }
  return std::all_of(literals.begin(), literals.end(), [&](const Literal &l) {
    return l.holds(state[static_cast<std::size_t>(l.var)]);
  });
}

int GraphicalModel::add_variable(std::string name, int domain_size)
{
  if (name.empty())
    throw Error("invalid_model", "variable name must be non-empty");
  if (domain_size < 2)
    throw Error("invalid_model", "variable '" + name + "' needs a domain of at least 2 values");
  if (by_name_.count(name))
    throw Error("duplicate_variable", "variable '" + name + "' declared twice");

  int id = static_cast<int>(variables_.size());
  by_name_.emplace(name, id);
  variables_.push_back(Variable{id, std::move(name), domain_size});
  return id;
}

void GraphicalModel::add_feature(Feature feature)
{
  if (feature.literals.empty())
    throw Error("empty_feature", "feature has no literals");
  if (!std::isfinite(feature.weight))
    throw Error("invalid_model", "feature weight must be finite");

  std::set<Literal> seen;
  for (const Literal &l : feature.literals) {
    if (l.var < 0 || static_cast<std::size_t>(l.var) >= variables_.size())
      throw Error("unknown_variable", "literal references variable id " + std::to_string(l.var));
    if (l.value < 0 || l.value >= domain_size(l.var))
      throw Error("value_out_of_domain",
                  "value " + std::to_string(l.value) + " out of domain for '" + name(l.var) + "'");
    if (!seen.insert(l).second)
      throw Error("duplicate_literal", "literal on '" + name(l.var) + "' repeated in feature");
  }
  features_.push_back(std::move(feature));
}

std::optional<int> GraphicalModel::find(std::string_view name) const
{
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end())
    return std::nullopt;
  return it->second;
}

bool GraphicalModel::is_clausal() const
{
  return std::all_of(features_.begin(), features_.end(),
                     [](const Feature &f) { return f.connective == Connective::Or; });
}

std::optional<std::uint64_t> GraphicalModel::state_count(std::uint64_t cap) const
{
  std::uint64_t count = 1;
  for (const Variable &v : variables_) {
    auto d = static_cast<std::uint64_t>(v.domain_size);
    if (count > cap / d)
      return std::nullopt;
    count *= d;
  }
  if (count > cap)
    return std::nullopt;
  return count;
}

MarginalEstimate MarginalEstimate::zeros(const GraphicalModel &model)
{
  MarginalEstimate m;
  for (const Variable &v : model.variables()) {
    m.probs.emplace_back(static_cast<std::size_t>(v.domain_size), 0.0);
    m.counts.emplace_back(static_cast<std::size_t>(v.domain_size), 0);
  }
  return m;
}

void MarginalEstimate::add_sample(std::span<const int> state)
{
  for (std::size_t i = 0; i < state.size(); ++i)
    ++counts[i][static_cast<std::size_t>(state[i])];
  ++samples;
}

void MarginalEstimate::merge(const MarginalEstimate &other)
{
  if (other.counts.size() != counts.size())
    throw Error("shape_mismatch", "cannot merge marginal estimates of different shapes");
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (other.counts[i].size() != counts[i].size())
      throw Error("shape_mismatch", "cannot merge marginal estimates of different shapes");
    for (std::size_t v = 0; v < counts[i].size(); ++v)
      counts[i][v] += other.counts[i][v];
  }
  samples += other.samples;
  normalize();
}

void MarginalEstimate::normalize()
{
  probs.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    probs[i].assign(counts[i].size(), 0.0);
    if (samples == 0)
      continue;
    for (std::size_t v = 0; v < counts[i].size(); ++v)
      probs[i][v] = static_cast<double>(counts[i][v]) / static_cast<double>(samples);
  }
}

std::uint64_t default_state_cap()
{
  if (const char *env = std::getenv("BVMC_STATE_CAP")) {
    std::uint64_t cap = 0;
    std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), cap);
    if (ec == std::errc() && ptr == text.data() + text.size() && cap > 0)
      return cap;
  }
  return kDefaultStateCap;
}

std::string format_weight(double w)
{
  if (w == 0.0)
    w = 0.0;
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, w);
  return std::string(buf, ptr);
}

double parse_real(std::string_view text)
{
  if (!text.empty() && text.front() == '+')
    text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw Error("parse_error", "expected a real number, got '" + std::string(text) + "'");
  return value;
}

namespace {

Literal negate(const Literal &l, int domain_size)
{
  if (l.equals) {
    if (domain_size == 2)
      return Literal{l.var, 1 - l.value, true};
    return Literal{l.var, l.value, false};
  }
  return Literal{l.var, l.value, true};
}

} // namespace

GraphicalModel normalize_to_clauses(const GraphicalModel &model)
{
  GraphicalModel out;
  for (const Variable &v : model.variables())
    out.add_variable(v.name, v.domain_size);
  out.add_offset(model.log_offset());

  for (const Feature &f : model.features()) {
    if (f.connective == Connective::Or) {
      out.add_feature(f);
      continue;
    }
    Feature clause;
    clause.connective = Connective::Or;
    clause.weight = -f.weight + 0.0;
    for (const Literal &l : f.literals) {
      Literal n = negate(l, model.domain_size(l.var));
      if (std::find(clause.literals.begin(), clause.literals.end(), n) == clause.literals.end())
        clause.literals.push_back(n);
    }
    out.add_offset(f.weight);
    out.add_feature(std::move(clause));
  }
  return out;
}

double log_weight(const GraphicalModel &model, std::span<const int> state)
{
  if (state.size() != model.num_variables())
    throw Error("shape_mismatch", "state dimension does not match the model");
  double total = model.log_offset();
  for (const Feature &f : model.features())
    if (f.satisfied(state))
      total += f.weight;
  return total;
}

} // namespace bvmc
