#include <cctype>
#include <charconv>
#include <sstream>

#include "bvmc/error.hpp"
#include "bvmc/model.hpp"

namespace bvmc {

namespace {

std::vector<std::string_view> tokenize(std::string_view line)
{
  if (auto hash = line.find('#'); hash != std::string_view::npos)
    line = line.substr(0, hash);
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start)
      tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn &&fn)
{
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    auto tokens = tokenize(line);
    if (tokens.empty())
      continue;
    try {
      fn(tokens);
    } catch (const Error &e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

int parse_int(std::string_view text)
{
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error("parse_error", "expected an integer, got '" + std::string(text) + "'");
  return value;
}

bool valid_name(std::string_view name)
{
  if (name.empty() || name.front() == '!')
    return false;
  return name.find_first_of("=#") == std::string_view::npos;
}

// Parses `name=value`, with an optional leading '!' for not-equals.
Literal parse_assignment(const GraphicalModel &model, std::string_view token, bool allow_negation)
{
  bool equals = true;
  if (!token.empty() && token.front() == '!') {
    if (!allow_negation)
      throw Error("parse_error", "negated assignment not allowed here: '" + std::string(token) + "'");
    equals = false;
    token.remove_prefix(1);
  }
  auto eq = token.rfind('=');
  if (eq == std::string_view::npos || eq == 0)
    throw Error("parse_error", "expected name=value, got '" + std::string(token) + "'");
  std::string_view name = token.substr(0, eq);
  auto var = model.find(name);
  if (!var)
    throw Error("unknown_variable", "unknown variable '" + std::string(name) + "'");
  int value = parse_int(token.substr(eq + 1));
  if (value < 0 || value >= model.domain_size(*var))
    throw Error("value_out_of_domain", "value " + std::to_string(value) + " out of domain for '" +
                                           std::string(name) + "'");
  return Literal{*var, value, equals};
}

} // namespace

GraphicalModel parse_model(std::string_view text)
{
  GraphicalModel model;
  for_each_line(text, [&](const std::vector<std::string_view> &tok) {
    if (tok[0] == "var") {
      if (tok.size() != 3)
        throw Error("parse_error", "expected: var <name> <domain_size>");
      if (!valid_name(tok[1]))
        throw Error("parse_error", "invalid variable name '" + std::string(tok[1]) + "'");
      model.add_variable(std::string(tok[1]), parse_int(tok[2]));
    } else if (tok[0] == "feature") {
      if (tok.size() < 3)
        throw Error("parse_error", "expected: feature <OR|AND> <weight> <literals...>");
      Feature f;
      if (tok[1] == "OR")
        f.connective = Connective::Or;
      else if (tok[1] == "AND")
        f.connective = Connective::And;
      else
        throw Error("parse_error", "unknown connective '" + std::string(tok[1]) + "'");
      f.weight = parse_real(tok[2]);
      for (std::size_t i = 3; i < tok.size(); ++i)
        f.literals.push_back(parse_assignment(model, tok[i], true));
      model.add_feature(std::move(f));
    } else if (tok[0] == "offset") {
      if (tok.size() != 2)
        throw Error("parse_error", "expected: offset <real>");
      model.add_offset(parse_real(tok[1]));
    } else {
      throw Error("parse_error", "unknown statement '" + std::string(tok[0]) + "'");
    }
  });
  return model;
}

std::string serialize_model(const GraphicalModel &model)
{
  std::ostringstream out;
  for (const Variable &v : model.variables())
    out << "var " << v.name << ' ' << v.domain_size << '\n';
  if (model.log_offset() != 0.0)
    out << "offset " << format_weight(model.log_offset()) << '\n';
  for (const Feature &f : model.features()) {
    out << "feature " << (f.connective == Connective::Or ? "OR" : "AND") << ' '
        << format_weight(f.weight);
    for (const Literal &l : f.literals)
      out << ' ' << (l.equals ? "" : "!") << model.name(l.var) << '=' << l.value;
    out << '\n';
  }
  return out.str();
}

void validate_evidence(const GraphicalModel &model, const Evidence &evidence)
{
  for (const auto &[var, value] : evidence) {
    if (var < 0 || static_cast<std::size_t>(var) >= model.num_variables())
      throw Error("unknown_variable", "evidence references variable id " + std::to_string(var));
    if (value < 0 || value >= model.domain_size(var))
      throw Error("value_out_of_domain",
                  "evidence value " + std::to_string(value) + " out of domain for '" + model.name(var) + "'");
  }
}

Evidence parse_evidence(const GraphicalModel &model, std::string_view text)
{
  Evidence evidence;
  for_each_line(text, [&](const std::vector<std::string_view> &tok) {
    for (std::string_view t : tok) {
      Literal l = parse_assignment(model, t, false);
      if (!evidence.emplace(l.var, l.value).second)
        throw Error("duplicate_evidence", "variable '" + model.name(l.var) + "' observed twice");
    }
  });
  return evidence;
}

std::string format_evidence(const GraphicalModel &model, const Evidence &evidence)
{
  std::ostringstream out;
  for (const auto &[var, value] : evidence)
    out << model.name(var) << '=' << value << '\n';
  return out.str();
}

std::string format_marginals(const GraphicalModel &model, const MarginalEstimate &marginals)
{
  std::ostringstream out;
  for (std::size_t i = 0; i < model.num_variables(); ++i) {
    out << model.variables()[i].name;
    for (double p : marginals.probs[i])
      out << ' ' << format_weight(p);
    out << '\n';
  }
  return out.str();
}

MarginalEstimate parse_marginals(const GraphicalModel &model, std::string_view text)
{
  MarginalEstimate m;
  m.probs.resize(model.num_variables());
  std::vector<bool> seen(model.num_variables(), false);
  for_each_line(text, [&](const std::vector<std::string_view> &tok) {
    auto var = model.find(tok[0]);
    if (!var)
      throw Error("unknown_variable", "unknown variable '" + std::string(tok[0]) + "'");
    auto idx = static_cast<std::size_t>(*var);
    if (seen[idx])
      throw Error("parse_error", "marginal row for '" + std::string(tok[0]) + "' repeated");
    if (tok.size() != static_cast<std::size_t>(model.domain_size(*var)) + 1)
      throw Error("shape_mismatch", "marginal row for '" + std::string(tok[0]) + "' has wrong length");
    seen[idx] = true;
    for (std::size_t i = 1; i < tok.size(); ++i)
      m.probs[idx].push_back(parse_real(tok[i]));
  });
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw Error("shape_mismatch", "missing marginal row for '" + model.variables()[i].name + "'");
  return m;
}

} // namespace bvmc
