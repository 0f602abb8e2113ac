#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bvmc {

struct Variable
{
  int id = 0;
  std::string name;
  int domain_size = 2;

  friend bool operator==(const Variable &, const Variable &) = default;
};

enum class Connective { Or, And };

// Equality test on one variable: `X=v` when `equals`, `X!=v` otherwise.
struct Literal
{
  int var = 0;
  int value = 0;
  bool equals = true;

  bool holds(int assigned) const { return equals == (assigned == value); }

  friend bool operator==(const Literal &, const Literal &) = default;
  friend auto operator<=>(const Literal &, const Literal &) = default;
};

struct Feature
{
  Connective connective = Connective::Or;
  std::vector<Literal> literals;
  double weight = 0.0;

  bool satisfied(std::span<const int> state) const;

  friend bool operator==(const Feature &, const Feature &) = default;
};

using State = std::vector<int>;

// Partial assignment, variable id -> value.
using Evidence = std::map<int, int>;

class GraphicalModel
{
public:
  int add_variable(std::string name, int domain_size);

  // Validates literal references, bounds and duplicate literals.
  void add_feature(Feature feature);

  void add_offset(double value) { log_offset_ += value; }

  const std::vector<Variable> &variables() const { return variables_; }
  const std::vector<Feature> &features() const { return features_; }
  double log_offset() const { return log_offset_; }

  std::size_t num_variables() const { return variables_.size(); }
  int domain_size(int var) const { return variables_[static_cast<std::size_t>(var)].domain_size; }
  const std::string &name(int var) const { return variables_[static_cast<std::size_t>(var)].name; }
  std::optional<int> find(std::string_view name) const;

  // True when every feature is an OR clause.
  bool is_clausal() const;

  // Product of domain sizes, or nullopt once it exceeds `cap`.
  std::optional<std::uint64_t> state_count(std::uint64_t cap) const;

  friend bool operator==(const GraphicalModel &a, const GraphicalModel &b)
  {
    return a.variables_ == b.variables_ && a.features_ == b.features_ &&
           a.log_offset_ == b.log_offset_;
  }

private:
  std::vector<Variable> variables_;
  std::vector<Feature> features_;
  double log_offset_ = 0.0;
  std::unordered_map<std::string, int> by_name_;
};

// Per-variable categorical marginals. `counts` is populated by samplers and
// left empty for exact results.
struct MarginalEstimate
{
  std::vector<std::vector<double>> probs;
  std::vector<std::vector<std::uint64_t>> counts;
  std::uint64_t samples = 0;

  static MarginalEstimate zeros(const GraphicalModel &model);
  void add_sample(std::span<const int> state);
  void merge(const MarginalEstimate &other);
  // Recomputes `probs` from `counts`.
  void normalize();
};

inline constexpr std::uint64_t kDefaultStateCap = std::uint64_t{1} << 24;

// kDefaultStateCap unless BVMC_STATE_CAP is set in the environment.
std::uint64_t default_state_cap();

// Shortest decimal that parses back to exactly `w`; -0 prints as 0.
std::string format_weight(double w);
double parse_real(std::string_view text);

GraphicalModel parse_model(std::string_view text);
std::string serialize_model(const GraphicalModel &model);

// Rewrites every AND feature into an OR clause with negated weight, moving the
// weight into the log offset. The unnormalized distribution is unchanged.
GraphicalModel normalize_to_clauses(const GraphicalModel &model);

double log_weight(const GraphicalModel &model, std::span<const int> state);

void validate_evidence(const GraphicalModel &model, const Evidence &evidence);

// Removes the evidence variables and folds constant features into the offset.
// Remaining variables keep their relative order and names.
GraphicalModel condition(const GraphicalModel &model, const Evidence &evidence);

// Ids of the variables that survive `condition`, in order.
std::vector<int> free_variables(const GraphicalModel &model, const Evidence &evidence);

// Exact marginals of the conditioned distribution by enumeration. The model is
// split into independent connected components first; `cap` bounds the number
// of joint states of the largest component.
MarginalEstimate exact_marginals(const GraphicalModel &model,
                                 const Evidence &evidence = {},
                                 std::uint64_t cap = default_state_cap());

Evidence parse_evidence(const GraphicalModel &model, std::string_view text);
std::string format_evidence(const GraphicalModel &model, const Evidence &evidence);
std::string format_marginals(const GraphicalModel &model, const MarginalEstimate &marginals);
MarginalEstimate parse_marginals(const GraphicalModel &model, std::string_view text);

struct JobSearchParams
{
  int n_people = 5;
  // Probability that a pair of people is part of the social network. Pairs
  // outside it get neither a Connected variable nor implication features.
  double edge_prob = 1.0;
  double weight_low = 0.0;
  double weight_high = 2.0;
  double w3 = 1.0;
  std::uint64_t seed = 1;
};

struct StudentCurriculumParams
{
  int n_students = 5;
  double friend_prob = 0.1;
  std::vector<double> weight_pool{0.5, 1.0, 1.5, 2.0};
  double w = 1.0;
  std::uint64_t seed = 1;
};

GraphicalModel gen_job_search(const JobSearchParams &params);
GraphicalModel gen_student_curriculum(const StudentCurriculumParams &params);

} // namespace bvmc
