#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bvmc/group.hpp"
#include "bvmc/mcmc.hpp"
#include "bvmc/model.hpp"

namespace bvmc {

inline constexpr double kKLSmoothing = 1e-6;

// Mean over variables of KL(reference || estimate), with the estimate smoothed
// by adding `eps` to every entry and renormalizing.
double kl_divergence(const MarginalEstimate &reference, const MarginalEstimate &estimate,
                     double eps = kKLSmoothing);

enum class ReferenceMode { Exact, LongGibbs };

// One row per model variable; evidence variables get a point-mass row.
MarginalEstimate reference_marginals(const GraphicalModel &model, const Evidence &evidence, ReferenceMode mode,
                                     std::uint64_t gibbs_steps = 10'000'000, std::uint64_t seed = 1);

struct MeanCI
{
  double mean = 0;
  double lo = 0;
  double hi = 0;
};

// Normal-approximation 95% interval; collapses to the mean for one value.
MeanCI mean_ci95(std::span<const double> values);

// Evidence on round(fraction * n) uniformly chosen variables with uniform values.
Evidence random_evidence(const GraphicalModel &model, double fraction, std::uint64_t seed);

struct ModelSource
{
  enum class Kind { File, JobSearch, StudentCurriculum };
  Kind kind = Kind::JobSearch;
  std::string path;
  JobSearchParams job;
  StudentCurriculumParams student;
  // When false every repeat generates a fresh instance from its own seed.
  bool fixed = false;
};

struct ExperimentConfig
{
  std::string name;
  // "vanilla", "vv", "bv" (one heuristic partition) or "aggregate" (k of them).
  std::string chain = "vanilla";
  double alpha = 1.0;
  int k_partitions = 1;
  int max_block = 2;
  OrbitMode orbit_mode = OrbitMode::Pra;
  std::uint64_t thin = 1;
};

struct ExperimentSpec
{
  ModelSource model;
  double evidence_fraction = 0.0;
  std::vector<ExperimentConfig> configs;
  int n_repeats = 20;
  std::uint64_t base_seed = 1;
  // Explicit per-repeat seeds; derived from base_seed when empty.
  std::vector<std::uint64_t> seeds;
  // Post-burn-in sample counts, strictly ascending.
  std::vector<std::uint64_t> checkpoints;
  std::uint64_t burn_in = 0;
  ReferenceMode reference = ReferenceMode::Exact;
  std::uint64_t reference_steps = 10'000'000;
};

// Line-oriented `key = value` with `[config]` sections; `#` comments.
ExperimentSpec parse_experiment_spec(std::string_view text);
void validate_experiment_spec(const ExperimentSpec &spec);

struct StageTimings
{
  double generate_ms = 0;
  double condition_ms = 0;
  double reference_ms = 0;
  double partitions_ms = 0;
  double symmetries_ms = 0;
  double chain_ms = 0;

  double total_ms() const
  {
    return generate_ms + condition_ms + reference_ms + partitions_ms + symmetries_ms + chain_ms;
  }
};

struct CheckpointResult
{
  std::uint64_t samples = 0;
  double elapsed_ms = 0; // partitions + symmetries + chain time so far
  double kl = 0;
};

struct RepeatResult
{
  std::string config;
  int repeat = 0;
  std::uint64_t seed = 0;
  std::vector<CheckpointResult> checkpoints;
  StageTimings timings;
  std::size_t generators = 0;
};

struct CurvePoint
{
  double checkpoint = 0;
  std::string axis; // "samples" or "ms"
  MeanCI kl;
};

struct KLCurve
{
  std::string config;
  std::vector<CurvePoint> points;
};

struct ExperimentResult
{
  std::vector<KLCurve> curves;
  std::vector<RepeatResult> raw;

  const KLCurve &curve(std::string_view config) const;
};

// Repeats run on up to `jobs` threads; results do not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentSpec &spec, int jobs = 1);

// Seed of repeat r.
std::uint64_t repeat_seed(const ExperimentSpec &spec, int repeat);

std::string format_kl_csv(const ExperimentResult &result);
std::string format_raw_csv(const ExperimentResult &result);
std::string format_timings_csv(const ExperimentResult &result);

} // namespace bvmc
