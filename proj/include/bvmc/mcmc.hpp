#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bvmc/group.hpp"
#include "bvmc/model.hpp"
#include "bvmc/partition.hpp"
#include "bvmc/random.hpp"
#include "bvmc/symmetry.hpp"

namespace bvmc {

// Random-scan single-site Gibbs sampler.
class GibbsSampler
{
public:
  explicit GibbsSampler(const GraphicalModel &model);

  const GraphicalModel &model() const { return *model_; }

  // Normalized conditional distribution of `var` given the rest of `state`.
  std::vector<double> full_conditional(State &state, int var) const;

  void step(State &state, Rng &rng) const;

private:
  std::shared_ptr<const GraphicalModel> model_;
  std::vector<std::vector<std::size_t>> features_of_;
  mutable std::vector<double> scratch_;
};

// One Gibbs step, then with probability alpha a uniform move within the
// current orbit. alpha = 0 never touches the orbit sampler and alpha = 1
// never draws the coin.
void bv_mcmc_step(const GibbsSampler &gibbs, State &state, OrbitSampler &orbit, double alpha, Rng &rng);

struct SubChain
{
  std::unique_ptr<OrbitSampler> orbit;
  double alpha = 1.0;
};

// Picks one of K sub-chains uniformly per step with its own selector RNG, so
// the chain RNG sees the same draws as a single sub-chain would.
class AggregateChain
{
public:
  AggregateChain(std::vector<SubChain> chains, std::uint64_t selector_seed);

  // Returns the index of the sub-chain that moved.
  std::size_t step(const GibbsSampler &gibbs, State &state, Rng &rng);

  std::size_t size() const { return chains_.size(); }
  const std::vector<std::uint64_t> &selection_counts() const { return counts_; }

private:
  std::vector<SubChain> chains_;
  std::vector<std::uint64_t> counts_;
  Rng selector_;
};

enum class ChainKind { Vanilla, BV, Aggregate };

const char *chain_kind_name(ChainKind kind);

struct ChainConfig
{
  ChainKind kind = ChainKind::Vanilla;
  double alpha = 1.0;
  // One partition for BV, K >= 1 for Aggregate; ignored for Vanilla.
  std::vector<BlockPartition> partitions;
  std::uint64_t steps = 10'000;
  std::uint64_t burn_in = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = 1;
  // 0 means one snapshot at the end.
  std::uint64_t report_every = 0;
  OrbitMode orbit_mode = OrbitMode::Pra;
  PRAOptions pra;
  std::size_t exact_orbit_cap = kDefaultOrbitCap;
  AutomorphismOptions automorphism;
};

// Throws Error("invalid_argument") for out-of-range settings.
void validate_config(const GraphicalModel &model, const ChainConfig &config);

struct Snapshot
{
  std::uint64_t step = 0; // post-burn-in steps taken
  double elapsed_ms = 0;  // includes symmetry preprocessing
  MarginalEstimate marginals;
};

// A configured chain over a clausal model. Symmetries are computed in the
// constructor unless groups are supplied (one per partition).
class Chain
{
public:
  Chain(const GraphicalModel &model, const ChainConfig &config);
  Chain(const GraphicalModel &model, const ChainConfig &config,
        std::vector<std::shared_ptr<const SymmetryGroup>> groups);

  void step();
  const State &state() const { return state_; }
  const GibbsSampler &gibbs() const { return gibbs_; }
  const std::vector<std::shared_ptr<const SymmetryGroup>> &groups() const { return groups_; }
  const AggregateChain *aggregate() const { return aggregate_.get(); }
  double preprocess_ms() const { return preprocess_ms_; }

private:
  void init(const GraphicalModel &model);

  ChainConfig config_;
  GibbsSampler gibbs_;
  Rng rng_;
  State state_;
  std::vector<std::shared_ptr<const SymmetryGroup>> groups_;
  std::unique_ptr<AggregateChain> aggregate_;
  std::unique_ptr<OrbitSampler> single_;
  double preprocess_ms_ = 0;
};

// Symmetry group of one partition of a clausal model.
std::shared_ptr<const SymmetryGroup> build_group(const GraphicalModel &model, const BlockPartition &partition,
                                                 const AutomorphismOptions &options = {});

struct ChainRun
{
  std::vector<Snapshot> snapshots;
  double preprocess_ms = 0;
  std::size_t generators = 0;
};

// Normalizes the model, builds the chain, runs burn-in and then `steps`
// counted steps. `on_snapshot` sees each snapshot as it is taken.
ChainRun run_chain(const GraphicalModel &model, const ChainConfig &config,
                   const std::function<void(const Snapshot &)> &on_snapshot = {});

// `#` preamble describing the run followed by `step,elapsed_ms,var,value,prob`.
std::string format_run_header(const GraphicalModel &model, const ChainConfig &config);
std::string format_snapshot_rows(const GraphicalModel &model, const Snapshot &snapshot);

} // namespace bvmc
