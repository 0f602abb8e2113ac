#include "bvmc/mcmc.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "bvmc/error.hpp"

namespace bvmc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

} // namespace

GibbsSampler::GibbsSampler(const GraphicalModel &model)
  : model_(std::make_shared<const GraphicalModel>(model)), features_of_(model.num_variables())
{
  std::size_t max_domain = 1;
  for (const Variable &v : model.variables())
    max_domain = std::max(max_domain, static_cast<std::size_t>(v.domain_size));
  scratch_.resize(max_domain);
  for (std::size_t j = 0; j < model.features().size(); ++j) {
    for (const Literal &l : model.features()[j].literals) {
      auto &list = features_of_[static_cast<std::size_t>(l.var)];
      if (list.empty() || list.back() != j)
        list.push_back(j);
    }
  }
}

std::vector<double> GibbsSampler::full_conditional(State &state, int var) const
{
  const int d = model_->domain_size(var);
  const int saved = state[static_cast<std::size_t>(var)];
  std::vector<double> logp(static_cast<std::size_t>(d), 0.0);
  for (int v = 0; v < d; ++v) {
    state[static_cast<std::size_t>(var)] = v;
    double total = 0;
    for (std::size_t j : features_of_[static_cast<std::size_t>(var)]) {
      const Feature &f = model_->features()[j];
      if (f.satisfied(state))
        total += f.weight;
    }
    logp[static_cast<std::size_t>(v)] = total;
  }
  state[static_cast<std::size_t>(var)] = saved;
  double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0;
  for (double &x : logp) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double &x : logp)
    x /= z;
  return logp;
}

void GibbsSampler::step(State &state, Rng &rng) const
{
  const std::size_t n = model_->num_variables();
  if (n == 0)
    return;
  const int var = static_cast<int>(uniform_index(rng, n));
  const int d = model_->domain_size(var);
  // Inline conditional without allocation.
  double mx = -INFINITY;
  for (int v = 0; v < d; ++v) {
    state[static_cast<std::size_t>(var)] = v;
    double total = 0;
    for (std::size_t j : features_of_[static_cast<std::size_t>(var)]) {
      const Feature &f = model_->features()[j];
      if (f.satisfied(state))
        total += f.weight;
    }
    scratch_[static_cast<std::size_t>(v)] = total;
    mx = std::max(mx, total);
  }
  double z = 0;
  for (int v = 0; v < d; ++v) {
    scratch_[static_cast<std::size_t>(v)] = std::exp(scratch_[static_cast<std::size_t>(v)] - mx);
    z += scratch_[static_cast<std::size_t>(v)];
  }
  double u = uniform01(rng) * z;
  int chosen = d - 1;
  for (int v = 0; v < d; ++v) {
    u -= scratch_[static_cast<std::size_t>(v)];
    if (u < 0) {
      chosen = v;
      break;
    }
  }
  state[static_cast<std::size_t>(var)] = chosen;
}

void bv_mcmc_step(const GibbsSampler &gibbs, State &state, OrbitSampler &orbit, double alpha, Rng &rng)
{
  gibbs.step(state, rng);
  if (alpha <= 0.0 || orbit.trivial())
    return;
  if (alpha < 1.0 && !(uniform01(rng) < alpha))
    return;
  orbit.sample(state, rng);
}

AggregateChain::AggregateChain(std::vector<SubChain> chains, std::uint64_t selector_seed)
  : chains_(std::move(chains)), counts_(chains_.size(), 0), selector_(selector_seed)
{
  if (chains_.empty())
    throw Error("invalid_argument", "aggregate chain needs at least one sub-chain");
}

std::size_t AggregateChain::step(const GibbsSampler &gibbs, State &state, Rng &rng)
{
  std::size_t k = chains_.size() == 1 ? 0 : uniform_index(selector_, chains_.size());
  ++counts_[k];
  bv_mcmc_step(gibbs, state, *chains_[k].orbit, chains_[k].alpha, rng);
  return k;
}

const char *chain_kind_name(ChainKind kind)
{
  switch (kind) {
  case ChainKind::Vanilla: return "vanilla";
  case ChainKind::BV: return "bv";
  case ChainKind::Aggregate: return "aggregate";
  }
  return "unknown";
}

void validate_config(const GraphicalModel &model, const ChainConfig &config)
{
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0))
    throw Error("invalid_argument", "alpha must lie in [0, 1]");
  if (config.thin < 1)
    throw Error("invalid_argument", "thin must be at least 1");
  if (config.kind == ChainKind::BV && config.partitions.size() != 1)
    throw Error("invalid_argument", "a BV chain needs exactly one partition");
  if (config.kind == ChainKind::Aggregate && config.partitions.empty())
    throw Error("invalid_argument", "an aggregate chain needs at least one partition");
  if (config.kind != ChainKind::Vanilla)
    for (const BlockPartition &p : config.partitions)
      require_valid_partition(model, p);
}

std::shared_ptr<const SymmetryGroup> build_group(const GraphicalModel &model, const BlockPartition &partition,
                                                 const AutomorphismOptions &options)
{
  BVSymmetries syms = compute_bv_symmetries(model, partition, options);
  return std::make_shared<const SymmetryGroup>(syms.values, std::move(syms.generators));
}

Chain::Chain(const GraphicalModel &model, const ChainConfig &config)
  : config_(config), gibbs_(model), rng_(config.seed)
{
  validate_config(model, config_);
  auto start = Clock::now();
  if (config_.kind != ChainKind::Vanilla)
    for (const BlockPartition &p : config_.partitions)
      groups_.push_back(build_group(model, p, config_.automorphism));
  preprocess_ms_ = ms_since(start);
  init(model);
}

Chain::Chain(const GraphicalModel &model, const ChainConfig &config,
             std::vector<std::shared_ptr<const SymmetryGroup>> groups)
  : config_(config), gibbs_(model), rng_(config.seed), groups_(std::move(groups))
{
  validate_config(model, config_);
  if (config_.kind != ChainKind::Vanilla && groups_.size() != config_.partitions.size())
    throw Error("invalid_argument", "need one symmetry group per partition");
  init(model);
}

void Chain::init(const GraphicalModel &model)
{
  state_.assign(model.num_variables(), 0);
  for (std::size_t v = 0; v < state_.size(); ++v)
    state_[v] = static_cast<int>(uniform_index(rng_, static_cast<std::size_t>(model.domain_size(static_cast<int>(v)))));
  auto make_orbit = [&](std::size_t k) {
    return std::make_unique<OrbitSampler>(groups_[k], config_.orbit_mode, derive_seed(config_.seed, 1000 + k),
                                          config_.pra, config_.exact_orbit_cap);
  };
  if (config_.kind == ChainKind::BV) {
    single_ = make_orbit(0);
  } else if (config_.kind == ChainKind::Aggregate) {
    std::vector<SubChain> subs;
    for (std::size_t k = 0; k < groups_.size(); ++k)
      subs.push_back(SubChain{make_orbit(k), config_.alpha});
    aggregate_ = std::make_unique<AggregateChain>(std::move(subs), derive_seed(config_.seed, 1));
  }
}

void Chain::step()
{
  switch (config_.kind) {
  case ChainKind::Vanilla: gibbs_.step(state_, rng_); break;
  case ChainKind::BV: bv_mcmc_step(gibbs_, state_, *single_, config_.alpha, rng_); break;
  case ChainKind::Aggregate: aggregate_->step(gibbs_, state_, rng_); break;
  }
}

ChainRun run_chain(const GraphicalModel &model, const ChainConfig &config,
                   const std::function<void(const Snapshot &)> &on_snapshot)
{
  auto start = Clock::now();
  GraphicalModel clausal = normalize_to_clauses(model);
  Chain chain(clausal, config);
  ChainRun run;
  run.preprocess_ms = ms_since(start);
  for (const auto &g : chain.groups())
    run.generators += g->generators().size();

  for (std::uint64_t t = 0; t < config.burn_in; ++t)
    chain.step();
  MarginalEstimate acc = MarginalEstimate::zeros(clausal);
  const std::uint64_t every = config.report_every ? config.report_every : std::max<std::uint64_t>(config.steps, 1);
  for (std::uint64_t t = 1; t <= config.steps; ++t) {
    chain.step();
    if (t % config.thin == 0)
      acc.add_sample(chain.state());
    if (t % every == 0 || t == config.steps) {
      Snapshot snap{t, ms_since(start), acc};
      snap.marginals.normalize();
      if (on_snapshot)
        on_snapshot(snap);
      run.snapshots.push_back(std::move(snap));
    }
  }
  return run;
}

std::string format_run_header(const GraphicalModel &model, const ChainConfig &config)
{
  std::ostringstream out;
  out << "# chain=" << chain_kind_name(config.kind) << '\n';
  out << "# seed=" << config.seed << '\n';
  out << "# alpha=" << format_weight(config.alpha) << '\n';
  out << "# steps=" << config.steps << " burn_in=" << config.burn_in << " thin=" << config.thin << '\n';
  out << "# orbit_mode=" << (config.orbit_mode == OrbitMode::Pra ? "pra" : "exact") << '\n';
  if (config.kind != ChainKind::Vanilla)
    for (const BlockPartition &p : config.partitions)
      out << "# partition=" << partition_hash(model, p) << '\n';
  out << "step,elapsed_ms,var,value,prob\n";
  return out.str();
}

std::string format_snapshot_rows(const GraphicalModel &model, const Snapshot &snapshot)
{
  std::ostringstream out;
  char ms[32];
  std::snprintf(ms, sizeof ms, "%.3f", snapshot.elapsed_ms);
  for (std::size_t v = 0; v < snapshot.marginals.probs.size(); ++v)
    for (std::size_t x = 0; x < snapshot.marginals.probs[v].size(); ++x)
      out << snapshot.step << ',' << ms << ',' << model.name(static_cast<int>(v)) << ',' << x << ','
          << format_weight(snapshot.marginals.probs[v][x]) << '\n';
  return out.str();
}

} // namespace bvmc
