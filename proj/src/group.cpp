#include "bvmc/group.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "bvmc/error.hpp"

namespace bvmc {

namespace {
constexpr std::size_t kOrbitCacheLimit = 1'000'000;
}

BVSymmetry identity_symmetry(std::size_t size)
{
  BVSymmetry id;
  id.image.resize(size);
  for (std::size_t i = 0; i < size; ++i)
    id.image[i] = static_cast<int>(i);
  return id;
}

BVSymmetry compose(const BVSymmetry &a, const BVSymmetry &b)
{
  if (a.size() != b.size())
    throw Error("shape_mismatch", "cannot compose permutations of different sizes");
  BVSymmetry out;
  out.image.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.image[i] = a.image[static_cast<std::size_t>(b.image[i])];
  return out;
}

BVSymmetry inverse(const BVSymmetry &a)
{
  BVSymmetry out;
  out.image.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out.image[static_cast<std::size_t>(a.image[i])] = static_cast<int>(i);
  return out;
}

void apply_into(const BlockValueSet &values, const BVSymmetry &sym, std::span<const int> state,
                std::span<int> out)
{
  for (std::size_t b = 0; b < values.num_blocks(); ++b) {
    int target = sym.image[static_cast<std::size_t>(values.consistent_index(b, state))];
    const Block &dest = values.block(static_cast<std::size_t>(values.block_of(target)));
    auto vals = values.values(target);
    for (std::size_t k = 0; k < dest.size(); ++k)
      out[static_cast<std::size_t>(dest.vars[k])] = vals[k];
  }
}

State apply(const BlockValueSet &values, const BVSymmetry &sym, std::span<const int> state)
{
  if (sym.size() != values.size() || state.size() != values.num_variables())
    throw Error("shape_mismatch", "symmetry or state does not match the block value set");
  State out(state.size(), 0);
  apply_into(values, sym, state, out);
  return out;
}

SymmetryGroup::SymmetryGroup(std::shared_ptr<const BlockValueSet> values, std::vector<BVSymmetry> generators)
  : values_(std::move(values))
{
  for (BVSymmetry &g : generators) {
    if (!is_valid_bv_permutation(*values_, g))
      throw Error("invalid_symmetry", "generator is not a valid BV permutation");
    if (!g.is_identity())
      generators_.push_back(std::move(g));
  }
}

PRASampler::PRASampler(const SymmetryGroup &group, std::uint64_t seed, const PRAOptions &options)
  : steps_per_sample_(options.steps_per_sample), rng_(seed)
{
  const auto &gens = group.generators();
  if (gens.empty())
    throw Error("invalid_argument", "product replacement needs at least one non-identity generator");
  std::size_t size = options.pad_size ? options.pad_size : std::max<std::size_t>(10, 2 * gens.size() + 1);
  size = std::max<std::size_t>(size, 2);
  for (std::size_t i = 0; i < size; ++i)
    pad_.push_back(gens[i % gens.size()]);
  acc_ = identity_symmetry(group.values().size());
  scratch_ = acc_;
  for (int i = 0; i < options.burn_in; ++i)
    step();
}

void PRASampler::step()
{
  const std::size_t n = pad_.size();
  std::size_t i = uniform_index(rng_, n);
  std::size_t j = uniform_index(rng_, n - 1);
  if (j >= i)
    ++j;
  bool invert = std::bernoulli_distribution(0.5)(rng_);
  BVSymmetry &gi = pad_[i];
  const BVSymmetry &gj = pad_[j];
  // g_i <- g_i * g_j^{+-1}
  if (invert) {
    for (std::size_t x = 0; x < gj.size(); ++x)
      scratch_.image[static_cast<std::size_t>(gj.image[x])] = gi.image[x];
  } else {
    for (std::size_t x = 0; x < gj.size(); ++x)
      scratch_.image[x] = gi.image[static_cast<std::size_t>(gj.image[x])];
  }
  std::swap(gi.image, scratch_.image);
  // acc <- acc * g_i
  for (std::size_t x = 0; x < acc_.size(); ++x)
    scratch_.image[x] = acc_.image[static_cast<std::size_t>(gi.image[x])];
  std::swap(acc_.image, scratch_.image);
}

const BVSymmetry &PRASampler::sample()
{
  for (int s = 0; s < steps_per_sample_; ++s)
    step();
  return acc_;
}

OrbitResult orbit_enumerate(const SymmetryGroup &group, std::span<const int> state, std::size_t cap)
{
  if (cap < 1)
    throw Error("invalid_argument", "orbit cap must be at least 1");
  OrbitResult result;
  std::set<State> seen;
  std::deque<State> queue;
  State start(state.begin(), state.end());
  seen.insert(start);
  queue.push_back(std::move(start));
  State next(state.size());
  while (!queue.empty()) {
    State current = std::move(queue.front());
    queue.pop_front();
    for (const BVSymmetry &g : group.generators()) {
      apply_into(group.values(), g, current, next);
      if (seen.contains(next))
        continue;
      if (seen.size() >= cap) {
        result.complete = false;
        queue.clear();
        break;
      }
      seen.insert(next);
      queue.push_back(next);
    }
  }
  result.states.assign(seen.begin(), seen.end());
  return result;
}

OrbitSampler::OrbitSampler(std::shared_ptr<const SymmetryGroup> group, OrbitMode mode, std::uint64_t seed,
                           const PRAOptions &pra, std::size_t exact_cap)
  : group_(std::move(group)), mode_(mode), exact_cap_(exact_cap)
{
  if (!group_->trivial() && mode_ == OrbitMode::Pra)
    pra_ = std::make_unique<PRASampler>(*group_, seed, pra);
  scratch_.resize(group_->values().num_variables());
}

void OrbitSampler::sample(State &state, Rng &rng)
{
  if (group_->trivial())
    return;
  if (mode_ == OrbitMode::Pra) {
    apply_into(group_->values(), pra_->sample(), state, scratch_);
    std::swap(state, scratch_);
    return;
  }
  auto it = orbit_of_.find(state);
  if (it == orbit_of_.end()) {
    if (orbit_of_.size() > kOrbitCacheLimit) {
      orbit_of_.clear();
      orbits_.clear();
    }
    OrbitResult orbit = orbit_enumerate(*group_, state, exact_cap_);
    if (!orbit.complete)
      throw Error("cap_exceeded", "orbit has more than " + std::to_string(exact_cap_) + " states");
    auto shared = std::make_shared<const std::vector<State>>(std::move(orbit.states));
    std::size_t id = orbits_.size();
    orbits_.push_back(shared);
    for (const State &s : *shared)
      orbit_of_.emplace(s, id);
    it = orbit_of_.find(state);
  }
  const auto &members = *orbits_[it->second];
  state = members[uniform_index(rng, members.size())];
}

} // namespace bvmc
