#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "bvmc/model.hpp"
#include "bvmc/partition.hpp"
#include "bvmc/random.hpp"
#include "bvmc/symmetry.hpp"

namespace bvmc {

BVSymmetry identity_symmetry(std::size_t size);

// compose(a, b) applies b first, then a. Throws Error("shape_mismatch") when
// the sizes differ.
BVSymmetry compose(const BVSymmetry &a, const BVSymmetry &b);
BVSymmetry inverse(const BVSymmetry &a);

// Action of a valid BV permutation on a full state.
State apply(const BlockValueSet &values, const BVSymmetry &sym, std::span<const int> state);
void apply_into(const BlockValueSet &values, const BVSymmetry &sym, std::span<const int> state,
                std::span<int> out);

// Generator set over one block value set. Identity generators are dropped and
// every generator is checked for BV validity on construction.
class SymmetryGroup
{
public:
  SymmetryGroup(std::shared_ptr<const BlockValueSet> values, std::vector<BVSymmetry> generators);

  const BlockValueSet &values() const { return *values_; }
  const std::shared_ptr<const BlockValueSet> &values_ptr() const { return values_; }
  const std::vector<BVSymmetry> &generators() const { return generators_; }
  bool trivial() const { return generators_.empty(); }

private:
  std::shared_ptr<const BlockValueSet> values_;
  std::vector<BVSymmetry> generators_;
};

struct PRAOptions
{
  // 0 means max(10, 2 * generators + 1).
  std::size_t pad_size = 0;
  int burn_in = 60;
  int steps_per_sample = 2;
};

// Product replacement with an accumulator ("rattle"). Owns its RNG.
class PRASampler
{
public:
  // Throws Error("invalid_argument") for a group without generators.
  PRASampler(const SymmetryGroup &group, std::uint64_t seed, const PRAOptions &options = {});

  const BVSymmetry &sample();
  const std::vector<BVSymmetry> &pad() const { return pad_; }
  const BVSymmetry &accumulator() const { return acc_; }

private:
  void step();

  std::vector<BVSymmetry> pad_;
  BVSymmetry acc_;
  BVSymmetry scratch_;
  int steps_per_sample_;
  Rng rng_;
};

struct OrbitResult
{
  std::vector<State> states; // sorted
  bool complete = true;      // false when the cap stopped the search
};

// Breadth-first closure of `state` under the generators, up to `cap` states.
OrbitResult orbit_enumerate(const SymmetryGroup &group, std::span<const int> state, std::size_t cap);

enum class OrbitMode { Pra, Exact };

inline constexpr std::size_t kDefaultOrbitCap = 100'000;

// Uniform-in-orbit moves for one chain. PRA mode applies a fresh PRA element;
// exact mode enumerates the orbit (cached per orbit) and draws from it with
// the caller's RNG. A trivial group never touches any RNG.
class OrbitSampler
{
public:
  OrbitSampler(std::shared_ptr<const SymmetryGroup> group, OrbitMode mode, std::uint64_t seed,
               const PRAOptions &pra = {}, std::size_t exact_cap = kDefaultOrbitCap);

  bool trivial() const { return group_->trivial(); }
  const SymmetryGroup &group() const { return *group_; }

  // Replaces `state` with a draw from its orbit. Exact mode throws
  // Error("cap_exceeded") when the orbit is larger than the cap.
  void sample(State &state, Rng &rng);

private:
  std::shared_ptr<const SymmetryGroup> group_;
  OrbitMode mode_;
  std::size_t exact_cap_;
  std::unique_ptr<PRASampler> pra_;
  State scratch_;
  std::vector<std::shared_ptr<const std::vector<State>>> orbits_;
  std::map<State, std::size_t> orbit_of_;
};

} // namespace bvmc
