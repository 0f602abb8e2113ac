#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bvmc/model.hpp"

namespace bvmc {

// A set of variables permuted jointly; `vars` is strictly increasing.
struct Block
{
  std::vector<int> vars;

  std::size_t size() const { return vars.size(); }

  friend bool operator==(const Block &, const Block &) = default;
  friend auto operator<=>(const Block &, const Block &) = default;
};

// A block together with one full assignment, aligned with `block.vars`.
struct BVPair
{
  Block block;
  std::vector<int> values;

  friend bool operator==(const BVPair &, const BVPair &) = default;
};

struct BlockPartition
{
  std::vector<Block> blocks;

  friend bool operator==(const BlockPartition &, const BlockPartition &) = default;
};

struct PartitionViolation
{
  enum class Kind { Overlap, Missing, UnknownVariable, EmptyBlock, Unsorted };
  Kind kind;
  int var = -1;

  std::string describe(const GraphicalModel &model) const;
};

// Accepts iff the blocks are a disjoint exact cover of the model's variables.
// Reports the first offending variable otherwise.
std::optional<PartitionViolation> validate_partition(const GraphicalModel &model,
                                                     const BlockPartition &partition);

// Throws Error("invalid_partition") with the violation description.
void require_valid_partition(const GraphicalModel &model, const BlockPartition &partition);

BlockPartition singleton_partition(const GraphicalModel &model);

// Sorts the variables inside each block and the blocks themselves.
BlockPartition canonical_partition(BlockPartition partition);

bool consistent(const BVPair &bv, std::span<const int> state);

std::string format_partition(const GraphicalModel &model, const BlockPartition &partition);
BlockPartition parse_partition(const GraphicalModel &model, std::string_view text);
std::string format_candidates(const GraphicalModel &model, const std::vector<BlockPartition> &partitions);
std::vector<BlockPartition> parse_candidates(const GraphicalModel &model, std::string_view text);

// 64-bit FNV-1a of the canonical partition text, as 16 hex digits.
std::string partition_hash(const GraphicalModel &model, const BlockPartition &partition);

// The block value set of a partition: every block with all of its
// assignments, indexed densely. Block `b` owns indices
// [offset(b), offset(b) + count(b)); within a block, assignments are ordered
// lexicographically with the first block variable most significant.
class BlockValueSet
{
public:
  BlockValueSet(const GraphicalModel &model, BlockPartition partition);

  const BlockPartition &partition() const { return partition_; }
  std::size_t num_blocks() const { return partition_.blocks.size(); }
  std::size_t size() const { return block_of_.size(); }
  std::size_t num_variables() const { return block_of_var_.size(); }

  const Block &block(std::size_t b) const { return partition_.blocks[b]; }
  int offset(std::size_t b) const { return offsets_[b]; }
  int count(std::size_t b) const { return counts_[b]; }

  int block_of(int index) const { return block_of_[static_cast<std::size_t>(index)]; }
  int block_of_variable(int var) const { return block_of_var_[static_cast<std::size_t>(var)]; }
  std::span<const int> values(int index) const;
  BVPair pair(int index) const;

  // Global index of the pair of block `b` consistent with `state`.
  int consistent_index(std::size_t b, std::span<const int> state) const;
  int index_of(std::size_t b, std::span<const int> values) const;

private:
  BlockPartition partition_;
  std::vector<int> offsets_;
  std::vector<int> counts_;
  std::vector<int> block_of_;
  std::vector<int> block_of_var_;
  std::vector<int> flat_values_;
  std::vector<int> flat_offsets_;
  std::vector<std::vector<int>> strides_;
};

// Feature of the transformed model: the blocks it spans and the joint block
// assignments that satisfy it (mixed-radix codes, first block most
// significant, sorted).
struct BlockFeature
{
  std::vector<int> blocks;
  std::vector<std::uint64_t> satisfying;
  double weight = 0.0;
};

inline constexpr std::uint64_t kDefaultBlockFeatureCap = std::uint64_t{1} << 20;

// The model re-expressed over one multi-valued variable per block, with
// partition-consistent features.
class BlockModel
{
public:
  BlockModel(const GraphicalModel &model, BlockPartition partition,
             std::uint64_t feature_cap = kDefaultBlockFeatureCap);

  const BlockValueSet &value_set() const { return values_; }
  const std::vector<BlockFeature> &features() const { return features_; }
  double log_offset() const { return log_offset_; }
  int domain_size(std::size_t block) const { return values_.count(block); }

  // Base state -> one local assignment index per block, and back.
  State map_state(std::span<const int> state) const;
  State inverse_map(std::span<const int> block_state) const;

  double log_weight(std::span<const int> block_state) const;

private:
  BlockValueSet values_;
  std::vector<BlockFeature> features_;
  double log_offset_ = 0.0;
};

// Every non-empty subset of size <= r of each feature's variable set,
// deduplicated and sorted.
std::vector<Block> get_useful_blocks(const GraphicalModel &model, int r);

// Sorted multiset of clause weights.
struct WeightSignature
{
  std::vector<double> weights;

  friend bool operator==(const WeightSignature &, const WeightSignature &) = default;
  friend auto operator<=>(const WeightSignature &, const WeightSignature &) = default;
};

// Weights of the clauses in the block's feature blanket that the partial
// assignment satisfies. Requires a clausal model.
WeightSignature get_weight_sign(const GraphicalModel &model, const BVPair &bv);

struct PartitionHeuristicOptions
{
  int max_block = 2;
  int k_partitions = 1;
  std::uint64_t seed = 1;
  // Consecutive conflicting draws before falling back to singletons; 0 means 50 * n.
  std::size_t max_rejections = 0;
};

// Samples candidate partitions by bucketing useful-block BV pairs on
// (block size, weight signature). Requires a clausal model.
std::vector<BlockPartition> generate_block_partitions(const GraphicalModel &model,
                                                      const PartitionHeuristicOptions &options);

} // namespace bvmc
