#include <algorithm>
#include <map>
#include <set>

#include "bvmc/error.hpp"
#include "bvmc/partition.hpp"
#include "bvmc/random.hpp"

namespace bvmc {

namespace {

std::vector<int> feature_vars(const Feature &f)
{
  std::vector<int> vars;
  for (const Literal &l : f.literals)
    vars.push_back(l.var);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

void require_clausal(const GraphicalModel &model)
{
  if (!model.is_clausal())
    throw Error("not_normalized", "model must be normalized to OR clauses first");
}

// Features mentioning at least one variable of `block`.
std::vector<std::size_t> feature_blanket(const std::vector<std::vector<std::size_t>> &by_var,
                                         const Block &block)
{
  std::vector<std::size_t> out;
  for (int v : block.vars)
    out.insert(out.end(), by_var[static_cast<std::size_t>(v)].begin(),
               by_var[static_cast<std::size_t>(v)].end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::vector<std::size_t>> features_by_variable(const GraphicalModel &model)
{
  std::vector<std::vector<std::size_t>> by_var(model.num_variables());
  for (std::size_t j = 0; j < model.features().size(); ++j)
    for (int v : feature_vars(model.features()[j]))
      by_var[static_cast<std::size_t>(v)].push_back(j);
  return by_var;
}

bool clause_satisfied_by(const Feature &f, const BVPair &bv)
{
  for (const Literal &l : f.literals) {
    auto it = std::find(bv.block.vars.begin(), bv.block.vars.end(), l.var);
    if (it == bv.block.vars.end())
      continue;
    if (l.holds(bv.values[static_cast<std::size_t>(it - bv.block.vars.begin())]))
      return true;
  }
  return false;
}

WeightSignature signature_with(const GraphicalModel &model,
                               const std::vector<std::vector<std::size_t>> &by_var, const BVPair &bv)
{
  WeightSignature sig;
  for (std::size_t j : feature_blanket(by_var, bv.block)) {
    const Feature &f = model.features()[j];
    if (clause_satisfied_by(f, bv))
      sig.weights.push_back(f.weight + 0.0);
  }
  std::sort(sig.weights.begin(), sig.weights.end());
  return sig;
}

// Advances `values` to the next assignment of `block`; false after the last.
bool next_assignment(const GraphicalModel &model, const Block &block, std::vector<int> &values)
{
  for (std::size_t i = block.size(); i-- > 0;) {
    if (++values[i] < model.domain_size(block.vars[i]))
      return true;
    values[i] = 0;
  }
  return false;
}

} // namespace

std::vector<Block> get_useful_blocks(const GraphicalModel &model, int r)
{
  if (r < 1)
    throw Error("invalid_argument", "maximum block size must be at least 1");
  std::set<Block> blocks;
  for (const Feature &f : model.features()) {
    std::vector<int> vars = feature_vars(f);
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(r), vars.size());
    // Enumerate subsets of each size by walking index combinations.
    for (std::size_t size = 1; size <= k; ++size) {
      std::vector<std::size_t> idx(size);
      for (std::size_t i = 0; i < size; ++i)
        idx[i] = i;
      while (true) {
        Block b;
        for (std::size_t i : idx)
          b.vars.push_back(vars[i]);
        blocks.insert(std::move(b));
        std::size_t i = size;
        while (i > 0 && idx[i - 1] == vars.size() - size + i - 1)
          --i;
        if (i == 0)
          break;
        ++idx[i - 1];
        for (std::size_t j = i; j < size; ++j)
          idx[j] = idx[j - 1] + 1;
      }
    }
  }
  return {blocks.begin(), blocks.end()};
}

WeightSignature get_weight_sign(const GraphicalModel &model, const BVPair &bv)
{
  require_clausal(model);
  return signature_with(model, features_by_variable(model), bv);
}

std::vector<BlockPartition> generate_block_partitions(const GraphicalModel &model,
                                                      const PartitionHeuristicOptions &options)
{
  require_clausal(model);
  if (options.k_partitions < 1)
    throw Error("invalid_argument", "need at least one partition");

  const std::size_t n = model.num_variables();
  const auto by_var = features_by_variable(model);
  const std::vector<Block> useful = get_useful_blocks(model, options.max_block);

  // Bucket key: (block size, weight signature). Each BV pair contributes its
  // block once, so a block can appear several times in the same bucket.
  std::map<std::pair<std::size_t, WeightSignature>, std::vector<std::size_t>> buckets;
  for (std::size_t u = 0; u < useful.size(); ++u) {
    const Block &block = useful[u];
    BVPair bv{block, std::vector<int>(block.size(), 0)};
    do {
      buckets[{block.size(), signature_with(model, by_var, bv)}].push_back(u);
    } while (next_assignment(model, block, bv.values));
  }

  std::vector<const std::vector<std::size_t> *> bucket_list;
  std::vector<double> bucket_sizes;
  for (const auto &[key, members] : buckets) {
    bucket_list.push_back(&members);
    bucket_sizes.push_back(static_cast<double>(members.size()));
  }

  std::vector<bool> coverable(n, false);
  for (const Block &b : useful)
    for (int v : b.vars)
      coverable[static_cast<std::size_t>(v)] = true;
  const std::size_t n_coverable = static_cast<std::size_t>(std::count(coverable.begin(), coverable.end(), true));
  const std::size_t max_rejections = options.max_rejections ? options.max_rejections : 50 * std::max<std::size_t>(n, 1);

  Rng rng(options.seed);
  std::vector<BlockPartition> out;
  for (int k = 0; k < options.k_partitions; ++k) {
    BlockPartition partition;
    std::vector<bool> covered(n, false);
    std::size_t n_covered = 0;
    std::size_t rejections = 0;

    if (!bucket_list.empty()) {
      std::discrete_distribution<std::size_t> pick_bucket(bucket_sizes.begin(), bucket_sizes.end());
      while (n_covered < n_coverable && rejections < max_rejections) {
        const auto &members = *bucket_list[pick_bucket(rng)];
        const Block &block = useful[members[uniform_index(rng, members.size())]];
        bool conflict = std::any_of(block.vars.begin(), block.vars.end(),
                                    [&](int v) { return covered[static_cast<std::size_t>(v)]; });
        if (conflict) {
          ++rejections;
          continue;
        }
        rejections = 0;
        for (int v : block.vars)
          covered[static_cast<std::size_t>(v)] = true;
        n_covered += block.size();
        partition.blocks.push_back(block);
      }
    }
    for (std::size_t v = 0; v < n; ++v)
      if (!covered[v])
        partition.blocks.push_back(Block{{static_cast<int>(v)}});

    partition = canonical_partition(std::move(partition));
    require_valid_partition(model, partition);
    out.push_back(std::move(partition));
  }
  return out;
}

} // namespace bvmc
