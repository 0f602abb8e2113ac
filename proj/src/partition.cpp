#include "bvmc/partition.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "bvmc/error.hpp"

namespace bvmc {

std::string PartitionViolation::describe(const GraphicalModel &model) const
{
  auto name = [&]() -> std::string {
    if (var >= 0 && static_cast<std::size_t>(var) < model.num_variables())
      return model.name(var);
    return "#" + std::to_string(var);
  };
  switch (kind) {
  case Kind::Overlap: return "variable " + name() + " appears in more than one block";
  case Kind::Missing: return "variable " + name() + " is not covered by any block";
  case Kind::UnknownVariable: return "block references unknown variable " + name();
  case Kind::EmptyBlock: return "partition contains an empty block";
  case Kind::Unsorted: return "block variables are not strictly increasing near " + name();
  }
  return "invalid partition";
}

std::optional<PartitionViolation> validate_partition(const GraphicalModel &model,
                                                     const BlockPartition &partition)
{
  using Kind = PartitionViolation::Kind;
  std::vector<bool> seen(model.num_variables(), false);
  for (const Block &b : partition.blocks) {
    if (b.vars.empty())
      return PartitionViolation{Kind::EmptyBlock, -1};
    for (std::size_t i = 0; i < b.vars.size(); ++i) {
      int v = b.vars[i];
      if (v < 0 || static_cast<std::size_t>(v) >= model.num_variables())
        return PartitionViolation{Kind::UnknownVariable, v};
      if (i > 0 && b.vars[i - 1] >= v)
        return PartitionViolation{Kind::Unsorted, v};
      if (seen[static_cast<std::size_t>(v)])
        return PartitionViolation{Kind::Overlap, v};
      seen[static_cast<std::size_t>(v)] = true;
    }
  }
  for (std::size_t v = 0; v < seen.size(); ++v)
    if (!seen[v])
      return PartitionViolation{Kind::Missing, static_cast<int>(v)};
  return std::nullopt;
}

void require_valid_partition(const GraphicalModel &model, const BlockPartition &partition)
{
  if (auto violation = validate_partition(model, partition))
    throw Error("invalid_partition", violation->describe(model));
}

BlockPartition singleton_partition(const GraphicalModel &model)
{
  BlockPartition p;
  for (const Variable &v : model.variables())
    p.blocks.push_back(Block{{v.id}});
  return p;
}

BlockPartition canonical_partition(BlockPartition partition)
{
  for (Block &b : partition.blocks)
    std::sort(b.vars.begin(), b.vars.end());
  std::sort(partition.blocks.begin(), partition.blocks.end());
  return partition;
}

bool consistent(const BVPair &bv, std::span<const int> state)
{
  for (std::size_t i = 0; i < bv.block.vars.size(); ++i)
    if (state[static_cast<std::size_t>(bv.block.vars[i])] != bv.values[i])
      return false;
  return true;
}

std::string format_partition(const GraphicalModel &model, const BlockPartition &partition)
{
  std::ostringstream out;
  for (const Block &b : partition.blocks) {
    out << "block";
    for (int v : b.vars)
      out << ' ' << model.name(v);
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
      ++i;
    if (i > start)
      out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text)
{
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    out.push_back(line);
  }
  return out;
}

BlockPartition parse_partition_lines(const GraphicalModel &model,
                                     const std::vector<std::string_view> &lines)
{
  BlockPartition p;
  for (std::string_view line : lines) {
    auto tok = split_ws(line);
    if (tok.empty())
      continue;
    if (tok[0] != "block")
      throw Error("parse_error", "expected 'block', got '" + std::string(tok[0]) + "'");
    Block b;
    for (std::size_t i = 1; i < tok.size(); ++i) {
      auto var = model.find(tok[i]);
      if (!var)
        throw Error("unknown_variable", "unknown variable '" + std::string(tok[i]) + "'");
      b.vars.push_back(*var);
    }
    std::sort(b.vars.begin(), b.vars.end());
    p.blocks.push_back(std::move(b));
  }
  require_valid_partition(model, p);
  return p;
}

} // namespace

BlockPartition parse_partition(const GraphicalModel &model, std::string_view text)
{
  return parse_partition_lines(model, lines_of(text));
}

std::string format_candidates(const GraphicalModel &model, const std::vector<BlockPartition> &partitions)
{
  std::string out;
  for (std::size_t i = 0; i < partitions.size(); ++i) {
    if (i > 0)
      out += "---\n";
    out += format_partition(model, partitions[i]);
  }
  return out;
}

std::vector<BlockPartition> parse_candidates(const GraphicalModel &model, std::string_view text)
{
  std::vector<BlockPartition> out;
  std::vector<std::string_view> current;
  auto flush = [&] {
    bool any = std::any_of(current.begin(), current.end(),
                           [](std::string_view l) { return !split_ws(l).empty(); });
    if (any)
      out.push_back(parse_partition_lines(model, current));
    current.clear();
  };
  for (std::string_view line : lines_of(text)) {
    auto tok = split_ws(line);
    if (tok.size() == 1 && tok[0] == "---")
      flush();
    else
      current.push_back(line);
  }
  flush();
  return out;
}

std::string partition_hash(const GraphicalModel &model, const BlockPartition &partition)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : format_partition(model, canonical_partition(partition))) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

BlockValueSet::BlockValueSet(const GraphicalModel &model, BlockPartition partition)
  : partition_(std::move(partition))
{
  require_valid_partition(model, partition_);
  block_of_var_.assign(model.num_variables(), -1);
  for (std::size_t b = 0; b < partition_.blocks.size(); ++b) {
    const Block &block = partition_.blocks[b];
    std::vector<int> strides(block.size());
    std::uint64_t count = 1;
    for (std::size_t i = block.size(); i-- > 0;) {
      strides[i] = static_cast<int>(count);
      count *= static_cast<std::uint64_t>(model.domain_size(block.vars[i]));
      if (count > (std::uint64_t{1} << 24))
        throw Error("cap_exceeded", "block has too many assignments");
    }
    strides_.push_back(std::move(strides));
    offsets_.push_back(static_cast<int>(block_of_.size()));
    counts_.push_back(static_cast<int>(count));
    for (int v : block.vars)
      block_of_var_[static_cast<std::size_t>(v)] = static_cast<int>(b);

    std::vector<int> values(block.size(), 0);
    for (std::uint64_t k = 0; k < count; ++k) {
      block_of_.push_back(static_cast<int>(b));
      flat_offsets_.push_back(static_cast<int>(flat_values_.size()));
      flat_values_.insert(flat_values_.end(), values.begin(), values.end());
      for (std::size_t i = block.size(); i-- > 0;) {
        if (++values[i] < model.domain_size(block.vars[i]))
          break;
        values[i] = 0;
      }
    }
  }
}

std::span<const int> BlockValueSet::values(int index) const
{
  auto b = static_cast<std::size_t>(block_of(index));
  return std::span<const int>(flat_values_).subspan(
      static_cast<std::size_t>(flat_offsets_[static_cast<std::size_t>(index)]), partition_.blocks[b].size());
}

BVPair BlockValueSet::pair(int index) const
{
  auto v = values(index);
  return BVPair{partition_.blocks[static_cast<std::size_t>(block_of(index))], {v.begin(), v.end()}};
}

int BlockValueSet::consistent_index(std::size_t b, std::span<const int> state) const
{
  const Block &block = partition_.blocks[b];
  int local = 0;
  for (std::size_t i = 0; i < block.size(); ++i)
    local += state[static_cast<std::size_t>(block.vars[i])] * strides_[b][i];
  return offsets_[b] + local;
}

int BlockValueSet::index_of(std::size_t b, std::span<const int> values) const
{
  int local = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    local += values[i] * strides_[b][i];
  return offsets_[b] + local;
}

BlockModel::BlockModel(const GraphicalModel &model, BlockPartition partition, std::uint64_t feature_cap)
  : values_(model, std::move(partition)), log_offset_(model.log_offset())
{
  State scratch(model.num_variables(), 0);
  for (const Feature &f : model.features()) {
    BlockFeature bf;
    bf.weight = f.weight;
    for (const Literal &l : f.literals)
      bf.blocks.push_back(values_.block_of_variable(l.var));
    std::sort(bf.blocks.begin(), bf.blocks.end());
    bf.blocks.erase(std::unique(bf.blocks.begin(), bf.blocks.end()), bf.blocks.end());

    std::uint64_t joint = 1;
    for (int b : bf.blocks) {
      joint *= static_cast<std::uint64_t>(values_.count(static_cast<std::size_t>(b)));
      if (joint > feature_cap)
        throw Error("cap_exceeded", "transformed feature spans more than " +
                                        std::to_string(feature_cap) + " joint block assignments");
    }

    // Codes are enumerated in increasing order, so `satisfying` ends up sorted.
    std::vector<int> local(bf.blocks.size(), 0);
    for (std::uint64_t code = 0; code < joint; ++code) {
      std::uint64_t rest = code;
      for (std::size_t i = bf.blocks.size(); i-- > 0;) {
        auto cnt = static_cast<std::uint64_t>(values_.count(static_cast<std::size_t>(bf.blocks[i])));
        local[i] = static_cast<int>(rest % cnt);
        rest /= cnt;
      }
      for (std::size_t i = 0; i < bf.blocks.size(); ++i) {
        auto b = static_cast<std::size_t>(bf.blocks[i]);
        const Block &block = values_.block(b);
        auto vals = values_.values(values_.offset(b) + local[i]);
        for (std::size_t k = 0; k < block.size(); ++k)
          scratch[static_cast<std::size_t>(block.vars[k])] = vals[k];
      }
      if (f.satisfied(scratch))
        bf.satisfying.push_back(code);
    }
    features_.push_back(std::move(bf));
  }
}

State BlockModel::map_state(std::span<const int> state) const
{
  State out(values_.num_blocks());
  for (std::size_t b = 0; b < out.size(); ++b)
    out[b] = values_.consistent_index(b, state) - values_.offset(b);
  return out;
}

State BlockModel::inverse_map(std::span<const int> block_state) const
{
  State out(values_.num_variables(), 0);
  for (std::size_t b = 0; b < block_state.size(); ++b) {
    const Block &block = values_.block(b);
    auto vals = values_.values(values_.offset(b) + block_state[b]);
    for (std::size_t k = 0; k < block.size(); ++k)
      out[static_cast<std::size_t>(block.vars[k])] = vals[k];
  }
  return out;
}

double BlockModel::log_weight(std::span<const int> block_state) const
{
  double total = log_offset_;
  for (const BlockFeature &f : features_) {
    std::uint64_t code = 0;
    for (int b : f.blocks)
      code = code * static_cast<std::uint64_t>(values_.count(static_cast<std::size_t>(b))) +
             static_cast<std::uint64_t>(block_state[static_cast<std::size_t>(b)]);
    if (std::binary_search(f.satisfying.begin(), f.satisfying.end(), code))
      total += f.weight;
  }
  return total;
}

} // namespace bvmc
