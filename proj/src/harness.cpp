#include "bvmc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "bvmc/error.hpp"
#include "bvmc/partition.hpp"

namespace bvmc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string_view trim(std::string_view s)
{
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

template <class T> T parse_int(std::string_view key, std::string_view text)
{
  T x{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error("parse_error", "invalid integer for '" + std::string(key) + "': " + std::string(text));
  return x;
}

bool parse_bool(std::string_view key, std::string_view text)
{
  if (text == "true" || text == "1" || text == "yes")
    return true;
  if (text == "false" || text == "0" || text == "no")
    return false;
  throw Error("parse_error", "invalid boolean for '" + std::string(key) + "': " + std::string(text));
}

std::vector<std::string_view> split_list(std::string_view text)
{
  std::vector<std::string_view> out;
  while (true) {
    auto comma = text.find(',');
    auto item = trim(text.substr(0, comma));
    if (!item.empty())
      out.push_back(item);
    if (comma == std::string_view::npos)
      break;
    text = text.substr(comma + 1);
  }
  return out;
}

OrbitMode parse_orbit_mode(std::string_view text)
{
  if (text == "pra")
    return OrbitMode::Pra;
  if (text == "exact")
    return OrbitMode::Exact;
  throw Error("parse_error", "orbit_mode must be 'pra' or 'exact'");
}

} // namespace

double kl_divergence(const MarginalEstimate &reference, const MarginalEstimate &estimate, double eps)
{
  if (reference.probs.size() != estimate.probs.size())
    throw Error("shape_mismatch", "marginals cover different variable sets");
  if (reference.probs.empty())
    return 0.0;
  double total = 0;
  for (std::size_t i = 0; i < reference.probs.size(); ++i) {
    const auto &p = reference.probs[i];
    const auto &q = estimate.probs[i];
    if (p.size() != q.size())
      throw Error("shape_mismatch", "marginal rows have different domain sizes");
    double qsum = std::accumulate(q.begin(), q.end(), 0.0) + eps * static_cast<double>(q.size());
    double kl = 0;
    for (std::size_t v = 0; v < p.size(); ++v)
      if (p[v] > 0)
        kl += p[v] * std::log(p[v] / ((q[v] + eps) / qsum));
    total += std::max(kl, 0.0);
  }
  return total / static_cast<double>(reference.probs.size());
}

MarginalEstimate reference_marginals(const GraphicalModel &model, const Evidence &evidence, ReferenceMode mode,
                                     std::uint64_t gibbs_steps, std::uint64_t seed)
{
  if (mode == ReferenceMode::Exact)
    return exact_marginals(model, evidence);
  validate_evidence(model, evidence);
  GraphicalModel conditioned = condition(model, evidence);
  ChainConfig config;
  config.kind = ChainKind::Vanilla;
  config.steps = gibbs_steps;
  config.burn_in = gibbs_steps / 10;
  config.seed = seed;
  ChainRun run = run_chain(conditioned, config);
  const MarginalEstimate &free = run.snapshots.back().marginals;
  MarginalEstimate out;
  out.samples = free.samples;
  std::size_t next = 0;
  for (const Variable &v : model.variables()) {
    if (auto ev = evidence.find(v.id); ev != evidence.end()) {
      std::vector<double> row(static_cast<std::size_t>(v.domain_size), 0.0);
      row[static_cast<std::size_t>(ev->second)] = 1.0;
      out.probs.push_back(std::move(row));
    } else {
      out.probs.push_back(free.probs[next++]);
    }
  }
  return out;
}

MeanCI mean_ci95(std::span<const double> values)
{
  MeanCI ci;
  if (values.empty())
    return ci;
  const double n = static_cast<double>(values.size());
  ci.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  ci.lo = ci.hi = ci.mean;
  if (values.size() < 2)
    return ci;
  double ss = 0;
  for (double x : values)
    ss += (x - ci.mean) * (x - ci.mean);
  double half = 1.96 * std::sqrt(ss / (n - 1)) / std::sqrt(n);
  ci.lo = ci.mean - half;
  ci.hi = ci.mean + half;
  return ci;
}

Evidence random_evidence(const GraphicalModel &model, double fraction, std::uint64_t seed)
{
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw Error("invalid_argument", "evidence fraction must lie in [0, 1]");
  Rng rng(seed);
  std::vector<int> ids(model.num_variables());
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  auto k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(ids.size())));
  Evidence ev;
  for (std::size_t i = 0; i < k; ++i)
    ev[ids[i]] = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(model.domain_size(ids[i]))));
  return ev;
}

ExperimentSpec parse_experiment_spec(std::string_view text)
{
  ExperimentSpec spec;
  spec.configs.clear();
  ExperimentConfig *current = nullptr;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty())
      continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    try {
      if (line == "[config]") {
        spec.configs.emplace_back();
        current = &spec.configs.back();
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw Error("parse_error", "expected 'key = value'");
      std::string_view key = trim(line.substr(0, eq));
      std::string_view value = trim(line.substr(eq + 1));
      if (current) {
        if (key == "name")
          current->name = std::string(value);
        else if (key == "chain") {
          if (value != "vanilla" && value != "vv" && value != "bv" && value != "aggregate")
            throw Error("parse_error", "chain must be vanilla, vv, bv or aggregate");
          current->chain = std::string(value);
        } else if (key == "alpha")
          current->alpha = parse_real(value);
        else if (key == "k")
          current->k_partitions = parse_int<int>(key, value);
        else if (key == "max_block")
          current->max_block = parse_int<int>(key, value);
        else if (key == "orbit_mode")
          current->orbit_mode = parse_orbit_mode(value);
        else if (key == "thin")
          current->thin = parse_int<std::uint64_t>(key, value);
        else
          throw Error("parse_error", "unknown config key '" + std::string(key) + "'");
        continue;
      }
      auto &m = spec.model;
      if (key == "model") {
        if (value == "job-search")
          m.kind = ModelSource::Kind::JobSearch;
        else if (value == "student-curriculum")
          m.kind = ModelSource::Kind::StudentCurriculum;
        else if (value == "file")
          m.kind = ModelSource::Kind::File;
        else
          throw Error("parse_error", "model must be job-search, student-curriculum or file");
      } else if (key == "model_file") {
        m.path = std::string(value);
      } else if (key == "fixed_model") {
        m.fixed = parse_bool(key, value);
      } else if (key == "n") {
        m.job.n_people = m.student.n_students = parse_int<int>(key, value);
      } else if (key == "edge_prob") {
        m.job.edge_prob = parse_real(value);
      } else if (key == "weight_low") {
        m.job.weight_low = parse_real(value);
      } else if (key == "weight_high") {
        m.job.weight_high = parse_real(value);
      } else if (key == "w3") {
        m.job.w3 = parse_real(value);
      } else if (key == "friend_prob") {
        m.student.friend_prob = parse_real(value);
      } else if (key == "w") {
        m.student.w = parse_real(value);
      } else if (key == "weight_pool") {
        m.student.weight_pool.clear();
        for (auto item : split_list(value))
          m.student.weight_pool.push_back(parse_real(item));
      } else if (key == "evidence_fraction") {
        spec.evidence_fraction = parse_real(value);
      } else if (key == "repeats") {
        spec.n_repeats = parse_int<int>(key, value);
      } else if (key == "seed") {
        spec.base_seed = parse_int<std::uint64_t>(key, value);
      } else if (key == "seeds") {
        spec.seeds.clear();
        for (auto item : split_list(value))
          spec.seeds.push_back(parse_int<std::uint64_t>(key, item));
      } else if (key == "checkpoints") {
        spec.checkpoints.clear();
        for (auto item : split_list(value))
          spec.checkpoints.push_back(parse_int<std::uint64_t>(key, item));
      } else if (key == "burn_in") {
        spec.burn_in = parse_int<std::uint64_t>(key, value);
      } else if (key == "reference") {
        if (value == "exact")
          spec.reference = ReferenceMode::Exact;
        else if (value == "gibbs")
          spec.reference = ReferenceMode::LongGibbs;
        else
          throw Error("parse_error", "reference must be 'exact' or 'gibbs'");
      } else if (key == "reference_steps") {
        spec.reference_steps = parse_int<std::uint64_t>(key, value);
      } else {
        throw Error("parse_error", "unknown key '" + std::string(key) + "'");
      }
    } catch (const Error &e) {
      throw Error(e.code(), where + e.what());
    }
  }
  for (std::size_t i = 0; i < spec.configs.size(); ++i)
    if (spec.configs[i].name.empty())
      spec.configs[i].name = spec.configs[i].chain + std::to_string(i);
  validate_experiment_spec(spec);
  return spec;
}

void validate_experiment_spec(const ExperimentSpec &spec)
{
  if (spec.n_repeats < 1)
    throw Error("invalid_argument", "repeats must be at least 1");
  if (!spec.seeds.empty() && spec.seeds.size() != static_cast<std::size_t>(spec.n_repeats))
    throw Error("invalid_argument", "need exactly one seed per repeat");
  if (spec.checkpoints.empty())
    throw Error("invalid_argument", "need at least one checkpoint");
  if (!std::is_sorted(spec.checkpoints.begin(), spec.checkpoints.end(), std::less_equal<>()) ||
      spec.checkpoints.front() == 0)
    throw Error("invalid_argument", "checkpoints must be positive and strictly ascending");
  if (spec.configs.empty())
    throw Error("invalid_argument", "need at least one [config] section");
  for (const auto &c : spec.configs) {
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0))
      throw Error("invalid_argument", "alpha must lie in [0, 1]");
    if (c.k_partitions < 1 || c.max_block < 1 || c.thin < 1)
      throw Error("invalid_argument", "k, max_block and thin must be at least 1");
  }
  for (std::size_t i = 0; i < spec.configs.size(); ++i)
    for (std::size_t j = i + 1; j < spec.configs.size(); ++j)
      if (spec.configs[i].name == spec.configs[j].name)
        throw Error("invalid_argument", "duplicate config name '" + spec.configs[i].name + "'");
  if (spec.model.kind == ModelSource::Kind::File && spec.model.path.empty())
    throw Error("invalid_argument", "model = file needs model_file");
}

std::uint64_t repeat_seed(const ExperimentSpec &spec, int repeat)
{
  if (!spec.seeds.empty())
    return spec.seeds[static_cast<std::size_t>(repeat)];
  return derive_seed(spec.base_seed, static_cast<std::uint64_t>(repeat));
}

const KLCurve &ExperimentResult::curve(std::string_view config) const
{
  for (const KLCurve &c : curves)
    if (c.config == config)
      return c;
  throw Error("invalid_argument", "no curve for config '" + std::string(config) + "'");
}

namespace {

GraphicalModel load_model(const ModelSource &source, std::uint64_t seed)
{
  switch (source.kind) {
  case ModelSource::Kind::File: {
    std::ifstream in(source.path);
    if (!in)
      throw Error("io_error", "cannot read model file '" + source.path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
  }
  case ModelSource::Kind::JobSearch: {
    JobSearchParams p = source.job;
    if (!source.fixed)
      p.seed = seed;
    return gen_job_search(p);
  }
  case ModelSource::Kind::StudentCurriculum: {
    StudentCurriculumParams p = source.student;
    if (!source.fixed)
      p.seed = seed;
    return gen_student_curriculum(p);
  }
  }
  throw Error("internal", "unknown model source");
}

std::vector<RepeatResult> run_repeat(const ExperimentSpec &spec, int repeat)
{
  const std::uint64_t seed = repeat_seed(spec, repeat);
  StageTimings shared;

  auto t0 = Clock::now();
  GraphicalModel model = load_model(spec.model, derive_seed(seed, 10));
  shared.generate_ms = ms_since(t0);

  t0 = Clock::now();
  Evidence evidence = random_evidence(model, spec.evidence_fraction, derive_seed(seed, 11));
  GraphicalModel conditioned = normalize_to_clauses(condition(model, evidence));
  shared.condition_ms = ms_since(t0);

  t0 = Clock::now();
  MarginalEstimate reference =
      reference_marginals(conditioned, {}, spec.reference, spec.reference_steps, derive_seed(seed, 14));
  shared.reference_ms = ms_since(t0);

  std::vector<RepeatResult> out;
  for (const ExperimentConfig &cfg : spec.configs) {
    RepeatResult r;
    r.config = cfg.name;
    r.repeat = repeat;
    r.seed = seed;
    r.timings = shared;

    ChainConfig chain;
    chain.alpha = cfg.alpha;
    chain.seed = derive_seed(seed, 13);
    chain.orbit_mode = cfg.orbit_mode;
    chain.burn_in = spec.burn_in;
    chain.thin = cfg.thin;

    t0 = Clock::now();
    if (cfg.chain == "vanilla") {
      chain.kind = ChainKind::Vanilla;
    } else if (cfg.chain == "vv") {
      chain.kind = ChainKind::BV;
      chain.alpha = 1.0;
      chain.partitions = {singleton_partition(conditioned)};
    } else {
      PartitionHeuristicOptions opts;
      opts.max_block = cfg.max_block;
      opts.k_partitions = cfg.chain == "bv" ? 1 : cfg.k_partitions;
      opts.seed = derive_seed(seed, 12);
      chain.kind = cfg.chain == "bv" ? ChainKind::BV : ChainKind::Aggregate;
      chain.partitions = generate_block_partitions(conditioned, opts);
    }
    r.timings.partitions_ms = ms_since(t0);

    t0 = Clock::now();
    std::vector<std::shared_ptr<const SymmetryGroup>> groups;
    for (const BlockPartition &p : chain.partitions) {
      groups.push_back(build_group(conditioned, p));
      r.generators += groups.back()->generators().size();
    }
    r.timings.symmetries_ms = ms_since(t0);

    t0 = Clock::now();
    Chain runner(conditioned, chain, std::move(groups));
    for (std::uint64_t t = 0; t < spec.burn_in; ++t)
      runner.step();
    MarginalEstimate acc = MarginalEstimate::zeros(conditioned);
    std::size_t next = 0;
    const std::uint64_t last = spec.checkpoints.back();
    for (std::uint64_t t = 1; t <= last * cfg.thin && next < spec.checkpoints.size(); ++t) {
      runner.step();
      if (t % cfg.thin != 0)
        continue;
      acc.add_sample(runner.state());
      if (acc.samples == spec.checkpoints[next]) {
        acc.normalize();
        CheckpointResult cp;
        cp.samples = acc.samples;
        cp.elapsed_ms = r.timings.partitions_ms + r.timings.symmetries_ms + ms_since(t0);
        cp.kl = kl_divergence(reference, acc);
        r.checkpoints.push_back(cp);
        ++next;
      }
    }
    r.timings.chain_ms = ms_since(t0);
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec &spec, int jobs)
{
  validate_experiment_spec(spec);
  const int n = spec.n_repeats;
  std::vector<std::vector<RepeatResult>> per_repeat(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < n; r = next++) {
      try {
        per_repeat[static_cast<std::size_t>(r)] = run_repeat(spec, r);
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp(jobs, 1, n);
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  ExperimentResult result;
  for (const ExperimentConfig &cfg : spec.configs) {
    KLCurve curve;
    curve.config = cfg.name;
    std::vector<const RepeatResult *> rows;
    for (const auto &rep : per_repeat)
      for (const auto &r : rep)
        if (r.config == cfg.name)
          rows.push_back(&r);
    for (std::size_t c = 0; c < spec.checkpoints.size(); ++c) {
      std::vector<double> kls;
      double ms = 0;
      for (const RepeatResult *r : rows) {
        kls.push_back(r->checkpoints[c].kl);
        ms += r->checkpoints[c].elapsed_ms;
      }
      MeanCI ci = mean_ci95(kls);
      curve.points.push_back(CurvePoint{static_cast<double>(spec.checkpoints[c]), "samples", ci});
      curve.points.push_back(CurvePoint{ms / static_cast<double>(rows.size()), "ms", ci});
    }
    result.curves.push_back(std::move(curve));
  }
  for (auto &rep : per_repeat)
    for (auto &r : rep)
      result.raw.push_back(std::move(r));
  return result;
}

namespace {

std::string fmt(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

} // namespace

std::string format_kl_csv(const ExperimentResult &result)
{
  std::ostringstream out;
  out << "# kl = mean over variables of KL(reference || estimate), estimate smoothed by 1e-6\n";
  out << "# ci = mean +- 1.96 * sd / sqrt(repeats)\n";
  out << "config,checkpoint,axis,mean_kl,ci_lo,ci_hi\n";
  for (const KLCurve &c : result.curves)
    for (const CurvePoint &p : c.points)
      out << c.config << ',' << fmt(p.checkpoint) << ',' << p.axis << ',' << fmt(p.kl.mean) << ','
          << fmt(p.kl.lo) << ',' << fmt(p.kl.hi) << '\n';
  return out.str();
}

std::string format_raw_csv(const ExperimentResult &result)
{
  std::ostringstream out;
  out << "config,repeat,seed,samples,elapsed_ms,kl,generators\n";
  for (const RepeatResult &r : result.raw)
    for (const CheckpointResult &cp : r.checkpoints)
      out << r.config << ',' << r.repeat << ',' << r.seed << ',' << cp.samples << ',' << fmt(cp.elapsed_ms)
          << ',' << fmt(cp.kl) << ',' << r.generators << '\n';
  return out.str();
}

std::string format_timings_csv(const ExperimentResult &result)
{
  std::ostringstream out;
  out << "config,repeat,generate_ms,condition_ms,reference_ms,partitions_ms,symmetries_ms,chain_ms,total_ms\n";
  for (const RepeatResult &r : result.raw) {
    const StageTimings &t = r.timings;
    out << r.config << ',' << r.repeat << ',' << fmt(t.generate_ms) << ',' << fmt(t.condition_ms) << ','
        << fmt(t.reference_ms) << ',' << fmt(t.partitions_ms) << ',' << fmt(t.symmetries_ms) << ','
        << fmt(t.chain_ms) << ',' << fmt(t.total_ms()) << '\n';
  }
  return out.str();
}

} // namespace bvmc
