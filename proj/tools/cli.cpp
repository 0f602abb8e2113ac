#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "bvmc/error.hpp"
#include "bvmc/group.hpp"
#include "bvmc/harness.hpp"
#include "bvmc/mcmc.hpp"
#include "bvmc/model.hpp"
#include "bvmc/partition.hpp"
#include "bvmc/symmetry.hpp"

namespace bvmc {

namespace {

std::string read_file(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error("io_error", "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string &path, const std::string &text, std::ostream &out)
{
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error("io_error", "cannot write '" + path + "'");
  f << text;
  if (!f)
    throw Error("io_error", "failed writing '" + path + "'");
}

struct ModelArgs
{
  std::string model_path;
  std::string evidence_path;
};

void add_model_args(CLI::App *cmd, ModelArgs &a, bool with_evidence = true)
{
  cmd->add_option("-m,--model", a.model_path, "Model file")->required()->check(CLI::ExistingFile);
  if (with_evidence)
    cmd->add_option("-e,--evidence", a.evidence_path, "Evidence file (name=value lines)")->check(CLI::ExistingFile);
}

struct LoadedModel
{
  GraphicalModel base;
  Evidence evidence;
  GraphicalModel clausal; // conditioned and normalized
};

LoadedModel load(const ModelArgs &a)
{
  LoadedModel m;
  m.base = parse_model(read_file(a.model_path));
  if (!a.evidence_path.empty())
    m.evidence = parse_evidence(m.base, read_file(a.evidence_path));
  m.clausal = normalize_to_clauses(condition(m.base, m.evidence));
  return m;
}

struct PartitionArgs
{
  std::string partition_path;
  bool singleton = false;
  int max_block = 2;
  std::uint64_t seed = 1;
};

void add_partition_args(CLI::App *cmd, PartitionArgs &a)
{
  auto *file = cmd->add_option("-p,--partition", a.partition_path, "Partition file")->check(CLI::ExistingFile);
  auto *single = cmd->add_flag("--singleton-partition", a.singleton, "Use one block per variable");
  file->excludes(single);
  cmd->add_option("--max-block", a.max_block, "Largest block size for the heuristic")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
}

BlockPartition choose_partition(const GraphicalModel &clausal, const PartitionArgs &a)
{
  if (!a.partition_path.empty())
    return parse_partition(clausal, read_file(a.partition_path));
  if (a.singleton)
    return singleton_partition(clausal);
  PartitionHeuristicOptions opts;
  opts.max_block = a.max_block;
  opts.seed = a.seed;
  return generate_block_partitions(clausal, opts).front();
}

OrbitMode orbit_mode_of(const std::string &s) { return s == "exact" ? OrbitMode::Exact : OrbitMode::Pra; }

std::string format_state(const GraphicalModel &model, std::span<const int> state)
{
  std::string out;
  for (std::size_t v = 0; v < state.size(); ++v) {
    if (v)
      out += ' ';
    out += model.name(static_cast<int>(v)) + "=" + std::to_string(state[v]);
  }
  return out;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Block-value symmetry detection and orbital MCMC for discrete graphical models", "bvmc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  // gen
  auto *gen = app.add_subcommand("gen", "Generate a benchmark model");
  std::string domain;
  JobSearchParams job;
  StudentCurriculumParams student;
  int n = 5;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--domain", domain, "job-search or student-curriculum")
      ->required()
      ->check(CLI::IsMember({"job-search", "student-curriculum"}));
  gen->add_option("--n", n, "Number of people or students")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--edge-prob", job.edge_prob, "Job search: probability a pair is connected")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--weight-low", job.weight_low, "Job search: lower end of per-person weights")->capture_default_str();
  gen->add_option("--weight-high", job.weight_high, "Job search: upper end of per-person weights")
      ->capture_default_str();
  gen->add_option("--w3", job.w3, "Job search: implication weight")->capture_default_str();
  gen->add_option("--friend-prob", student.friend_prob, "Student curriculum: friendship probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--weight-pool", student.weight_pool, "Student curriculum: comma-separated weights")
      ->delimiter(',')
      ->capture_default_str();
  gen->add_option("--w", student.w, "Student curriculum: friendship weight")->capture_default_str();
  gen->add_option("-o,--output", gen_out, "Output file (default stdout)");

  // partitions
  auto *parts = app.add_subcommand("partitions", "Sample candidate block partitions");
  ModelArgs parts_model;
  add_model_args(parts, parts_model);
  PartitionHeuristicOptions parts_opts;
  std::string parts_out;
  parts->add_option("--max-block", parts_opts.max_block, "Largest block size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  parts->add_option("-k,--k", parts_opts.k_partitions, "Number of partitions")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  parts->add_option("--seed", parts_opts.seed, "Random seed")->capture_default_str();
  parts->add_option("-o,--output", parts_out, "Output file (default stdout)");

  // symmetries
  auto *syms = app.add_subcommand("symmetries", "Compute BV symmetry generators for one partition");
  ModelArgs syms_model;
  add_model_args(syms, syms_model);
  PartitionArgs syms_part;
  add_partition_args(syms, syms_part);
  std::string syms_out, graph_out;
  std::uint64_t node_budget = AutomorphismOptions{}.node_budget;
  syms->add_option("-o,--output", syms_out, "Symmetry file (default stdout)");
  syms->add_option("--graph-out", graph_out, "Also write the colored graph");
  syms->add_option("--node-budget", node_budget, "Search tree budget")->capture_default_str();

  // exact
  auto *exact = app.add_subcommand("exact", "Exact marginals by enumeration");
  ModelArgs exact_model;
  add_model_args(exact, exact_model);
  std::string exact_out;
  std::uint64_t cap = 0;
  exact->add_option("-o,--output", exact_out, "Marginal file (default stdout)");
  exact->add_option("--cap", cap, "Largest component state count (default BVMC_STATE_CAP or 2^24)");

  // run
  auto *run = app.add_subcommand("run", "Run a sampler and write marginal snapshots");
  ModelArgs run_model;
  add_model_args(run, run_model);
  PartitionArgs run_part;
  add_partition_args(run, run_part);
  std::string chain_name = "vanilla", orbit_mode = "pra", candidates_path, run_out;
  ChainConfig cfg;
  int k = 1, repeats = 1, jobs = 1;
  run->add_option("--chain", chain_name, "vanilla, bv, vv or aggregate")
      ->capture_default_str()
      ->check(CLI::IsMember({"vanilla", "bv", "vv", "aggregate"}));
  run->add_option("--alpha", cfg.alpha, "Orbital move probability")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  run->add_option("--steps", cfg.steps, "Counted steps after burn-in")->capture_default_str();
  run->add_option("--burn-in", cfg.burn_in, "Discarded steps")->capture_default_str();
  run->add_option("--thin", cfg.thin, "Keep every n-th state")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--report-every", cfg.report_every, "Snapshot interval (0: end only)")->capture_default_str();
  run->add_option("--orbit-mode", orbit_mode, "pra or exact")
      ->capture_default_str()
      ->check(CLI::IsMember({"pra", "exact"}));
  run->add_option("--candidates", candidates_path, "Candidate partitions for aggregate")->check(CLI::ExistingFile);
  run->add_option("-k,--k", k, "Heuristic partitions for aggregate")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("--repeats", repeats, "Independent chains merged into one estimate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--jobs", jobs, "Parallel chains")->capture_default_str()->check(CLI::PositiveNumber);
  run->add_option("-o,--output", run_out, "CSV file (default stdout)");

  // eval
  auto *eval = app.add_subcommand("eval", "Run a KL experiment or score a marginal file");
  std::string spec_path, out_dir, eval_model_path, reference_path, estimate_path, eval_evidence;
  int eval_jobs = 1;
  auto *spec_opt = eval->add_option("--spec", spec_path, "Experiment spec file")->check(CLI::ExistingFile);
  eval->add_option("--out-dir", out_dir, "Directory for kl.csv, raw.csv and timings.csv")->needs(spec_opt);
  eval->add_option("--jobs", eval_jobs, "Parallel repeats")->capture_default_str()->check(CLI::PositiveNumber);
  auto *eval_model_opt =
      eval->add_option("-m,--model", eval_model_path, "Model for scoring a marginal file")->check(CLI::ExistingFile);
  auto *estimate_opt =
      eval->add_option("--estimate", estimate_path, "Marginal file to score")->check(CLI::ExistingFile);
  eval->add_option("--reference", reference_path, "Reference marginal file (default: exact)")
      ->check(CLI::ExistingFile)
      ->needs(estimate_opt);
  eval->add_option("-e,--evidence", eval_evidence, "Evidence for the exact reference")->check(CLI::ExistingFile);
  estimate_opt->needs(eval_model_opt);
  spec_opt->excludes(estimate_opt);

  // orbit
  auto *orbit = app.add_subcommand("orbit", "Enumerate the orbit of a state (debugging aid)");
  ModelArgs orbit_model;
  add_model_args(orbit, orbit_model);
  PartitionArgs orbit_part;
  add_partition_args(orbit, orbit_part);
  std::string state_text, state_path, orbit_out;
  std::size_t orbit_cap = kDefaultOrbitCap;
  auto *state_opt = orbit->add_option("--state", state_text, "Full assignment, e.g. \"A=1 B=0\"");
  auto *state_file_opt = orbit->add_option("--state-file", state_path, "Assignment file")->check(CLI::ExistingFile);
  state_opt->excludes(state_file_opt);
  orbit->add_option("--cap", orbit_cap, "Largest orbit to enumerate")->capture_default_str();
  orbit->add_option("-o,--output", orbit_out, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      GraphicalModel m;
      if (domain == "job-search") {
        job.n_people = n;
        job.seed = gen_seed;
        m = gen_job_search(job);
      } else {
        student.n_students = n;
        student.seed = gen_seed;
        m = gen_student_curriculum(student);
      }
      write_output(gen_out, serialize_model(m), out);
    } else if (*parts) {
      LoadedModel m = load(parts_model);
      write_output(parts_out, format_candidates(m.clausal, generate_block_partitions(m.clausal, parts_opts)), out);
    } else if (*syms) {
      LoadedModel m = load(syms_model);
      BlockPartition p = choose_partition(m.clausal, syms_part);
      AutomorphismOptions opts;
      opts.node_budget = node_budget;
      BVSymmetries result = compute_bv_symmetries(m.clausal, p, opts);
      if (!graph_out.empty()) {
        ColoredGraph g = build_bv_graph(m.clausal, *result.values);
        write_output(graph_out, export_colored_graph(g), out);
      }
      write_output(syms_out, format_symmetries(partition_hash(m.clausal, p), result.generators), out);
      err << "graph: " << result.graph_nodes << " nodes, " << result.graph_edges << " edges; "
          << result.generators.size() << " generators\n";
    } else if (*exact) {
      GraphicalModel m = parse_model(read_file(exact_model.model_path));
      Evidence ev;
      if (!exact_model.evidence_path.empty())
        ev = parse_evidence(m, read_file(exact_model.evidence_path));
      MarginalEstimate marg = exact_marginals(m, ev, cap ? cap : default_state_cap());
      write_output(exact_out, format_marginals(m, marg), out);
    } else if (*run) {
      LoadedModel m = load(run_model);
      cfg.orbit_mode = orbit_mode_of(orbit_mode);
      if (chain_name == "vanilla") {
        cfg.kind = ChainKind::Vanilla;
      } else if (chain_name == "vv") {
        cfg.kind = ChainKind::BV;
        cfg.alpha = 1.0;
        cfg.partitions = {singleton_partition(m.clausal)};
      } else if (chain_name == "bv") {
        cfg.kind = ChainKind::BV;
        cfg.partitions = {choose_partition(m.clausal, run_part)};
      } else {
        cfg.kind = ChainKind::Aggregate;
        if (!candidates_path.empty()) {
          cfg.partitions = parse_candidates(m.clausal, read_file(candidates_path));
        } else {
          PartitionHeuristicOptions opts;
          opts.max_block = run_part.max_block;
          opts.k_partitions = k;
          opts.seed = run_part.seed;
          cfg.partitions = generate_block_partitions(m.clausal, opts);
        }
      }
      validate_config(m.clausal, cfg);

      // Each repeat gets its own seed; snapshots are merged step by step.
      std::vector<ChainRun> runs(static_cast<std::size_t>(repeats));
      std::vector<std::exception_ptr> errors(runs.size());
      std::atomic<int> next{0};
      auto worker = [&] {
        for (int r = next++; r < repeats; r = next++) {
          ChainConfig c = cfg;
          c.seed = repeats == 1 ? run_part.seed : derive_seed(run_part.seed, static_cast<std::uint64_t>(r));
          try {
            runs[static_cast<std::size_t>(r)] = run_chain(m.clausal, c);
          } catch (...) {
            errors[static_cast<std::size_t>(r)] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> pool;
      for (int i = 1; i < std::min(jobs, repeats); ++i)
        pool.emplace_back(worker);
      worker();
      for (auto &t : pool)
        t.join();
      for (auto &e : errors)
        if (e)
          std::rethrow_exception(e);

      ChainConfig header_cfg = cfg;
      header_cfg.seed = run_part.seed;
      std::string text = format_run_header(m.clausal, header_cfg);
      for (std::size_t s = 0; s < runs.front().snapshots.size(); ++s) {
        Snapshot merged = runs.front().snapshots[s];
        for (std::size_t r = 1; r < runs.size(); ++r) {
          merged.marginals.merge(runs[r].snapshots[s].marginals);
          merged.elapsed_ms = std::max(merged.elapsed_ms, runs[r].snapshots[s].elapsed_ms);
        }
        text += format_snapshot_rows(m.clausal, merged);
      }
      write_output(run_out, text, out);
    } else if (*eval) {
      if (!spec_path.empty()) {
        ExperimentSpec spec = parse_experiment_spec(read_file(spec_path));
        ExperimentResult result = run_experiment(spec, eval_jobs);
        if (out_dir.empty()) {
          out << format_kl_csv(result);
        } else {
          std::filesystem::create_directories(out_dir);
          auto dir = std::filesystem::path(out_dir);
          write_output((dir / "kl.csv").string(), format_kl_csv(result), out);
          write_output((dir / "raw.csv").string(), format_raw_csv(result), out);
          write_output((dir / "timings.csv").string(), format_timings_csv(result), out);
        }
      } else if (!estimate_path.empty()) {
        GraphicalModel m = parse_model(read_file(eval_model_path));
        MarginalEstimate estimate = parse_marginals(m, read_file(estimate_path));
        MarginalEstimate reference;
        if (!reference_path.empty()) {
          reference = parse_marginals(m, read_file(reference_path));
        } else {
          Evidence ev;
          if (!eval_evidence.empty())
            ev = parse_evidence(m, read_file(eval_evidence));
          reference = exact_marginals(m, ev);
        }
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", kl_divergence(reference, estimate));
        out << "kl " << buf << '\n';
      } else {
        err << "error: usage: eval needs --spec or --model with --estimate\n" << eval->help();
        return kExitUsage;
      }
    } else if (*orbit) {
      LoadedModel m = load(orbit_model);
      if (state_text.empty() && state_path.empty()) {
        err << "error: usage: orbit needs --state or --state-file\n" << orbit->help();
        return kExitUsage;
      }
      std::string text = state_path.empty() ? state_text : read_file(state_path);
      std::replace(text.begin(), text.end(), ' ', '\n');
      std::replace(text.begin(), text.end(), ',', '\n');
      Evidence assignment = parse_evidence(m.clausal, text);
      if (assignment.size() != m.clausal.num_variables())
        throw Error("invalid_argument", "the state must assign every free variable");
      State state(m.clausal.num_variables());
      for (auto [var, value] : assignment)
        state[static_cast<std::size_t>(var)] = value;
      BlockPartition p = choose_partition(m.clausal, orbit_part);
      auto group = build_group(m.clausal, p);
      OrbitResult orb = orbit_enumerate(*group, state, orbit_cap);
      std::string body = "# partition " + partition_hash(m.clausal, p) + "\n# orbit size " +
                         std::to_string(orb.states.size()) + (orb.complete ? " (complete)" : " (truncated at cap)") +
                         "\n";
      for (const State &s : orb.states)
        body += format_state(m.clausal, s) + "\n";
      write_output(orbit_out, body, out);
    }
  } catch (const Error &e) {
    err << "error: " << e.code() << ": " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception &e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

} // namespace bvmc
