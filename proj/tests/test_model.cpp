#include <doctest.h>

#include <cmath>
#include <random>

#include "bvmc/error.hpp"
#include "bvmc/model.hpp"
#include "support/oracles.hpp"

using namespace bvmc;

namespace {

std::string error_code(auto &&fn)
{
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  return "";
}

} // namespace

TEST_CASE("parse_model reads variables and features")
{
  GraphicalModel m = parse_model("var A 2\nvar B 2\nfeature OR 1.5 A=1 B=0\n");
  CHECK(m.num_variables() == 2);
  REQUIRE(m.features().size() == 1);
  CHECK(m.features()[0].connective == Connective::Or);
  CHECK(m.features()[0].weight == 1.5);
  CHECK(m.features()[0].literals[0] == Literal{0, 1, true});
  CHECK(m.features()[0].literals[1] == Literal{1, 0, true});
}

TEST_CASE("parse_model rejects malformed input")
{
  CHECK(error_code([] { parse_model("var A 2\nfeature OR 1.0 A=2\n"); }) == "value_out_of_domain");
  CHECK(error_code([] { parse_model("var A 2\nfeature OR 1.0 B=1\n"); }) == "unknown_variable");
  CHECK(error_code([] { parse_model("var A 2\nvar A 3\n"); }) == "duplicate_variable");
  CHECK(error_code([] { parse_model("var A 2\nfeature OR 1.0\n"); }) == "empty_feature");
  CHECK(error_code([] { parse_model("var A 2\nfeature XOR 1.0 A=1\n"); }) == "parse_error");
  CHECK(error_code([] { parse_model("var A 1\n"); }) != "");
  CHECK(error_code([] { parse_model("var A 2\nfeature OR 1.0 A=1 A=1\n"); }) == "duplicate_literal");
}

TEST_CASE("parse_model handles comments, negation and offsets")
{
  GraphicalModel m = parse_model("# header\nvar A 3   # three values\nfeature AND -2 !A=1\noffset 0.25\n");
  CHECK(m.domain_size(0) == 3);
  CHECK(m.features()[0].literals[0] == Literal{0, 1, false});
  CHECK(m.log_offset() == 0.25);
}

TEST_CASE("serialize/parse round trip on random models")
{
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    oracle::RandomModelOptions o;
    o.n_vars = 2 + i % 6;
    o.n_features = i % 8;
    o.max_domain = 3;
    o.not_prob = 0.3;
    GraphicalModel m = oracle::random_model(rng, o);
    m.add_offset(0.1 * i);
    CHECK(parse_model(serialize_model(m)) == m);
  }
}

TEST_CASE("normalize_to_clauses rewrites AND features")
{
  GraphicalModel m = parse_model("var A 2\nvar B 2\nfeature AND 1.5 A=1 B=1\n");
  GraphicalModel n = normalize_to_clauses(m);
  REQUIRE(n.features().size() == 1);
  CHECK(n.features()[0].connective == Connective::Or);
  CHECK(n.features()[0].weight == -1.5);
  CHECK(n.features()[0].literals == std::vector<Literal>{{0, 0, true}, {1, 0, true}});
  CHECK(n.log_offset() == 1.5);
  for (const State &s : oracle::all_states(m))
    CHECK(log_weight(n, s) == doctest::Approx(log_weight(m, s)).epsilon(1e-12));

  GraphicalModel o = parse_model("var A 2\nfeature OR 2 A=1\n");
  CHECK(normalize_to_clauses(o) == o);
}

TEST_CASE("normalization preserves the distribution of random models")
{
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    oracle::RandomModelOptions o;
    o.n_vars = 5;
    o.n_features = 6;
    o.not_prob = 0.3;
    o.max_domain = i % 2 ? 3 : 2;
    GraphicalModel m = oracle::random_model(rng, o);
    GraphicalModel n = normalize_to_clauses(m);
    CHECK(n.is_clausal());
    double zm = oracle::log_partition(m), zn = oracle::log_partition(n);
    CHECK(std::abs(zm - zn) <= 1e-12 * std::max(1.0, std::abs(zm)));
    for (const State &s : oracle::all_states(m)) {
      CHECK(std::abs(log_weight(n, s) - log_weight(m, s)) <= 1e-12);
      CHECK(std::abs(std::exp(log_weight(n, s) - zn) - std::exp(log_weight(m, s) - zm)) <= 1e-12);
    }
  }
}

TEST_CASE("log_weight semantics")
{
  GraphicalModel m = parse_model("var A 2\nfeature OR 2.0 A=1\n");
  CHECK(log_weight(m, State{1}) == 2.0);
  CHECK(log_weight(m, State{0}) == 0.0);
  GraphicalModel e = parse_model("var A 2\nvar B 2\noffset 0.5\n");
  for (const State &s : oracle::all_states(e))
    CHECK(log_weight(e, s) == 0.5);

  std::mt19937_64 rng(3);
  oracle::RandomModelOptions o;
  o.n_vars = 4;
  GraphicalModel r = oracle::random_model(rng, o);
  double z = 0;
  for (const State &s : oracle::all_states(r))
    z += std::exp(log_weight(r, s));
  CHECK(std::log(z) == doctest::Approx(oracle::log_partition(r)).epsilon(1e-12));
}

TEST_CASE("exact_marginals on closed forms")
{
  GraphicalModel m = parse_model("var A 2\nfeature OR 1.0986122886681098 A=1\n");
  auto marg = exact_marginals(m);
  CHECK(marg.probs[0][1] == doctest::Approx(0.75).epsilon(1e-12));

  GraphicalModel z = parse_model("var A 3\nvar B 2\nfeature OR 0 A=1 B=0\n");
  auto uz = exact_marginals(z);
  CHECK(uz.probs[0][2] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(uz.probs[1][0] == doctest::Approx(0.5).epsilon(1e-12));

  GraphicalModel two = parse_model("var A 2\nvar B 2\nfeature OR 1 A=0 B=1\n");
  auto ev = exact_marginals(two, Evidence{{0, 1}});
  CHECK(ev.probs[0][1] == 1.0);
  CHECK(ev.probs[0][0] == 0.0);
}

TEST_CASE("exact_marginals rows sum to one and match the joint oracle")
{
  std::mt19937_64 rng(5);
  for (int i = 0; i < 15; ++i) {
    oracle::RandomModelOptions o;
    o.n_vars = 6;
    o.n_features = 5;
    o.max_domain = 3;
    GraphicalModel m = oracle::random_model(rng, o);
    auto marg = exact_marginals(m);
    auto ref = oracle::marginals(m);
    for (std::size_t v = 0; v < ref.size(); ++v) {
      double sum = 0;
      for (std::size_t x = 0; x < ref[v].size(); ++x) {
        sum += marg.probs[v][x];
        CHECK(marg.probs[v][x] >= 0.0);
        CHECK(std::abs(marg.probs[v][x] - ref[v][x]) <= 1e-12);
      }
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("exact_marginals enforces the state cap")
{
  GraphicalModel m;
  for (int i = 0; i < 6; ++i)
    m.add_variable("X" + std::to_string(i), 2);
  Feature f;
  for (int i = 0; i < 6; ++i)
    f.literals.push_back(Literal{i, 1, true});
  f.weight = 1;
  m.add_feature(f);
  CHECK(error_code([&] { exact_marginals(m, {}, 32); }) == "cap_exceeded");
  CHECK_NOTHROW(exact_marginals(m, {}, 64));
  CHECK(error_code([&] { exact_marginals(m, Evidence{{0, 2}}); }) == "value_out_of_domain");
}

TEST_CASE("condition simplifies features")
{
  GraphicalModel m = parse_model("var A 2\nvar B 2\nfeature OR 0.7 A=1 B=1\n");
  GraphicalModel t = condition(m, Evidence{{0, 1}});
  CHECK(t.num_variables() == 1);
  CHECK(t.features().empty());
  CHECK(t.log_offset() == 0.7);

  GraphicalModel f = condition(m, Evidence{{0, 0}});
  REQUIRE(f.features().size() == 1);
  CHECK(f.features()[0].weight == 0.7);
  CHECK(f.features()[0].literals == std::vector<Literal>{{0, 1, true}});
  CHECK(f.name(0) == "B");
}

TEST_CASE("conditioned marginals equal the renormalized joint slice")
{
  std::mt19937_64 rng(9);
  for (int i = 0; i < 20; ++i) {
    oracle::RandomModelOptions o;
    o.n_vars = 6;
    o.n_features = 7;
    o.not_prob = 0.2;
    GraphicalModel m = oracle::random_model(rng, o);
    Evidence ev;
    int a = static_cast<int>(rng() % 6), b = static_cast<int>((a + 1 + rng() % 5) % 6);
    ev[a] = static_cast<int>(rng() % 2);
    ev[b] = static_cast<int>(rng() % 2);
    auto slice = oracle::marginals(m, ev);
    auto cond = exact_marginals(condition(m, ev));
    auto free = free_variables(m, ev);
    REQUIRE(free.size() == 4);
    for (std::size_t k = 0; k < free.size(); ++k)
      for (std::size_t x = 0; x < 2; ++x)
        CHECK(std::abs(cond.probs[k][x] - slice[static_cast<std::size_t>(free[k])][x]) <= 1e-10);
    auto direct = exact_marginals(m, ev);
    for (std::size_t v = 0; v < 6; ++v)
      for (std::size_t x = 0; x < 2; ++x)
        CHECK(std::abs(direct.probs[v][x] - slice[v][x]) <= 1e-10);
  }
}

TEST_CASE("job search generator")
{
  JobSearchParams p;
  p.n_people = 1;
  GraphicalModel one = gen_job_search(p);
  CHECK(one.num_variables() == 2);
  CHECK(one.features().size() == 2);

  p.n_people = 3;
  GraphicalModel three = gen_job_search(p);
  CHECK(three.num_variables() == 9);
  CHECK(three.features().size() == 12);
  for (const Feature &f : three.features()) {
    if (f.connective == Connective::And) {
      CHECK(f.weight >= p.weight_low);
      CHECK(f.weight <= p.weight_high);
    } else {
      CHECK(f.weight == p.w3);
      CHECK(f.literals.size() == 3);
    }
  }
  CHECK(serialize_model(gen_job_search(p)) == serialize_model(three));
  p.seed = 2;
  CHECK(serialize_model(gen_job_search(p)) != serialize_model(three));

  p.edge_prob = 0;
  CHECK(gen_job_search(p).num_variables() == 6);
}

TEST_CASE("student curriculum generator")
{
  StudentCurriculumParams p;
  p.n_students = 1;
  GraphicalModel one = gen_student_curriculum(p);
  CHECK(one.num_variables() == 2);
  CHECK(one.features().size() == 4);
  std::vector<double> w;
  for (const Feature &f : one.features())
    w.push_back(f.weight);
  std::sort(w.begin(), w.end());
  CHECK(w == std::vector<double>{0.5, 1.0, 1.5, 2.0});

  p.n_students = 6;
  p.friend_prob = 0.5;
  CHECK(serialize_model(gen_student_curriculum(p)) == serialize_model(gen_student_curriculum(p)));
  p.weight_pool = {1, 2, 3};
  CHECK_THROWS_AS(gen_student_curriculum(p), Error);
}

TEST_CASE("evidence and marginal files round trip")
{
  GraphicalModel m = parse_model("var A 2\nvar B 3\n");
  Evidence ev = parse_evidence(m, "B=2\n");
  CHECK(ev == Evidence{{1, 2}});
  CHECK(parse_evidence(m, format_evidence(m, ev)) == ev);
  CHECK(error_code([&] { parse_evidence(m, "B=1\nB=2\n"); }) == "duplicate_evidence");
  auto marg = exact_marginals(m);
  auto back = parse_marginals(m, format_marginals(m, marg));
  CHECK(back.probs == marg.probs);
}

TEST_CASE("format_weight is shortest round trip")
{
  CHECK(format_weight(1.5) == "1.5");
  CHECK(format_weight(-0.0) == "0");
  CHECK(format_weight(0.1) == "0.1");
  double x = 0.30000000000000004;
  CHECK(parse_real(format_weight(x)) == x);
}
