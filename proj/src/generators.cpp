#include <algorithm>
#include <numeric>
#include <string>

#include "bvmc/error.hpp"
#include "bvmc/model.hpp"
#include "bvmc/random.hpp"

namespace bvmc {

namespace {

std::string atom(const char *predicate, int x)
{
  return std::string(predicate) + "(" + std::to_string(x) + ")";
}

std::string atom(const char *predicate, int x, int y)
{
  return std::string(predicate) + "(" + std::to_string(x) + "," + std::to_string(y) + ")";
}

Literal eq(int var, int value) { return Literal{var, value, true}; }

} // namespace

GraphicalModel gen_job_search(const JobSearchParams &p)
{
  if (p.n_people < 1)
    throw Error("invalid_argument", "job search needs at least one person");
  if (!(p.edge_prob >= 0.0 && p.edge_prob <= 1.0))
    throw Error("invalid_argument", "edge probability must lie in [0, 1]");
  if (!(p.weight_low <= p.weight_high))
    throw Error("invalid_argument", "weight range is empty");

  Rng rng(p.seed);
  std::uniform_real_distribution<double> weight(p.weight_low, p.weight_high);

  GraphicalModel m;
  std::vector<int> takes(static_cast<std::size_t>(p.n_people));
  std::vector<int> gets(static_cast<std::size_t>(p.n_people));
  for (int x = 0; x < p.n_people; ++x) {
    takes[static_cast<std::size_t>(x)] = m.add_variable(atom("TakesML", x), 2);
    gets[static_cast<std::size_t>(x)] = m.add_variable(atom("GetsJob", x), 2);
  }

  for (int x = 0; x < p.n_people; ++x) {
    int t = takes[static_cast<std::size_t>(x)];
    int g = gets[static_cast<std::size_t>(x)];
    double w1 = p.weight_low == p.weight_high ? p.weight_low : weight(rng);
    double w2 = p.weight_low == p.weight_high ? p.weight_low : weight(rng);
    m.add_feature(Feature{Connective::And, {eq(t, 1), eq(g, 1)}, w1});
    m.add_feature(Feature{Connective::And, {eq(t, 0), eq(g, 1)}, w2});
  }

  std::bernoulli_distribution edge(p.edge_prob);
  std::vector<Feature> implications;
  for (int x = 0; x < p.n_people; ++x) {
    for (int y = x + 1; y < p.n_people; ++y) {
      if (!edge(rng))
        continue;
      int c = m.add_variable(atom("Connected", x, y), 2);
      int tx = takes[static_cast<std::size_t>(x)];
      int ty = takes[static_cast<std::size_t>(y)];
      // Connected(x,y) & TakesML(x) => TakesML(y), and the same with x, y swapped.
      implications.push_back(Feature{Connective::Or, {eq(c, 0), eq(tx, 0), eq(ty, 1)}, p.w3});
      implications.push_back(Feature{Connective::Or, {eq(c, 0), eq(ty, 0), eq(tx, 1)}, p.w3});
    }
  }
  for (Feature &f : implications)
    m.add_feature(std::move(f));
  return m;
}

GraphicalModel gen_student_curriculum(const StudentCurriculumParams &p)
{
  if (p.n_students < 1)
    throw Error("invalid_argument", "student curriculum needs at least one student");
  if (p.weight_pool.size() < 4)
    throw Error("invalid_argument", "weight pool needs at least four entries");
  if (!(p.friend_prob >= 0.0 && p.friend_prob <= 1.0))
    throw Error("invalid_argument", "friend probability must lie in [0, 1]");

  Rng rng(p.seed);
  GraphicalModel m;
  std::vector<int> maths(static_cast<std::size_t>(p.n_students));
  std::vector<int> cs(static_cast<std::size_t>(p.n_students));
  for (int x = 0; x < p.n_students; ++x) {
    maths[static_cast<std::size_t>(x)] = m.add_variable(atom("Maths", x), 2);
    cs[static_cast<std::size_t>(x)] = m.add_variable(atom("CS", x), 2);
  }

  // Rows of the (Maths, CS) potential table, in table order.
  constexpr int rows[4][2] = {{1, 1}, {1, 0}, {0, 1}, {0, 0}};
  std::vector<std::size_t> order(p.weight_pool.size());
  for (int x = 0; x < p.n_students; ++x) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    int mx = maths[static_cast<std::size_t>(x)];
    int cx = cs[static_cast<std::size_t>(x)];
    for (int r = 0; r < 4; ++r)
      m.add_feature(Feature{Connective::And, {eq(mx, rows[r][0]), eq(cx, rows[r][1])},
                            p.weight_pool[order[static_cast<std::size_t>(r)]]});
  }

  std::bernoulli_distribution friends(p.friend_prob);
  for (int x = 0; x < p.n_students; ++x) {
    for (int y = x + 1; y < p.n_students; ++y) {
      if (!friends(rng))
        continue;
      // Friendship is symmetric, so both directions of each rule are grounded.
      for (const auto *pred : {&maths, &cs}) {
        int a = (*pred)[static_cast<std::size_t>(x)];
        int b = (*pred)[static_cast<std::size_t>(y)];
        m.add_feature(Feature{Connective::Or, {eq(a, 0), eq(b, 1)}, p.w});
        m.add_feature(Feature{Connective::Or, {eq(b, 0), eq(a, 1)}, p.w});
      }
    }
  }
  return m;
}

} // namespace bvmc
