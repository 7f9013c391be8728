#include <numeric>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "bendoct/d2s.hpp"

using namespace bendoct;
using testing_support::brute_depth2;
using testing_support::random_dataset;

namespace {

std::vector<int> random_subset(std::mt19937& rng, int I, int max_size) {
  std::vector<int> all(I);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(std::uniform_int_distribution<int>(1, std::min(I, max_size))(rng));
  std::sort(all.begin(), all.end());
  return all;
}

// Builds the subtree as a tree rooted at node 1 and routes the subset.
int routed_correct(const BinaryDataset& d, const SubtreeSolution& s, const std::vector<int>& subset) {
  std::vector<NodeAssignment> nodes(8);
  for (const auto& [n, a] : graft(s, 1)) nodes[n] = a;
  const DecisionTree t(2, nodes);
  int c = 0;
  for (int i : subset) c += t.predict(d.row(i)) == d.y(i);
  return c;
}

}  // namespace

TEST_CASE("frequency counters") {
  SUBCASE("two identical rows") {
    const BinaryDataset d({1, 0, 1, 0}, 2, {0, 1}, {"a", "b"});
    const std::vector<int> s{0, 1};
    const FrequencyCounters c(d, s);
    CHECK(c.fq(0, 0) == 1);
    CHECK(c.fq(1, 0) == 1);
    CHECK(c.fq(0, 1) == 0);
    CHECK(c.fq(1, 1) == 0);
  }
  SUBCASE("one class") {
    std::mt19937 rng(1);
    const auto d = random_dataset(rng, 30, 4, 3);
    std::vector<int> s;
    for (int i = 0; i < 30; ++i) {
      if (d.y(i) == 1) s.push_back(i);
    }
    const FrequencyCounters c(d, s);
    CHECK(c.total(0) == 0);
    CHECK(c.total(1) == static_cast<int>(s.size()));
    CHECK(c.total(2) == 0);
  }
  SUBCASE("derived identities match direct counting") {
    std::mt19937 rng(2);
    for (int t = 0; t < 100; ++t) {
      const auto d = random_dataset(rng, 30, 6, 3, 0.3 + 0.004 * t);
      const auto s = random_subset(rng, 30, 30);
      const FrequencyCounters c(d, s);
      for (int k = 0; k < 3; ++k) {
        for (int fa = 0; fa < 6; ++fa) {
          for (int fb = 0; fb < 6; ++fb) {
            int sum = 0;
            for (int va = 0; va < 2; ++va) {
              for (int vb = 0; vb < 2; ++vb) {
                int direct = 0;
                for (int i : s) direct += d.y(i) == k && d.x(i, fa) == va && d.x(i, fb) == vb;
                CHECK(c.count(k, fa, va, fb, vb) == direct);
                sum += c.count(k, fa, va, fb, vb);
              }
            }
            CHECK(sum == c.total(k));
            CHECK(c.fq(k, fa, fb) == c.fq(k, fb, fa));
            CHECK(c.fq(k, fa, fb) <= std::min(c.fq(k, fa), c.fq(k, fb)));
          }
        }
      }
    }
  }
  SUBCASE("empty subset") {
    std::mt19937 rng(3);
    const auto d = random_dataset(rng, 5, 2, 2);
    CHECK_THROWS(FrequencyCounters(d, std::vector<int>{}));
    CHECK_THROWS(optimal_depth2(d, std::vector<int>{}, 0.0));
  }
}

TEST_CASE("optimal depth-2 subtree") {
  SUBCASE("pure subset") {
    const BinaryDataset d({1, 0, 0, 1, 1, 1}, 2, {1, 1, 1}, {"a", "b"});
    for (double lb : {0.0, 0.5, 10.0}) {
      const auto s = optimal_depth2(d, std::vector<int>{0, 1, 2}, lb);
      CHECK(s.leaf_count == 1);
      CHECK(s.raw_score == 3);
      CHECK(s.incorrect.empty());
    }
  }
  SUBCASE("three-sample equivalent points") {
    const BinaryDataset d({1, 0, 1, 1, 0, 1, 1, 0, 0}, 3, {0, 1, 2}, {"a", "b", "c"});
    const std::vector<int> all{0, 1, 2};
    const auto s = optimal_depth2(d, all, 0.0);
    CHECK(s.raw_score == 2);
    CHECK(brute_depth2(d, all, 0.0) == 2.0);
  }
  SUBCASE("random subsets against enumeration") {
    std::mt19937 rng(4);
    for (int t = 0; t < 300; ++t) {
      const int F = 1 + t % 6, K = 2 + t % 2;
      const auto d = random_dataset(rng, 40, F, K);
      const auto s = random_subset(rng, 40, 40);
      for (double lb : {0.0, 0.5, 2.0}) {
        for (int depth = 0; depth <= 2; ++depth) {
          const auto sol = optimal_depth2(d, s, lb, depth);
          CHECK(sol.penalized_score == brute_depth2(d, s, lb, depth));
          CHECK(sol.raw_score == routed_correct(d, sol, s));
          CHECK(sol.correct.size() + sol.incorrect.size() == s.size());
          CHECK(static_cast<int>(sol.correct.size()) == sol.raw_score);
          CHECK(sol.penalized_score == sol.raw_score - lb * sol.leaf_count);
        }
      }
    }
  }
  SUBCASE("monotone in the penalty") {
    std::mt19937 rng(5);
    for (int t = 0; t < 60; ++t) {
      const auto d = random_dataset(rng, 35, 5, 3);
      const auto s = random_subset(rng, 35, 35);
      double prev_score = 1e300;
      int prev_h = 5;
      for (double lb = 0.0; lb <= 6.0; lb += 0.25) {
        const auto sol = optimal_depth2(d, s, lb);
        CHECK(sol.penalized_score <= prev_score);
        CHECK(sol.leaf_count <= prev_h);
        prev_score = sol.penalized_score;
        prev_h = sol.leaf_count;
      }
    }
  }
  SUBCASE("ties go to the smallest features") {
    // f0 and f2 are copies; f1 is noise.
    const BinaryDataset d({0, 1, 0, 0, 0, 0, 1, 1, 1, 1, 0, 1}, 3, {0, 0, 1, 1}, {"a", "b"});
    const auto sol = optimal_depth2(d, std::vector<int>{0, 1, 2, 3}, 0.5);
    REQUIRE(sol.branches.size() == 1);
    CHECK(sol.branches[0] == std::pair{1, 0});
    CHECK(sol.raw_score == 4);
  }
}

TEST_CASE("relative node placement") {
  CHECK(absolute_node(1, 1) == 1);
  CHECK(absolute_node(1, 7) == 7);
  CHECK(absolute_node(3, 1) == 3);
  CHECK(absolute_node(3, 2) == 6);
  CHECK(absolute_node(3, 5) == 13);
  CHECK(absolute_node(5, 6) == 22);
}

TEST_CASE("subtree cache") {
  std::mt19937 rng(6);
  const auto d = random_dataset(rng, 50, 5, 2);
  D2SCache cache(d, 1.5);

  const PathKey a({{0, 1}, {1, 0}});
  const PathKey b({{1, 0}, {0, 1}});
  CHECK(a == b);
  CHECK(PathKeyHash{}(a) == PathKeyHash{}(b));
  const auto* sa = cache.get_or_compute(a);
  const auto* sb = cache.get_or_compute(b);
  CHECK(sa == sb);
  CHECK(cache.calls() == 2);
  CHECK(cache.hits() == 1);
  CHECK(cache.computations() == 1);

  const auto subset = cache.subset(a);
  for (int i : subset) CHECK((d.x(i, 0) == 1 && d.x(i, 1) == 0));
  CHECK(*sa == optimal_depth2(d, subset, 1.5));

  const PathKey bad({{2, 0}, {2, 1}});
  CHECK(bad.contradictory());
  CHECK(cache.subset(bad).empty());
  CHECK(cache.get_or_compute(bad) == nullptr);

  const PathKey root;
  CHECK(cache.subset(root).size() == 50);
  CHECK(cache.get_or_compute(root, 1) != cache.get_or_compute(root, 2));
}
