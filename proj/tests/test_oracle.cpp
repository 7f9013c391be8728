#include <random>

#include "doctest.h"
#include "support.hpp"

#include "bendoct/oracle.hpp"

using namespace bendoct;

TEST_CASE("oracle on small hand-made data") {
  SUBCASE("pure data is a single leaf") {
    const BinaryDataset d({0, 1, 1, 0, 1, 1}, 2, {1, 1, 1}, {"a", "b"});
    const auto r = exact_dp(d, 3, 0.05);
    CHECK(r.leaf_count == 1);
    CHECK(r.correct_count == 3);
    CHECK(r.objective == doctest::Approx(0.95));
  }
  SUBCASE("two identical points of different class cap the score") {
    const BinaryDataset d({1, 0, 1, 1, 0, 1, 1, 0, 0}, 3, {0, 1, 2}, {"a", "b", "c"});
    const auto r = exact_dp(d, 2, 0.0);
    CHECK(r.correct_count == 2);
    CHECK(r.objective == doctest::Approx(2.0 / 3));
  }
}

TEST_CASE("oracle agrees with brute-force enumeration") {
  std::mt19937 rng(41);
  int compared = 0;
  for (int t = 0; t < 24; ++t) {
    const int depth = 1 + t % 3;
    const int F = depth == 3 ? 4 : 5;
    const auto d = t % 2 ? testing_support::planted_dataset(rng, 30, F, 2 + t % 3, 0.2)
                         : testing_support::random_dataset(rng, 25, F, 2 + t % 2);
    for (double lambda : {0.0, 0.02, 0.1}) {
      const double lambda_bar = lambda * d.n_samples();
      const auto r = exact_dp(d, depth, lambda);
      const double brute = testing_support::brute_optimum(d, depth, lambda_bar) / d.n_samples();
      CHECK(r.objective == doctest::Approx(brute).epsilon(1e-12));
      const auto s = score(r.tree, d, lambda);
      CHECK(s.objective == doctest::Approx(r.objective).epsilon(1e-12));
      CHECK(s.correct_count == r.correct_count);
      CHECK(s.leaf_count == r.leaf_count);
      CHECK(r.tree.depth() == depth);
      ++compared;
    }
  }
  CHECK(compared == 72);
}

TEST_CASE("oracle guards") {
  std::mt19937 rng(1);
  CHECK_THROWS_AS(exact_dp(testing_support::random_dataset(rng, 10, 17, 2), 2, 0.0), OracleGuardError);
  CHECK_THROWS_AS(exact_dp(testing_support::random_dataset(rng, 10, 3, 2), 5, 0.0), OracleGuardError);
  CHECK_NOTHROW(exact_dp(testing_support::random_dataset(rng, 10, 16, 2), 2, 0.0));
}
