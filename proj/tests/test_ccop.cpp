#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "qcp/ccop.hpp"

using namespace qcp;
using Catch::Approx;

TEST_CASE("bit string convention: index 0 is the least-significant bit") {
  const BitString b = BitString::parse("101");
  CHECK(b.label() == 5);
  CHECK(b.bit(0) == 1);
  CHECK(b.bit(1) == 0);
  CHECK(b.bit(2) == 1);
  CHECK(b.str() == "101");
  CHECK(BitString::parse("110").label() == 3);
}

TEST_CASE("objective evaluation is shifted strictly positive") {
  SECTION("empty knapsack selection with forced unit offset") {
    // raw objective 0 at the empty selection; lower bound 0 forces offset 1
    auto inst = make_instance(
        2, [](std::uint64_t) { return 0.0; },
        [](std::uint64_t) { return true; }, 0.0, 0.0);
    CHECK(evaluate_objective(inst, BitString::parse("00")) == Approx(1.0));
  }

  SECTION("MIS on the 3-path") {
    const CcopInstance inst = qcp_test::mis_3path();
    CHECK(evaluate_objective(inst, BitString::parse("101")) ==
          Approx(-2.0 + inst.c_offset));
    // cross-check the offset against exhaustive enumeration of all 8 strings
    double min_val = 1e300;
    for (std::uint64_t b = 0; b < 8; ++b)
      min_val = std::min(min_val, inst.objective(b));
    CHECK(min_val == Approx(1.0));  // offset normalizes the minimum to 1
  }

  SECTION("TSP 3-city with unit weights") {
    const CcopInstance inst = make_tsp({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
    // enumerate all feasible tours with the brute-force oracle
    const BruteForceResult bf = brute_force_optimum(inst);
    REQUIRE(bf.has_feasible);
    CHECK(bf.feasible_count == 6);  // 3! permutations
    CHECK(bf.optimum == Approx(3.0 + inst.c_offset));
    // any single permutation encoding gives the same value
    const std::uint64_t identity_tour = (1ULL << 0) | (1ULL << 4) | (1ULL << 8);
    CHECK(evaluate_objective(inst, BitString(identity_tour, 9)) ==
          Approx(3.0 + inst.c_offset));
  }

  SECTION("length mismatch is a contract violation") {
    const CcopInstance inst = qcp_test::mis_3path();
    CHECK_THROWS_AS(evaluate_objective(inst, BitString::parse("1010")),
                    std::invalid_argument);
  }
}

TEST_CASE("feasibility oracle") {
  const CcopInstance mis = qcp_test::mis_3path();
  CHECK(is_feasible(mis, BitString::parse("101")));
  CHECK_FALSE(is_feasible(mis, BitString::parse("110")));

  const CcopInstance ks = make_knapsack({3, 4}, {2, 3}, 5.0);
  CHECK_FALSE(is_feasible(ks, BitString::parse("11")));  // weight 7 > 5
  CHECK(is_feasible(ks, BitString::parse("10")));
}

TEST_CASE("soft constraints") {
  const CcopInstance mis = qcp_test::mis_3path();
  CHECK_THROWS_AS(soft_constrained(mis, 0.0), std::invalid_argument);
  const CcopInstance soft = soft_constrained(mis, 10.0);

  SECTION("feasible strings keep their objective") {
    CHECK(soft.objective(5) == Approx(mis.objective(5)));
  }
  SECTION("infeasible strings gain the penalty") {
    CHECK(soft.objective(3) == Approx(mis.objective(3) + 10.0));
  }
  SECTION("soft instance is unconstrained") {
    CHECK(soft.feasible(3));
    CHECK(soft.feasible(7));
  }
  SECTION("penalty above the spread preserves the argmin set") {
    const BruteForceResult hard = brute_force_optimum(mis);
    const BruteForceResult relaxed = brute_force_optimum(soft);
    REQUIRE(relaxed.has_feasible);
    CHECK(relaxed.optimizers == hard.optimizers);
    for (std::uint64_t b : relaxed.optimizers) CHECK(mis.feasible(b));
  }
}

TEST_CASE("brute force optimum") {
  SECTION("MIS 3-path") {
    const CcopInstance inst = qcp_test::mis_3path();
    const BruteForceResult r = brute_force_optimum(inst);
    REQUIRE(r.has_feasible);
    CHECK(r.optimum == Approx(-2.0 + inst.c_offset));
    REQUIRE(r.optimizers.size() == 1);
    CHECK(r.optimizers[0] == 5);
    CHECK(r.feasible_count == 5);
  }
  SECTION("empty feasible set is reported explicitly") {
    auto inst = make_instance(
        2, [](std::uint64_t b) { return static_cast<double>(b); },
        [](std::uint64_t) { return false; }, 0.0, 0.0);
    const BruteForceResult r = brute_force_optimum(inst);
    CHECK_FALSE(r.has_feasible);
    CHECK(r.feasible_count == 0);
  }
  SECTION("unconstrained popcount") {
    auto inst = make_instance(
        2, [](std::uint64_t b) { return static_cast<double>(std::popcount(b)); },
        [](std::uint64_t) { return true; });
    const BruteForceResult r = brute_force_optimum(inst);
    CHECK(r.optimum == Approx(0.0 + inst.c_offset));
    REQUIRE(r.optimizers.size() == 1);
    CHECK(r.optimizers[0] == 0);
  }
  SECTION("enumeration cap") {
    auto inst = make_instance(
        30, [](std::uint64_t) { return 1.0; },
        [](std::uint64_t) { return true; }, 0.0, 1.0);
    CHECK_THROWS_AS(brute_force_optimum(inst), std::invalid_argument);
  }
}

TEST_CASE("rescale for the SDP precondition") {
  SECTION("constant objective becomes constant one") {
    auto inst = make_instance(
        2, [](std::uint64_t) { return 0.0; },
        [](std::uint64_t) { return true; }, -4.0, 0.0);
    CHECK(inst.objective(0) == Approx(5.0));
    CHECK(inst.c_upper == Approx(5.0));
    const CcopInstance scaled = rescale_for_prop1(inst);
    CHECK(scaled.objective(0) == Approx(1.0));
    CHECK(scaled.objective(3) == Approx(1.0));
    CHECK(scaled.c_upper == Approx(1.0));
    CHECK(scaled.reporting_scale == Approx(5.0));
  }
  SECTION("knapsack bound is the profit sum plus offset") {
    const CcopInstance ks = make_knapsack({3, 4}, {2, 3}, 5.0);
    CHECK(ks.c_offset == Approx(1.0 + 5.0));
    CHECK(ks.c_upper == Approx(ks.c_offset));  // feasible raw max is 0
  }
  SECTION("argmin set is preserved") {
    const CcopInstance inst = qcp_test::mis_3path();
    const CcopInstance scaled = rescale_for_prop1(inst);
    CHECK(brute_force_optimum(scaled).optimizers ==
          brute_force_optimum(inst).optimizers);
    for (std::uint64_t b = 0; b < 8; ++b) CHECK(scaled.objective(b) > 0.0);
  }
  SECTION("non-positive bound rejected") {
    CcopInstance bad = qcp_test::mis_3path();
    bad.c_upper = 0.0;
    CHECK_THROWS_AS(rescale_for_prop1(bad), std::invalid_argument);
  }
}

TEST_CASE("determinism of instance evaluation") {
  const CcopInstance inst = make_knapsack({1, 2, 3}, {3, 1, 2}, 3.0);
  for (std::uint64_t b = 0; b < 8; ++b) {
    CHECK(inst.objective(b) == inst.objective(b));
    CHECK(inst.feasible(b) == inst.feasible(b));
  }
}

TEST_CASE("instance JSON round trip") {
  const nlohmann::json j = {{"type", "mis"},
                            {"n", 3},
                            {"edges", {{0, 1}, {1, 2}}}};
  const CcopInstance inst = instance_from_json(j);
  CHECK(inst.n == 3);
  CHECK(is_feasible(inst, BitString::parse("101")));
  CHECK_FALSE(is_feasible(inst, BitString::parse("110")));

  const nlohmann::json table = {{"type", "custom_table"},
                                {"objective", {1.0, 2.0, 3.0, 4.0}},
                                {"feasible", {1, 0, 1, 1}}};
  const CcopInstance custom = instance_from_json(table);
  CHECK(custom.n == 2);
  CHECK_FALSE(custom.feasible(1));
  CHECK(brute_force_optimum(custom).optimizers[0] == 0);

  CHECK_THROWS_AS(instance_from_json({{"type", "mystery"}}),
                  std::invalid_argument);
}
