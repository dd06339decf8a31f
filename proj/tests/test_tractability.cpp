#include <doctest.h>

#include "qpgnn/corpus.hpp"
#include "qpgnn/generator.hpp"
#include "qpgnn/tractability.hpp"

using namespace qpgnn;

TEST_SUITE("tractability") {
  TEST_CASE("two-constraint three-variable construction: tractable, not unfoldable") {
    const TractabilityReport report = classify(encode_milcqp(corpus::appc_instance()));
    CHECK(report.mp_tractable);
    CHECK_FALSE(report.unfoldable);
    CHECK_FALSE(report.witness.has_value());
  }

  TEST_CASE("fig2 ring: single W block mixes A entries 0 and 1") {
    // Def-style oracle by hand: the stable partition has one block over V and
    // one over W, and the full 6x6 A-block contains both zeros and ones, so
    // the instance cannot be MP-tractable.
    const QPGraph graph = encode_milcqp(corpus::fig2_first());
    const TractabilityReport report = classify(graph);
    REQUIRE(report.partition.I.size() == 1);
    REQUIRE(report.partition.J.size() == 1);
    CHECK_FALSE(report.unfoldable);
    CHECK_FALSE(report.mp_tractable);
    REQUIRE(report.witness.has_value());
    CHECK(report.witness->in_a);
    CHECK(report.witness->value_1 != report.witness->value_2);
  }

  TEST_CASE("distinct c with diagonal A: unfoldable and tractable") {
    LCQPInstance inst;
    inst.n = 4;
    inst.m = 4;
    inst.c = {1, 2, 3, 4};
    for (int i = 0; i < 4; ++i) inst.a.push_back({i, i, 1.0});
    inst.b = {1, 2, 3, 4};
    inst.senses.assign(4, Sense::LE);
    inst.lower.assign(4, 0.0);
    inst.upper.assign(4, 1.0);
    const TractabilityReport report = classify(encode_lcqp(inst));
    CHECK(report.unfoldable);
    CHECK(report.mp_tractable);
  }

  TEST_CASE("partition_average examples") {
    CHECK(partition_average({1.0, 0.0}, {{0, 1}}) == std::vector<double>{0.5, 0.5});
    CHECK(partition_average({3.0, -1.0, 7.0}, {{0}, {1}, {2}}) ==
          std::vector<double>{3.0, -1.0, 7.0});
    const std::vector<double> x{1, 0, 1, 0, 1, 0};
    CHECK(partition_average(x, {{0, 1, 2, 3, 4, 5}}) ==
          std::vector<double>(6, 0.5));
  }

  TEST_CASE("partition_average is idempotent") {
    const std::vector<std::vector<int>> J{{0, 2}, {1}, {3, 4}};
    const std::vector<double> x{1.0, 2.0, 5.0, -3.0, 4.0};
    const std::vector<double> once = partition_average(x, J);
    CHECK(partition_average(once, J) == once);
  }

  TEST_CASE("malformed partitions are rejected") {
    CHECK_THROWS_AS(partition_average({1.0, 2.0}, {{0}}), std::invalid_argument);
    CHECK_THROWS_AS(partition_average({1.0, 2.0}, {{0, 0}, {1}}), std::invalid_argument);
    CHECK_THROWS_AS(partition_average({1.0, 2.0}, {{0}, {1, 2}}), std::invalid_argument);
    CHECK_THROWS_AS(partition_average({1.0, 2.0}, {{0}, {}, {1}}), std::invalid_argument);
  }

  TEST_CASE("generic generated instances are unfoldable (continuous c density)") {
    for (int k = 0; k < 25; ++k) {
      GenConfig config;
      config.m = 5;
      config.n = 10;
      config.nnz_a = 15;
      config.seed = 900 + k;
      const TractabilityReport report = classify(encode_milcqp(gen_milcqp(config)));
      CHECK(report.unfoldable);
      CHECK(report.mp_tractable);  // singleton blocks are constant
    }
  }
}
