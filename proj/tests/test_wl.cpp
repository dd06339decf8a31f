#include <doctest.h>

#include "qpgnn/corpus.hpp"
#include "qpgnn/generator.hpp"
#include "qpgnn/rng.hpp"
#include "qpgnn/wl.hpp"

using namespace qpgnn;

TEST_SUITE("wl") {
  TEST_CASE("fig2 first instance keeps one class per side at every round") {
    const QPGraph graph = encode_milcqp(corpus::fig2_first());
    for (const Coloring& c : refine(graph, WLVariant::MILCQP_MULTISET, 8)) {
      CHECK(c.num_v_classes() == 1);
      CHECK(c.num_w_classes() == 1);
    }
    const StablePartition stable = stable_partition(graph, WLVariant::MILCQP_MULTISET);
    CHECK(stable.I.size() == 1);
    CHECK(stable.J.size() == 1);
  }

  TEST_CASE("distinct objective coefficients split all variables at round 0") {
    LCQPInstance inst;
    inst.n = 5;
    inst.m = 0;
    inst.c = {0.1, 0.2, 0.3, 0.4, 0.5};
    inst.lower.assign(5, 0.0);
    inst.upper.assign(5, 1.0);
    const auto rounds = refine(encode_lcqp(inst), WLVariant::LCQP_SUM, 0);
    CHECK(rounds.size() == 1);
    CHECK(rounds[0].num_w_classes() == 5);
  }

  TEST_CASE("all-singleton graphs stabilize immediately") {
    LCQPInstance inst;
    inst.n = 4;
    inst.m = 2;
    inst.c = {1, 2, 3, 4};
    inst.b = {5, 6};
    inst.senses = {Sense::LE, Sense::LE};
    inst.lower.assign(4, 0.0);
    inst.upper.assign(4, 1.0);
    const StablePartition stable = stable_partition(encode_lcqp(inst), WLVariant::LCQP_SUM);
    CHECK(stable.I.size() == 2);
    CHECK(stable.J.size() == 4);
    CHECK(stable.rounds_to_stabilize <= inst.m + inst.n + 1);
  }

  TEST_CASE("two-constraint three-variable construction: stable partition {{0,2},{1}}") {
    const QPGraph graph = encode_milcqp(corpus::appc_instance());
    const StablePartition stable = stable_partition(graph, WLVariant::MILCQP_MULTISET);
    REQUIRE(stable.I.size() == 2);
    REQUIRE(stable.J.size() == 2);
    // Blocks are ordered by canonical color; find the pair block.
    const auto& big = stable.J[0].size() == 2 ? stable.J[0] : stable.J[1];
    const auto& small = stable.J[0].size() == 2 ? stable.J[1] : stable.J[0];
    CHECK(big == std::vector<int>{0, 2});
    CHECK(small == std::vector<int>{1});
  }

  TEST_CASE("fig2 pair is WL-equivalent; perturbing c breaks it at round 0") {
    const QPGraph g1 = encode_milcqp(corpus::fig2_first());
    const QPGraph g2 = encode_milcqp(corpus::fig2_second());
    CHECK(wl_equivalent(g1, g2, WLVariant::MILCQP_MULTISET));
    CHECK(wl_equivalent(g1, g2, WLVariant::LCQP_SUM));

    MILCQPInstance bumped = corpus::fig2_second();
    bumped.base.c[0] += 1.0;
    CHECK_FALSE(wl_equivalent(g1, encode_milcqp(bumped), WLVariant::MILCQP_MULTISET));
  }

  TEST_CASE("display variant with one <= row is not equivalent to the ring") {
    const QPGraph g1 = encode_milcqp(corpus::fig2_first());
    const QPGraph g3 = encode_milcqp(corpus::fig2_second_display_variant());
    CHECK_FALSE(wl_equivalent(g1, g3, WLVariant::MILCQP_MULTISET));
  }

  TEST_CASE("propb pair is node-wise equivalent") {
    const QPGraph g1 = encode_milcqp(corpus::propb_first());
    const QPGraph g2 = encode_milcqp(corpus::propb_second());
    CHECK(wl_equivalent(g1, g2, WLVariant::MILCQP_MULTISET));
    CHECK(wl_equivalent_W(g1, g2, WLVariant::MILCQP_MULTISET));
  }

  TEST_CASE("node-wise equivalence is sensitive to which nodes are swapped") {
    GenConfig config;
    config.m = 3;
    config.n = 6;
    config.nnz_a = 8;
    config.seed = 21;
    const LCQPInstance inst = gen_lcqp(config);  // continuous c: all W colors distinct
    const QPGraph graph = encode_lcqp(inst);
    CHECK(wl_equivalent_W(graph, graph, WLVariant::LCQP_SUM));

    // Swapping two variables with different c breaks index-wise colors but
    // not the multiset relation.
    const QPGraph swapped = permute(graph, VertexPermutation{{0, 1, 2}, {1, 0, 2, 3, 4, 5}});
    CHECK(wl_equivalent(graph, swapped, WLVariant::LCQP_SUM));
    CHECK_FALSE(wl_equivalent_W(graph, swapped, WLVariant::LCQP_SUM));

    // Swapping two W nodes inside one stable color class keeps both.
    const QPGraph sym = encode_milcqp(corpus::fig2_first());
    const QPGraph sym_swapped = permute(sym, VertexPermutation{{0, 1, 2, 3, 4, 5}, {1, 0, 2, 3, 4, 5}});
    CHECK(wl_equivalent_W(sym, sym_swapped, WLVariant::MILCQP_MULTISET));
  }

  TEST_CASE("dimension mismatch is an error") {
    const QPGraph g1 = encode_milcqp(corpus::fig2_first());
    const QPGraph g2 = encode_milcqp(corpus::propb_first());
    CHECK_THROWS_AS(wl_equivalent(g1, g2, WLVariant::MILCQP_MULTISET), std::invalid_argument);
  }

  TEST_CASE("sum variant cancels weights within a color class") {
    // Two constraints see the same W class with weights {+1,-1} vs {+2,-2}:
    // both linear combinations vanish, so the sum signature merges them while
    // the multiset signature separates them.
    LCQPInstance inst;
    inst.n = 4;
    inst.m = 2;
    inst.c.assign(4, 0.5);
    inst.a = {{0, 0, 1.0}, {0, 1, -1.0}, {1, 2, 2.0}, {1, 3, -2.0}};
    inst.b = {1.0, 1.0};
    inst.senses = {Sense::LE, Sense::LE};
    inst.lower.assign(4, 0.0);
    inst.upper.assign(4, 1.0);
    const QPGraph graph = encode_lcqp(inst);
    const auto sum_rounds = refine(graph, WLVariant::LCQP_SUM, 1);
    CHECK(sum_rounds[1].colors_v[0] == sum_rounds[1].colors_v[1]);
    const auto multiset_rounds = refine(graph, WLVariant::MILCQP_MULTISET, 1);
    CHECK(multiset_rounds[1].colors_v[0] != multiset_rounds[1].colors_v[1]);
  }

  TEST_CASE("monotone refinement and stability on random graphs") {
    Rng rng(5);
    for (int k = 0; k < 10; ++k) {
      GenConfig config;
      config.m = 5;
      config.n = 9;
      config.nnz_a = 14;
      config.seed = 400 + k;
      const QPGraph graph = encode_milcqp(gen_milcqp(config));
      const StablePartition stable = stable_partition(graph, WLVariant::MILCQP_MULTISET);
      CHECK(stable.rounds_to_stabilize <= graph.m + graph.n + 1);
      const auto rounds = refine(graph, WLVariant::MILCQP_MULTISET, stable.rounds_to_stabilize + 5);
      for (std::size_t r = 1; r < rounds.size(); ++r) {
        CHECK(rounds[r].num_v_classes() >= rounds[r - 1].num_v_classes());
        CHECK(rounds[r].num_w_classes() >= rounds[r - 1].num_w_classes());
        if (static_cast<int>(r) > stable.rounds_to_stabilize) {
          CHECK(rounds[r].num_v_classes() == rounds[r - 1].num_v_classes());
          CHECK(rounds[r].num_w_classes() == rounds[r - 1].num_w_classes());
        }
      }
    }
  }

  TEST_CASE("canonical ids do not depend on vertex order") {
    Rng rng(31);
    GenConfig config;
    config.m = 4;
    config.n = 8;
    config.nnz_a = 12;
    config.seed = 77;
    const QPGraph graph = encode_lcqp(gen_lcqp(config));
    const VertexPermutation perm{rng.permutation(graph.m), rng.permutation(graph.n)};
    const QPGraph shuffled = permute(graph, perm);
    const auto a = refine(graph, WLVariant::LCQP_SUM, 5);
    const auto b = refine(shuffled, WLVariant::LCQP_SUM, 5);
    for (std::size_t r = 0; r < a.size(); ++r) {
      for (int i = 0; i < graph.m; ++i) CHECK(a[r].colors_v[i] == b[r].colors_v[perm.sigma_v[i]]);
      for (int j = 0; j < graph.n; ++j) CHECK(a[r].colors_w[j] == b[r].colors_w[perm.sigma_w[j]]);
    }
  }

  TEST_CASE("quantization knob merges nearly equal weights") {
    LCQPInstance inst;
    inst.n = 2;
    inst.m = 2;
    inst.c = {1.0, 1.0};
    inst.a = {{0, 0, 0.1000000001}, {1, 1, 0.1}};
    inst.b = {1.0, 1.0};
    inst.senses = {Sense::LE, Sense::LE};
    inst.lower.assign(2, 0.0);
    inst.upper.assign(2, 1.0);
    const QPGraph graph = encode_lcqp(inst);

    RefineOptions exact;
    exact.variant = WLVariant::MILCQP_MULTISET;
    CHECK(refine(graph, exact, 1)[1].num_v_classes() == 2);

    RefineOptions rounded = exact;
    rounded.quantize_digits = 6;
    CHECK(refine(graph, rounded, 1)[1].num_v_classes() == 1);
  }
}
