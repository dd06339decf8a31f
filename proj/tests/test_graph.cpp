#include <doctest.h>

#include "qpgnn/corpus.hpp"
#include "qpgnn/generator.hpp"
#include "qpgnn/graph.hpp"
#include "qpgnn/rng.hpp"
#include "qpgnn/wl.hpp"

using namespace qpgnn;

TEST_SUITE("graph") {
  TEST_CASE("zero Q encodes to a bipartite graph") {
    GenConfig config;
    config.m = 4;
    config.n = 7;
    config.nnz_a = 10;
    config.seed = 3;
    LCQPInstance inst = gen_lcqp(config);
    inst.q.clear();
    const QPGraph graph = encode_lcqp(inst);
    CHECK(graph.q_edges.empty());
    CHECK(graph.a_edges.size() == 10);
  }

  TEST_CASE("fig2 first instance: two A-neighbors and one self-loop per variable") {
    const QPGraph graph = encode_milcqp(corpus::fig2_first());
    std::vector<int> a_degree(graph.n, 0), q_degree(graph.n, 0);
    for (const Triplet& t : graph.a_edges) {
      CHECK(t.value == 1.0);
      ++a_degree[t.col];
    }
    for (const Triplet& t : graph.q_edges) {
      CHECK(t.row == t.col);  // only self-loops
      ++q_degree[t.row];
    }
    for (int j = 0; j < graph.n; ++j) {
      CHECK(a_degree[j] == 2);
      CHECK(q_degree[j] == 1);
    }
  }

  TEST_CASE("identity A gives n diagonal edges") {
    LCQPInstance inst;
    inst.n = 3;
    inst.m = 3;
    inst.c = {0, 0, 0};
    for (int i = 0; i < 3; ++i) inst.a.push_back({i, i, 1.0});
    inst.b = {0, 0, 0};
    inst.senses = {Sense::LE, Sense::LE, Sense::LE};
    inst.lower = {0, 0, 0};
    inst.upper = {1, 1, 1};
    const QPGraph graph = encode_lcqp(inst);
    REQUIRE(graph.a_edges.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(graph.a_edges[i].row == i);
      CHECK(graph.a_edges[i].col == i);
    }
  }

  TEST_CASE("Q edge count matches nnz accounting") {
    GenConfig config;
    config.m = 3;
    config.n = 10;
    config.nnz_a = 8;
    config.seed = 5;
    const LCQPInstance inst = gen_lcqp(config);
    const QPGraph graph = encode_lcqp(inst);
    int upper = 0, diag = 0;
    for (const Triplet& t : inst.q) {
      if (t.row < t.col) ++upper;
      if (t.row == t.col) ++diag;
    }
    CHECK(static_cast<int>(graph.q_edges.size()) == 2 * upper + diag);
  }

  TEST_CASE("integrality flags") {
    GenConfig config;
    config.m = 3;
    config.n = 6;
    config.nnz_a = 6;
    config.seed = 9;
    MILCQPInstance mi = gen_milcqp(config);

    mi.integer_set.clear();
    QPGraph graph = encode_milcqp(mi);
    CHECK(graph.mixed_integer);
    for (const VariableFeature& f : graph.w_features) CHECK(f.integer_flag == 0);
    // Identical to the plain encoding apart from the flag channel.
    QPGraph plain = encode_lcqp(mi.base);
    plain.mixed_integer = true;
    CHECK(plain == graph);

    mi.integer_set = {0, 1, 2, 3, 4, 5};
    graph = encode_milcqp(mi);
    for (const VariableFeature& f : graph.w_features) CHECK(f.integer_flag == 1);
  }

  TEST_CASE("permute: identity and involution") {
    const QPGraph graph = encode_milcqp(corpus::fig2_first());
    VertexPermutation identity{{0, 1, 2, 3, 4, 5}, {0, 1, 2, 3, 4, 5}};
    CHECK(permute(graph, identity) == graph);

    VertexPermutation swap01{{0, 1, 2, 3, 4, 5}, {1, 0, 2, 3, 4, 5}};
    CHECK(permute(permute(graph, swap01), swap01) == graph);
    CHECK(wl_equivalent(permute(graph, swap01), graph, WLVariant::MILCQP_MULTISET));
  }

  TEST_CASE("permute rejects size mismatch") {
    const QPGraph graph = encode_milcqp(corpus::fig2_first());
    CHECK_THROWS_AS(permute(graph, VertexPermutation{{0}, {0}}), std::invalid_argument);
  }

  TEST_CASE("encode commutes with relabeling; decode inverts encode") {
    Rng rng(17);
    for (int k = 0; k < 20; ++k) {
      GenConfig config;
      config.m = 4;
      config.n = 8;
      config.nnz_a = 12;
      config.seed = 100 + k;
      const MILCQPInstance mi = gen_milcqp(config);
      const QPGraph graph = encode_milcqp(mi);
      CHECK(decode_milcqp(graph) == mi);
      const VertexPermutation perm{rng.permutation(mi.base.m), rng.permutation(mi.base.n)};
      CHECK(encode_milcqp(permute_instance(mi, perm)) == permute(graph, perm));
    }
  }

  TEST_CASE("invalid instances are rejected") {
    LCQPInstance bad;
    bad.n = 1;
    bad.m = 0;
    bad.c = {0.0};
    bad.lower = {1.0};
    bad.upper = {0.0};
    CHECK_THROWS_AS(encode_lcqp(bad), std::invalid_argument);
  }
}
