#include "qpgnn/wl.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qpgnn {

namespace {

double quantize(double v, int digits) {
  if (digits < 0 || !std::isfinite(v)) return v;
  const double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

using ColorWeight = std::pair<int, double>;

/// Refinement signature of one node for one round. part_a holds the A-side
/// aggregation; part_q the Q-side one (W nodes only, empty for V).
struct Signature {
  int prev = 0;
  std::vector<ColorWeight> part_a;
  std::vector<ColorWeight> part_q;
};

bool lex_less(const std::vector<ColorWeight>& a, const std::vector<ColorWeight>& b) {
  return std::lexicographical_compare(
      a.begin(), a.end(), b.begin(), b.end(), [](const ColorWeight& x, const ColorWeight& y) {
        if (x.first != y.first) return x.first < y.first;
        return x.second < y.second;
      });
}

bool sig_less(const Signature& a, const Signature& b) {
  if (a.prev != b.prev) return a.prev < b.prev;
  if (a.part_a != b.part_a) return lex_less(a.part_a, b.part_a);
  return lex_less(a.part_q, b.part_q);
}

bool sig_equal(const Signature& a, const Signature& b) {
  return a.prev == b.prev && a.part_a == b.part_a && a.part_q == b.part_q;
}

/// Dense ids in signature sort order; deterministic in vertex order because
/// ids depend on signature values only.
std::vector<int> canonical_ids(std::vector<Signature> sigs) {
  const int count = static_cast<int>(sigs.size());
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return sig_less(sigs[x], sigs[y]); });
  std::vector<int> ids(count, 0);
  int next = -1;
  for (int k = 0; k < count; ++k) {
    if (k == 0 || !sig_equal(sigs[order[k]], sigs[order[k - 1]])) ++next;
    ids[order[k]] = next;
  }
  return ids;
}

/// Neighbor pairs sorted by (color, weight): a canonical, vertex-order-free
/// form for both multiset signatures and summation order.
void sort_pairs(std::vector<ColorWeight>& pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const ColorWeight& x, const ColorWeight& y) {
    if (x.first != y.first) return x.first < y.first;
    return x.second < y.second;
  });
}

/// Collapses sorted (color, weight) pairs to per-color sums, dropping sums
/// that cancel to exactly zero (absent class and zero linear combination are
/// the same hash-free value).
std::vector<ColorWeight> sum_by_color(std::vector<ColorWeight> pairs) {
  std::vector<ColorWeight> out;
  std::size_t k = 0;
  while (k < pairs.size()) {
    const int color = pairs[k].first;
    double sum = 0.0;
    while (k < pairs.size() && pairs[k].first == color) sum += pairs[k++].second;
    if (sum != 0.0) out.emplace_back(color, sum);
  }
  return out;
}

struct Adjacency {
  std::vector<std::vector<std::pair<int, double>>> a_by_v;  // i -> (j, w)
  std::vector<std::vector<std::pair<int, double>>> a_by_w;  // j -> (i, w)
  std::vector<std::vector<std::pair<int, double>>> q_by_w;  // j -> (j', w)
};

Adjacency build_adjacency(const QPGraph& g, int quantize_digits) {
  Adjacency adj;
  adj.a_by_v.resize(g.m);
  adj.a_by_w.resize(g.n);
  adj.q_by_w.resize(g.n);
  for (const Triplet& t : g.a_edges) {
    const double w = quantize(t.value, quantize_digits);
    adj.a_by_v[t.row].emplace_back(t.col, w);
    adj.a_by_w[t.col].emplace_back(t.row, w);
  }
  for (const Triplet& t : g.q_edges)
    adj.q_by_w[t.row].emplace_back(t.col, quantize(t.value, quantize_digits));
  return adj;
}

int count_classes(const std::vector<int>& colors) {
  return colors.empty() ? 0 : 1 + *std::max_element(colors.begin(), colors.end());
}

/// Joint refinement over the disjoint union of several graphs. V and W keep
/// separate color-id spaces.
class UnionRefiner {
 public:
  UnionRefiner(const std::vector<const QPGraph*>& graphs, const RefineOptions& options)
      : graphs_(graphs), options_(options) {
    off_v_.push_back(0);
    off_w_.push_back(0);
    for (const QPGraph* g : graphs_) {
      adj_.push_back(build_adjacency(*g, options_.quantize_digits));
      off_v_.push_back(off_v_.back() + g->m);
      off_w_.push_back(off_w_.back() + g->n);
    }
    init_round0();
  }

  /// Applies one refinement round to the current colors.
  void step() {
    std::vector<Signature> sig_v(total_v());
    std::vector<Signature> sig_w(total_w());
    const bool multiset = options_.variant == WLVariant::MILCQP_MULTISET;

    for (std::size_t g = 0; g < graphs_.size(); ++g) {
      const Adjacency& adj = adj_[g];
      for (int i = 0; i < graphs_[g]->m; ++i) {
        Signature& sig = sig_v[off_v_[g] + i];
        sig.prev = colors_v_[off_v_[g] + i];
        std::vector<ColorWeight> pairs;
        pairs.reserve(adj.a_by_v[i].size());
        for (const auto& [j, w] : adj.a_by_v[i]) pairs.emplace_back(colors_w_[off_w_[g] + j], w);
        sort_pairs(pairs);
        sig.part_a = multiset ? std::move(pairs) : sum_by_color(std::move(pairs));
      }
      for (int j = 0; j < graphs_[g]->n; ++j) {
        Signature& sig = sig_w[off_w_[g] + j];
        sig.prev = colors_w_[off_w_[g] + j];
        std::vector<ColorWeight> pairs_a, pairs_q;
        pairs_a.reserve(adj.a_by_w[j].size());
        for (const auto& [i, w] : adj.a_by_w[j]) pairs_a.emplace_back(colors_v_[off_v_[g] + i], w);
        pairs_q.reserve(adj.q_by_w[j].size());
        for (const auto& [jj, w] : adj.q_by_w[j]) pairs_q.emplace_back(colors_w_[off_w_[g] + jj], w);
        sort_pairs(pairs_a);
        sort_pairs(pairs_q);
        if (multiset) {
          sig.part_a = std::move(pairs_a);
          sig.part_q = std::move(pairs_q);
        } else {
          sig.part_a = sum_by_color(std::move(pairs_a));
          sig.part_q = sum_by_color(std::move(pairs_q));
        }
      }
    }
    colors_v_ = canonical_ids(std::move(sig_v));
    colors_w_ = canonical_ids(std::move(sig_w));
    ++round_;
  }

  /// New ids embed the previous color, so each round refines the last; the
  /// partitions coincide iff the class counts do.
  bool same_partition_as_previous(int prev_v_classes, int prev_w_classes) const {
    return count_classes(colors_v_) == prev_v_classes && count_classes(colors_w_) == prev_w_classes;
  }

  Coloring snapshot(std::size_t g) const {
    Coloring c;
    c.round = round_;
    c.colors_v.assign(colors_v_.begin() + off_v_[g], colors_v_.begin() + off_v_[g + 1]);
    c.colors_w.assign(colors_w_.begin() + off_w_[g], colors_w_.begin() + off_w_[g + 1]);
    return c;
  }

  int v_classes() const { return count_classes(colors_v_); }
  int w_classes() const { return count_classes(colors_w_); }
  std::size_t graph_count() const { return graphs_.size(); }

 private:
  int total_v() const { return off_v_.back(); }
  int total_w() const { return off_w_.back(); }

  void init_round0() {
    // Round-0 colors come from node features alone, compared exactly.
    // Feature tuples are packed as (prev=kind tag, weight pairs with fixed
    // slot ids) so the generic signature machinery applies.
    std::vector<Signature> sig_v(total_v());
    std::vector<Signature> sig_w(total_w());
    const int q = options_.quantize_digits;
    for (std::size_t g = 0; g < graphs_.size(); ++g) {
      for (int i = 0; i < graphs_[g]->m; ++i) {
        const ConstraintFeature& f = graphs_[g]->v_features[i];
        Signature& sig = sig_v[off_v_[g] + i];
        sig.prev = static_cast<int>(f.sense);
        sig.part_a = {{0, quantize(f.b, q)}};
      }
      for (int j = 0; j < graphs_[g]->n; ++j) {
        const VariableFeature& f = graphs_[g]->w_features[j];
        Signature& sig = sig_w[off_w_[g] + j];
        sig.prev = graphs_[g]->mixed_integer ? f.integer_flag : -1;
        sig.part_a = {{0, quantize(f.c, q)}, {1, quantize(f.lower, q)}, {2, quantize(f.upper, q)}};
      }
    }
    colors_v_ = canonical_ids(std::move(sig_v));
    colors_w_ = canonical_ids(std::move(sig_w));
    round_ = 0;
  }

  std::vector<const QPGraph*> graphs_;
  RefineOptions options_;
  std::vector<Adjacency> adj_;
  std::vector<int> off_v_, off_w_;
  std::vector<int> colors_v_, colors_w_;
  int round_ = 0;
};

}  // namespace

int Coloring::num_v_classes() const { return count_classes(colors_v); }
int Coloring::num_w_classes() const { return count_classes(colors_w); }

std::vector<std::vector<Coloring>> refine_union(const std::vector<const QPGraph*>& graphs,
                                                const RefineOptions& options, int max_rounds) {
  if (max_rounds < 0) throw std::invalid_argument("max_rounds must be >= 0");
  UnionRefiner refiner(graphs, options);
  std::vector<std::vector<Coloring>> out(graphs.size());
  for (std::size_t g = 0; g < graphs.size(); ++g) out[g].push_back(refiner.snapshot(g));
  for (int l = 1; l <= max_rounds; ++l) {
    refiner.step();
    for (std::size_t g = 0; g < graphs.size(); ++g) out[g].push_back(refiner.snapshot(g));
  }
  return out;
}

std::vector<Coloring> refine(const QPGraph& graph, const RefineOptions& options, int max_rounds) {
  return refine_union({&graph}, options, max_rounds)[0];
}

std::vector<Coloring> refine(const QPGraph& graph, WLVariant variant, int max_rounds) {
  return refine(graph, RefineOptions{variant}, max_rounds);
}

std::vector<std::vector<int>> blocks_of(const std::vector<int>& colors) {
  std::vector<std::vector<int>> blocks(count_classes(colors));
  for (std::size_t k = 0; k < colors.size(); ++k) blocks[colors[k]].push_back(static_cast<int>(k));
  return blocks;
}

StablePartition stable_partition(const QPGraph& graph, const RefineOptions& options) {
  UnionRefiner refiner({&graph}, options);
  // Class counts strictly grow until stable, so this terminates in m+n rounds.
  for (int l = 1; l <= graph.m + graph.n + 1; ++l) {
    const int prev_v = refiner.v_classes();
    const int prev_w = refiner.w_classes();
    refiner.step();
    if (refiner.same_partition_as_previous(prev_v, prev_w)) {
      const Coloring stable = refiner.snapshot(0);
      StablePartition partition;
      partition.I = blocks_of(stable.colors_v);
      partition.J = blocks_of(stable.colors_w);
      partition.rounds_to_stabilize = l;
      return partition;
    }
  }
  throw std::logic_error("refinement failed to stabilize within m+n+1 rounds");
}

StablePartition stable_partition(const QPGraph& graph, WLVariant variant) {
  return stable_partition(graph, RefineOptions{variant});
}

namespace {

bool multisets_match(std::vector<int> a, std::vector<int> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

bool equivalent_impl(const QPGraph& g1, const QPGraph& g2, WLVariant variant, bool node_wise) {
  if (g1.m != g2.m || g1.n != g2.n) throw std::invalid_argument("dimension mismatch");
  if (g1.mixed_integer != g2.mixed_integer)
    throw std::invalid_argument("cannot compare LCQP and MI-LCQP graphs");
  UnionRefiner refiner({&g1, &g2}, RefineOptions{variant});
  const int limit = g1.m + g1.n + g2.m + g2.n + 1;
  for (int l = 0; l <= limit; ++l) {
    const Coloring c1 = refiner.snapshot(0);
    const Coloring c2 = refiner.snapshot(1);
    if (!multisets_match(c1.colors_v, c2.colors_v)) return false;
    if (node_wise ? (c1.colors_w != c2.colors_w) : !multisets_match(c1.colors_w, c2.colors_w))
      return false;
    const int prev_v = refiner.v_classes();
    const int prev_w = refiner.w_classes();
    refiner.step();
    if (refiner.same_partition_as_previous(prev_v, prev_w)) return true;
  }
  throw std::logic_error("joint refinement failed to stabilize");
}

}  // namespace

bool wl_equivalent(const QPGraph& g1, const QPGraph& g2, WLVariant variant) {
  return equivalent_impl(g1, g2, variant, /*node_wise=*/false);
}

bool wl_equivalent_W(const QPGraph& g1, const QPGraph& g2, WLVariant variant) {
  return equivalent_impl(g1, g2, variant, /*node_wise=*/true);
}

}  // namespace qpgnn
