#pragma once

#include <vector>

#include "qpgnn/graph.hpp"

namespace qpgnn {

/// Which refinement signature the test uses.
///  - LCQP_SUM: per neighbor color class, the summed edge weight into that
///    class (the collision-free realization of linear combinations of hashes;
///    weights cancelling to exactly zero within a class drop out).
///  - MILCQP_MULTISET: the sorted multiset of (neighbor color, edge weight)
///    pairs over nonzero-weight neighbors.
enum class WLVariant { LCQP_SUM, MILCQP_MULTISET };

/// Canonical colors after some round. Ids are dense per side (0..k-1),
/// assigned by lexicographic order of refinement signatures, so two nodes
/// share an id iff their whole signature history is identical.
struct Coloring {
  std::vector<int> colors_v;
  std::vector<int> colors_w;
  int round = 0;

  int num_v_classes() const;
  int num_w_classes() const;
};

/// The partition induced by the first coloring that refining leaves unchanged.
struct StablePartition {
  std::vector<std::vector<int>> I;  // blocks over {0..m-1}
  std::vector<std::vector<int>> J;  // blocks over {0..n-1}
  int rounds_to_stabilize = 0;
};

struct RefineOptions {
  WLVariant variant = WLVariant::MILCQP_MULTISET;
  /// Optional decimal quantization of weights/features before comparison
  /// (for externally sourced data); < 0 compares stored values bit-exact.
  int quantize_digits = -1;
};

/// Colorings for rounds 0..max_rounds (max_rounds >= 0).
std::vector<Coloring> refine(const QPGraph& graph, WLVariant variant, int max_rounds);
std::vector<Coloring> refine(const QPGraph& graph, const RefineOptions& options, int max_rounds);

/// Refines until two consecutive rounds induce the same partition.
StablePartition stable_partition(const QPGraph& graph, WLVariant variant);
StablePartition stable_partition(const QPGraph& graph, const RefineOptions& options);

/// Jointly refines the disjoint union of the graphs so color ids are
/// comparable across them; entry g holds graph g's per-round colorings.
std::vector<std::vector<Coloring>> refine_union(const std::vector<const QPGraph*>& graphs,
                                                const RefineOptions& options, int max_rounds);

/// True iff the color multisets over V and over W match at every round
/// (the relation ~). Graphs must share (m, n) and integrality kind.
bool wl_equivalent(const QPGraph& g1, const QPGraph& g2, WLVariant variant);

/// True iff additionally variable-node colors match index-by-index at every
/// round (the relation ~ restricted on W).
bool wl_equivalent_W(const QPGraph& g1, const QPGraph& g2, WLVariant variant);

/// Blocks of {0..count-1} grouped by color id, ordered by id.
std::vector<std::vector<int>> blocks_of(const std::vector<int>& colors);

}  // namespace qpgnn
