#pragma once

#include <optional>
#include <vector>

#include "qpgnn/graph.hpp"
#include "qpgnn/wl.hpp"

namespace qpgnn {

/// Offending block of a non-MP-tractable graph: two unequal matrix entries
/// inside one (I_p x J_q) A-block or (J_q x J_q') Q-block.
struct BlockWitness {
  bool in_a = true;  // true: A-block (p,q); false: Q-block (q, q')
  int block_row = 0;
  int block_col = 0;
  double value_1 = 0.0;
  double value_2 = 0.0;
};

struct TractabilityReport {
  bool mp_tractable = false;
  bool unfoldable = false;
  std::optional<BlockWitness> witness;  // present iff !mp_tractable
  StablePartition partition;
};

/// Classification against the stable partition of the multiset WL test:
/// MP-tractable iff every A-block and Q-block is constant entry-wise (absent
/// edges count as 0); unfoldable iff all W blocks are singletons.
TractabilityReport classify(const QPGraph& graph);

/// Replaces x by its block means: output constant on each block of J,
/// idempotent, block sums preserved.
std::vector<double> partition_average(const std::vector<double>& x,
                                      const std::vector<std::vector<int>>& J);

}  // namespace qpgnn
