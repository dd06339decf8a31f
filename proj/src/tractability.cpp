#include "qpgnn/tractability.hpp"

#include <stdexcept>

namespace qpgnn {

namespace {

/// Checks entry-wise constancy of every (row-block x col-block) of a sparse
/// matrix whose absent entries are zero. Runs over the full index grid.
std::optional<BlockWitness> find_nonconstant_block(int rows, int cols,
                                                   const std::vector<Triplet>& entries,
                                                   const std::vector<int>& row_block,
                                                   const std::vector<int>& col_block,
                                                   int row_blocks, int col_blocks, bool in_a) {
  std::vector<double> dense(static_cast<std::size_t>(rows) * cols, 0.0);
  for (const Triplet& t : entries) dense[static_cast<std::size_t>(t.row) * cols + t.col] = t.value;

  const std::size_t pairs = static_cast<std::size_t>(row_blocks) * col_blocks;
  std::vector<double> first(pairs, 0.0);
  std::vector<char> seen(pairs, 0);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const std::size_t pq = static_cast<std::size_t>(row_block[i]) * col_blocks + col_block[j];
      const double v = dense[static_cast<std::size_t>(i) * cols + j];
      if (!seen[pq]) {
        seen[pq] = 1;
        first[pq] = v;
      } else if (v != first[pq]) {
        return BlockWitness{in_a, row_block[i], col_block[j], first[pq], v};
      }
    }
  }
  return std::nullopt;
}

std::vector<int> block_index(const std::vector<std::vector<int>>& blocks, int count) {
  std::vector<int> idx(count, -1);
  for (std::size_t q = 0; q < blocks.size(); ++q)
    for (int v : blocks[q]) idx[v] = static_cast<int>(q);
  return idx;
}

}  // namespace

TractabilityReport classify(const QPGraph& graph) {
  TractabilityReport report;
  report.partition = stable_partition(graph, WLVariant::MILCQP_MULTISET);

  report.unfoldable = static_cast<int>(report.partition.J.size()) == graph.n;

  const std::vector<int> row_block = block_index(report.partition.I, graph.m);
  const std::vector<int> col_block = block_index(report.partition.J, graph.n);
  const int s = static_cast<int>(report.partition.I.size());
  const int t = static_cast<int>(report.partition.J.size());

  report.witness =
      find_nonconstant_block(graph.m, graph.n, graph.a_edges, row_block, col_block, s, t, true);
  if (!report.witness)
    report.witness =
        find_nonconstant_block(graph.n, graph.n, graph.q_edges, col_block, col_block, t, t, false);
  report.mp_tractable = !report.witness.has_value();
  return report;
}

std::vector<double> partition_average(const std::vector<double>& x,
                                      const std::vector<std::vector<int>>& J) {
  std::vector<char> covered(x.size(), 0);
  for (const auto& block : J) {
    if (block.empty()) throw std::invalid_argument("partition has an empty block");
    for (int j : block) {
      if (j < 0 || static_cast<std::size_t>(j) >= x.size() || covered[j])
        throw std::invalid_argument("malformed partition");
      covered[j] = 1;
    }
  }
  for (char c : covered)
    if (!c) throw std::invalid_argument("partition does not cover all indices");

  std::vector<double> out(x.size(), 0.0);
  for (const auto& block : J) {
    double sum = 0.0;
    for (int j : block) sum += x[j];
    const double mean = sum / static_cast<double>(block.size());
    for (int j : block) out[j] = mean;
  }
  return out;
}

}  // namespace qpgnn
