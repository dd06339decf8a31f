#pragma once

#include <vector>

#include "qpgnn/instance.hpp"

namespace qpgnn {

/// Feature of a constraint node: v_i = (b_i, sense_i).
struct ConstraintFeature {
  double b = 0.0;
  Sense sense = Sense::LE;

  friend bool operator==(const ConstraintFeature&, const ConstraintFeature&) = default;
};

/// Feature of a variable node: w_j = (c_j, l_j, u_j) plus the integrality
/// flag when the graph came from a mixed-integer instance. Bounds keep their
/// IEEE +-inf values; nothing is numerically re-encoded at this level.
struct VariableFeature {
  double c = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int integer_flag = 0;  // meaningful only when QPGraph::mixed_integer

  friend bool operator==(const VariableFeature&, const VariableFeature&) = default;
};

/// Two-part weighted graph of an instance: constraint nodes V (size m),
/// variable nodes W (size n), A-edges between the parts for nonzero A_ij, and
/// Q-edges among W for nonzero Q_jj' stored as directed records both ways
/// (self-loops once). Edge weights match the source instance exactly.
struct QPGraph {
  int m = 0;
  int n = 0;
  bool mixed_integer = false;
  std::vector<ConstraintFeature> v_features;
  std::vector<VariableFeature> w_features;
  std::vector<Triplet> a_edges;  // (i in V, j in W, A_ij), row-major sorted
  std::vector<Triplet> q_edges;  // (j, j', Q_jj'), row-major sorted, symmetric

  friend bool operator==(const QPGraph&, const QPGraph&) = default;
};

QPGraph encode_lcqp(const LCQPInstance& instance);
QPGraph encode_milcqp(const MILCQPInstance& instance);

/// Inverse of encode, exact on all fields.
LCQPInstance decode_lcqp(const QPGraph& graph);
MILCQPInstance decode_milcqp(const QPGraph& graph);

QPGraph permute(const QPGraph& graph, const VertexPermutation& perm);

}  // namespace qpgnn
