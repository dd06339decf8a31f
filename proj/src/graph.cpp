#include "qpgnn/graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace qpgnn {

namespace {

QPGraph encode_base(const LCQPInstance& instance) {
  QPGraph g;
  g.m = instance.m;
  g.n = instance.n;
  g.v_features.reserve(instance.m);
  for (int i = 0; i < instance.m; ++i)
    g.v_features.push_back({instance.b[i], instance.senses[i]});
  g.w_features.reserve(instance.n);
  for (int j = 0; j < instance.n; ++j)
    g.w_features.push_back({instance.c[j], instance.lower[j], instance.upper[j], 0});
  for (const Triplet& t : instance.a)
    if (t.value != 0.0) g.a_edges.push_back(t);
  for (const Triplet& t : instance.q)
    if (t.value != 0.0) g.q_edges.push_back(t);
  return g;
}

void require_valid(const ValidationReport& report) {
  if (!report.ok)
    throw std::invalid_argument("cannot encode invalid instance: " + report.violations.front().first +
                                " (" + report.violations.front().second + ")");
}

}  // namespace

QPGraph encode_lcqp(const LCQPInstance& instance) {
  require_valid(validate(instance));
  return encode_base(instance);
}

QPGraph encode_milcqp(const MILCQPInstance& instance) {
  require_valid(validate(instance));
  QPGraph g = encode_base(instance.base);
  g.mixed_integer = true;
  for (int j : instance.integer_set) g.w_features[j].integer_flag = 1;
  return g;
}

LCQPInstance decode_lcqp(const QPGraph& graph) {
  LCQPInstance inst;
  inst.m = graph.m;
  inst.n = graph.n;
  inst.b.reserve(graph.m);
  inst.senses.reserve(graph.m);
  for (const ConstraintFeature& f : graph.v_features) {
    inst.b.push_back(f.b);
    inst.senses.push_back(f.sense);
  }
  inst.c.reserve(graph.n);
  inst.lower.reserve(graph.n);
  inst.upper.reserve(graph.n);
  for (const VariableFeature& f : graph.w_features) {
    inst.c.push_back(f.c);
    inst.lower.push_back(f.lower);
    inst.upper.push_back(f.upper);
  }
  inst.a = graph.a_edges;
  inst.q = graph.q_edges;
  return inst;
}

MILCQPInstance decode_milcqp(const QPGraph& graph) {
  if (!graph.mixed_integer)
    throw std::invalid_argument("graph does not carry integrality flags");
  MILCQPInstance mi;
  mi.base = decode_lcqp(graph);
  for (int j = 0; j < graph.n; ++j)
    if (graph.w_features[j].integer_flag) mi.integer_set.push_back(j);
  return mi;
}

QPGraph permute(const QPGraph& graph, const VertexPermutation& perm) {
  if (perm.sigma_v.size() != static_cast<std::size_t>(graph.m) ||
      perm.sigma_w.size() != static_cast<std::size_t>(graph.n))
    throw std::invalid_argument("permutation size mismatch");
  if (!is_permutation(perm.sigma_v) || !is_permutation(perm.sigma_w))
    throw std::invalid_argument("not a permutation");

  QPGraph out;
  out.m = graph.m;
  out.n = graph.n;
  out.mixed_integer = graph.mixed_integer;
  out.v_features.resize(graph.m);
  out.w_features.resize(graph.n);
  for (int i = 0; i < graph.m; ++i) out.v_features[perm.sigma_v[i]] = graph.v_features[i];
  for (int j = 0; j < graph.n; ++j) out.w_features[perm.sigma_w[j]] = graph.w_features[j];
  out.a_edges.reserve(graph.a_edges.size());
  for (const Triplet& t : graph.a_edges)
    out.a_edges.push_back({perm.sigma_v[t.row], perm.sigma_w[t.col], t.value});
  sort_triplets(out.a_edges);
  out.q_edges.reserve(graph.q_edges.size());
  for (const Triplet& t : graph.q_edges)
    out.q_edges.push_back({perm.sigma_w[t.row], perm.sigma_w[t.col], t.value});
  sort_triplets(out.q_edges);
  return out;
}

}  // namespace qpgnn
