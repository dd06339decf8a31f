#include "qpgnn/gnn.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpgnn/rng.hpp"

namespace qpgnn {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Parameters

MatrixXd semi_orthogonal(int rows, int cols, Rng& rng) {
  const bool tall = rows >= cols;
  const int r = tall ? rows : cols;
  const int c = tall ? cols : rows;
  MatrixXd gauss(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) gauss(i, j) = rng.normal();
  Eigen::HouseholderQR<MatrixXd> qr(gauss);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(r, c);
  const MatrixXd rmat = qr.matrixQR().topLeftCorner(c, c);
  for (int k = 0; k < c; ++k)
    if (rmat(k, k) < 0.0) q.col(k) = -q.col(k);
  return tall ? q : MatrixXd(q.transpose());
}

Linear init_linear(int out, int in, Rng& rng) {
  Linear l;
  l.weight = semi_orthogonal(out, in, rng);
  l.bias = VectorXd::Zero(out);
  return l;
}

Mlp init_mlp(int in, int hidden, int out, Rng& rng) {
  Mlp m;
  m.first = init_linear(hidden, in, rng);
  m.second = init_linear(out, hidden, rng);
  return m;
}

std::vector<Linear*> all_linears(GNNParams& p) {
  std::vector<Linear*> out{&p.embed_v, &p.embed_w};
  for (LayerParams& layer : p.layers)
    for (Mlp* m : {&layer.f_v, &layer.f_w, &layer.g_v, &layer.g_w, &layer.g_q}) {
      out.push_back(&m->first);
      out.push_back(&m->second);
    }
  out.push_back(&p.head.first);
  out.push_back(&p.head.second);
  return out;
}

GNNGradients zero_like(const GNNParams& p) {
  GNNGradients g = p;
  for (Linear* l : all_linears(g)) {
    l->weight.setZero();
    l->bias.setZero();
  }
  return g;
}

// ---------------------------------------------------------------------------
// Merged block-diagonal batch

struct Batch {
  MatrixXd vfeat, wfeat;
  std::vector<Triplet> a_edges, q_edges;  // global node indices
  std::vector<int> v_offset{0}, w_offset{0};
  std::vector<int> graph_of_w;

  int graphs() const { return static_cast<int>(v_offset.size()) - 1; }
  int total_v() const { return v_offset.back(); }
  int total_w() const { return w_offset.back(); }
};

Batch build_batch(const std::vector<const QPGraph*>& graphs, const GNNConfig& config) {
  const bool want_mi = config.variant == GNNConfig::Variant::MILCQP;
  int tv = 0, tw = 0, ta = 0, tq = 0;
  for (const QPGraph* g : graphs) {
    if (g->mixed_integer != want_mi)
      throw std::invalid_argument("graph variant does not match network variant");
    tv += g->m;
    tw += g->n;
    ta += static_cast<int>(g->a_edges.size());
    tq += static_cast<int>(g->q_edges.size());
  }
  Batch b;
  b.vfeat.resize(tv, config.input_width_v());
  b.wfeat.resize(tw, config.input_width_w());
  b.a_edges.reserve(ta);
  b.q_edges.reserve(tq);
  b.graph_of_w.resize(tw);
  int ov = 0, ow = 0, gi = 0;
  for (const QPGraph* g : graphs) {
    for (int i = 0; i < g->m; ++i) b.vfeat.row(ov + i) = encode_v_feature(g->v_features[i]);
    for (int j = 0; j < g->n; ++j) {
      b.wfeat.row(ow + j) = encode_w_feature(g->w_features[j], g->mixed_integer);
      b.graph_of_w[ow + j] = gi;
    }
    for (const Triplet& t : g->a_edges) b.a_edges.push_back({ov + t.row, ow + t.col, t.value});
    for (const Triplet& t : g->q_edges) b.q_edges.push_back({ow + t.row, ow + t.col, t.value});
    ov += g->m;
    ow += g->n;
    b.v_offset.push_back(ov);
    b.w_offset.push_back(ow);
    ++gi;
  }
  return b;
}

// ---------------------------------------------------------------------------
// Forward / backward plumbing

struct MlpCache {
  MatrixXd x, h_pre, h_act, y;
};

const MatrixXd& mlp_forward(const Mlp& m, MatrixXd x, MlpCache& cache) {
  cache.x = std::move(x);
  cache.h_pre.noalias() = cache.x * m.first.weight.transpose();
  cache.h_pre.rowwise() += m.first.bias.transpose();
  cache.h_act = cache.h_pre.cwiseMax(0.0);
  cache.y.noalias() = cache.h_act * m.second.weight.transpose();
  cache.y.rowwise() += m.second.bias.transpose();
  return cache.y;
}

MatrixXd mlp_backward(const Mlp& m, const MlpCache& cache, const MatrixXd& dy, Mlp& grad) {
  grad.second.weight.noalias() += dy.transpose() * cache.h_act;
  grad.second.bias += dy.colwise().sum().transpose();
  MatrixXd dh = dy * m.second.weight;
  dh.array() *= (cache.h_pre.array() > 0.0).cast<double>();
  grad.first.weight.noalias() += dh.transpose() * cache.x;
  grad.first.bias += dh.colwise().sum().transpose();
  return dh * m.first.weight;
}

struct EmbedCache {
  MatrixXd pre;
};

MatrixXd embed_forward(const Linear& l, const MatrixXd& x, EmbedCache& cache) {
  cache.pre.noalias() = x * l.weight.transpose();
  cache.pre.rowwise() += l.bias.transpose();
  return cache.pre.cwiseMax(0.0);
}

void embed_backward(const MatrixXd& x, const EmbedCache& cache, MatrixXd dy, Linear& grad) {
  dy.array() *= (cache.pre.array() > 0.0).cast<double>();
  grad.weight.noalias() += dy.transpose() * x;
  grad.bias += dy.colwise().sum().transpose();
}

struct LayerCache {
  MlpCache g_w, g_v, g_q, f_v, f_w;
};

struct Trace {
  EmbedCache emb_v, emb_w;
  std::vector<MatrixXd> s, t;  // s[0..L], t[0..L]
  std::vector<LayerCache> layers;
  MlpCache head;
  MatrixXd sv, tw;  // per-graph sums of final embeddings
};

MatrixXd hcat(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

MatrixXd hcat(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c) {
  MatrixXd out(a.rows(), a.cols() + b.cols() + c.cols());
  out << a, b, c;
  return out;
}

/// Appends the edge weight as one extra input column (multiset-style maps).
MatrixXd edge_inputs(const MatrixXd& node_states, const std::vector<Triplet>& edges,
                     bool source_is_row) {
  MatrixXd out(static_cast<Eigen::Index>(edges.size()), node_states.cols() + 1);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int node = source_is_row ? edges[e].row : edges[e].col;
    out.block(e, 0, 1, node_states.cols()) = node_states.row(node);
    out(static_cast<Eigen::Index>(e), node_states.cols()) = edges[e].value;
  }
  return out;
}

/// y[g] (graph head) or y[j] (node head), flattened per graph afterwards.
MatrixXd forward_impl(const GNNParams& params, const Batch& batch, Trace& tr) {
  const GNNConfig& cfg = params.config;
  const int d = cfg.width;
  const bool multiset = cfg.variant == GNNConfig::Variant::MILCQP;

  tr.s.assign(cfg.layers + 1, MatrixXd());
  tr.t.assign(cfg.layers + 1, MatrixXd());
  tr.layers.assign(cfg.layers, LayerCache());
  tr.s[0] = embed_forward(params.embed_v, batch.vfeat, tr.emb_v);
  tr.t[0] = embed_forward(params.embed_w, batch.wfeat, tr.emb_w);

  for (int l = 0; l < cfg.layers; ++l) {
    const LayerParams& lp = params.layers[l];
    LayerCache& lc = tr.layers[l];
    const MatrixXd& s_prev = tr.s[l];
    const MatrixXd& t_prev = tr.t[l];

    MatrixXd agg_v = MatrixXd::Zero(batch.total_v(), d);
    MatrixXd agg_wa = MatrixXd::Zero(batch.total_w(), d);
    MatrixXd agg_wq = MatrixXd::Zero(batch.total_w(), d);

    if (multiset) {
      const MatrixXd& gw = mlp_forward(lp.g_w, edge_inputs(t_prev, batch.a_edges, false), lc.g_w);
      const MatrixXd& gv = mlp_forward(lp.g_v, edge_inputs(s_prev, batch.a_edges, true), lc.g_v);
      for (std::size_t e = 0; e < batch.a_edges.size(); ++e) {
        agg_v.row(batch.a_edges[e].row) += gw.row(static_cast<Eigen::Index>(e));
        agg_wa.row(batch.a_edges[e].col) += gv.row(static_cast<Eigen::Index>(e));
      }
      const MatrixXd& gq = mlp_forward(lp.g_q, edge_inputs(t_prev, batch.q_edges, false), lc.g_q);
      for (std::size_t e = 0; e < batch.q_edges.size(); ++e)
        agg_wq.row(batch.q_edges[e].row) += gq.row(static_cast<Eigen::Index>(e));
    } else {
      const MatrixXd& gw = mlp_forward(lp.g_w, t_prev, lc.g_w);
      const MatrixXd& gv = mlp_forward(lp.g_v, s_prev, lc.g_v);
      const MatrixXd& gq = mlp_forward(lp.g_q, t_prev, lc.g_q);
      for (const Triplet& t : batch.a_edges) {
        agg_v.row(t.row) += t.value * gw.row(t.col);
        agg_wa.row(t.col) += t.value * gv.row(t.row);
      }
      for (const Triplet& t : batch.q_edges) agg_wq.row(t.row) += t.value * gq.row(t.col);
    }

    tr.s[l + 1] = mlp_forward(lp.f_v, hcat(s_prev, agg_v), lc.f_v);
    tr.t[l + 1] = mlp_forward(lp.f_w, hcat(t_prev, agg_wa, agg_wq), lc.f_w);
  }

  const int g_count = batch.graphs();
  tr.sv = MatrixXd::Zero(g_count, d);
  tr.tw = MatrixXd::Zero(g_count, d);
  for (int g = 0; g < g_count; ++g) {
    for (int i = batch.v_offset[g]; i < batch.v_offset[g + 1]; ++i) tr.sv.row(g) += tr.s[cfg.layers].row(i);
    for (int j = batch.w_offset[g]; j < batch.w_offset[g + 1]; ++j) tr.tw.row(g) += tr.t[cfg.layers].row(j);
  }

  if (cfg.head == GNNConfig::Head::GRAPH) return mlp_forward(params.head, hcat(tr.sv, tr.tw), tr.head);

  MatrixXd node_in(batch.total_w(), 3 * d);
  for (int j = 0; j < batch.total_w(); ++j) {
    const int g = batch.graph_of_w[j];
    node_in.block(j, 0, 1, d) = tr.sv.row(g);
    node_in.block(j, d, 1, d) = tr.tw.row(g);
    node_in.block(j, 2 * d, 1, d) = tr.t[cfg.layers].row(j);
  }
  return mlp_forward(params.head, std::move(node_in), tr.head);
}

void backward_impl(const GNNParams& params, const Batch& batch, Trace& tr, const MatrixXd& dy,
                   GNNGradients& grads) {
  const GNNConfig& cfg = params.config;
  const int d = cfg.width;
  const bool multiset = cfg.variant == GNNConfig::Variant::MILCQP;

  MatrixXd ds = MatrixXd::Zero(batch.total_v(), d);
  MatrixXd dt = MatrixXd::Zero(batch.total_w(), d);
  MatrixXd dsv = MatrixXd::Zero(batch.graphs(), d);
  MatrixXd dtw = MatrixXd::Zero(batch.graphs(), d);

  const MatrixXd dhead_in = mlp_backward(params.head, tr.head, dy, grads.head);
  if (cfg.head == GNNConfig::Head::GRAPH) {
    dsv = dhead_in.leftCols(d);
    dtw = dhead_in.middleCols(d, d);
  } else {
    for (int j = 0; j < batch.total_w(); ++j) {
      const int g = batch.graph_of_w[j];
      dsv.row(g) += dhead_in.block(j, 0, 1, d);
      dtw.row(g) += dhead_in.block(j, d, 1, d);
      dt.row(j) += dhead_in.block(j, 2 * d, 1, d);
    }
  }
  for (int g = 0; g < batch.graphs(); ++g) {
    for (int i = batch.v_offset[g]; i < batch.v_offset[g + 1]; ++i) ds.row(i) += dsv.row(g);
    for (int j = batch.w_offset[g]; j < batch.w_offset[g + 1]; ++j) dt.row(j) += dtw.row(g);
  }

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const LayerParams& lp = params.layers[l];
    LayerCache& lc = tr.layers[l];
    LayerParams& lg = grads.layers[l];

    const MatrixXd dcat_w = mlp_backward(lp.f_w, lc.f_w, dt, lg.f_w);
    const MatrixXd dcat_v = mlp_backward(lp.f_v, lc.f_v, ds, lg.f_v);
    MatrixXd dt_prev = dcat_w.leftCols(d);
    const MatrixXd dagg_wa = dcat_w.middleCols(d, d);
    const MatrixXd dagg_wq = dcat_w.rightCols(d);
    MatrixXd ds_prev = dcat_v.leftCols(d);
    const MatrixXd dagg_v = dcat_v.rightCols(d);

    if (multiset) {
      MatrixXd dgw(batch.a_edges.size(), d), dgv(batch.a_edges.size(), d);
      for (std::size_t e = 0; e < batch.a_edges.size(); ++e) {
        dgw.row(static_cast<Eigen::Index>(e)) = dagg_v.row(batch.a_edges[e].row);
        dgv.row(static_cast<Eigen::Index>(e)) = dagg_wa.row(batch.a_edges[e].col);
      }
      const MatrixXd dxw = mlp_backward(lp.g_w, lc.g_w, dgw, lg.g_w);
      const MatrixXd dxv = mlp_backward(lp.g_v, lc.g_v, dgv, lg.g_v);
      for (std::size_t e = 0; e < batch.a_edges.size(); ++e) {
        dt_prev.row(batch.a_edges[e].col) += dxw.block(static_cast<Eigen::Index>(e), 0, 1, d);
        ds_prev.row(batch.a_edges[e].row) += dxv.block(static_cast<Eigen::Index>(e), 0, 1, d);
      }
      MatrixXd dgq(batch.q_edges.size(), d);
      for (std::size_t e = 0; e < batch.q_edges.size(); ++e)
        dgq.row(static_cast<Eigen::Index>(e)) = dagg_wq.row(batch.q_edges[e].row);
      const MatrixXd dxq = mlp_backward(lp.g_q, lc.g_q, dgq, lg.g_q);
      for (std::size_t e = 0; e < batch.q_edges.size(); ++e)
        dt_prev.row(batch.q_edges[e].col) += dxq.block(static_cast<Eigen::Index>(e), 0, 1, d);
    } else {
      MatrixXd dgw = MatrixXd::Zero(batch.total_w(), d);
      MatrixXd dgv = MatrixXd::Zero(batch.total_v(), d);
      MatrixXd dgq = MatrixXd::Zero(batch.total_w(), d);
      for (const Triplet& t : batch.a_edges) {
        dgw.row(t.col) += t.value * dagg_v.row(t.row);
        dgv.row(t.row) += t.value * dagg_wa.row(t.col);
      }
      for (const Triplet& t : batch.q_edges) dgq.row(t.col) += t.value * dagg_wq.row(t.row);
      dt_prev += mlp_backward(lp.g_w, lc.g_w, dgw, lg.g_w);
      ds_prev += mlp_backward(lp.g_v, lc.g_v, dgv, lg.g_v);
      dt_prev += mlp_backward(lp.g_q, lc.g_q, dgq, lg.g_q);
    }
    ds = std::move(ds_prev);
    dt = std::move(dt_prev);
  }

  embed_backward(batch.vfeat, tr.emb_v, std::move(ds), grads.embed_v);
  embed_backward(batch.wfeat, tr.emb_w, std::move(dt), grads.embed_w);
}

std::vector<std::vector<double>> split_outputs(const GNNConfig& cfg, const Batch& batch,
                                               const MatrixXd& y) {
  std::vector<std::vector<double>> out(batch.graphs());
  if (cfg.head == GNNConfig::Head::GRAPH) {
    for (int g = 0; g < batch.graphs(); ++g) out[g] = {y(g, 0)};
  } else {
    for (int g = 0; g < batch.graphs(); ++g)
      for (int j = batch.w_offset[g]; j < batch.w_offset[g + 1]; ++j) out[g].push_back(y(j, 0));
  }
  return out;
}

double label_denominator(const std::vector<double>& label) {
  double norm2 = 0.0;
  for (double v : label) norm2 += v * v;
  return std::max(std::sqrt(norm2), 1.0);
}

/// Loss and its derivative in the stacked output layout.
double loss_and_grad(const GNNConfig& cfg, const Batch& batch, const MatrixXd& y,
                     const std::vector<std::vector<double>>& labels, MatrixXd& dy) {
  const int g_count = batch.graphs();
  dy = MatrixXd::Zero(y.rows(), 1);
  double loss = 0.0;
  for (int g = 0; g < g_count; ++g) {
    const std::size_t expected = cfg.head == GNNConfig::Head::GRAPH
                                     ? 1
                                     : static_cast<std::size_t>(batch.w_offset[g + 1] -
                                                                batch.w_offset[g]);
    if (labels[g].size() != expected)
      throw std::invalid_argument("label width does not match the network head");
    const double den = label_denominator(labels[g]);
    const double scale = 1.0 / (den * den * g_count);
    if (cfg.head == GNNConfig::Head::GRAPH) {
      const double r = y(g, 0) - labels[g][0];
      loss += r * r * scale;
      dy(g, 0) = 2.0 * r * scale;
    } else {
      for (int j = batch.w_offset[g]; j < batch.w_offset[g + 1]; ++j) {
        const double r = y(j, 0) - labels[g][static_cast<std::size_t>(j - batch.w_offset[g])];
        loss += r * r * scale;
        dy(j, 0) = 2.0 * r * scale;
      }
    }
  }
  return loss;
}

std::vector<const QPGraph*> graph_pointers(const std::vector<LabeledGraph>& set) {
  std::vector<const QPGraph*> out;
  out.reserve(set.size());
  for (const LabeledGraph& s : set) out.push_back(&s.graph);
  return out;
}

std::vector<std::vector<double>> label_list(const std::vector<LabeledGraph>& set) {
  std::vector<std::vector<double>> out;
  out.reserve(set.size());
  for (const LabeledGraph& s : set) out.push_back(s.label);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface

long GNNParams::parameter_count() const {
  long count = 0;
  for (Linear* l : all_linears(*const_cast<GNNParams*>(this)))
    count += static_cast<long>(l->weight.size()) + static_cast<long>(l->bias.size());
  return count;
}

GNNParams init_params(const GNNConfig& config, std::uint64_t seed) {
  if (config.layers < 1 || config.width < 1)
    throw std::invalid_argument("config needs layers >= 1 and width >= 1");
  Rng rng(derive_seed(seed, 0x6e6e));
  const int d = config.width;
  const bool multiset = config.variant == GNNConfig::Variant::MILCQP;
  const int g_in = multiset ? d + 1 : d;

  GNNParams p;
  p.config = config;
  p.embed_v = init_linear(d, config.input_width_v(), rng);
  p.embed_w = init_linear(d, config.input_width_w(), rng);
  p.layers.reserve(config.layers);
  for (int l = 0; l < config.layers; ++l) {
    LayerParams layer;
    layer.f_v = init_mlp(2 * d, d, d, rng);
    layer.f_w = init_mlp(3 * d, d, d, rng);
    layer.g_v = init_mlp(g_in, d, d, rng);
    layer.g_w = init_mlp(g_in, d, d, rng);
    layer.g_q = init_mlp(g_in, d, d, rng);
    p.layers.push_back(std::move(layer));
  }
  const int head_in = config.head == GNNConfig::Head::GRAPH ? 2 * d : 3 * d;
  p.head = init_mlp(head_in, d, 1, rng);
  return p;
}

Eigen::RowVectorXd encode_v_feature(const ConstraintFeature& f) {
  RowVectorXd v(4);
  v << f.b, f.sense == Sense::LE ? 1.0 : 0.0, f.sense == Sense::EQ ? 1.0 : 0.0,
      f.sense == Sense::GE ? 1.0 : 0.0;
  return v;
}

Eigen::RowVectorXd encode_w_feature(const VariableFeature& f, bool mixed_integer) {
  const bool lo_fin = std::isfinite(f.lower);
  const bool hi_fin = std::isfinite(f.upper);
  RowVectorXd v(mixed_integer ? 6 : 5);
  v(0) = f.c;
  v(1) = lo_fin ? f.lower : 0.0;
  v(2) = lo_fin ? 1.0 : 0.0;
  v(3) = hi_fin ? f.upper : 0.0;
  v(4) = hi_fin ? 1.0 : 0.0;
  if (mixed_integer) v(5) = static_cast<double>(f.integer_flag);
  return v;
}

double forward_graph(const GNNParams& params, const QPGraph& graph) {
  if (params.config.head != GNNConfig::Head::GRAPH)
    throw std::invalid_argument("network has a node-level head");
  const Batch batch = build_batch({&graph}, params.config);
  Trace tr;
  return forward_impl(params, batch, tr)(0, 0);
}

std::vector<double> forward_node(const GNNParams& params, const QPGraph& graph) {
  if (params.config.head != GNNConfig::Head::NODE)
    throw std::invalid_argument("network has a graph-level head");
  const Batch batch = build_batch({&graph}, params.config);
  Trace tr;
  const MatrixXd y = forward_impl(params, batch, tr);
  std::vector<double> out(graph.n);
  for (int j = 0; j < graph.n; ++j) out[j] = y(j, 0);
  return out;
}

std::vector<std::vector<double>> forward_batch(const GNNParams& params,
                                               const std::vector<LabeledGraph>& set) {
  const Batch batch = build_batch(graph_pointers(set), params.config);
  Trace tr;
  return split_outputs(params.config, batch, forward_impl(params, batch, tr));
}

double loss_msre(const std::vector<std::vector<double>>& preds,
                 const std::vector<std::vector<double>>& labels) {
  if (preds.size() != labels.size() || preds.empty())
    throw std::invalid_argument("batch of predictions/labels mismatched or empty");
  double loss = 0.0;
  for (std::size_t g = 0; g < preds.size(); ++g) {
    const double den = label_denominator(labels[g]);
    double err2 = 0.0;
    for (std::size_t j = 0; j < preds[g].size(); ++j) {
      const double r = preds[g][j] - labels[g][j];
      err2 += r * r;
    }
    loss += err2 / (den * den);
  }
  return loss / static_cast<double>(preds.size());
}

double relative_error(const std::vector<std::vector<double>>& preds,
                      const std::vector<std::vector<double>>& labels) {
  double total = 0.0;
  for (std::size_t g = 0; g < preds.size(); ++g) {
    const double den = label_denominator(labels[g]);
    double err2 = 0.0;
    for (std::size_t j = 0; j < preds[g].size(); ++j) {
      const double r = preds[g][j] - labels[g][j];
      err2 += r * r;
    }
    total += std::sqrt(err2) / den;
  }
  return total / static_cast<double>(preds.size());
}

double backward(const GNNParams& params, const std::vector<LabeledGraph>& set,
                GNNGradients& gradients) {
  if (set.empty()) throw std::invalid_argument("empty batch");
  const Batch batch = build_batch(graph_pointers(set), params.config);
  Trace tr;
  const MatrixXd y = forward_impl(params, batch, tr);
  MatrixXd dy;
  const double loss = loss_and_grad(params.config, batch, y, label_list(set), dy);
  gradients = zero_like(params);
  backward_impl(params, batch, tr, dy, gradients);
  return loss;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct AdamState {
  std::vector<MatrixXd> m_w, v_w;
  std::vector<VectorXd> m_b, v_b;
  long step = 0;

  explicit AdamState(GNNParams& p) { reset(p); }

  void reset(GNNParams& p) {
    m_w.clear();
    v_w.clear();
    m_b.clear();
    v_b.clear();
    for (Linear* l : all_linears(p)) {
      m_w.push_back(MatrixXd::Zero(l->weight.rows(), l->weight.cols()));
      v_w.push_back(MatrixXd::Zero(l->weight.rows(), l->weight.cols()));
      m_b.push_back(VectorXd::Zero(l->bias.size()));
      v_b.push_back(VectorXd::Zero(l->bias.size()));
    }
    step = 0;
  }

  void update(GNNParams& p, GNNGradients& g, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    const auto params = all_linears(p);
    const auto grads = all_linears(g);
    for (std::size_t k = 0; k < params.size(); ++k) {
      m_w[k] = beta1 * m_w[k] + (1.0 - beta1) * grads[k]->weight;
      v_w[k] = beta2 * v_w[k].array().matrix() +
               (1.0 - beta2) * grads[k]->weight.array().square().matrix();
      params[k]->weight.array() -=
          lr * (m_w[k].array() / bc1) / ((v_w[k].array() / bc2).sqrt() + eps);
      m_b[k] = beta1 * m_b[k] + (1.0 - beta1) * grads[k]->bias;
      v_b[k] = beta2 * v_b[k].array().matrix() +
               (1.0 - beta2) * grads[k]->bias.array().square().matrix();
      params[k]->bias.array() -= lr * (m_b[k].array() / bc1) / ((v_b[k].array() / bc2).sqrt() + eps);
    }
  }
};

struct PreparedBatch {
  Batch batch;
  std::vector<std::vector<double>> labels;
};

}  // namespace

TrainResult train(GNNParams& params, const std::vector<LabeledGraph>& train_set,
                  const TrainSchedule& schedule, const std::vector<LabeledGraph>* val_set) {
  if (train_set.empty()) throw std::invalid_argument("empty training set");
  const int total = static_cast<int>(train_set.size());
  const int batch_size = std::min(schedule.batch_size, total);
  Rng rng(derive_seed(schedule.seed, 0x7261));

  const bool full_batch = batch_size >= total;
  PreparedBatch full;
  if (full_batch) {
    full.batch = build_batch(graph_pointers(train_set), params.config);
    full.labels = label_list(train_set);
  }
  std::optional<PreparedBatch> val;
  if (val_set && !val_set->empty()) {
    val.emplace();
    val->batch = build_batch(graph_pointers(*val_set), params.config);
    val->labels = label_list(*val_set);
  }

  AdamState adam(params);
  GNNGradients grads = zero_like(params);
  TrainResult result;
  result.best_rel_err = std::numeric_limits<double>::infinity();
  GNNParams best = params;
  double lr = schedule.learning_rate;
  int since_best = 0;

  auto run_batch = [&](const Batch& batch, const std::vector<std::vector<double>>& labels,
                       bool update) -> std::pair<double, double> {
    Trace tr;
    const MatrixXd y = forward_impl(params, batch, tr);
    const auto preds = split_outputs(params.config, batch, y);
    const double rel = relative_error(preds, labels);
    MatrixXd dy;
    const double loss = loss_and_grad(params.config, batch, y, labels, dy);
    if (update) {
      grads = zero_like(params);
      backward_impl(params, batch, tr, dy, grads);
      adam.update(params, grads, lr);
    }
    return {loss, rel};
  };

  for (int epoch = 1; epoch <= schedule.epochs; ++epoch) {
    double epoch_rel = 0.0;
    double epoch_loss = 0.0;
    if (full_batch) {
      auto [loss, rel] = run_batch(full.batch, full.labels, true);
      epoch_loss = loss;
      epoch_rel = rel;
    } else {
      std::vector<int> order = rng.permutation(total);
      int seen = 0;
      for (int start = 0; start < total; start += batch_size) {
        const int stop = std::min(total, start + batch_size);
        std::vector<LabeledGraph> chunk;
        chunk.reserve(stop - start);
        for (int k = start; k < stop; ++k) chunk.push_back(train_set[order[k]]);
        PreparedBatch pb{build_batch(graph_pointers(chunk), params.config), label_list(chunk)};
        auto [loss, rel] = run_batch(pb.batch, pb.labels, true);
        epoch_loss += loss * (stop - start);
        epoch_rel += rel * (stop - start);
        seen += stop - start;
      }
      epoch_loss /= seen;
      epoch_rel /= seen;
    }
    if (!std::isfinite(epoch_loss))
      throw TrainingDivergedError("training loss became non-finite at epoch " +
                                  std::to_string(epoch) + " (lr " + std::to_string(lr) + ")");

    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = lr;
    record.train_rel_err = epoch_rel;
    if (val) {
      Trace tr;
      const MatrixXd y = forward_impl(params, val->batch, tr);
      record.val_rel_err = relative_error(split_outputs(params.config, val->batch, y), val->labels);
    }

    if (epoch_rel < result.best_rel_err) {
      result.best_rel_err = epoch_rel;
      result.best_epoch = epoch;
      best = params;
      since_best = 0;
    } else if (++since_best >= schedule.patience) {
      lr *= 0.5;
      params = best;
      adam.reset(params);
      since_best = 0;
    }
    record.best_rel_err = result.best_rel_err;
    result.history.push_back(record);

    if (schedule.stop_below > 0.0 && result.best_rel_err <= schedule.stop_below) break;
  }

  params = best;
  return result;
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

using nlohmann::json;

json linear_to_json(const Linear& l) {
  json out;
  out["rows"] = l.weight.rows();
  out["cols"] = l.weight.cols();
  std::vector<double> w(l.weight.size());
  Eigen::Map<MatrixXd>(w.data(), l.weight.rows(), l.weight.cols()) = l.weight;
  out["weight"] = w;
  out["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
  return out;
}

Linear linear_from_json(const json& j) {
  Linear l;
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto w = j.at("weight").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(w.size()) != rows * cols)
    throw ParseError("checkpoint weight size mismatch");
  l.weight = Eigen::Map<const MatrixXd>(w.data(), rows, cols);
  const auto b = j.at("bias").get<std::vector<double>>();
  l.bias = Eigen::Map<const VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  return l;
}

}  // namespace

std::string params_to_json(const GNNParams& params, std::uint64_t seed, int epoch) {
  json doc;
  doc["config"] = {{"layers", params.config.layers},
                   {"width", params.config.width},
                   {"variant", params.config.variant == GNNConfig::Variant::MILCQP ? "milcqp" : "lcqp"},
                   {"head", params.config.head == GNNConfig::Head::NODE ? "node" : "graph"}};
  doc["seed"] = seed;
  doc["epoch"] = epoch;
  json tensors = json::array();
  for (Linear* l : all_linears(const_cast<GNNParams&>(params))) tensors.push_back(linear_to_json(*l));
  doc["tensors"] = tensors;
  return doc.dump();
}

GNNParams params_from_json(const std::string& text) {
  json doc = json::parse(text);
  GNNConfig config;
  config.layers = doc.at("config").at("layers").get<int>();
  config.width = doc.at("config").at("width").get<int>();
  config.variant = doc.at("config").at("variant").get<std::string>() == "milcqp"
                       ? GNNConfig::Variant::MILCQP
                       : GNNConfig::Variant::LCQP;
  config.head = doc.at("config").at("head").get<std::string>() == "node" ? GNNConfig::Head::NODE
                                                                         : GNNConfig::Head::GRAPH;
  GNNParams params = init_params(config, 0);
  const json& tensors = doc.at("tensors");
  const auto linears = all_linears(params);
  if (tensors.size() != linears.size()) throw ParseError("checkpoint tensor count mismatch");
  for (std::size_t k = 0; k < linears.size(); ++k) *linears[k] = linear_from_json(tensors[k]);
  return params;
}

}  // namespace qpgnn
