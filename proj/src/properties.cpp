#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qpgnn/corpus.hpp"
#include "qpgnn/graph.hpp"
#include "qpgnn/harness.hpp"
#include "qpgnn/instance_io.hpp"
#include "qpgnn/rng.hpp"
#include "qpgnn/tractability.hpp"
#include "qpgnn/wl.hpp"

namespace qpgnn {

namespace {

GenConfig small_config(std::uint64_t seed) {
  GenConfig config;
  config.m = 6;
  config.n = 12;
  config.nnz_a = 24;
  config.seed = seed;
  return config;
}

VertexPermutation random_permutation(int m, int n, Rng& rng) {
  return {rng.permutation(m), rng.permutation(n)};
}

/// Random partition of {0..n-1} into `blocks` nonempty blocks.
std::vector<std::vector<int>> random_partition(int n, int blocks, Rng& rng) {
  std::vector<std::vector<int>> out(blocks);
  const std::vector<int> shuffled = rng.permutation(n);
  for (int b = 0; b < blocks; ++b) out[b].push_back(shuffled[b]);
  for (int k = blocks; k < n; ++k)
    out[rng.uniform_int(0, blocks - 1)].push_back(shuffled[k]);
  for (auto& block : out) std::sort(block.begin(), block.end());
  return out;
}

/// Symmetric PSD matrix compatible with J: M = U G U^T + per-block diagonal,
/// whose row sums over each block are constant within blocks.
std::vector<double> compatible_psd(int n, const std::vector<std::vector<int>>& J, Rng& rng) {
  const int t = static_cast<int>(J.size());
  std::vector<int> block_of(n);
  for (int q = 0; q < t; ++q)
    for (int j : J[q]) block_of[j] = q;
  // G = F F^T keeps the block matrix PSD.
  std::vector<double> f(static_cast<std::size_t>(t) * t);
  for (double& v : f) v = rng.normal();
  std::vector<double> gamma(static_cast<std::size_t>(t) * t, 0.0);
  for (int a = 0; a < t; ++a)
    for (int b = 0; b < t; ++b) {
      double dot = 0.0;
      for (int k = 0; k < t; ++k) dot += f[a * t + k] * f[b * t + k];
      gamma[a * t + b] = dot;
    }
  std::vector<double> diag(t);
  for (double& v : diag) v = rng.uniform(0.0, 2.0);

  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m[static_cast<std::size_t>(i) * n + j] =
          gamma[block_of[i] * t + block_of[j]] + (i == j ? diag[block_of[i]] : 0.0);
  return m;
}

double quad_form(const std::vector<double>& m, const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) acc += x[i] * m[static_cast<std::size_t>(i) * n + j] * x[j];
  return acc;
}

/// Instance whose stable W-partition has the given blocks: all per-variable
/// data and both matrices are block-constant.
LCQPInstance block_structured_instance(int m, int n, const std::vector<std::vector<int>>& J,
                                       Rng& rng) {
  const int t = static_cast<int>(J.size());
  std::vector<int> block_of(n);
  for (int q = 0; q < t; ++q)
    for (int j : J[q]) block_of[j] = q;

  LCQPInstance inst;
  inst.m = m;
  inst.n = n;
  const std::vector<double> q_dense = compatible_psd(n, J, rng);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = q_dense[static_cast<std::size_t>(i) * n + j];
      if (v != 0.0) inst.q.push_back({i, j, v});
    }
  std::vector<double> c_block(t), lo_block(t), hi_block(t);
  for (int q = 0; q < t; ++q) {
    c_block[q] = rng.normal(0.0, 0.5);
    lo_block[q] = rng.uniform(-2.0, 0.0);
    hi_block[q] = rng.uniform(0.5, 3.0);
  }
  std::vector<std::vector<double>> a_block(m, std::vector<double>(t));
  for (int i = 0; i < m; ++i)
    for (int q = 0; q < t; ++q) a_block[i][q] = rng.bernoulli(0.4) ? rng.normal() : 0.0;

  inst.c.resize(n);
  inst.lower.resize(n);
  inst.upper.resize(n);
  for (int j = 0; j < n; ++j) {
    inst.c[j] = c_block[block_of[j]];
    inst.lower[j] = lo_block[block_of[j]];
    inst.upper[j] = hi_block[block_of[j]];
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (a_block[i][block_of[j]] != 0.0) inst.a.push_back({i, j, a_block[i][block_of[j]]});
  inst.b.resize(m);
  for (double& v : inst.b) v = rng.normal();
  inst.senses.assign(m, Sense::LE);
  return inst;
}

bool same_blocks(const std::vector<std::vector<int>>& a, const std::vector<std::vector<int>>& b) {
  auto key = [](std::vector<std::vector<int>> blocks) {
    for (auto& blk : blocks) std::sort(blk.begin(), blk.end());
    std::sort(blocks.begin(), blocks.end());
    return blocks;
  };
  return key(a) == key(b);
}

}  // namespace

bool min_norm_perturbation_ok(const LCQPInstance& inst, const SolveResult& result,
                              std::uint64_t seed, int directions) {
  if (result.status != SolveStatus::OPTIMAL) return true;
  const Eigen::VectorXd x =
      Eigen::Map<const Eigen::VectorXd>(result.x_star->data(), inst.n);
  constexpr double act_tol = 1e-6;

  // Rows whose activity pins the optimal face: Q, c, tight A rows and bounds.
  std::vector<Eigen::RowVectorXd> rows;
  Eigen::MatrixXd a_dense = Eigen::MatrixXd::Zero(inst.m, inst.n);
  for (const Triplet& t : inst.a) a_dense(t.row, t.col) = t.value;
  Eigen::MatrixXd q_dense = Eigen::MatrixXd::Zero(inst.n, inst.n);
  for (const Triplet& t : inst.q) q_dense(t.row, t.col) = t.value;
  for (int i = 0; i < inst.n; ++i) rows.emplace_back(q_dense.row(i));
  rows.emplace_back(Eigen::Map<const Eigen::RowVectorXd>(inst.c.data(), inst.n));
  const Eigen::VectorXd ax = a_dense * x;
  std::vector<char> row_active(inst.m, 0);
  for (int i = 0; i < inst.m; ++i) {
    row_active[i] = inst.senses[i] == Sense::EQ || std::abs(ax(i) - inst.b[i]) <= act_tol;
    if (row_active[i]) rows.emplace_back(a_dense.row(i));
  }
  std::vector<char> lo_active(inst.n, 0), hi_active(inst.n, 0);
  for (int j = 0; j < inst.n; ++j) {
    lo_active[j] = std::isfinite(inst.lower[j]) && x(j) - inst.lower[j] <= act_tol;
    hi_active[j] = std::isfinite(inst.upper[j]) && inst.upper[j] - x(j) <= act_tol;
    if (lo_active[j] || hi_active[j]) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(inst.n);
      e(j) = 1.0;
      rows.emplace_back(std::move(e));
    }
  }
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(rows.size()), inst.n);
  for (std::size_t r = 0; r < rows.size(); ++r) stacked.row(static_cast<Eigen::Index>(r)) = rows[r];

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const double sv_tol =
      1e-8 * std::max(1.0, svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
  int rank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > sv_tol) ++rank;
  const int null_dim = inst.n - rank;
  if (null_dim <= 0) return true;  // the face is the single point x_star
  const Eigen::MatrixXd null_basis = svd.matrixV().rightCols(null_dim);

  Rng rng(derive_seed(seed, 0x6d6e));
  const double base_norm = x.norm();
  for (int trial = 0; trial < directions; ++trial) {
    Eigen::VectorXd z(null_dim);
    for (int k = 0; k < null_dim; ++k) z(k) = rng.normal();
    Eigen::VectorXd d = null_basis * z;
    if (d.norm() < 1e-12) continue;
    d /= d.norm();

    // Largest step keeping the inactive constraints satisfied.
    double t_max = 1.0;
    const Eigen::VectorXd ad = a_dense * d;
    for (int i = 0; i < inst.m; ++i) {
      if (row_active[i]) continue;
      const double slack = inst.senses[i] == Sense::LE ? inst.b[i] - ax(i) : ax(i) - inst.b[i];
      const double rate = inst.senses[i] == Sense::LE ? ad(i) : -ad(i);
      if (rate > 1e-12) t_max = std::min(t_max, slack / rate);
    }
    for (int j = 0; j < inst.n; ++j) {
      if (!lo_active[j] && std::isfinite(inst.lower[j]) && d(j) < -1e-12)
        t_max = std::min(t_max, (x(j) - inst.lower[j]) / -d(j));
      if (!hi_active[j] && std::isfinite(inst.upper[j]) && d(j) > 1e-12)
        t_max = std::min(t_max, (inst.upper[j] - x(j)) / d(j));
    }
    if (t_max <= 1e-9) continue;
    for (double t : {t_max, 0.1 * t_max, 0.01 * t_max})
      if ((x + t * d).norm() < base_norm - 1e-8) return false;
  }
  return true;
}

bool gradient_check_ok(std::uint64_t seed, int configs, double step, double tolerance,
                       double* worst) {
  double worst_rel = 0.0;
  for (int cfg_index = 0; cfg_index < configs; ++cfg_index) {
    Rng rng(derive_seed(seed, 0x6664 + cfg_index));
    GNNConfig config;
    config.layers = 1 + static_cast<int>(rng.uniform_int(0, 1));
    config.width = 3 + static_cast<int>(rng.uniform_int(0, 3));
    config.variant =
        rng.bernoulli(0.5) ? GNNConfig::Variant::MILCQP : GNNConfig::Variant::LCQP;
    config.head = rng.bernoulli(0.5) ? GNNConfig::Head::NODE : GNNConfig::Head::GRAPH;

    GenConfig gen = small_config(derive_seed(seed, 0x6700 + cfg_index));
    gen.m = 3;
    gen.n = 5;
    gen.nnz_a = 6;
    std::vector<LabeledGraph> batch;
    for (int g = 0; g < 2; ++g) {
      gen.seed = derive_seed(seed, 0x6800 + 2 * cfg_index + g);
      QPGraph graph = config.variant == GNNConfig::Variant::MILCQP
                          ? encode_milcqp(gen_milcqp(gen))
                          : encode_lcqp(gen_lcqp(gen));
      std::vector<double> label(config.head == GNNConfig::Head::NODE ? graph.n : 1);
      for (double& v : label) v = rng.normal();
      batch.push_back({std::move(graph), std::move(label)});
    }

    GNNParams params = init_params(config, derive_seed(seed, 0x6900 + cfg_index));
    // Jitter every parameter (biases included) so no rectifier sits exactly
    // on its kink, where the two-sided difference quotient is meaningless.
    {
      Rng jitter(derive_seed(seed, 0x6a00 + cfg_index));
      auto shake = [&](Linear& l) {
        for (long k = 0; k < l.weight.size(); ++k) l.weight.data()[k] += 0.05 * jitter.normal();
        for (long k = 0; k < l.bias.size(); ++k) l.bias.data()[k] += 0.05 * jitter.normal();
      };
      shake(params.embed_v);
      shake(params.embed_w);
      for (LayerParams& layer : params.layers)
        for (Mlp* m : {&layer.f_v, &layer.f_w, &layer.g_v, &layer.g_w, &layer.g_q}) {
          shake(m->first);
          shake(m->second);
        }
      shake(params.head.first);
      shake(params.head.second);
    }
    GNNGradients grads = params;
    backward(params, batch, grads);

    // Walk every coordinate with a central difference.
    auto tensors = [](GNNParams& p) {
      std::vector<double*> out;
      std::vector<long> sizes;
      auto add = [&](Linear& l) {
        out.push_back(l.weight.data());
        sizes.push_back(l.weight.size());
        out.push_back(l.bias.data());
        sizes.push_back(l.bias.size());
      };
      add(p.embed_v);
      add(p.embed_w);
      for (LayerParams& layer : p.layers)
        for (Mlp* m : {&layer.f_v, &layer.f_w, &layer.g_v, &layer.g_w, &layer.g_q}) {
          add(m->first);
          add(m->second);
        }
      add(p.head.first);
      add(p.head.second);
      return std::pair(out, sizes);
    };
    auto [ptrs, sizes] = tensors(params);
    auto [gptrs, gsizes] = tensors(grads);
    auto eval = [&] {
      return loss_msre(forward_batch(params, batch),
                       {batch[0].label, batch[1].label});
    };
    for (std::size_t t = 0; t < ptrs.size(); ++t) {
      for (long k = 0; k < sizes[t]; ++k) {
        const double saved = ptrs[t][k];
        ptrs[t][k] = saved + step;
        const double up = eval();
        ptrs[t][k] = saved - step;
        const double down = eval();
        ptrs[t][k] = saved;
        const double fd = (up - down) / (2.0 * step);
        const double an = gptrs[t][k];
        const double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
        worst_rel = std::max(worst_rel, rel);
      }
    }
  }
  if (worst) *worst = worst_rel;
  return worst_rel < tolerance;
}

bool mi_oracle_agreement_ok(const GenConfig& base, int count, std::uint64_t seed,
                            std::string* detail) {
  GenConfig gen = base;
  int checked = 0;
  for (std::uint64_t attempt = 0; checked < count; ++attempt) {
    if (attempt > 60 * static_cast<std::uint64_t>(count))
      throw std::runtime_error("could not build enough enumerable mixed-integer instances");
    gen.seed = derive_seed(seed, 0xa9 + attempt);
    const MILCQPInstance mi = gen_milcqp(gen);
    SolveResult enumerated;
    try {
      enumerated = brute_force_milcqp(mi);
    } catch (const std::invalid_argument&) {
      continue;  // enumeration bound exceeded; draw another instance
    }
    const SolveResult searched = solve_milcqp(mi);
    ++checked;
    if (searched.status != enumerated.status) {
      if (detail) *detail = "status mismatch at attempt " + std::to_string(attempt);
      return false;
    }
    if (searched.status != SolveStatus::OPTIMAL) continue;
    if (std::abs(*searched.value - *enumerated.value) > 1e-6) {
      if (detail)
        *detail = "value mismatch " + format_double(*searched.value) + " vs " +
                  format_double(*enumerated.value);
      return false;
    }
    for (int j = 0; j < mi.base.n; ++j)
      if (std::abs((*searched.x_star)[j] - (*enumerated.x_star)[j]) > 1e-5) {
        if (detail) *detail = "solution mismatch at attempt " + std::to_string(attempt);
        return false;
      }
  }
  return true;
}

Report run_property_suite(std::uint64_t seed) {
  Report report;
  Rng rng(derive_seed(seed, 0x5047));

  // --- qp_instance -------------------------------------------------------
  {
    bool probe_ok = true, roundtrip_ok = true;
    for (int k = 0; k < 20 && probe_ok; ++k) {
      GenConfig config = small_config(derive_seed(seed, 10 + k));
      const LCQPInstance inst = gen_lcqp(config);
      double frob2 = 0.0;
      for (const Triplet& t : inst.q) frob2 += t.value * t.value;
      const double floor_coef = -kPsdTol * std::max(1.0, std::sqrt(frob2));
      for (int probe = 0; probe < 50; ++probe) {
        std::vector<double> x(inst.n);
        double norm2 = 0.0;
        for (double& v : x) {
          v = rng.normal();
          norm2 += v * v;
        }
        double quad = 0.0;
        for (const Triplet& t : inst.q) quad += x[t.row] * t.value * x[t.col];
        if (quad < floor_coef * norm2) probe_ok = false;
      }
    }
    report.add("instance.psd_probe", probe_ok);

    for (int k = 0; k < 100 && roundtrip_ok; ++k) {
      GenConfig config = small_config(derive_seed(seed, 200 + k));
      AnyInstance original = k % 2 ? AnyInstance(gen_milcqp(config)) : AnyInstance(gen_lcqp(config));
      const AnyInstance back = instance_from_json(instance_to_json(original));
      roundtrip_ok = back == original;
    }
    report.add("instance.roundtrip_identity", roundtrip_ok);
  }

  // --- qp_graph ----------------------------------------------------------
  {
    bool decode_ok = true, commute_ok = true;
    for (int k = 0; k < 50 && (decode_ok && commute_ok); ++k) {
      GenConfig config = small_config(derive_seed(seed, 300 + k));
      const LCQPInstance inst = gen_lcqp(config);
      const QPGraph graph = encode_lcqp(inst);
      decode_ok = decode_lcqp(graph) == inst;
      const VertexPermutation perm = random_permutation(inst.m, inst.n, rng);
      commute_ok = encode_lcqp(permute_instance(inst, perm)) == permute(graph, perm);
    }
    report.add("graph.encode_decode_identity", decode_ok);
    report.add("graph.encode_permute_commute", commute_ok);
  }

  // --- wl_refinement -----------------------------------------------------
  {
    bool monotone_ok = true, bound_ok = true, stable_stays_ok = true, determinism_ok = true;
    for (int k = 0; k < 30; ++k) {
      GenConfig config = small_config(derive_seed(seed, 400 + k));
      const QPGraph graph =
          k % 2 ? encode_milcqp(gen_milcqp(config)) : encode_lcqp(gen_lcqp(config));
      const WLVariant variant = k % 3 ? WLVariant::MILCQP_MULTISET : WLVariant::LCQP_SUM;
      const StablePartition stable = stable_partition(graph, variant);
      bound_ok = bound_ok && stable.rounds_to_stabilize <= graph.m + graph.n + 1;

      const auto rounds = refine(graph, variant, stable.rounds_to_stabilize + 5);
      for (std::size_t r = 1; r < rounds.size(); ++r) {
        // Refinement: same color now implies same color before.
        for (int j = 0; j < graph.n; ++j)
          for (int jj = j + 1; jj < graph.n; ++jj)
            if (rounds[r].colors_w[j] == rounds[r].colors_w[jj] &&
                rounds[r - 1].colors_w[j] != rounds[r - 1].colors_w[jj])
              monotone_ok = false;
        if (static_cast<int>(r) > stable.rounds_to_stabilize &&
            (rounds[r].num_w_classes() != rounds[r - 1].num_w_classes() ||
             rounds[r].num_v_classes() != rounds[r - 1].num_v_classes()))
          stable_stays_ok = false;
      }

      const VertexPermutation perm = random_permutation(graph.m, graph.n, rng);
      const QPGraph shuffled = permute(graph, perm);
      const auto base = refine(graph, variant, 4);
      const auto relabeled = refine(shuffled, variant, 4);
      for (std::size_t r = 0; r < base.size(); ++r)
        for (int j = 0; j < graph.n; ++j)
          if (base[r].colors_w[j] != relabeled[r].colors_w[perm.sigma_w[j]]) determinism_ok = false;
    }
    report.add("wl.monotone_refinement", monotone_ok);
    report.add("wl.rounds_bound", bound_ok);
    report.add("wl.stable_stays_stable", stable_stays_ok);
    report.add("wl.canonical_determinism", determinism_ok);

    bool relation_ok = true;
    for (int k = 0; k < 10 && relation_ok; ++k) {
      GenConfig config = small_config(derive_seed(seed, 500 + k));
      const QPGraph g = encode_lcqp(gen_lcqp(config));
      const QPGraph pg = permute(g, random_permutation(g.m, g.n, rng));
      const QPGraph ppg = permute(pg, random_permutation(g.m, g.n, rng));
      config.seed = derive_seed(seed, 600 + k);
      const QPGraph other = encode_lcqp(gen_lcqp(config));
      relation_ok = wl_equivalent(g, g, WLVariant::LCQP_SUM) &&
                    wl_equivalent(g, pg, WLVariant::LCQP_SUM) &&
                    wl_equivalent(pg, g, WLVariant::LCQP_SUM) &&
                    wl_equivalent(pg, ppg, WLVariant::LCQP_SUM) &&
                    wl_equivalent(g, ppg, WLVariant::LCQP_SUM) &&
                    wl_equivalent(g, other, WLVariant::LCQP_SUM) ==
                        wl_equivalent(other, g, WLVariant::LCQP_SUM);
    }
    report.add("wl.equivalence_relation", relation_ok);

    // On constant-weight graphs the summed and multiset signatures carry the
    // same information.
    bool variant_ok = true;
    for (int k = 0; k < 10 && variant_ok; ++k) {
      GenConfig config = small_config(derive_seed(seed, 700 + k));
      LCQPInstance inst = gen_lcqp(config);
      for (Triplet& t : inst.a) t.value = 2.5;
      inst.q.clear();
      for (int j = 0; j < inst.n; ++j) inst.q.push_back({j, j, 3.0});
      const QPGraph graph = encode_lcqp(inst);
      variant_ok = same_blocks(stable_partition(graph, WLVariant::LCQP_SUM).J,
                               stable_partition(graph, WLVariant::MILCQP_MULTISET).J) &&
                   same_blocks(stable_partition(graph, WLVariant::LCQP_SUM).I,
                               stable_partition(graph, WLVariant::MILCQP_MULTISET).I);
    }
    report.add("wl.variant_consistency_constant_weights", variant_ok);
  }

  // --- tractability ------------------------------------------------------
  {
    bool c1_ok = true;
    int unfoldable_count = 0;
    for (int k = 0; k < 500; ++k) {
      QPGraph graph;
      if (k % 5 == 4) {
        Rng block_rng(derive_seed(seed, 800 + k));
        const auto J = random_partition(8, 3, block_rng);
        graph = encode_lcqp(block_structured_instance(3, 8, J, block_rng));
      } else {
        GenConfig config = small_config(derive_seed(seed, 800 + k));
        graph = k % 2 ? encode_milcqp(gen_milcqp(config)) : encode_lcqp(gen_lcqp(config));
      }
      const TractabilityReport tr = classify(graph);
      if (tr.unfoldable) {
        ++unfoldable_count;
        if (!tr.mp_tractable) c1_ok = false;
      }
      if (!tr.mp_tractable && !tr.witness) c1_ok = false;
    }
    report.add("tractability.prop_c1_unfoldable_implies_tractable", c1_ok,
               std::to_string(unfoldable_count) + " unfoldable graphs seen");

    int c3_unfoldable = 0;
    for (int k = 0; k < 100; ++k) {
      GenConfig config = small_config(derive_seed(seed, 1400 + k));
      if (classify(encode_lcqp(gen_lcqp(config))).unfoldable) ++c3_unfoldable;
    }
    report.add("tractability.prop_c3_generic_unfoldable", c3_unfoldable == 100,
               std::to_string(c3_unfoldable) + "/100");

    bool lemma_ok = true;
    double worst_gap = 0.0;
    for (int k = 0; k < 1000; ++k) {
      Rng lemma_rng(derive_seed(seed, 2000 + k));
      const int n = 4 + static_cast<int>(lemma_rng.uniform_int(0, 8));
      const int blocks = 1 + static_cast<int>(lemma_rng.uniform_int(0, n - 1));
      const auto J = random_partition(n, blocks, lemma_rng);
      const std::vector<double> m = compatible_psd(n, J, lemma_rng);
      std::vector<double> x(n);
      for (double& v : x) v = lemma_rng.normal(0.0, 2.0);
      const std::vector<double> averaged = partition_average(x, J);
      const double gap = 0.5 * quad_form(m, averaged) - 0.5 * quad_form(m, x);
      worst_gap = std::max(worst_gap, gap);
      if (gap > 1e-10) lemma_ok = false;
    }
    report.add("tractability.lemma_a1_averaging", lemma_ok, "worst gap " + format_double(worst_gap));

    bool sums_ok = true;
    for (int k = 0; k < 100 && sums_ok; ++k) {
      Rng sums_rng(derive_seed(seed, 3000 + k));
      const int n = 3 + static_cast<int>(sums_rng.uniform_int(0, 9));
      const auto J = random_partition(n, 1 + static_cast<int>(sums_rng.uniform_int(0, n - 1)),
                                      sums_rng);
      std::vector<double> x(n);
      for (double& v : x) v = sums_rng.normal(0.0, 3.0);
      const std::vector<double> averaged = partition_average(x, J);
      for (const auto& block : J) {
        double sx = 0.0, sa = 0.0;
        for (int j : block) {
          sx += x[j];
          sa += averaged[j];
        }
        if (std::abs(sx - sa) > 1e-12) sums_ok = false;
      }
    }
    report.add("tractability.block_sums_preserved", sums_ok);
  }

  // --- qp_solver ---------------------------------------------------------
  {
    GenConfig config;
    config.m = 10;
    config.n = 20;
    config.nnz_a = 40;
    config.seed = derive_seed(seed, 4000);
    const auto set = solvable_lcqp_set(config, 30);
    bool kkt_ok = true, min_norm_ok = true;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const SolveResult r = solve_lcqp(set[k].instance);
      if (r.kkt_residual > 1e-6) kkt_ok = false;
      if (!min_norm_perturbation_ok(set[k].instance, r, derive_seed(seed, 4100 + k)))
        min_norm_ok = false;
    }
    report.add("solver.kkt_residual", kkt_ok);
    report.add("solver.min_norm_perturbation", min_norm_ok);

    {
      GenConfig mi_config;
      mi_config.m = 5;
      mi_config.n = 8;
      mi_config.nnz_a = 16;
      std::string detail;
      report.add("solver.oracle_agreement",
                 mi_oracle_agreement_ok(mi_config, 50, derive_seed(seed, 4200), &detail), detail);
    }

    bool thm_a3_ok = true;
    {
      const LCQPInstance a = corpus::fig2_first_relaxed();
      const LCQPInstance b = corpus::fig2_second_relaxed();
      thm_a3_ok = wl_equivalent(encode_lcqp(a), encode_lcqp(b), WLVariant::LCQP_SUM) &&
                  std::abs(*solve_lcqp(a).value - *solve_lcqp(b).value) <= 1e-6;
      for (int k = 0; k < 5 && thm_a3_ok; ++k) {
        const LCQPInstance& inst = set[k].instance;
        const VertexPermutation perm = random_permutation(inst.m, inst.n, rng);
        const LCQPInstance relabeled = permute_instance(inst, perm);
        thm_a3_ok = wl_equivalent(encode_lcqp(inst), encode_lcqp(relabeled), WLVariant::LCQP_SUM) &&
                    std::abs(*solve_lcqp(inst).value - *solve_lcqp(relabeled).value) <= 1e-6;
      }
    }
    report.add("solver.thm_a3_equal_objectives", thm_a3_ok);

    bool cor_a5_ok = true;
    int blocks_checked = 0;
    for (int k = 0; k < 25; ++k) {
      Rng block_rng(derive_seed(seed, 5000 + k));
      const auto J = random_partition(8, 3, block_rng);
      const LCQPInstance inst = block_structured_instance(3, 8, J, block_rng);
      const SolveResult r = solve_lcqp(inst);
      if (r.status != SolveStatus::OPTIMAL) continue;
      const TractabilityReport tr = classify(encode_lcqp(inst));
      for (const auto& block : tr.partition.J) {
        if (block.size() < 2) continue;
        ++blocks_checked;
        for (std::size_t i = 1; i < block.size(); ++i)
          if (std::abs((*r.x_star)[block[i]] - (*r.x_star)[block[0]]) > 1e-6) cor_a5_ok = false;
      }
    }
    report.add("solver.cor_a5_block_constant_solution", cor_a5_ok && blocks_checked > 0,
               std::to_string(blocks_checked) + " non-singleton blocks");
  }

  // --- gnn ---------------------------------------------------------------
  {
    bool invariance_ok = true, equivariance_ok = true;
    for (int k = 0; k < 5; ++k) {
      GenConfig config = small_config(derive_seed(seed, 6000 + k));
      const MILCQPInstance mi = gen_milcqp(config);
      const QPGraph graph = encode_milcqp(mi);
      GNNConfig gcfg;
      gcfg.variant = GNNConfig::Variant::MILCQP;
      gcfg.width = 8;
      gcfg.layers = 2;
      gcfg.head = GNNConfig::Head::GRAPH;
      const GNNParams params = init_params(gcfg, derive_seed(seed, 6100 + k));
      const VertexPermutation perm = random_permutation(graph.m, graph.n, rng);
      const QPGraph shuffled = permute(graph, perm);
      const double y1 = forward_graph(params, graph);
      const double y2 = forward_graph(params, shuffled);
      if (std::abs(y1 - y2) > 1e-9 * (1.0 + std::abs(y1))) invariance_ok = false;

      gcfg.head = GNNConfig::Head::NODE;
      const GNNParams nparams = init_params(gcfg, derive_seed(seed, 6200 + k));
      const std::vector<double> out = forward_node(nparams, graph);
      const std::vector<double> out_shuffled = forward_node(nparams, shuffled);
      for (int j = 0; j < graph.n; ++j)
        if (std::abs(out[j] - out_shuffled[perm.sigma_w[j]]) > 1e-9) equivariance_ok = false;
    }
    report.add("gnn.graph_head_permutation_invariance", invariance_ok);
    report.add("gnn.node_head_permutation_equivariance", equivariance_ok);

    bool class_constancy_ok = true;
    for (int k = 0; k < 5; ++k) {
      Rng block_rng(derive_seed(seed, 6300 + k));
      const auto J = random_partition(9, 3, block_rng);
      LCQPInstance inst = block_structured_instance(3, 9, J, block_rng);
      MILCQPInstance mi;
      mi.base = inst;
      const QPGraph graph = encode_milcqp(mi);
      GNNConfig gcfg;
      gcfg.variant = GNNConfig::Variant::MILCQP;
      gcfg.head = GNNConfig::Head::NODE;
      gcfg.width = 8;
      const GNNParams params = init_params(gcfg, derive_seed(seed, 6400 + k));
      const std::vector<double> out = forward_node(params, graph);
      for (const auto& block : classify(graph).partition.J)
        for (std::size_t i = 1; i < block.size(); ++i)
          if (std::abs(out[block[i]] - out[block[0]]) > 1e-8) class_constancy_ok = false;
    }
    report.add("gnn.node_outputs_constant_on_classes", class_constancy_ok);

    bool equiv_outputs_ok = true;
    {
      std::string detail;
      const QPGraph a = encode_milcqp(corpus::fig2_first());
      const QPGraph b = encode_milcqp(corpus::fig2_second());
      GNNConfig gcfg;
      gcfg.variant = GNNConfig::Variant::MILCQP;
      gcfg.width = 12;
      gcfg.layers = 2;
      gcfg.head = GNNConfig::Head::GRAPH;
      for (int k = 0; k < 20 && equiv_outputs_ok; ++k) {
        const GNNParams params = init_params(gcfg, derive_seed(seed, 6500 + k));
        const double y1 = forward_graph(params, a);
        const double y2 = forward_graph(params, b);
        equiv_outputs_ok = std::abs(y1 - y2) <= 1e-8 * (1.0 + std::abs(y1));
      }
    }
    report.add("gnn.wl_equivalent_pairs_equal_outputs", equiv_outputs_ok);

    double worst = 0.0;
    const bool grad_ok = gradient_check_ok(derive_seed(seed, 6600), 4, 1e-5, 1e-4, &worst);
    report.add("gnn.finite_difference_gradients", grad_ok, "worst rel err " + format_double(worst));
  }

  // --- instance_generator --------------------------------------------------
  {
    GenConfig config;
    config.seed = derive_seed(seed, 7000);
    const LCQPInstance once = gen_lcqp(config);
    const LCQPInstance twice = gen_lcqp(config);
    report.add("generator.determinism",
               instance_to_json(once) == instance_to_json(twice) && once == twice);

    bool density_ok = true;
    for (int k = 0; k < 20; ++k) {
      const auto q = make_sparse_spd(50, 0.95, derive_seed(seed, 7100 + k));
      const double density = static_cast<double>(q.size()) / (50.0 * 50.0);
      if (density < 0.04 || density > 0.16) density_ok = false;
    }
    report.add("generator.spd_density_near_ten_percent", density_ok);

    // Moments of the sampled entries against their nominal distributions.
    const int draws = 10000;
    GenConfig moment_config;
    moment_config.m = 10;
    moment_config.n = 50;
    moment_config.nnz_a = 100;
    double c_sum = 0.0, b_sum = 0.0, a_sum = 0.0;
    int c_count = 0, b_count = 0, a_count = 0;
    for (int k = 0; c_count < draws; ++k) {
      moment_config.seed = derive_seed(seed, 7200 + k);
      const LCQPInstance inst = gen_lcqp(moment_config);
      for (double v : inst.c) {
        c_sum += v;
        ++c_count;
      }
      for (double v : inst.b) {
        b_sum += v;
        ++b_count;
      }
      for (const Triplet& t : inst.a) {
        a_sum += t.value;
        ++a_count;
      }
    }
    const bool moments_ok =
        std::abs(c_sum / c_count) <= 3.0 * 0.1 / std::sqrt(static_cast<double>(c_count)) &&
        std::abs(b_sum / b_count) <= 3.0 * 1.0 / std::sqrt(static_cast<double>(b_count)) &&
        std::abs(a_sum / a_count) <= 3.0 * 1.0 / std::sqrt(static_cast<double>(a_count));
    report.add("generator.empirical_moments", moments_ok);

    const GenConfig fixed_config{.m = 4, .n = 8, .nnz_a = 10, .seed = derive_seed(seed, 7300)};
    const auto fam100 = gen_fixed_structure(fixed_config, 20);
    const auto fam500 = gen_fixed_structure(fixed_config, 60);
    bool prefix_ok = true;
    for (int k = 0; k < 20; ++k) prefix_ok = prefix_ok && fam100[k] == fam500[k];
    bool shared_ok = true;
    for (const LCQPInstance& inst : fam500) shared_ok = shared_ok && inst.q == fam500[0].q;
    report.add("generator.fixed_structure_prefix", prefix_ok);
    report.add("generator.fixed_structure_shared_q", shared_ok);
  }

  // --- harness -----------------------------------------------------------
  report.add("harness.corpus_hash_pinned", corpus::corpus_hash() == corpus::kPinnedCorpusHash,
             format_double(static_cast<double>(corpus::corpus_hash())));

  return report;
}

}  // namespace qpgnn
