#include "qpgnn/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "qpgnn/rng.hpp"

namespace qpgnn {

namespace {

// Stream ids: one independent child stream per sampled component.
enum Stream : std::uint64_t {
  kStreamQ = 0,
  kStreamC = 1,
  kStreamA = 2,
  kStreamB = 3,
  kStreamSenses = 4,
  kStreamBounds = 5,
  kStreamIntegers = 6,
  kStreamFixedC = 1000,     // + instance index
  kStreamFixedValC = 500000  // + instance index
};

double factor_entry(Rng& rng) {
  const double magnitude = 0.25 + 0.75 * rng.uniform();
  return rng.bernoulli(0.5) ? magnitude : -magnitude;
}

void sample_bounds(Rng& rng, double sigma, double& lo, double& hi) {
  lo = rng.normal(0.0, sigma);
  hi = rng.normal(0.0, sigma);
  if (lo > hi) std::swap(lo, hi);
}

std::vector<Triplet> sample_a(Rng& rng, int m, int n, int nnz, double sigma) {
  std::vector<int> positions = rng.sample_without_replacement(m * n, nnz);
  std::vector<Triplet> a;
  a.reserve(nnz);
  for (int pos : positions) {
    double value = rng.normal(0.0, sigma);
    while (value == 0.0) value = rng.normal(0.0, sigma);
    a.push_back({pos / n, pos % n, value});
  }
  return a;  // positions sorted, so row-major order holds
}

std::vector<Sense> sample_senses(Rng& rng, int m, double eq_prob) {
  std::vector<Sense> senses(m);
  for (int i = 0; i < m; ++i) senses[i] = rng.bernoulli(eq_prob) ? Sense::EQ : Sense::LE;
  return senses;
}

}  // namespace

std::vector<Triplet> make_sparse_spd(int n, double alpha, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0,1]");
  Rng rng(seed);
  // Row-major walk over the strict lower triangle.
  std::vector<Triplet> factor;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j)
      if (!rng.bernoulli(alpha)) factor.push_back({i, j, factor_entry(rng)});
    factor.push_back({i, i, 1.0});
  }
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  for (const Triplet& t : factor) rows[t.row].emplace_back(t.col, t.value);

  std::vector<Triplet> q;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double dot = 0.0;
      for (const auto& [k1, v1] : rows[i])
        for (const auto& [k2, v2] : rows[j])
          if (k1 == k2) dot += v1 * v2;
      if (dot != 0.0) {
        q.push_back({i, j, dot});
        if (i != j) q.push_back({j, i, dot});
      }
    }
  }
  sort_triplets(q);
  return q;
}

LCQPInstance gen_lcqp(const GenConfig& config) {
  LCQPInstance inst;
  inst.m = config.m;
  inst.n = config.n;
  inst.q = make_sparse_spd(config.n, config.alpha, derive_seed(config.seed, kStreamQ));

  Rng rng_c(derive_seed(config.seed, kStreamC));
  inst.c.resize(config.n);
  for (double& v : inst.c) v = rng_c.normal(0.0, config.c_sigma);

  Rng rng_a(derive_seed(config.seed, kStreamA));
  inst.a = sample_a(rng_a, config.m, config.n, config.nnz_a, 1.0);

  Rng rng_b(derive_seed(config.seed, kStreamB));
  inst.b.resize(config.m);
  for (double& v : inst.b) v = rng_b.normal(0.0, config.b_sigma);

  Rng rng_s(derive_seed(config.seed, kStreamSenses));
  inst.senses = sample_senses(rng_s, config.m, config.eq_prob);

  Rng rng_bounds(derive_seed(config.seed, kStreamBounds));
  inst.lower.resize(config.n);
  inst.upper.resize(config.n);
  for (int j = 0; j < config.n; ++j)
    sample_bounds(rng_bounds, config.bound_sigma, inst.lower[j], inst.upper[j]);
  return inst;
}

MILCQPInstance gen_milcqp(const GenConfig& config) {
  MILCQPInstance mi;
  mi.base = gen_lcqp(config);
  Rng rng(derive_seed(config.seed, kStreamIntegers));
  for (int j = 0; j < config.n; ++j)
    if (rng.bernoulli(config.integer_prob)) mi.integer_set.push_back(j);
  // Clamp integer bounds so branch-and-bound and enumeration stay exact.
  for (int j : mi.integer_set) {
    mi.base.lower[j] = std::clamp(mi.base.lower[j], -config.mi_bound_range, config.mi_bound_range);
    mi.base.upper[j] = std::clamp(mi.base.upper[j], -config.mi_bound_range, config.mi_bound_range);
  }
  return mi;
}

namespace {

LCQPInstance fixed_structure_base(const GenConfig& config) {
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(config.n));
  LCQPInstance inst;
  inst.m = config.m;
  inst.n = config.n;
  inst.q = make_sparse_spd(config.n, config.alpha, derive_seed(config.seed, kStreamQ));

  Rng rng_a(derive_seed(config.seed, kStreamA));
  inst.a = sample_a(rng_a, config.m, config.n, config.nnz_a, inv_sqrt_n);

  Rng rng_b(derive_seed(config.seed, kStreamB));
  inst.b.resize(config.m);
  for (double& v : inst.b) v = rng_b.normal(0.0, inv_sqrt_n);

  Rng rng_s(derive_seed(config.seed, kStreamSenses));
  inst.senses = sample_senses(rng_s, config.m, config.eq_prob);

  Rng rng_bounds(derive_seed(config.seed, kStreamBounds));
  inst.lower.resize(config.n);
  inst.upper.resize(config.n);
  for (int j = 0; j < config.n; ++j) sample_bounds(rng_bounds, 1.0, inst.lower[j], inst.upper[j]);
  return inst;
}

std::vector<LCQPInstance> fixed_structure_family(const GenConfig& config, int count,
                                                 std::uint64_t c_stream_base) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const LCQPInstance base = fixed_structure_base(config);
  const double c_sigma = 1.0 / std::sqrt(static_cast<double>(config.n));
  std::vector<LCQPInstance> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    LCQPInstance inst = base;
    Rng rng(derive_seed(config.seed, c_stream_base + static_cast<std::uint64_t>(k)));
    for (double& v : inst.c) v = rng.normal(0.0, c_sigma);
    out.push_back(std::move(inst));
  }
  return out;
}

}  // namespace

std::vector<LCQPInstance> gen_fixed_structure(const GenConfig& config, int count) {
  return fixed_structure_family(config, count, kStreamFixedC);
}

std::vector<LCQPInstance> gen_fixed_structure_validation(const GenConfig& config, int count) {
  return fixed_structure_family(config, count, kStreamFixedValC);
}

}  // namespace qpgnn
