#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qpgnn/instance.hpp"

namespace qpgnn {

/// Knobs of the random instance distributions. Defaults reproduce the generic
/// setup: 10 constraints, 50 variables, 100 nonzeros in A, Cholesky-factor
/// sparsity alpha = 0.95, equality senses with probability 0.3.
struct GenConfig {
  int m = 10;
  int n = 50;
  double alpha = 0.95;    // probability an off-diagonal factor entry is zero
  int nnz_a = 100;
  double c_sigma = 0.1;
  double b_sigma = 1.0;
  double bound_sigma = 10.0;
  double eq_prob = 0.3;
  double integer_prob = 0.5;   // mixed-integer generation only
  /// Integer-variable bounds are clamped into [-mi_bound_range, mi_bound_range]
  /// so the exact oracles stay enumerable at this scale.
  double mi_bound_range = 2.0;
  std::uint64_t seed = 1;
};

/// Lower-triangular factor with unit diagonal and off-diagonal entries zero
/// with probability alpha, nonzeros uniform on [-1,-0.25] u [0.25,1]; returns
/// B B^T (PSD by construction) as sorted symmetric triplets.
std::vector<Triplet> make_sparse_spd(int n, double alpha, std::uint64_t seed);

LCQPInstance gen_lcqp(const GenConfig& config);
MILCQPInstance gen_milcqp(const GenConfig& config);

/// Rescaled fixed-structure family: Q, A, b, l, u, senses drawn once
/// (A_ij ~ N(0,1/n), b_i ~ N(0,1/n), bounds ~ N(0,1)); only c varies
/// (c_j ~ N(0,1/n)). Smaller counts are prefixes of larger ones.
std::vector<LCQPInstance> gen_fixed_structure(const GenConfig& config, int count);

/// Validation split of the fixed-structure family: same structure, disjoint
/// c streams.
std::vector<LCQPInstance> gen_fixed_structure_validation(const GenConfig& config, int count);

}  // namespace qpgnn
