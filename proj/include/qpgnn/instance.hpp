#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qpgnn/types.hpp"

namespace qpgnn {

/// Linearly constrained quadratic program
///   min 1/2 x^T Q x + c^T x   s.t.  A x (senses) b,  l <= x <= u,
/// with Q symmetric positive semidefinite. Bounds may be -inf / +inf.
///
/// Q and A are stored as coordinate triplets, canonically sorted row-major
/// with duplicates forbidden. Q stores the full symmetric pattern.
/// Instances are immutable by convention once built and validated.
struct LCQPInstance {
  int n = 0;  // variables
  int m = 0;  // constraints
  std::vector<Triplet> q;
  std::vector<double> c;
  std::vector<Triplet> a;
  std::vector<double> b;
  std::vector<Sense> senses;
  std::vector<double> lower;  // entries in R or -inf
  std::vector<double> upper;  // entries in R or +inf

  friend bool operator==(const LCQPInstance&, const LCQPInstance&) = default;
};

/// LCQP plus the (sorted, 0-based) index set of integer-constrained variables.
struct MILCQPInstance {
  LCQPInstance base;
  std::vector<int> integer_set;

  friend bool operator==(const MILCQPInstance&, const MILCQPInstance&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::pair<std::string, std::string>> violations;  // (rule id, detail)

  void add(std::string rule, std::string detail) {
    ok = false;
    violations.emplace_back(std::move(rule), std::move(detail));
  }
};

/// Relative PSD tolerance: smallest eigenvalue >= -kPsdTol * max(1, ||Q||_F).
inline constexpr double kPsdTol = 1e-8;

ValidationReport validate(const LCQPInstance& instance);
ValidationReport validate(const MILCQPInstance& instance);

/// Dense n x n copy of Q (both triangles populated from stored triplets).
std::vector<double> dense_q(const LCQPInstance& instance);

/// Value of the objective 1/2 x^T Q x + c^T x.
double objective_value(const LCQPInstance& instance, const std::vector<double>& x);

/// Max violation of linear rows and bounds at x (0 when feasible).
double feasibility_violation(const LCQPInstance& instance, const std::vector<double>& x);

/// Relabeling of constraint and variable indices; sigma maps old index -> new.
struct VertexPermutation {
  std::vector<int> sigma_v;  // size m
  std::vector<int> sigma_w;  // size n
};

bool is_permutation(const std::vector<int>& sigma);

/// Instance with rows/columns relabeled: A'_{sv(i), sw(j)} = A_{ij}, etc.
LCQPInstance permute_instance(const LCQPInstance& instance, const VertexPermutation& perm);
MILCQPInstance permute_instance(const MILCQPInstance& instance, const VertexPermutation& perm);

}  // namespace qpgnn
