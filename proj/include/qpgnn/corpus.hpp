#pragma once

#include <cstdint>

#include "qpgnn/instance.hpp"

namespace qpgnn {

/// Named instances behind the separation results. All are built in code so
/// the suite never depends on data files.
namespace corpus {

/// 6-variable ring: unit self-loop Q, c = 1, x in {0,1}, pair covers
/// x_j + x_{j+1} >= 1 around one 6-cycle. Optimum 9/2.
MILCQPInstance fig2_first();

/// Same local structure split into two triangles (every sense >= 1, the
/// variant consistent with optimum 6).
MILCQPInstance fig2_second();

/// The display variant whose last row reads x_6 + x_4 <= 1; kept for
/// reference, not part of the equivalence pair (its optimum is 9/2 and its
/// sense multiset differs).
MILCQPInstance fig2_second_display_variant();

/// 7-variable pair with Q = ones (rank one), difference constraints over one
/// 2-cycle + 5-cycle vs one 3-cycle + 4-cycle, and a shared sum row = 6.
/// Feasible sets are the singletons (3,3,0,0,0,0,0) and (2,2,2,0,0,0,0);
/// both optima are 24.
MILCQPInstance propb_first();
MILCQPInstance propb_second();

/// Continuous relaxations of the fig2 pair (integrality dropped, x in [0,1]).
LCQPInstance fig2_first_relaxed();
LCQPInstance fig2_second_relaxed();

/// Two constraints, three variables with variables 1 and 3 symmetric: stable
/// partition I = {{0},{1}}, J = {{0,2},{1}}; MP-tractable but not unfoldable.
MILCQPInstance appc_instance();

/// FNV-1a over the canonical serialization of the corpus; pinned to detect
/// accidental edits.
std::uint64_t corpus_hash();
inline constexpr std::uint64_t kPinnedCorpusHash = 0xf05870f72874f1edULL;

}  // namespace corpus

}  // namespace qpgnn
