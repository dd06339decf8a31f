#include "qpgnn/corpus.hpp"

#include <numeric>

#include "qpgnn/instance_io.hpp"

namespace qpgnn::corpus {

namespace {

/// Ring/triangle family: rows x_a + x_b >= 1 over given index pairs,
/// Q = I (unit self-loops), c = 1, binary integer variables.
MILCQPInstance cover_instance(const std::vector<std::pair<int, int>>& pairs,
                              Sense last_row_sense = Sense::GE) {
  MILCQPInstance mi;
  LCQPInstance& inst = mi.base;
  inst.n = 6;
  inst.m = static_cast<int>(pairs.size());
  for (int j = 0; j < inst.n; ++j) inst.q.push_back({j, j, 1.0});
  inst.c.assign(inst.n, 1.0);
  for (int i = 0; i < inst.m; ++i) {
    const auto [a, b] = pairs[i];
    inst.a.push_back({i, a, 1.0});
    inst.a.push_back({i, b, 1.0});
  }
  sort_triplets(inst.a);
  inst.b.assign(inst.m, 1.0);
  inst.senses.assign(inst.m, Sense::GE);
  inst.senses.back() = last_row_sense;
  inst.lower.assign(inst.n, 0.0);
  inst.upper.assign(inst.n, 1.0);
  mi.integer_set.resize(inst.n);
  std::iota(mi.integer_set.begin(), mi.integer_set.end(), 0);
  return mi;
}

/// Difference-cycle family: rows x_a - x_b = 0 over the pairs, one sum row
/// = 6, Q = ones (rank one), c = 1, x in [0,3] integer.
MILCQPInstance difference_instance(const std::vector<std::pair<int, int>>& pairs) {
  MILCQPInstance mi;
  LCQPInstance& inst = mi.base;
  inst.n = 7;
  inst.m = static_cast<int>(pairs.size()) + 1;
  for (int j = 0; j < inst.n; ++j)
    for (int jj = 0; jj < inst.n; ++jj) inst.q.push_back({j, jj, 1.0});
  inst.c.assign(inst.n, 1.0);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    inst.a.push_back({static_cast<int>(i), pairs[i].first, 1.0});
    inst.a.push_back({static_cast<int>(i), pairs[i].second, -1.0});
  }
  for (int j = 0; j < inst.n; ++j) inst.a.push_back({inst.m - 1, j, 1.0});
  sort_triplets(inst.a);
  inst.b.assign(inst.m, 0.0);
  inst.b.back() = 6.0;
  inst.senses.assign(inst.m, Sense::EQ);
  inst.lower.assign(inst.n, 0.0);
  inst.upper.assign(inst.n, 3.0);
  mi.integer_set.resize(inst.n);
  std::iota(mi.integer_set.begin(), mi.integer_set.end(), 0);
  return mi;
}

}  // namespace

MILCQPInstance fig2_first() {
  return cover_instance({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
}

MILCQPInstance fig2_second() {
  return cover_instance({{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
}

MILCQPInstance fig2_second_display_variant() {
  return cover_instance({{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}}, Sense::LE);
}

MILCQPInstance propb_first() {
  return difference_instance({{0, 1}, {1, 0}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 2}});
}

MILCQPInstance propb_second() {
  return difference_instance({{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 6}, {6, 3}});
}

LCQPInstance fig2_first_relaxed() { return fig2_first().base; }

LCQPInstance fig2_second_relaxed() { return fig2_second().base; }

MILCQPInstance appc_instance() {
  MILCQPInstance mi;
  LCQPInstance& inst = mi.base;
  inst.n = 3;
  inst.m = 2;
  inst.c = {1.0, 7.0, 1.0};
  inst.a = {{0, 0, 1.0}, {0, 1, 2.0}, {0, 2, 1.0}, {1, 0, 1.0}, {1, 1, 5.0}, {1, 2, 1.0}};
  inst.b = {1.0, 2.0};
  inst.senses = {Sense::LE, Sense::LE};
  inst.lower.assign(3, 0.0);
  inst.upper.assign(3, 1.0);
  mi.integer_set = {0, 1, 2};
  return mi;
}

std::uint64_t corpus_hash() {
  std::string blob;
  for (const AnyInstance& inst :
       {AnyInstance(fig2_first()), AnyInstance(fig2_second()),
        AnyInstance(fig2_second_display_variant()), AnyInstance(propb_first()),
        AnyInstance(propb_second()), AnyInstance(fig2_first_relaxed()),
        AnyInstance(fig2_second_relaxed()), AnyInstance(appc_instance())})
    blob += instance_to_json(inst);

  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : blob) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace qpgnn::corpus
