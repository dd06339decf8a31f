#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpgnn {

/// Relation of a linear constraint row: a_i^T x {<=, =, >=} b_i.
enum class Sense : std::uint8_t { LE = 0, EQ = 1, GE = 2 };

inline const char* sense_token(Sense s) {
  switch (s) {
    case Sense::LE: return "<=";
    case Sense::EQ: return "=";
    case Sense::GE: return ">=";
  }
  throw std::logic_error("invalid sense");
}

Sense sense_from_token(const std::string& token);

/// One entry of a sparse matrix in coordinate form.
struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

/// Row-major coordinate order; the canonical order for stored triplets.
inline bool triplet_before(const Triplet& a, const Triplet& b) {
  if (a.row != b.row) return a.row < b.row;
  return a.col < b.col;
}

void sort_triplets(std::vector<Triplet>& ts);

/// Error for malformed files, schemas, or arguments.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qpgnn
