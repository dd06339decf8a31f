#pragma once

#include <string>
#include <variant>

#include "qpgnn/instance.hpp"

namespace qpgnn {

inline constexpr int kInstanceFormatVersion = 1;

using AnyInstance = std::variant<LCQPInstance, MILCQPInstance>;

inline const LCQPInstance& base_of(const AnyInstance& any) {
  if (const auto* mi = std::get_if<MILCQPInstance>(&any)) return mi->base;
  return std::get<LCQPInstance>(any);
}

/// One JSON document per instance:
///   {version, n, m, Q: [[i,j,v]...] (upper triangle only), c, A: [[i,j,v]...],
///    b, senses, l, u, integer_set?}
/// Indices are 0-based. Infinite bounds are the sentinel strings "-inf"/"+inf";
/// finite floats round-trip bit-exact. Q is mirrored on load.
std::string instance_to_json(const AnyInstance& instance);
AnyInstance instance_from_json(const std::string& text);

/// write requires a validating instance; read requires a parsing, schema-valid file.
void write_instance(const AnyInstance& instance, const std::string& path);
AnyInstance read_instance(const std::string& path);

}  // namespace qpgnn
