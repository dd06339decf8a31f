#include "qpgnn/instance_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace qpgnn {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json bound_to_json(double v) {
  if (v == -kInf) return json("-inf");
  if (v == kInf) return json("+inf");
  return json(v);
}

double bound_from_json(const json& j, const char* field) {
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    if (s == "-inf") return -kInf;
    if (s == "+inf") return kInf;
    throw ParseError(std::string(field) + ": unknown bound sentinel \"" + s + "\"");
  }
  if (!j.is_number()) throw ParseError(std::string(field) + ": expected number or sentinel");
  return j.get<double>();
}

json triplets_to_json(const std::vector<Triplet>& ts, bool upper_only) {
  json arr = json::array();
  for (const Triplet& t : ts) {
    if (upper_only && t.row > t.col) continue;
    arr.push_back(json::array({t.row, t.col, t.value}));
  }
  return arr;
}

std::vector<Triplet> triplets_from_json(const json& arr, const char* field) {
  if (!arr.is_array()) throw ParseError(std::string(field) + ": expected array of [i,j,v]");
  std::vector<Triplet> ts;
  ts.reserve(arr.size());
  for (const json& e : arr) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer() ||
        !e[2].is_number())
      throw ParseError(std::string(field) + ": malformed triplet at entry " +
                       std::to_string(ts.size()));
    ts.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  return ts;
}

template <typename T>
std::vector<T> values_from_json(const json& arr, const char* field) {
  if (!arr.is_array()) throw ParseError(std::string(field) + ": expected array");
  std::vector<T> out;
  out.reserve(arr.size());
  for (const json& e : arr) {
    if (!e.is_number()) throw ParseError(std::string(field) + ": expected numeric entries");
    out.push_back(e.get<T>());
  }
  return out;
}

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) throw ParseError(std::string("missing field \"") + field + "\"");
  return *it;
}

}  // namespace

std::string instance_to_json(const AnyInstance& any) {
  const LCQPInstance& inst = base_of(any);
  json doc;
  doc["version"] = kInstanceFormatVersion;
  doc["n"] = inst.n;
  doc["m"] = inst.m;
  doc["Q"] = triplets_to_json(inst.q, /*upper_only=*/true);
  doc["c"] = inst.c;
  doc["A"] = triplets_to_json(inst.a, /*upper_only=*/false);
  doc["b"] = inst.b;
  json senses = json::array();
  for (Sense s : inst.senses) senses.push_back(sense_token(s));
  doc["senses"] = senses;
  json lo = json::array(), hi = json::array();
  for (double v : inst.lower) lo.push_back(bound_to_json(v));
  for (double v : inst.upper) hi.push_back(bound_to_json(v));
  doc["l"] = lo;
  doc["u"] = hi;
  if (const auto* mi = std::get_if<MILCQPInstance>(&any)) doc["integer_set"] = mi->integer_set;
  return doc.dump(2) + "\n";
}

AnyInstance instance_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("json parse failure: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("top-level document must be an object");

  const int version = require(doc, "version").get<int>();
  if (version != kInstanceFormatVersion)
    throw ParseError("schema-version mismatch: file has version " + std::to_string(version) +
                     ", expected " + std::to_string(kInstanceFormatVersion));

  LCQPInstance inst;
  inst.n = require(doc, "n").get<int>();
  inst.m = require(doc, "m").get<int>();
  if (inst.n < 0 || inst.m < 0) throw ParseError("n and m must be nonnegative");

  inst.q = triplets_from_json(require(doc, "Q"), "Q");
  for (const Triplet& t : inst.q)
    if (t.row > t.col) throw ParseError("Q: entries must be upper-triangle only");
  // Mirror the strict upper triangle.
  {
    std::vector<Triplet> mirrored;
    mirrored.reserve(inst.q.size());
    for (const Triplet& t : inst.q)
      if (t.row < t.col) mirrored.push_back({t.col, t.row, t.value});
    inst.q.insert(inst.q.end(), mirrored.begin(), mirrored.end());
    sort_triplets(inst.q);
  }
  inst.a = triplets_from_json(require(doc, "A"), "A");
  inst.c = values_from_json<double>(require(doc, "c"), "c");
  inst.b = values_from_json<double>(require(doc, "b"), "b");
  const json& senses = require(doc, "senses");
  if (!senses.is_array()) throw ParseError("senses: expected array");
  for (const json& e : senses) {
    if (!e.is_string()) throw ParseError("senses: expected string tokens");
    inst.senses.push_back(sense_from_token(e.get<std::string>()));
  }
  const json& lo = require(doc, "l");
  const json& hi = require(doc, "u");
  if (!lo.is_array() || !hi.is_array()) throw ParseError("l/u: expected arrays");
  for (const json& e : lo) inst.lower.push_back(bound_from_json(e, "l"));
  for (const json& e : hi) inst.upper.push_back(bound_from_json(e, "u"));

  if (auto it = doc.find("integer_set"); it != doc.end()) {
    MILCQPInstance mi;
    mi.base = std::move(inst);
    mi.integer_set = values_from_json<int>(*it, "integer_set");
    return mi;
  }
  return inst;
}

void write_instance(const AnyInstance& any, const std::string& path) {
  ValidationReport report = std::holds_alternative<MILCQPInstance>(any)
                                ? validate(std::get<MILCQPInstance>(any))
                                : validate(std::get<LCQPInstance>(any));
  if (!report.ok)
    throw std::invalid_argument("refusing to write invalid instance: " +
                                report.violations.front().first);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << instance_to_json(any);
}

AnyInstance read_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return instance_from_json(buf.str());
  } catch (ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace qpgnn
