#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "qpgnn/generator.hpp"
#include "qpgnn/instance_io.hpp"
#include "qpgnn/rng.hpp"

using namespace qpgnn;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LCQPInstance tiny_instance() {
  LCQPInstance inst;
  inst.n = 2;
  inst.m = 1;
  inst.q = {{0, 0, 2.0}, {0, 1, 0.5}, {1, 0, 0.5}, {1, 1, 1.0}};
  inst.c = {1.0, -1.0};
  inst.a = {{0, 0, 1.0}, {0, 1, 1.0}};
  inst.b = {1.0};
  inst.senses = {Sense::LE};
  inst.lower = {0.0, -kInf};
  inst.upper = {3.0, kInf};
  return inst;
}

/// Closed-form eigenvalues of a symmetric 2x2 matrix (the independent PSD
/// oracle for this file).
std::pair<double, double> eigenvalues_2x2(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double radius = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return {mean - radius, mean + radius};
}

}  // namespace

TEST_SUITE("instance") {
  TEST_CASE("zero Q validates") {
    LCQPInstance inst = tiny_instance();
    inst.q.clear();
    CHECK(validate(inst).ok);
  }

  TEST_CASE("asymmetric Q is a violation") {
    LCQPInstance inst = tiny_instance();
    inst.q = {{0, 1, 2.0}, {1, 0, 1.0}};
    const ValidationReport report = validate(inst);
    CHECK_FALSE(report.ok);
    CHECK(report.violations.front().first == "Q.symmetric");
  }

  TEST_CASE("indefinite Q detected against the 2x2 eigenvalue formula") {
    // Oracle first: [[1,2],[2,1]] has eigenvalues 3 and -1.
    const auto [lo, hi] = eigenvalues_2x2(1.0, 2.0, 1.0);
    CHECK(lo == doctest::Approx(-1.0));
    CHECK(hi == doctest::Approx(3.0));

    LCQPInstance inst = tiny_instance();
    inst.q = {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}};
    const ValidationReport report = validate(inst);
    CHECK_FALSE(report.ok);
    bool saw_psd = false;
    for (const auto& [rule, detail] : report.violations) saw_psd |= rule == "Q.psd";
    CHECK(saw_psd);
  }

  TEST_CASE("bound violations") {
    LCQPInstance inst = tiny_instance();
    inst.lower[0] = 4.0;  // above upper[0] = 3
    CHECK_FALSE(validate(inst).ok);

    inst = tiny_instance();
    inst.lower[1] = kInf;  // +inf not allowed as a lower bound
    CHECK_FALSE(validate(inst).ok);
  }

  TEST_CASE("triplet ordering and duplicates rejected") {
    LCQPInstance inst = tiny_instance();
    inst.a = {{0, 1, 1.0}, {0, 0, 1.0}};
    CHECK_FALSE(validate(inst).ok);
    inst.a = {{0, 0, 1.0}, {0, 0, 2.0}};
    CHECK_FALSE(validate(inst).ok);
  }

  TEST_CASE("integer set checked") {
    MILCQPInstance mi;
    mi.base = tiny_instance();
    mi.integer_set = {0, 1};
    CHECK(validate(mi).ok);
    mi.integer_set = {1, 1};
    CHECK_FALSE(validate(mi).ok);
    mi.integer_set = {2};
    CHECK_FALSE(validate(mi).ok);
  }

  TEST_CASE("round trip is identity with infinite-bound sentinels") {
    const std::string path = (std::filesystem::temp_directory_path() / "qpgnn_rt.json").string();
    const LCQPInstance inst = tiny_instance();
    write_instance(inst, path);
    const AnyInstance back = read_instance(path);
    REQUIRE(std::holds_alternative<LCQPInstance>(back));
    CHECK(std::get<LCQPInstance>(back) == inst);
    CHECK(std::get<LCQPInstance>(back).lower[1] == -kInf);
    std::filesystem::remove(path);
  }

  TEST_CASE("mixed-integer round trip keeps the integer set") {
    GenConfig config;
    config.m = 4;
    config.n = 6;
    config.nnz_a = 8;
    config.seed = 11;
    const MILCQPInstance mi = gen_milcqp(config);
    const AnyInstance back = instance_from_json(instance_to_json(mi));
    REQUIRE(std::holds_alternative<MILCQPInstance>(back));
    CHECK(std::get<MILCQPInstance>(back) == mi);
  }

  TEST_CASE("bad sense token is a parse error") {
    const std::string text = R"({"version":1,"n":1,"m":1,"Q":[],"c":[0.0],"A":[[0,0,1.0]],
      "b":[1.0],"senses":["<"],"l":[0.0],"u":[1.0]})";
    CHECK_THROWS_AS(instance_from_json(text), ParseError);
  }

  TEST_CASE("schema version mismatch is a parse error") {
    const std::string text = R"({"version":7,"n":0,"m":0,"Q":[],"c":[],"A":[],
      "b":[],"senses":[],"l":[],"u":[]})";
    CHECK_THROWS_AS(instance_from_json(text), ParseError);
  }

  TEST_CASE("lower-triangle entries in files are rejected") {
    const std::string text = R"({"version":1,"n":2,"m":0,"Q":[[1,0,0.5]],"c":[0.0,0.0],
      "A":[],"b":[],"senses":[],"l":[0.0,0.0],"u":[1.0,1.0]})";
    CHECK_THROWS_AS(instance_from_json(text), ParseError);
  }

  TEST_CASE("random accepted instances satisfy the PSD probe") {
    Rng rng(99);
    for (int k = 0; k < 10; ++k) {
      GenConfig config;
      config.m = 5;
      config.n = 9;
      config.nnz_a = 12;
      config.seed = 200 + k;
      const LCQPInstance inst = gen_lcqp(config);
      REQUIRE(validate(inst).ok);
      double frob2 = 0.0;
      for (const Triplet& t : inst.q) frob2 += t.value * t.value;
      for (int probe = 0; probe < 25; ++probe) {
        std::vector<double> x(inst.n);
        double norm2 = 0.0;
        for (double& v : x) {
          v = rng.normal();
          norm2 += v * v;
        }
        double quad = 0.0;
        for (const Triplet& t : inst.q) quad += x[t.row] * t.value * x[t.col];
        CHECK(quad >= -kPsdTol * std::max(1.0, std::sqrt(frob2)) * norm2);
      }
    }
  }

  TEST_CASE("permute round trip") {
    const LCQPInstance inst = tiny_instance();
    VertexPermutation perm{{0}, {1, 0}};
    const LCQPInstance once = permute_instance(inst, perm);
    CHECK(once.c[0] == inst.c[1]);
    CHECK(permute_instance(once, perm) == inst);
  }
}
