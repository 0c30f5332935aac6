#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "hilbk3/io.hpp"
#include "hilbk3/parser.hpp"
#include "support.hpp"

using namespace hilbk3;

namespace {

HilbDivisor randomDivisor(std::mt19937& rng, const SurfaceModel& m) {
  while (true) {
    HilbDivisor a(m);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int i = 0; i < m.rank(); ++i)
      if (pick(rng) == 0) a.div[i] = support::randomRat(rng);
    if (pick(rng) == 0) a.delta = support::randomRat(rng);
    if (!a.isZero()) return a;
  }
}

SurfaceClass randomSurface(std::mt19937& rng, const SurfaceModel& m) {
  while (true) {
    SurfaceClass x(m);
    std::uniform_int_distribution<int> pick(0, 2);
    for (int b = 0; b < m.basisSize(); ++b)
      if (pick(rng) == 0) x.coeff[b] = support::randomRat(rng);
    if (!x.isZero()) return x;
  }
}

MultiPointClass randomCorr(std::mt19937& rng, const SurfaceModel& m) {
  while (true) {
    MultiPointClass g = support::randomClass(rng, m, 2, 2);
    if (!g.isZero()) return g;
  }
}

/// Random AST shaped so that the canonical print parses back to the same
/// tree: no sum directly under sum and no composition under composition,
/// since the parser flattens those chains.
ParsedExpr randomAst(std::mt19937& rng, const SurfaceModel& m, int depth, bool inSum,
                     bool inCompose) {
  using Kind = ParsedExpr::Kind;
  std::uniform_int_distribution<int> leaf(0, 6), node(0, 3 + 6);
  int roll = depth == 0 ? leaf(rng) : node(rng);
  ParsedExpr e;
  switch (roll) {
    case 0: e.kind = Kind::H; return e;
    case 1: e.kind = Kind::L0; return e;
    case 2:
      e.kind = Kind::E;
      e.cls = randomDivisor(rng, m);
      return e;
    case 3:
      e.kind = Kind::Ft;
      e.cls = randomDivisor(rng, m);
      return e;
    case 4:
      e.kind = Kind::F;
      e.cls = randomDivisor(rng, m);
      return e;
    case 5: {
      e.kind = Kind::Q;
      std::uniform_int_distribution<int> idx(-3, 3);
      do { e.index = idx(rng); } while (e.index == 0);
      e.qClass = randomSurface(rng, m);
      return e;
    }
    case 6:
      e.kind = Kind::T;
      e.corr = randomCorr(rng, m);
      return e;
    case 7:
      e.kind = Kind::Scalar;
      e.scalar = support::randomRat(rng);
      e.children.push_back(randomAst(rng, m, depth - 1, false, false));
      return e;
    case 8: {
      e.kind = Kind::Sum;
      std::uniform_int_distribution<int> nkids(2, 3);
      int k = nkids(rng);
      for (int i = 0; i < k; ++i) e.children.push_back(randomAst(rng, m, depth - 1, true, false));
      if (inSum || inCompose) return e.children[0];
      return e;
    }
    case 9: {
      e.kind = Kind::Compose;
      for (int i = 0; i < 2; ++i) e.children.push_back(randomAst(rng, m, depth - 1, false, true));
      if (inCompose) return e.children[0];
      return e;
    }
    default:
      e.kind = Kind::Bracket;
      for (int i = 0; i < 2; ++i) e.children.push_back(randomAst(rng, m, depth - 1, false, false));
      return e;
  }
}

}  // namespace

TEST_CASE("grammar examples parse and lower as expected") {
  SurfaceModel m = support::k3Rank2(1);

  CHECK(parseExpr(m, "h").kind == ParsedExpr::Kind::H);
  CHECK(parseExpr(m, "L0").kind == ParsedExpr::Kind::L0);

  ParsedExpr e = parseExpr(m, "e(v1 + 2*delta - 1/3*v2)");
  REQUIRE(e.kind == ParsedExpr::Kind::E);
  CHECK(e.cls.div[0] == 1);
  CHECK(e.cls.div[1] == rat(-1, 3));
  CHECK(e.cls.delta == 2);

  ParsedExpr q = parseExpr(m, "q(-2, c + 3*p1)");
  REQUIRE(q.kind == ParsedExpr::Kind::Q);
  CHECK(q.index == -2);
  CHECK(q.qClass.coeff[m.cIdx()] == 1);
  CHECK(q.qClass.coeff[m.pointIdx(0)] == 3);

  // scalar binds tighter than composition, which binds tighter than sum
  ParsedExpr mixed = parseExpr(m, "2 * h . L0 + e(v1)");
  REQUIRE(mixed.kind == ParsedExpr::Kind::Sum);
  REQUIRE(mixed.children.size() == 2);
  REQUIRE(mixed.children[0].kind == ParsedExpr::Kind::Compose);
  CHECK(mixed.children[0].children[0].kind == ParsedExpr::Kind::Scalar);
  CHECK(mixed.children[1].kind == ParsedExpr::Kind::E);

  // a vanishing index gives the zero operator
  CHECK(lowerExpr(m, parseExpr(m, "q(0, c)"), 2).kind == OperatorExpr::Kind::Zero);

  // the h operator written as an explicit T correspondence
  OperatorExpr viaT = lowerExpr(m, parseExpr(m, "T(2*(c2 - c1))"), 2);
  CHECK(instantiate(m, viaT, 2) == instantiate(m, hOp(m), 2));

  // bracket syntax, checked against a named relation at n = 2
  OperatorExpr br = lowerExpr(m, parseExpr(m, "[e(delta), ft(delta)]"), 2);
  ConcreteOperator want = instantiate(m, hOp(m), 2);
  want *= Rat(2 - 2 * 2);
  CHECK(instantiate(m, br, 2) == want);
}

TEST_CASE("printing is a right inverse of parsing") {
  SurfaceModel m = support::k3Rank2(1);
  std::mt19937 rng(60902);
  std::uniform_int_distribution<int> depth(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    ParsedExpr ast = randomAst(rng, m, depth(rng), false, false);
    std::string printed = printExpr(m, ast);
    CAPTURE(printed);
    ParsedExpr back = parseExpr(m, printed);
    CHECK(back == ast);
    CHECK(printExpr(m, back) == printed);
  }
}

TEST_CASE("syntax errors carry the offending position") {
  SurfaceModel m = support::k3Rank1(0);
  auto failsAt = [&](const std::string& src, size_t pos) {
    try {
      parseExpr(m, src);
      return false;
    } catch (const ParseError& err) {
      return err.pos == pos;
    }
  };
  CHECK(failsAt("h h", 2));
  CHECK(failsAt("q(1/2, c)", 2));
  CHECK(failsAt("e(v1", 4));
  CHECK(failsAt("[h, h", 5));
  CHECK(failsAt("spin", 0));
  CHECK(failsAt("e(+)", 3));
  CHECK(failsAt("h @", 2));
}

TEST_CASE("lowering a composition tracks the weight through each factor") {
  SurfaceModel m = support::k3Rank1(0);
  // f(v1) inside the composition acts on weight 3 after q(1, u)
  OperatorExpr e = lowerExpr(m, parseExpr(m, "f(v1) . q(1, u)"), 2);
  ConcreteOperator got = instantiate(m, e, 2);
  ConcreteOperator want = composeConcrete(
      instantiate(m, fGeneral(m, HilbDivisor::divisor(m, 0), 3), 3),
      instantiate(m, nakajima(m, 1, SurfaceClass::basis(m, 0)), 2));
  CHECK(got == want);
}

TEST_CASE("operators survive a serialization round trip") {
  SurfaceModel m = support::k3Rank1(1);
  ConcreteOperator op = instantiate(m, eDelta(m), 2);
  nlohmann::json j = operatorToJson(op);
  ConcreteOperator back = operatorFromJson(j);
  CHECK(back == op);
  CHECK(back.source == op.source);
  CHECK(back.target == op.target);

  j["entries"][0][2] = "7/3";
  CHECK_THROWS_AS(operatorFromJson(j), std::runtime_error);
}

TEST_CASE("the model digest separates rank, points and mode") {
  SurfaceModel a = support::k3Rank1(0);
  SurfaceModel b = support::k3Rank1(1);
  SurfaceModel c = support::k3Rank1(0, Mode::Cohomology);
  SurfaceModel d = support::k3Rank2(0);
  CHECK(modelDigest(a) != modelDigest(b));
  CHECK(modelDigest(a) != modelDigest(c));
  CHECK(modelDigest(a) != modelDigest(d));
  CHECK(modelDigest(a) == modelDigest(support::k3Rank1(0)));
}

TEST_CASE("the cache is transparent and survives corruption") {
  namespace fs = std::filesystem;
  SurfaceModel m = support::k3Rank1(0);
  fs::path dir = fs::temp_directory_path() / "hilbk3-cache-test";
  fs::remove_all(dir);
  OperatorCache cache(dir);

  OperatorExpr e = OperatorExpr::bracket(eDelta(m), ftDelta(m));
  ConcreteOperator direct = instantiate(m, e, 2);

  ConcreteOperator first = instantiateCached(m, e, 2, cache);
  CHECK(first == direct);
  CHECK(!fs::is_empty(dir));

  ConcreteOperator second = instantiateCached(m, e, 2, cache);
  CHECK(second == direct);

  // clobber every cache file; the next call must recompute and heal
  for (auto& entry : fs::directory_iterator(dir)) {
    std::ofstream out(entry.path());
    out << "not json";
  }
  ConcreteOperator third = instantiateCached(m, e, 2, cache);
  CHECK(third == direct);
  ConcreteOperator fourth = instantiateCached(m, e, 2, cache);
  CHECK(fourth == direct);

  // a disabled cache passes straight through
  OperatorCache off;
  CHECK(!off.enabled());
  CHECK(instantiateCached(m, e, 2, off) == direct);

  fs::remove_all(dir);
}
