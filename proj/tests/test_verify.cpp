#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>

#include "hilbk3/verify.hpp"
#include "support.hpp"

using namespace hilbk3;

TEST_CASE("the relation suite passes on small models") {
  for (int n = 2; n <= 3; ++n) {
    Report rep = relationSuite(support::k3Rank1(0), n);
    CHECK(!rep.checks.empty());
    for (auto& c : rep.checks) {
      INFO("n=", n, " ", c.name, " ", c.detail);
      CHECK(c.pass);
    }
  }
  Report rank2 = relationSuite(support::k3Rank2(0), 2);
  CHECK(rank2.allPass());
}

TEST_CASE("the grading suite passes in both modes") {
  Report chow = gradingSuite(support::k3Rank1(1), 2);
  for (auto& c : chow.checks) {
    INFO(c.name, " ", c.detail);
    CHECK(c.pass);
  }
  Report coh = gradingSuite(support::k3Rank1(1, Mode::Cohomology), 2);
  for (auto& c : coh.checks) {
    INFO(c.name, " ", c.detail);
    CHECK(c.pass);
  }
}

TEST_CASE("divisor-generated classes inject into cohomology") {
  Report rep = injectivityRank(support::k3Rank1(0), 2);
  CHECK(rep.allPass());
  CHECK(rep.checks.back().name == "all degrees agree");
}

TEST_CASE("the zero cycle spectrum is even, nonnegative and bounded by 2n") {
  Report rep = zeroCycleSpectrum(support::k3Rank1(2), 2);
  for (auto& c : rep.checks) {
    INFO(c.name, " ", c.detail);
    CHECK(c.pass);
  }
}

TEST_CASE("the closure suite finds the orthogonal algebra dimension") {
  Report rep = lieClosureDimension(support::k3Rank1(0), 2, 6);
  CHECK(rep.allPass());
}

TEST_CASE("reports are deterministic") {
  std::string a = relationSuite(support::k3Rank1(0), 2).table();
  std::string b = relationSuite(support::k3Rank1(0), 2).table();
  CHECK(a == b);
  CHECK(a.find("suite: relations") != std::string::npos);
  CHECK(a.find("ALL PASS") != std::string::npos);
}

TEST_CASE("failures carry an exact witness column") {
  SurfaceModel m = support::k3Rank1(0);
  ConcreteOperator lhs = identityOperator(m, 1);
  ConcreteOperator rhs = identityOperator(m, 1);
  rhs *= Rat(3);
  Report rep;
  rep.suite = "demo";
  detail::checkEqual(rep, m, "id = 3 id", lhs, rhs);
  REQUIRE(rep.checks.size() == 1);
  CHECK(!rep.checks[0].pass);
  CHECK(rep.checks[0].detail.find("witness") != std::string::npos);
  CHECK(rep.table().find("FAILURES PRESENT") != std::string::npos);
}
