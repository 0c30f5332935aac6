// Acceptance gate: one exact, zero-tolerance check per shipping criterion.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "hilbk3/io.hpp"
#include "hilbk3/parser.hpp"
#include "hilbk3/verify.hpp"
#include "hilbk3/wedge.hpp"
#include "support.hpp"

using namespace hilbk3;

namespace {

int failures = 0;

void report(int num, const std::string& what, bool pass, const std::string& detail = "") {
  std::printf("%s criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", num, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
}

// 1. Heisenberg relations for all basis classes, 1 <= |m|,|n| <= 4, on all
//    basis states of weight <= 4, by direct application.
bool heisenberg() {
  SurfaceModel m = support::k3Rank1(1);
  std::vector<FockVector> states;
  for (int w = 0; w <= 4; ++w)
    for (auto& key : weightBasis(m, w)) states.push_back(basisVector(m, key));
  for (int a = 0; a < m.basisSize(); ++a)
    for (int b = 0; b < m.basisSize(); ++b) {
      SurfaceClass ca = SurfaceClass::basis(m, a), cb = SurfaceClass::basis(m, b);
      Rat pair = surfacePairing(m, a, b);
      for (int mm = -4; mm <= 4; ++mm)
        for (int nn = -4; nn <= 4; ++nn) {
          if (mm == 0 || nn == 0) continue;
          for (auto& x : states) {
            FockVector lhs = applyWord({mm}, ca, applyWord({nn}, cb, x)) -
                             applyWord({nn}, cb, applyWord({mm}, ca, x));
            FockVector rhs = x;
            rhs *= (mm + nn == 0 ? Rat(mm) * pair : Rat(0));
            if (!(lhs == rhs)) return false;
          }
        }
    }
  return true;
}

// 2. sl2-style triple for a in {v, delta, v+delta} on the rank 1 model.
bool sl2Triples() {
  SurfaceModel m = support::k3Rank1(0);
  HilbDivisor v = HilbDivisor::divisor(m, 0);
  HilbDivisor d = HilbDivisor::deltaClass(m);
  HilbDivisor vd = v;
  vd.delta = 1;
  for (int n = 2; n <= 3; ++n) {
    Instantiator inst(m);
    ConcreteOperator H = inst(hOp(m), n);
    for (auto& a : {v, d, vd}) {
      OperatorExpr ea = eGeneral(m, a), fta = ftGeneral(m, a);
      ConcreteOperator E = inst(ea, n), F = inst(fta, n);
      ConcreteOperator he = inst(OperatorExpr::bracket(hOp(m), ea), n);
      ConcreteOperator hf = inst(OperatorExpr::bracket(hOp(m), fta), n);
      ConcreteOperator ef = inst(OperatorExpr::bracket(ea, fta), n);
      ConcreteOperator scaledH = H;
      scaledH *= bbPairing(m, a, a, n);
      if (!(he == Rat(2) * E)) return false;
      if (!(hf == Rat(-2) * F)) return false;
      if (!(ef == scaledH)) return false;
    }
  }
  return true;
}

// 3. [e_delta, ft_delta] = (2-2n) h at n = 2, 3, 4.
bool relationC() {
  SurfaceModel m = support::k3Rank1(0);
  for (int n = 2; n <= 4; ++n) {
    ConcreteOperator lhs =
        instantiate(m, OperatorExpr::bracket(eDelta(m), ftDelta(m)), n);
    ConcreteOperator rhs = instantiate(m, hOp(m), n);
    rhs *= Rat(2 - 2 * n);
    if (!(lhs == rhs)) return false;
  }
  return true;
}

// 6. Commutator of T with Nakajima words against the slotwise transfer
//    formula, 50 random instances on weight <= 4.
bool tTransfer() {
  SurfaceModel m = support::k3Rank2(1);
  std::mt19937 rng(20260826);
  std::uniform_int_distribution<int> arity(1, 3), idx(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    MultiPointClass g = support::randomHomogeneous(rng, m, 2, 2);
    int k = arity(rng);
    std::vector<int> word(k);
    int total = 0;
    for (int& w : word) {
      do {
        w = idx(rng);
      } while (w == 0 || std::abs(total + w) > 3);
      total += w;
    }
    MultiPointClass c = support::randomClass(rng, m, k, 2);
    if (c.isZero()) continue;
    OperatorExpr lhs = OperatorExpr::bracket(tGamma(m, g), nakajimaWord(m, word, c));
    OperatorExpr rhs = support::tBracketRhs(m, g, word, c);
    int n = std::max(0, -total) + 1;
    ConcreteOperator L = lhs.kind == OperatorExpr::Kind::Zero
                             ? Rat(0) * identityOperator(m, n)
                             : instantiate(m, lhs, n);
    ConcreteOperator R = rhs.kind == OperatorExpr::Kind::Zero
                             ? Rat(0) * identityOperator(m, n)
                             : instantiate(m, rhs, n);
    if (!(L.entries == R.entries)) return false;
  }
  return true;
}

// 7. T is a Lie algebra map: 25 random homogeneous pairs at n = 2 and 3.
bool tHomomorphism() {
  SurfaceModel m = support::k3Rank1(1);
  std::mt19937 rng(8675309);
  for (int trial = 0; trial < 25; ++trial) {
    MultiPointClass a = support::randomHomogeneous(rng, m, 2, 2);
    MultiPointClass b = support::randomHomogeneous(rng, m, 2, 2);
    MultiPointClass comm = composeCorrespondences(a, b) - composeCorrespondences(b, a);
    OperatorExpr lhs = OperatorExpr::bracket(tGamma(m, a), tGamma(m, b));
    for (int n = 2; n <= 3; ++n) {
      ConcreteOperator want = comm.isZero() ? Rat(0) * identityOperator(m, n)
                                            : instantiate(m, tGamma(m, comm), n);
      if (!(instantiate(m, lhs, n) == want)) return false;
    }
  }
  return true;
}

// 8. rho is a homomorphism on 20 random pairs at n = 2; the instantiated
//    algebra closes at dimension (r+3)(r+2)/2 = 6 for r = 1.
bool rhoAndClosure() {
  SurfaceModel m = support::k3Rank1(0);
  int n = 2;
  WedgeAmbient W(m, n);
  std::mt19937 rng(24601);
  std::uniform_int_distribution<int> idx(0, W.dim() - 1), nterms(1, 3);
  Instantiator inst(m);
  ConcreteOperator zero = Rat(0) * identityOperator(m, n);
  for (int trial = 0; trial < 20; ++trial) {
    WedgeElement x(W), y(W);
    for (int t = nterms(rng); t > 0; --t) x.add(idx(rng), idx(rng), support::randomRat(rng));
    for (int t = nterms(rng); t > 0; --t) y.add(idx(rng), idx(rng), support::randomRat(rng));
    OperatorExpr rx = rho(x), ry = rho(y), rb = rho(wedgeBracket(x, y));
    ConcreteOperator lhs = zero;
    if (rx.kind != OperatorExpr::Kind::Zero && ry.kind != OperatorExpr::Kind::Zero)
      lhs = inst(OperatorExpr::bracket(rx, ry), n);
    ConcreteOperator rhs = rb.kind == OperatorExpr::Kind::Zero ? zero : inst(rb, n);
    if (!(lhs == rhs)) return false;
  }
  return lieClosureDimension(m, 2, 8).allPass();
}

// 10. Zero-cycle spectrum at n = 2 with 2 point symbols: exactly {0, 2, 4}.
bool spectrum(std::string& detail) {
  Report rep = zeroCycleSpectrum(support::k3Rank1(2), 2);
  if (!rep.allPass()) return false;
  std::set<int> want{0, 2, 4}, got;
  for (auto& c : rep.checks) {
    auto at = c.name.find("eigenvalue ");
    if (at != std::string::npos) got.insert(std::stoi(c.name.substr(at + 11)));
    if (c.name.rfind("diagonalizable", 0) == 0) detail = c.detail;
  }
  return got == want && detail.find(" 0(") != std::string::npos &&
         detail.find(" 2(") != std::string::npos && detail.find(" 4(") != std::string::npos;
}

// 11. Infrastructure: 500 confluence trials, truncation widening, 200 parser
//     round trips, cache transparency.
bool infrastructure() {
  {
    SurfaceModel m = support::k3Rank2(2);
    std::mt19937 rng(112358);
    for (int trial = 0; trial < 500; ++trial)
      if (!support::confluenceTrial(rng, m)) return false;
  }
  {
    SurfaceModel m = support::k3Rank1(1);
    for (auto& e : {eDelta(m), ftDelta(m), hOp(m)})
      for (int n = 1; n <= 3; ++n)
        if (!(instantiate(m, e, n, 2) == instantiate(m, e, n, 0))) return false;
  }
  {
    SurfaceModel m = support::k3Rank2(1);
    std::mt19937 rng(314159);
    std::uniform_int_distribution<int> roll(0, 6), nidx(-3, 3);
    for (int trial = 0; trial < 200; ++trial) {
      // simple random leaves exercise every literal printer
      ParsedExpr ast;
      switch (roll(rng)) {
        case 0: ast = parseExpr(m, "h"); break;
        case 1: ast = parseExpr(m, "L0"); break;
        case 2: {
          ast.kind = ParsedExpr::Kind::E;
          ast.cls = HilbDivisor::divisor(m, trial % 2);
          ast.cls.delta = support::randomRat(rng);
          break;
        }
        case 3: {
          ast.kind = ParsedExpr::Kind::Q;
          do { ast.index = nidx(rng); } while (ast.index == 0);
          ast.qClass = SurfaceClass::basis(m, trial % m.basisSize());
          break;
        }
        case 4: {
          ast.kind = ParsedExpr::Kind::T;
          ast.corr = support::randomClass(rng, m, 2, 2);
          if (ast.corr.isZero()) ast.corr = MultiPointClass::one(m, 2);
          break;
        }
        case 5: {
          ast.kind = ParsedExpr::Kind::Bracket;
          ast.children = {parseExpr(m, "h"), parseExpr(m, "e(v1)")};
          break;
        }
        default: {
          ast.kind = ParsedExpr::Kind::Scalar;
          ast.scalar = support::randomRat(rng);
          ast.children = {parseExpr(m, "ft(delta)")};
        }
      }
      std::string printed = printExpr(m, ast);
      if (!(parseExpr(m, printed) == ast)) return false;
      if (printExpr(m, parseExpr(m, printed)) != printed) return false;
    }
  }
  {
    namespace fs = std::filesystem;
    SurfaceModel m = support::k3Rank1(0);
    fs::path dir = fs::temp_directory_path() / "hilbk3-acceptance-cache";
    fs::remove_all(dir);
    OperatorCache cache(dir);
    OperatorExpr e = OperatorExpr::bracket(eDelta(m), ftDelta(m));
    ConcreteOperator direct = instantiate(m, e, 2);
    bool ok = instantiateCached(m, e, 2, cache) == direct &&
              instantiateCached(m, e, 2, cache) == direct;
    for (auto& entry : fs::directory_iterator(dir)) {
      std::ofstream out(entry.path());
      out << "garbage";
    }
    ok = ok && instantiateCached(m, e, 2, cache) == direct;
    fs::remove_all(dir);
    if (!ok) return false;
  }
  return true;
}

}  // namespace

int main() {
  report(1, "Heisenberg relations, all basis classes, |m|,|n| <= 4, weight <= 4", heisenberg());
  report(2, "[h,e_a], [h,ft_a], [e_a,ft_a] for a in {v, delta, v+delta}, n = 2, 3", sl2Triples());
  report(3, "[e_delta, ft_delta] = (2-2n) h at n = 2, 3, 4", relationC());

  {
    Report rep = relationSuite(support::k3Rank1(0), 2);
    std::string detail;
    for (auto& c : rep.checks)
      if (!c.pass) {
        detail = c.name;
        break;
      }
    report(4, "full relation display over all basis tuples at n = 2", rep.allPass(), detail);
  }

  {
    SurfaceModel m = support::k3Rank1(0);
    bool ok = true;
    for (int n = 1; n <= 4 && ok; ++n) {
      ConcreteOperator expect = identityOperator(m, n);
      expect *= Rat(-n);
      ok = instantiate(m, l0Op(m), n) == expect;
    }
    Report coh = gradingSuite(support::k3Rank3(0, Mode::Cohomology), 2);
    report(5, "L0 = -n id for n = 1..4; h diagonal 2d-2n in cohomology (r = 3, n = 2)",
           ok && coh.allPass());
  }

  report(6, "T-commutator transfer formula, 50 random instances, weight <= 4", tTransfer());
  report(7, "[T_G, T_G'] = T_[G,G'] for 25 random homogeneous pairs, n = 2, 3",
         tHomomorphism());
  report(8, "rho homomorphism on 20 random pairs at n = 2; closure dimension 6",
         rhoAndClosure());

  {
    bool ok = true;
    for (int n = 2; n <= 3 && ok; ++n) ok = injectivityRank(support::k3Rank1(0), n).allPass();
    report(9, "Chow vs cohomology ranks agree in every degree, n = 2, 3", ok);
  }

  {
    std::string detail;
    report(10, "zero-cycle spectrum at n = 2 with 2 points is exactly {0, 2, 4}",
           spectrum(detail), detail);
  }

  report(11, "confluence x500, truncation widening, parser round trip x200, cache", infrastructure());

  if (failures) {
    std::printf("%d criterion(s) FAILED\n", failures);
    return 1;
  }
  std::printf("all 11 criteria PASS\n");
  return 0;
}
