// Command line front end: parses operator expressions, instantiates exact
// matrices through the on-disk cache, and runs the verification suites.
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "hilbk3/io.hpp"
#include "hilbk3/parser.hpp"
#include "hilbk3/verify.hpp"

using namespace hilbk3;

namespace {

struct Options {
  std::string model;
  std::string mode;
  std::string out;
  std::string cacheDir;
  std::string format = "table";
  int n = 2;
};

void addCommon(CLI::App* cmd, Options& opt) {
  cmd->add_option("--model", opt.model, "model JSON file (rank, gram, points, mode)");
  cmd->add_option("--n", opt.n, "number of points of the Hilbert scheme")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mode", opt.mode, "override the model mode")
      ->check(CLI::IsMember({"chow", "cohomology"}));
  cmd->add_option("--out", opt.out, "write output to this file instead of stdout");
  cmd->add_option("--cache-dir", opt.cacheDir, "directory for cached operator matrices");
}

/// Model from --model, or the default rank 1 lattice with Gram matrix (2).
SurfaceModel resolveModel(const Options& opt, int defaultPoints) {
  SurfaceModel m = opt.model.empty()
                       ? SurfaceModel(QuadraticSpace({{Rat(2)}}), defaultPoints, Mode::Chow)
                       : loadModel(opt.model);
  if (!opt.mode.empty()) {
    Mode mode = opt.mode == "chow" ? Mode::Chow : Mode::Cohomology;
    m = SurfaceModel(m.divisors, m.points, mode);
  }
  return m;
}

void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(opt.out);
  if (!f) throw std::runtime_error("cannot write to " + opt.out);
  f << text;
}

nlohmann::json reportJson(const Report& rep) {
  nlohmann::json checks = nlohmann::json::array();
  for (auto& c : rep.checks) checks.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  nlohmann::json meta;
  for (auto& [k, v] : rep.meta) meta[k] = v;
  return {{"suite", rep.suite}, {"meta", meta}, {"checks", checks}, {"all_pass", rep.allPass()}};
}

int emitReport(const Options& opt, const Report& rep) {
  if (opt.format == "json")
    emit(opt, reportJson(rep).dump(2) + "\n");
  else
    emit(opt, rep.table());
  return rep.allPass() ? 0 : 2;
}

int cmdMatrix(const Options& opt, const std::string& exprText) {
  SurfaceModel m = resolveModel(opt, 0);
  ParsedExpr ast = parseExpr(m, exprText);
  std::string canonical = printExpr(m, ast);
  OperatorExpr e = lowerExpr(m, ast, opt.n);
  OperatorCache cache(opt.cacheDir);
  ConcreteOperator op = e.kind == OperatorExpr::Kind::Zero
                            ? Rat(0) * identityOperator(m, opt.n)
                            : instantiateCached(m, e, opt.n, cache);
  if (opt.format == "json") {
    nlohmann::json j = operatorToJson(op);
    j["expr"] = canonical;
    j["n"] = opt.n;
    emit(opt, j.dump(2) + "\n");
    return 0;
  }
  std::ostringstream os;
  os << "# expr: " << canonical << "\n";
  os << "# n: " << opt.n << ", weight shift: " << op.weightShift << "\n";
  for (size_t i = 0; i < op.source.size(); ++i)
    os << "# col " << i << ": " << stateStr(m, op.source[i]) << "\n";
  for (size_t i = 0; i < op.target.size(); ++i)
    os << "# row " << i << ": " << stateStr(m, op.target[i]) << "\n";
  os << "row,col,value\n";
  for (auto& [rc, v] : op.entries) os << rc.first << "," << rc.second << "," << ratStr(v) << "\n";
  emit(opt, os.str());
  return 0;
}

/// Randomized suite: T of a commutator of correspondences equals the
/// commutator of the T operators, on `count` seeded random pairs.
Report tMapSuite(const SurfaceModel& m, int n, unsigned seed, int count,
                 const OperatorCache& cache) {
  Report rep;
  rep.suite = "t_lie_map";
  rep.meta = {{"n", std::to_string(n)},
              {"seed", std::to_string(seed)},
              {"count", std::to_string(count)}};
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> nfac(0, 2), basis(0, m.basisSize() - 1), kind(0, 2);
  auto randomHom = [&]() {
    for (int tries = 0; tries < 64; ++tries) {
      std::vector<RawFactor> fac;
      for (int i = nfac(rng); i > 0; --i)
        fac.push_back(kind(rng) == 0 ? RawFactor::diag(0, 1)
                                     : RawFactor::cls(kind(rng) % 2, basis(rng)));
      MultiPointClass c = reduce(m, 2, fac);
      if (!c.isZero()) return c;
    }
    return MultiPointClass::one(m, 2);
  };
  for (int trial = 0; trial < count; ++trial) {
    MultiPointClass a = randomHom(), b = randomHom();
    MultiPointClass comm = composeCorrespondences(a, b) - composeCorrespondences(b, a);
    OperatorExpr lhs = OperatorExpr::bracket(tGamma(m, a), tGamma(m, b));
    ConcreteOperator L = lhs.kind == OperatorExpr::Kind::Zero
                             ? Rat(0) * identityOperator(m, n)
                             : instantiateCached(m, lhs, n, cache);
    ConcreteOperator R = comm.isZero() ? Rat(0) * identityOperator(m, n)
                                       : instantiateCached(m, tGamma(m, comm), n, cache);
    bool ok = L.entries == R.entries;
    rep.checks.push_back({"trial " + std::to_string(trial) + ": [T(" + classStr(a) + "), T(" +
                              classStr(b) + ")]",
                          ok, ok ? "" : detail::witness(m, L, R)});
  }
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact Nakajima operator calculus on the Hilbert scheme of a K3 surface"};
  app.require_subcommand(1);

  Options opt;
  std::string exprText, suite;
  int depth = 8;
  unsigned seed = 0;
  int count = 25;

  CLI::App* matrix = app.add_subcommand("matrix", "exact matrix of an operator expression");
  matrix->add_option("expr", exprText, "operator expression, e.g. \"[e(delta), ft(delta)]\"")
      ->required();
  addCommon(matrix, opt);
  matrix->add_option("--format", opt.format, "csv (default) or json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
  verify->add_option("suite", suite, "relations, grading or tmap")
      ->required()
      ->check(CLI::IsMember({"relations", "grading", "tmap"}));
  addCommon(verify, opt);
  verify->add_option("--seed", seed, "seed for the randomized tmap suite");
  verify->add_option("--count", count, "number of randomized trials");
  verify->add_option("--format", opt.format, "table (default) or json")
      ->check(CLI::IsMember({"table", "json"}));

  CLI::App* rank = app.add_subcommand("rank", "Chow vs cohomology ranks per degree");
  addCommon(rank, opt);
  rank->add_option("--format", opt.format)->check(CLI::IsMember({"table", "json"}));

  CLI::App* spectrum = app.add_subcommand("spectrum", "spectrum of h on the zero-cycle piece");
  addCommon(spectrum, opt);
  spectrum->add_option("--format", opt.format)->check(CLI::IsMember({"table", "json"}));

  CLI::App* closure = app.add_subcommand("closure", "Lie closure dimension of the divisor action");
  addCommon(closure, opt);
  closure->add_option("--depth", depth, "maximum bracket depth");
  closure->add_option("--format", opt.format)->check(CLI::IsMember({"table", "json"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (matrix->parsed()) {
      if (opt.format == "table") opt.format = "csv";
      return cmdMatrix(opt, exprText);
    }
    if (verify->parsed()) {
      SurfaceModel m = resolveModel(opt, 0);
      if (suite == "relations") return emitReport(opt, relationSuite(m, opt.n));
      if (suite == "grading") return emitReport(opt, gradingSuite(m, opt.n));
      OperatorCache cache(opt.cacheDir);
      return emitReport(opt, tMapSuite(m, opt.n, seed, count, cache));
    }
    if (rank->parsed()) {
      SurfaceModel m = resolveModel(opt, 0);
      return emitReport(opt, injectivityRank(m, opt.n));
    }
    if (spectrum->parsed()) {
      // the zero-cycle suite needs point symbols; default to n of them
      SurfaceModel m = resolveModel(opt, opt.n);
      return emitReport(opt, zeroCycleSpectrum(m, opt.n));
    }
    if (closure->parsed()) {
      SurfaceModel m = resolveModel(opt, 0);
      return emitReport(opt, lieClosureDimension(m, opt.n, depth));
    }
  } catch (const ParseError& err) {
    std::cerr << "parse error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 1;
}
