#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "hilbk3/operators.hpp"

namespace hilbk3 {

namespace detail {

inline Rat jsonRat(const nlohmann::json& v) {
  if (v.is_number_integer()) return Rat(v.get<long>());
  if (v.is_string()) return parseRat(v.get<std::string>());
  throw std::invalid_argument("rational entries must be integers or \"p/q\" strings");
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = digits[v & 0xf];
  return s;
}

}  // namespace detail

inline SurfaceModel modelFromJson(const nlohmann::json& j) {
  int rank = j.at("rank").get<int>();
  if (rank < 0) throw std::invalid_argument("negative rank");
  auto& g = j.at("gram");
  if (static_cast<int>(g.size()) != rank) throw std::invalid_argument("gram size != rank");
  std::vector<std::vector<Rat>> gram(rank);
  for (int i = 0; i < rank; ++i) {
    if (static_cast<int>(g[i].size()) != rank) throw std::invalid_argument("gram row size != rank");
    for (auto& v : g[i]) gram[i].push_back(detail::jsonRat(v));
  }
  int points = j.value("points", 0);
  std::string mode = j.value("mode", "chow");
  if (mode != "chow" && mode != "cohomology")
    throw std::invalid_argument("mode must be \"chow\" or \"cohomology\"");
  return SurfaceModel(QuadraticSpace(std::move(gram)), points,
                      mode == "chow" ? Mode::Chow : Mode::Cohomology);
}

inline SurfaceModel loadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  return modelFromJson(j);
}

/// Stable fingerprint of a model, part of every cache key.
inline std::string modelDigest(const SurfaceModel& m) {
  std::ostringstream os;
  os << m.rank() << ";";
  for (int i = 0; i < m.rank(); ++i)
    for (int j = 0; j < m.rank(); ++j) os << ratStr(m.divisors.pairing(i, j)) << ",";
  os << ";" << m.points << ";" << (m.mode == Mode::Chow ? "chow" : "cohomology");
  return detail::hex64(detail::fnv1a64(os.str()));
}

// -- operator serialization ---------------------------------------------------

namespace detail {

inline nlohmann::json keyToJson(const FockKey& k) {
  nlohmann::json match = nlohmann::json::array();
  for (auto [i, j] : k.term.matching) match.push_back({i, j});
  return {{"weights", k.weights}, {"matching", match}, {"deco", k.term.deco}};
}

inline FockKey keyFromJson(const nlohmann::json& j) {
  FockKey k;
  k.weights = j.at("weights").get<std::vector<int>>();
  k.term.deco = j.at("deco").get<std::vector<int>>();
  for (auto& e : j.at("matching")) k.term.matching.emplace_back(e[0].get<int>(), e[1].get<int>());
  return k;
}

}  // namespace detail

inline nlohmann::json operatorToJson(const ConcreteOperator& op) {
  nlohmann::json src = nlohmann::json::array(), tgt = nlohmann::json::array();
  for (auto& k : op.source) src.push_back(detail::keyToJson(k));
  for (auto& k : op.target) tgt.push_back(detail::keyToJson(k));
  nlohmann::json ents = nlohmann::json::array();
  for (auto& [rc, v] : op.entries) ents.push_back({rc.first, rc.second, ratStr(v)});
  nlohmann::json j = {{"source_weight", op.sourceWeight},
                      {"weight_shift", op.weightShift},
                      {"source", std::move(src)},
                      {"target", std::move(tgt)},
                      {"entries", std::move(ents)}};
  j["checksum"] = detail::hex64(detail::fnv1a64(j.dump()));
  return j;
}

/// Inverse of operatorToJson; verifies the embedded checksum and throws on
/// mismatch or malformed content.
inline ConcreteOperator operatorFromJson(nlohmann::json j) {
  std::string sum = j.at("checksum").get<std::string>();
  j.erase("checksum");
  if (sum != detail::hex64(detail::fnv1a64(j.dump())))
    throw std::runtime_error("operator file checksum mismatch");
  ConcreteOperator op;
  op.sourceWeight = j.at("source_weight").get<int>();
  op.weightShift = j.at("weight_shift").get<int>();
  for (auto& k : j.at("source")) op.source.push_back(detail::keyFromJson(k));
  for (auto& k : j.at("target")) op.target.push_back(detail::keyFromJson(k));
  for (auto& e : j.at("entries"))
    op.add(e[0].get<int>(), e[1].get<int>(), parseRat(e[2].get<std::string>()));
  return op;
}

/// On-disk cache of instantiated operators, keyed by (model digest, canonical
/// expression name, weight). Corrupt or unreadable entries are ignored and
/// recomputed; writes go through a temp file and an atomic rename.
class OperatorCache {
 public:
  OperatorCache() = default;
  explicit OperatorCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  bool enabled() const { return !dir_.empty(); }

  std::optional<ConcreteOperator> load(const SurfaceModel& m, const std::string& exprName,
                                       int n) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(path(m, exprName, n));
    if (!in) return std::nullopt;
    try {
      nlohmann::json j;
      in >> j;
      return operatorFromJson(std::move(j));
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  void store(const SurfaceModel& m, const std::string& exprName, int n,
             const ConcreteOperator& op) const {
    if (!enabled()) return;
    std::filesystem::path target = path(m, exprName, n);
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp);
      out << operatorToJson(op).dump(1) << "\n";
    }
    std::filesystem::rename(tmp, target);
  }

 private:
  std::filesystem::path path(const SurfaceModel& m, const std::string& exprName, int n) const {
    std::string key = modelDigest(m) + "|" + exprName + "|" + std::to_string(n);
    return dir_ / (detail::hex64(detail::fnv1a64(key)) + ".json");
  }

  std::filesystem::path dir_;
};

/// Instantiates through the cache when one is configured.
inline ConcreteOperator instantiateCached(const SurfaceModel& m, const OperatorExpr& e, int n,
                                          const OperatorCache& cache) {
  if (auto hit = cache.load(m, e.name, n)) return *hit;
  ConcreteOperator op = instantiate(m, e, n);
  cache.store(m, e.name, n, op);
  return op;
}

}  // namespace hilbk3
