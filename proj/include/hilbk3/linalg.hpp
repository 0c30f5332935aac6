#pragma once

#include <map>
#include <vector>

#include "hilbk3/rational.hpp"

namespace hilbk3 {

/// Incremental reduced row span over Q for sparse vectors indexed by int.
/// Used for rank computations and Lie-closure dimension counting.
class RowSpan {
 public:
  /// Reduces v against the span; inserts the remainder if nonzero.
  /// Returns true when v was independent of the current span.
  bool insert(std::map<int, Rat> v) {
    reduceVector(v);
    if (v.empty()) return false;
    auto pivot = v.begin()->first;
    Rat lead = v.begin()->second;
    for (auto& [i, c] : v) c /= lead;
    // back-substitute into existing rows
    for (auto& [p, row] : rows_) {
      auto it = row.find(pivot);
      if (it == row.end()) continue;
      Rat f = it->second;
      for (auto& [i, c] : v) {
        auto jt = row.find(i);
        if (jt == row.end()) {
          row.emplace(i, -f * c);
        } else {
          jt->second -= f * c;
          if (jt->second == 0) row.erase(jt);
        }
      }
    }
    rows_.emplace(pivot, std::move(v));
    return true;
  }

  /// Reduces v in place against the span without inserting.
  void reduceVector(std::map<int, Rat>& v) const {
    while (!v.empty()) {
      auto pivot = v.begin()->first;
      auto it = rows_.find(pivot);
      if (it == rows_.end()) {
        // the leading entry is a new pivot; lower entries may still reduce
        break;
      }
      Rat f = v.begin()->second;
      for (auto& [i, c] : it->second) {
        auto jt = v.find(i);
        if (jt == v.end()) {
          v.emplace(i, -f * c);
        } else {
          jt->second -= f * c;
          if (jt->second == 0) v.erase(jt);
        }
      }
    }
    // eliminate non-leading entries that hit existing pivots
    bool changed = true;
    while (changed) {
      changed = false;
      for (auto& [i, c] : v) {
        auto it = rows_.find(i);
        if (it == rows_.end() || i == v.begin()->first) continue;
        Rat f = c;
        for (auto& [j, rc] : it->second) {
          auto jt = v.find(j);
          if (jt == v.end()) {
            v.emplace(j, -f * rc);
          } else {
            jt->second -= f * rc;
            if (jt->second == 0) v.erase(jt);
          }
        }
        changed = true;
        break;
      }
    }
  }

  bool contains(std::map<int, Rat> v) const {
    reduceVector(v);
    return v.empty();
  }

  int rank() const { return static_cast<int>(rows_.size()); }

 private:
  std::map<int, std::map<int, Rat>> rows_;  // pivot -> row with leading 1
};

inline int rankOf(const std::vector<std::map<int, Rat>>& vectors) {
  RowSpan span;
  for (auto& v : vectors) span.insert(v);
  return span.rank();
}

}  // namespace hilbk3
