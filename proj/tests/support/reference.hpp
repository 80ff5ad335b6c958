// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference layout interpreter for the tests. It shares no code with the
// library model: every transform is recorded with its ground-truth extents as
// a closure that rewrites a name -> index table one level down, and offsets
// come from dense strides over the physical vectors.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lacomm::testing {

using Table = std::map<std::string, std::size_t>;

class RefLayout {
 public:
  explicit RefLayout(std::size_t scalar_bytes) : scalar_(scalar_bytes) {}

  std::size_t scalar_bytes() const { return scalar_; }

  /// Live dims, outermost first.
  const std::vector<std::pair<std::string, std::size_t>>& live() const { return live_; }

  std::size_t extent(const std::string& d) const { return live_[pos(d)].second; }
  bool has(const std::string& d) const {
    return std::any_of(live_.begin(), live_.end(), [&](const auto& p) { return p.first == d; });
  }

  std::size_t size_bytes() const {
    std::size_t s = scalar_;
    for (const auto& p : phys_) s *= p.second;
    return s;
  }

  // -- transforms ---------------------------------------------------------

  void vector(const std::string& d, std::size_t n) {
    phys_.emplace_back(d, n);
    live_.insert(live_.begin(), {d, n});
    steps_.push_back([](Table&) {});
  }

  /// o -> b (count e/size) then w (size). w may equal o.
  void into_blocks(const std::string& o, const std::string& b, const std::string& w, std::size_t size) {
    auto p = pos(o);
    auto e = live_[p].second;
    if (size == 0 || e % size != 0) throw std::logic_error("reference: bad block size");
    live_[p] = {w, size};
    live_.insert(live_.begin() + static_cast<std::ptrdiff_t>(p), {b, e / size});
    steps_.push_back([o, b, w, size](Table& t) {
      auto v = t.at(b) * size + t.at(w);
      t.erase(b);
      t.erase(w);
      t[o] = v;
    });
  }

  /// r replaces the outer of d1, d2; d1 is the major component.
  void merge(const std::string& d1, const std::string& d2, const std::string& r) {
    auto p1 = pos(d1), p2 = pos(d2);
    auto e1 = live_[p1].second, e2 = live_[p2].second;
    auto outer = std::min(p1, p2), inner = std::max(p1, p2);
    live_[outer] = {r, e1 * e2};
    live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(inner));
    steps_.push_back([d1, d2, r, e2](Table& t) {
      auto v = t.at(r);
      t.erase(r);
      t[d1] = v / e2;
      t[d2] = v % e2;
    });
  }

  void hoist(const std::string& d) {
    auto p = pos(d);
    auto entry = live_[p];
    live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(p));
    live_.insert(live_.begin(), entry);
    steps_.push_back([](Table&) {});
  }

  void fix(const std::string& d, std::size_t v) {
    live_.erase(live_.begin() + static_cast<std::ptrdiff_t>(pos(d)));
    steps_.push_back([d, v](Table& t) { t[d] = v; });
  }

  void slice(const std::string& d, std::size_t start, std::size_t len) {
    live_[pos(d)].second = len;
    steps_.push_back([d, start](Table& t) { t.at(d) += start; });
  }

  // -- queries ------------------------------------------------------------

  /// Byte offset of a point given over the live dims.
  std::int64_t offset(Table t) const {
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)(t);
    std::int64_t off = 0, stride = static_cast<std::int64_t>(scalar_);
    for (const auto& [d, n] : phys_) {
      off += static_cast<std::int64_t>(t.at(d)) * stride;
      stride *= static_cast<std::int64_t>(n);
    }
    return off;
  }

  /// Offsets of every live point, enumerated lexicographically in `order`
  /// (outermost first; must be a permutation of the live dims).
  std::vector<std::int64_t> enumerate(const std::vector<std::string>& order) const {
    std::vector<std::size_t> ext;
    for (const auto& d : order) ext.push_back(extent(d));
    std::vector<std::int64_t> out;
    for (const auto& e : ext)
      if (e == 0) return out;
    std::vector<std::size_t> idx(order.size(), 0);
    while (true) {
      Table t;
      for (std::size_t k = 0; k < order.size(); ++k) t[order[k]] = idx[k];
      out.push_back(offset(t));
      std::size_t k = order.size();
      while (k > 0) {
        --k;
        if (++idx[k] < ext[k]) break;
        idx[k] = 0;
        if (k == 0) return out;
      }
      if (order.empty()) return out;
    }
  }

 private:
  std::size_t pos(const std::string& d) const {
    for (std::size_t i = 0; i < live_.size(); ++i)
      if (live_[i].first == d) return i;
    throw std::logic_error("reference: no live dim '" + d + "'");
  }

  std::size_t scalar_;
  std::vector<std::pair<std::string, std::size_t>> phys_;  // innermost first
  std::vector<std::pair<std::string, std::size_t>> live_;  // outermost first
  std::vector<std::function<void(Table&)>> steps_;
};

}  // namespace lacomm::testing
