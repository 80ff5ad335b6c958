// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lacomm/error.hpp"
#include "lacomm/proto.hpp"

namespace lacomm::detail {

/// Extent variables tied by equalities (union-find) and multiplicative
/// constraints out = a * b, solved by one fixpoint pass. The first failure is
/// recorded rather than thrown so that structural construction can proceed and
/// queries report it later.
class ExtentSolver {
 public:
  std::size_t add(Extent e, std::string label) {
    parent_.push_back(parent_.size());
    value_.push_back(e.get());
    label_.push_back(std::move(label));
    return parent_.size() - 1;
  }

  std::size_t size() const noexcept { return parent_.size(); }

  std::size_t find(std::size_t v) const {
    while (parent_[v] != v) v = parent_[v];
    return v;
  }

  Extent value(std::size_t v) const {
    auto r = value_[find(v)];
    return r ? Extent(*r) : open_extent;
  }

  const std::string& label(std::size_t v) const { return label_[v]; }

  void pin(std::size_t v, std::size_t n) {
    auto r = find(v);
    if (value_[r] && *value_[r] != n) {
      fail(errc::contradiction, label_[v] + " is " + std::to_string(*value_[r]) +
                                    ", cannot set it to " + std::to_string(n));
      return;
    }
    value_[r] = n;
  }

  /// Returns false (without recording a failure) when both sides are known and differ.
  bool equate(std::size_t a, std::size_t b) {
    auto ra = find(a), rb = find(b);
    if (ra == rb) return true;
    if (value_[ra] && value_[rb] && *value_[ra] != *value_[rb]) return false;
    if (!value_[ra]) value_[ra] = value_[rb];
    parent_[rb] = ra;
    return true;
  }

  void product(std::size_t out, std::size_t a, std::size_t b) { products_.push_back({out, a, b}); }

  /// Appends all variables and constraints of `other`; returns the index offset.
  std::size_t absorb(const ExtentSolver& other) {
    auto off = size();
    for (std::size_t v = 0; v < other.size(); ++v) {
      parent_.push_back(other.parent_[v] + off);
      value_.push_back(other.value_[v]);
      label_.push_back(other.label_[v]);
    }
    for (const auto& p : other.products_) products_.push_back({p.out + off, p.a + off, p.b + off});
    if (!failure_ && other.failure_) failure_ = other.failure_;
    return off;
  }

  void solve() {
    bool changed = true;
    while (changed && !failure_) {
      changed = false;
      for (const auto& p : products_) {
        auto ro = find(p.out), ra = find(p.a), rb = find(p.b);
        auto& o = value_[ro];
        auto& a = value_[ra];
        auto& b = value_[rb];
        if (o && a && b) {
          if (*o != *a * *b) {
            fail(errc::contradiction, label_[p.out] + " (" + std::to_string(*o) +
                                          ") differs from " + label_[p.a] + " x " + label_[p.b] + " (" +
                                          std::to_string(*a) + " x " + std::to_string(*b) + ")");
            return;
          }
        } else if (a && b) {
          o = *a * *b;
          changed = true;
        } else if (o && a) {
          if (!divide(*o, *a, p.out, p.a, b)) return;
          changed = changed || b.has_value();
        } else if (o && b) {
          if (!divide(*o, *b, p.out, p.b, a)) return;
          changed = changed || a.has_value();
        }
      }
    }
  }

  const std::optional<error>& failure() const noexcept { return failure_; }

  void fail(errc code, const std::string& message) {
    if (!failure_) failure_ = error(code, message);
  }

 private:
  struct Product {
    std::size_t out, a, b;
  };

  bool divide(std::size_t whole, std::size_t part, std::size_t whole_var, std::size_t part_var,
              std::optional<std::size_t>& result) {
    if (part == 0) {
      if (whole != 0)
        fail(errc::contradiction, label_[part_var] + " is 0 but " + label_[whole_var] + " is " +
                                      std::to_string(whole));
      return !failure_;
    }
    if (whole % part != 0) {
      fail(errc::non_divisible, label_[whole_var] + " (" + std::to_string(whole) +
                                    ") is not divisible by " + label_[part_var] + " (" +
                                    std::to_string(part) + ")");
      return false;
    }
    result = whole / part;
    return true;
  }

  std::vector<std::size_t> parent_;
  std::vector<std::optional<std::size_t>> value_;  // meaningful at roots only
  std::vector<std::string> label_;
  std::vector<Product> products_;
  std::optional<error> failure_;
};

}  // namespace lacomm::detail
