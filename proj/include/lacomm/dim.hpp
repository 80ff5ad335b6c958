// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lacomm/error.hpp"

namespace lacomm {

/// Named dimension identifier: up to eight characters from [A-Za-z0-9_],
/// packed into one machine word so comparisons are a single integer compare.
class Dim {
 public:
  static constexpr std::size_t max_length = 8;

  constexpr Dim() = default;
  template <class C>
    requires std::same_as<C, char>
  constexpr Dim(C c) : packed_(pack_char(c)) {}  // NOLINT: implicit by intent
  Dim(std::string_view name) : packed_(pack(name)) {}  // NOLINT
  Dim(const char* name) : Dim(std::string_view(name)) {}  // NOLINT
  Dim(const std::string& name) : Dim(std::string_view(name)) {}  // NOLINT

  std::string name() const {
    std::string out;
    for (std::size_t i = 0; i < max_length; ++i) {
      auto c = static_cast<char>((packed_ >> (8 * i)) & 0xff);
      if (c == '\0') break;
      out.push_back(c);
    }
    return out;
  }

  constexpr bool empty() const noexcept { return packed_ == 0; }
  constexpr std::uint64_t packed() const noexcept { return packed_; }

  friend constexpr bool operator==(Dim a, Dim b) noexcept { return a.packed_ == b.packed_; }
  friend constexpr auto operator<=>(Dim a, Dim b) noexcept { return a.packed_ <=> b.packed_; }

  friend std::ostream& operator<<(std::ostream& os, Dim d) { return os << d.name(); }

  static constexpr bool valid_char(char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  }

 private:
  static constexpr std::uint64_t pack_char(char c) {
    if (!valid_char(c)) throw error(errc::invalid_dim, std::string("invalid dimension character '") + c + "'");
    return static_cast<unsigned char>(c);
  }

  static std::uint64_t pack(std::string_view name) {
    if (name.empty() || name.size() > max_length)
      throw error(errc::invalid_dim, "dimension name '" + std::string(name) + "' must have 1-8 characters");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (!valid_char(name[i])) throw error(errc::invalid_dim, "invalid dimension name '" + std::string(name) + "'");
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(name[i])) << (8 * i);
    }
    return v;
  }

  std::uint64_t packed_ = 0;
};

/// Binding of dimensions to zero-based indices. Small and unsorted: lookups are
/// linear, which beats any tree for the handful of dims a state carries.
class IndexState {
 public:
  struct Entry {
    Dim dim;
    std::size_t index;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  IndexState() = default;
  IndexState(std::initializer_list<Entry> entries) {
    for (const auto& e : entries) bind(e.dim, e.index);
  }

  std::optional<std::size_t> get(Dim d) const noexcept {
    for (const auto& e : entries_)
      if (e.dim == d) return e.index;
    return std::nullopt;
  }

  bool contains(Dim d) const noexcept { return get(d).has_value(); }

  std::size_t at(Dim d) const {
    if (auto v = get(d)) return *v;
    throw error(errc::missing_binding, "state does not bind '" + d.name() + "'");
  }

  IndexState& bind(Dim d, std::size_t index) {
    for (auto& e : entries_) {
      if (e.dim == d) {
        e.index = index;
        return *this;
      }
    }
    entries_.push_back({d, index});
    return *this;
  }

  void erase(Dim d) {
    std::erase_if(entries_, [d](const Entry& e) { return e.dim == d; });
  }

  /// Union with `other`; bindings in `other` win.
  IndexState merged(const IndexState& other) const {
    IndexState out = *this;
    for (const auto& e : other.entries_) out.bind(e.dim, e.index);
    return out;
  }

  /// True iff every binding of `sub` is present here with the same index.
  bool extends(const IndexState& sub) const noexcept {
    return std::all_of(sub.entries_.begin(), sub.entries_.end(),
                       [this](const Entry& e) { return get(e.dim) == e.index; });
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

  // Positional access for hot loops that own the state's shape.
  std::size_t& value_at(std::size_t pos) noexcept { return entries_[pos].index; }
  const Entry& entry_at(std::size_t pos) const noexcept { return entries_[pos]; }

  /// Order-insensitive equality.
  friend bool operator==(const IndexState& a, const IndexState& b) noexcept {
    return a.size() == b.size() && a.extends(b);
  }

  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i) out += ", ";
      out += entries_[i].dim.name() + "=" + std::to_string(entries_[i].index);
    }
    return out + "}";
  }

 private:
  std::vector<Entry> entries_;
};

/// Shorthand: idx({'i', 1}, {'j', 2}).
inline IndexState idx(std::initializer_list<IndexState::Entry> entries) { return IndexState(entries); }

}  // namespace lacomm

template <>
struct std::hash<lacomm::Dim> {
  std::size_t operator()(lacomm::Dim d) const noexcept { return std::hash<std::uint64_t>{}(d.packed()); }
};
