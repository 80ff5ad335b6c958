// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <concepts>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>

#include "lacomm/dim.hpp"

namespace lacomm {

/// A possibly open extent. Default-constructed means Open.
class Extent {
 public:
  constexpr Extent() = default;
  constexpr Extent(std::nullopt_t) {}  // NOLINT
  template <std::integral T>
    requires(!std::same_as<T, char> && !std::same_as<T, bool>)
  constexpr Extent(T n) : value_(static_cast<std::size_t>(n)) {}  // NOLINT

  constexpr bool is_open() const noexcept { return !value_; }
  constexpr bool has_value() const noexcept { return value_.has_value(); }
  constexpr explicit operator bool() const noexcept { return value_.has_value(); }
  constexpr std::size_t operator*() const noexcept { return *value_; }
  std::size_t value() const {
    if (!value_) throw error(errc::open_extent, "extent is open");
    return *value_;
  }
  constexpr std::optional<std::size_t> get() const noexcept { return value_; }

  friend constexpr bool operator==(const Extent&, const Extent&) = default;

 private:
  std::optional<std::size_t> value_;
};

inline constexpr Extent open_extent{};

inline std::string extent_to_string(const Extent& e) { return e ? std::to_string(*e) : std::string("?"); }

namespace proto {

/// Introduces a physical dimension, outermost.
struct Vector {
  Dim dim;
  Extent extent;
};

/// Splits `orig` into a block index `block` (outer) and an in-block index
/// `within` (inner, extent `block_size`). `within` defaults to `orig`.
struct IntoBlocks {
  Dim orig;
  Dim block;
  Dim within;
  Extent block_size;
};

/// Replaces the outer of `major`/`minor` by `merged` and drops the other;
/// major = merged / extent(minor), minor = merged % extent(minor).
struct MergeBlocks {
  Dim major;
  Dim minor;
  Dim merged;
};

/// Moves `dim` to the outermost signature position.
struct Hoist {
  Dim dim;
};

/// Binds dims to constant indices and removes them from the signature.
struct Fix {
  IndexState state;
};

/// Pins an extent, typically an open one.
struct SetLength {
  Dim dim;
  std::size_t length;
};

/// Restricts `dim` to [start, start + length); indices become relative.
struct Slice {
  Dim dim;
  std::size_t start;
  std::size_t length;
};

/// Traverser-only loop dimension with no layout counterpart.
struct Bcast {
  Dim dim;
  Extent extent;
};

}  // namespace proto

using Proto = std::variant<proto::Vector, proto::IntoBlocks, proto::MergeBlocks, proto::Hoist, proto::Fix,
                           proto::SetLength, proto::Slice, proto::Bcast>;

inline Proto vector(Dim d, Extent n = open_extent) { return proto::Vector{d, n}; }
inline Proto into_blocks(Dim orig, Dim block, Extent block_size = open_extent) {
  return proto::IntoBlocks{orig, block, orig, block_size};
}
inline Proto into_blocks(Dim orig, Dim block, Dim within, Extent block_size = open_extent) {
  return proto::IntoBlocks{orig, block, within, block_size};
}
inline Proto merge_blocks(Dim major, Dim minor, Dim merged) { return proto::MergeBlocks{major, minor, merged}; }
inline Proto hoist(Dim d) { return proto::Hoist{d}; }
inline Proto fix(IndexState s) { return proto::Fix{std::move(s)}; }
inline Proto set_length(Dim d, std::size_t n) { return proto::SetLength{d, n}; }
inline Proto slice(Dim d, std::size_t start, std::size_t length) { return proto::Slice{d, start, length}; }
inline Proto bcast(Dim d, Extent n = open_extent) { return proto::Bcast{d, n}; }

/// Mini-language spelling of one proto (see parse.hpp).
inline std::string to_string(const Proto& p) {
  struct Printer {
    std::string operator()(const proto::Vector& v) const {
      return "vector:" + v.dim.name() + ":" + extent_to_string(v.extent);
    }
    std::string operator()(const proto::IntoBlocks& b) const {
      if (b.within == b.orig)
        return "into_blocks:" + b.orig.name() + ":" + b.block.name() + ":" + extent_to_string(b.block_size);
      return "into_blocks:" + b.orig.name() + ":" + b.block.name() + ":" + b.within.name() + ":" +
             extent_to_string(b.block_size);
    }
    std::string operator()(const proto::MergeBlocks& m) const {
      return "merge_blocks:" + m.major.name() + ":" + m.minor.name() + ":" + m.merged.name();
    }
    std::string operator()(const proto::Hoist& h) const { return "hoist:" + h.dim.name(); }
    std::string operator()(const proto::Fix& f) const {
      std::string out = "fix:";
      bool first = true;
      for (const auto& e : f.state) {
        if (!first) out += ",";
        first = false;
        out += e.dim.name() + "=" + std::to_string(e.index);
      }
      return out;
    }
    std::string operator()(const proto::SetLength& s) const {
      return "set_length:" + s.dim.name() + ":" + std::to_string(s.length);
    }
    std::string operator()(const proto::Slice& s) const {
      return "slice:" + s.dim.name() + ":" + std::to_string(s.start) + ":" + std::to_string(s.length);
    }
    std::string operator()(const proto::Bcast& b) const {
      return "bcast:" + b.dim.name() + ":" + extent_to_string(b.extent);
    }
  };
  return std::visit(Printer{}, p);
}

}  // namespace lacomm
