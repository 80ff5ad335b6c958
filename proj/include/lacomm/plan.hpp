// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lacomm/error.hpp"
#include "lacomm/scalar.hpp"

namespace lacomm {

enum class PlanKind : std::uint8_t { leaf, repeat, strided, indexed, mixed };

class DatatypePlan;

namespace detail {

struct PlanNode {
  PlanKind kind = PlanKind::leaf;
  ScalarType scalar = ScalarType::i32;
  std::size_t count = 1;
  std::int64_t stride = 0;
  std::vector<std::int64_t> displacements;
  std::vector<std::pair<std::int64_t, std::shared_ptr<const PlanNode>>> parts;
  std::shared_ptr<const PlanNode> inner;

  // Derived metadata.
  std::int64_t lb = 0;
  std::int64_t ub = 0;
  std::size_t elements = 0;
  bool contiguous = false;  // elements are one scalar type at 0, w, 2w, ...
  bool single_type = true;
};

}  // namespace detail

/// A derived-datatype tree describing an ordered sequence of (byte offset,
/// scalar) elements. Immutable value with shared structure.
class DatatypePlan {
 public:
  using Node = detail::PlanNode;

  static DatatypePlan leaf(ScalarType t) {
    Node n;
    n.kind = PlanKind::leaf;
    n.scalar = t;
    n.ub = static_cast<std::int64_t>(scalar_size(t));
    n.elements = 1;
    n.contiguous = true;
    return DatatypePlan(std::move(n));
  }

  /// `count` copies of `inner`, each placed `inner.extent()` after the previous.
  static DatatypePlan repeat(std::size_t count, const DatatypePlan& inner) {
    require_count(count);
    Node n;
    n.kind = PlanKind::repeat;
    n.count = count;
    n.inner = inner.node_;
    auto ext = inner.extent();
    n.lb = inner.lower_bound();
    n.ub = inner.upper_bound() + static_cast<std::int64_t>(count - 1) * ext;
    n.elements = count * inner.element_count();
    n.scalar = inner.node_->scalar;
    n.single_type = inner.node_->single_type;
    n.contiguous = inner.contiguous();
    return DatatypePlan(std::move(n));
  }

  static DatatypePlan strided(std::size_t count, std::int64_t stride, const DatatypePlan& inner) {
    require_count(count);
    Node n;
    n.kind = PlanKind::strided;
    n.count = count;
    n.stride = stride;
    n.inner = inner.node_;
    auto last = static_cast<std::int64_t>(count - 1) * stride;
    n.lb = inner.lower_bound() + std::min<std::int64_t>(0, last);
    n.ub = inner.upper_bound() + std::max<std::int64_t>(0, last);
    n.elements = count * inner.element_count();
    n.scalar = inner.node_->scalar;
    n.single_type = inner.node_->single_type;
    n.contiguous = inner.contiguous() && (count == 1 || stride == inner.extent());
    return DatatypePlan(std::move(n));
  }

  static DatatypePlan indexed(std::vector<std::int64_t> displacements, const DatatypePlan& inner) {
    if (displacements.empty()) throw error(errc::empty_extent, "indexed group needs at least one displacement");
    Node n;
    n.kind = PlanKind::indexed;
    auto [lo, hi] = std::minmax_element(displacements.begin(), displacements.end());
    n.lb = inner.lower_bound() + *lo;
    n.ub = inner.upper_bound() + *hi;
    n.elements = displacements.size() * inner.element_count();
    n.scalar = inner.node_->scalar;
    n.single_type = inner.node_->single_type;
    n.contiguous = inner.contiguous();
    for (std::size_t k = 0; k < displacements.size() && n.contiguous; ++k)
      n.contiguous = displacements[k] == static_cast<std::int64_t>(k) * inner.extent();
    n.displacements = std::move(displacements);
    n.inner = inner.node_;
    return DatatypePlan(std::move(n));
  }

  static DatatypePlan mixed(const std::vector<std::pair<std::int64_t, DatatypePlan>>& parts) {
    if (parts.empty()) throw error(errc::empty_extent, "mixed group needs at least one part");
    Node n;
    n.kind = PlanKind::mixed;
    n.lb = parts.front().first + parts.front().second.lower_bound();
    n.ub = parts.front().first + parts.front().second.upper_bound();
    n.scalar = parts.front().second.node_->scalar;
    std::int64_t next = 0;
    n.contiguous = true;
    for (const auto& [d, p] : parts) {
      n.lb = std::min(n.lb, d + p.lower_bound());
      n.ub = std::max(n.ub, d + p.upper_bound());
      n.elements += p.element_count();
      n.single_type = n.single_type && p.node_->single_type && p.node_->scalar == n.scalar;
      n.contiguous = n.contiguous && p.contiguous() && d == next;
      next = d + p.extent();
      n.parts.emplace_back(d, p.node_);
    }
    n.contiguous = n.contiguous && n.single_type;
    return DatatypePlan(std::move(n));
  }

  PlanKind kind() const noexcept { return node_->kind; }
  /// Leaf scalar; for inner nodes the scalar of the first element.
  ScalarType scalar() const noexcept { return node_->scalar; }
  std::size_t count() const noexcept {
    switch (node_->kind) {
      case PlanKind::indexed: return node_->displacements.size();
      case PlanKind::mixed: return node_->parts.size();
      default: return node_->count;
    }
  }
  std::int64_t stride() const noexcept { return node_->stride; }
  const std::vector<std::int64_t>& displacements() const noexcept { return node_->displacements; }
  DatatypePlan inner() const { return DatatypePlan(node_->inner); }
  std::vector<std::pair<std::int64_t, DatatypePlan>> parts() const {
    std::vector<std::pair<std::int64_t, DatatypePlan>> out;
    for (const auto& [d, p] : node_->parts) out.emplace_back(d, DatatypePlan(p));
    return out;
  }

  std::int64_t lower_bound() const noexcept { return node_->lb; }
  std::int64_t upper_bound() const noexcept { return node_->ub; }
  std::int64_t extent() const noexcept { return node_->ub - node_->lb; }
  std::size_t element_count() const noexcept { return node_->elements; }
  /// True when the elements form one dense run of a single scalar type from offset 0.
  bool contiguous() const noexcept { return node_->contiguous; }

  const Node& node() const noexcept { return *node_; }

  friend bool operator==(const DatatypePlan& a, const DatatypePlan& b) { return same(a.node_, b.node_); }

 private:
  explicit DatatypePlan(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}
  explicit DatatypePlan(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static void require_count(std::size_t c) {
    if (c == 0) throw error(errc::empty_extent, "repeat count must be at least 1");
  }

  static bool same(const std::shared_ptr<const Node>& a, const std::shared_ptr<const Node>& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
      case PlanKind::leaf: return a->scalar == b->scalar;
      case PlanKind::repeat: return a->count == b->count && same(a->inner, b->inner);
      case PlanKind::strided: return a->count == b->count && a->stride == b->stride && same(a->inner, b->inner);
      case PlanKind::indexed: return a->displacements == b->displacements && same(a->inner, b->inner);
      case PlanKind::mixed:
        if (a->parts.size() != b->parts.size()) return false;
        for (std::size_t i = 0; i < a->parts.size(); ++i)
          if (a->parts[i].first != b->parts[i].first || !same(a->parts[i].second, b->parts[i].second)) return false;
        return true;
    }
    return false;
  }

  std::shared_ptr<const Node> node_;
};

struct PlanElement {
  std::int64_t offset;
  ScalarType scalar;
  friend bool operator==(const PlanElement&, const PlanElement&) = default;
};

namespace detail {

template <class F>
void visit_elements(const PlanNode& n, std::int64_t base, F& f) {
  switch (n.kind) {
    case PlanKind::leaf:
      f(base, n.scalar);
      return;
    case PlanKind::repeat: {
      auto ext = n.inner->ub - n.inner->lb;
      for (std::size_t k = 0; k < n.count; ++k) visit_elements(*n.inner, base + static_cast<std::int64_t>(k) * ext, f);
      return;
    }
    case PlanKind::strided:
      for (std::size_t k = 0; k < n.count; ++k)
        visit_elements(*n.inner, base + static_cast<std::int64_t>(k) * n.stride, f);
      return;
    case PlanKind::indexed:
      for (auto d : n.displacements) visit_elements(*n.inner, base + d, f);
      return;
    case PlanKind::mixed:
      for (const auto& [d, p] : n.parts) visit_elements(*p, base + d, f);
      return;
  }
}

}  // namespace detail

/// Depth-first expansion of the plan.
inline std::vector<PlanElement> element_sequence(const DatatypePlan& p) {
  std::vector<PlanElement> out;
  out.reserve(p.element_count());
  auto f = [&](std::int64_t off, ScalarType t) { out.push_back({off, t}); };
  detail::visit_elements(p.node(), 0, f);
  return out;
}

/// Rewrites every StridedRepeat whose stride equals its inner extent into a
/// Repeat. The element sequence is unchanged.
inline DatatypePlan normalize(const DatatypePlan& p) {
  switch (p.kind()) {
    case PlanKind::leaf: return p;
    case PlanKind::repeat: return DatatypePlan::repeat(p.count(), normalize(p.inner()));
    case PlanKind::strided: {
      auto inner = normalize(p.inner());
      if (p.stride() == inner.extent()) return DatatypePlan::repeat(p.count(), inner);
      return DatatypePlan::strided(p.count(), p.stride(), inner);
    }
    case PlanKind::indexed: return DatatypePlan::indexed(p.displacements(), normalize(p.inner()));
    case PlanKind::mixed: {
      auto parts = p.parts();
      for (auto& [d, q] : parts) q = normalize(q);
      return DatatypePlan::mixed(parts);
    }
  }
  return p;
}

/// Folds nested Repeats into one: Repeat(a, Repeat(b, x)) -> Repeat(a*b, x).
inline DatatypePlan coalesce(const DatatypePlan& p) {
  switch (p.kind()) {
    case PlanKind::leaf: return p;
    case PlanKind::repeat: {
      auto inner = coalesce(p.inner());
      if (inner.kind() == PlanKind::repeat) return DatatypePlan::repeat(p.count() * inner.count(), inner.inner());
      return DatatypePlan::repeat(p.count(), inner);
    }
    case PlanKind::strided: return DatatypePlan::strided(p.count(), p.stride(), coalesce(p.inner()));
    case PlanKind::indexed: return DatatypePlan::indexed(p.displacements(), coalesce(p.inner()));
    case PlanKind::mixed: {
      auto parts = p.parts();
      for (auto& [d, q] : parts) q = coalesce(q);
      return DatatypePlan::mixed(parts);
    }
  }
  return p;
}

/// True when the plan is Repeat nodes all the way down to the leaf.
inline bool is_repeat_chain(const DatatypePlan& p) {
  if (p.kind() == PlanKind::leaf) return true;
  return p.kind() == PlanKind::repeat && is_repeat_chain(p.inner());
}

/// Scalar types of the element sequence, run-length compressed.
using TypeSignature = std::vector<std::pair<ScalarType, std::size_t>>;

namespace detail {

inline void append_run(TypeSignature& sig, ScalarType t, std::size_t n) {
  if (n == 0) return;
  if (!sig.empty() && sig.back().first == t) sig.back().second += n;
  else sig.emplace_back(t, n);
}

inline void append_signature(TypeSignature& sig, const TypeSignature& part, std::size_t times) {
  if (part.size() == 1) return append_run(sig, part.front().first, part.front().second * times);
  for (std::size_t k = 0; k < times; ++k)
    for (const auto& [t, n] : part) append_run(sig, t, n);
}

inline TypeSignature type_signature(const PlanNode& n) {
  if (n.kind == PlanKind::leaf) return {{n.scalar, 1}};
  if (n.single_type) return {{n.scalar, n.elements}};
  TypeSignature out;
  switch (n.kind) {
    case PlanKind::repeat:
    case PlanKind::strided: append_signature(out, type_signature(*n.inner), n.count); break;
    case PlanKind::indexed: append_signature(out, type_signature(*n.inner), n.displacements.size()); break;
    case PlanKind::mixed:
      for (const auto& [d, p] : n.parts) append_signature(out, type_signature(*p), 1);
      break;
    default: break;
  }
  return out;
}

}  // namespace detail

inline TypeSignature type_signature(const DatatypePlan& p) { return detail::type_signature(p.node()); }

/// Equal element counts and pairwise equal scalar types; offsets may differ.
inline bool plans_compatible(const DatatypePlan& a, const DatatypePlan& b) {
  return a.element_count() == b.element_count() && type_signature(a) == type_signature(b);
}

namespace detail {

inline std::string render_node(const PlanNode& n, std::vector<std::string>& lines) {
  if (n.kind == PlanKind::leaf) return std::string(scalar_mpi_name(n.scalar));
  std::string rhs;
  switch (n.kind) {
    case PlanKind::repeat:
      rhs = "contiguous(" + std::to_string(n.count) + ", " + render_node(*n.inner, lines) + ")";
      break;
    case PlanKind::strided:
      rhs = "hvector(" + std::to_string(n.count) + ", " + std::to_string(n.stride) + ", " +
            render_node(*n.inner, lines) + ")";
      break;
    case PlanKind::indexed: {
      auto inner = render_node(*n.inner, lines);
      rhs = "hindexed([";
      for (std::size_t k = 0; k < n.displacements.size(); ++k)
        rhs += (k ? ", " : "") + std::to_string(n.displacements[k]);
      rhs += "], " + inner + ")";
      break;
    }
    case PlanKind::mixed: {
      std::vector<std::string> names;
      for (const auto& [d, p] : n.parts) names.push_back(render_node(*p, lines));
      rhs = "struct([";
      for (std::size_t k = 0; k < n.parts.size(); ++k)
        rhs += (k ? ", (" : "(") + std::to_string(n.parts[k].first) + ", " + names[k] + ")";
      rhs += "])";
      break;
    }
    default: break;
  }
  auto name = "t" + std::to_string(lines.size());
  lines.push_back(name + " = " + rhs);
  return name;
}

}  // namespace detail

/// Equivalent MPI constructor calls, innermost first, one per line, ending in
/// `commit(<outermost>)`.
inline std::string render_calls(const DatatypePlan& p) {
  std::vector<std::string> lines;
  auto top = detail::render_node(p.node(), lines);
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  out += "commit(" + top + ")\n";
  return out;
}

namespace detail {

// Copies between the plan's element positions in `buf` and a dense stream.
template <bool Pack>
void transfer(const PlanNode& n, std::int64_t base, std::byte* buf, std::byte*& stream) {
  if (n.contiguous) {
    auto bytes = n.elements * scalar_size(n.scalar);
    if constexpr (Pack) std::memcpy(stream, buf + base, bytes);
    else std::memcpy(buf + base, stream, bytes);
    stream += bytes;
    return;
  }
  switch (n.kind) {
    case PlanKind::leaf: break;  // contiguous
    case PlanKind::repeat: {
      auto ext = n.inner->ub - n.inner->lb;
      for (std::size_t k = 0; k < n.count; ++k)
        transfer<Pack>(*n.inner, base + static_cast<std::int64_t>(k) * ext, buf, stream);
      break;
    }
    case PlanKind::strided:
      for (std::size_t k = 0; k < n.count; ++k)
        transfer<Pack>(*n.inner, base + static_cast<std::int64_t>(k) * n.stride, buf, stream);
      break;
    case PlanKind::indexed:
      for (auto d : n.displacements) transfer<Pack>(*n.inner, base + d, buf, stream);
      break;
    case PlanKind::mixed:
      for (const auto& [d, p] : n.parts) transfer<Pack>(*p, base + d, buf, stream);
      break;
  }
}

inline std::size_t packed_size(const PlanNode& n) {
  if (n.kind == PlanKind::leaf) return scalar_size(n.scalar);
  if (n.single_type) return n.elements * scalar_size(n.scalar);
  switch (n.kind) {
    case PlanKind::repeat:
    case PlanKind::strided: return n.count * packed_size(*n.inner);
    case PlanKind::indexed: return n.displacements.size() * packed_size(*n.inner);
    case PlanKind::mixed: {
      std::size_t s = 0;
      for (const auto& [d, p] : n.parts) s += packed_size(*p);
      return s;
    }
    default: return 0;
  }
}

inline void check_span(const DatatypePlan& p, std::size_t size) {
  if (p.lower_bound() < 0 || static_cast<std::size_t>(p.upper_bound()) > size)
    throw error(errc::buffer_too_small, "plan spans bytes [" + std::to_string(p.lower_bound()) + ", " +
                                            std::to_string(p.upper_bound()) + ") but the buffer has " +
                                            std::to_string(size));
}

}  // namespace detail

/// Bytes of the element sequence, densely concatenated.
inline std::size_t packed_size(const DatatypePlan& p) { return detail::packed_size(p.node()); }

/// Gathers the plan's elements from `buf` into a dense stream.
inline std::vector<std::byte> pack(const DatatypePlan& p, std::span<const std::byte> buf) {
  detail::check_span(p, buf.size());
  std::vector<std::byte> out(packed_size(p));
  auto* stream = out.data();
  detail::transfer<true>(p.node(), 0, const_cast<std::byte*>(buf.data()), stream);
  return out;
}

/// Scatters a dense stream into the plan's element positions in `buf`.
inline void unpack(const DatatypePlan& p, std::span<const std::byte> stream, std::span<std::byte> buf) {
  detail::check_span(p, buf.size());
  if (stream.size() != packed_size(p))
    throw error(errc::incompatible_plans, "stream of " + std::to_string(stream.size()) + " bytes, plan expects " +
                                              std::to_string(packed_size(p)));
  auto* s = const_cast<std::byte*>(stream.data());
  detail::transfer<false>(p.node(), 0, buf.data(), s);
}

}  // namespace lacomm
