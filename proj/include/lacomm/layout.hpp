// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lacomm/detail/model.hpp"
#include "lacomm/dim.hpp"
#include "lacomm/error.hpp"
#include "lacomm/proto.hpp"
#include "lacomm/scalar.hpp"

namespace lacomm {

/// Ordered dimension chain, outermost first, optionally ending in a scalar.
struct Signature {
  std::vector<std::pair<Dim, Extent>> dims;
  std::optional<ScalarType> leaf;

  std::vector<Dim> dim_names() const {
    std::vector<Dim> out;
    out.reserve(dims.size());
    for (const auto& [d, e] : dims) out.push_back(d);
    return out;
  }

  bool contains(Dim d) const noexcept {
    for (const auto& [x, e] : dims)
      if (x == d) return true;
    return false;
  }

  Extent extent(Dim d) const {
    for (const auto& [x, e] : dims)
      if (x == d) return e;
    throw error(errc::unknown_dim, "unknown dimension '" + d.name() + "'");
  }

  /// "j -> i -> Int"
  std::string to_string() const {
    std::string out;
    for (const auto& [d, e] : dims) out += d.name() + " -> ";
    if (leaf) out += std::string(scalar_signature_name(*leaf));
    else if (!out.empty()) out.resize(out.size() - 4);
    return out;
  }

  friend bool operator==(const Signature&, const Signature&) = default;
};

/// A composed mapping from a named-dimension index space to byte offsets.
/// Immutable; composition returns a new value.
class Layout {
 public:
  explicit Layout(ScalarType scalar) : protos_(), model_(make_model(scalar, {}, false)) {}

  Layout(ScalarType scalar, std::vector<Proto> protos) : Layout(scalar, std::move(protos), false) {}

  ScalarType scalar() const noexcept { return *model_->scalar(); }
  const std::vector<Proto>& protos() const noexcept { return protos_; }

  friend Layout operator^(const Layout& l, const Proto& p) {
    auto protos = l.protos_;
    protos.push_back(p);
    return Layout(l.scalar(), std::move(protos), l.view_);
  }

  /// A layout that may also carry bcast dims (zero stride). Used for views of
  /// layouts through traverser transforms.
  static Layout view(ScalarType scalar, std::vector<Proto> protos) {
    return Layout(scalar, std::move(protos), true);
  }

  bool is_view() const noexcept { return view_; }

  Signature signature() const {
    Signature s;
    for (std::size_t i = 0; i < model_->slots().size(); ++i)
      s.dims.emplace_back(model_->slots()[i].dim, model_->extent(i));
    s.leaf = scalar();
    return s;
  }

  std::vector<Dim> dims() const {
    std::vector<Dim> out;
    for (const auto& s : model_->slots()) out.push_back(s.dim);
    return out;
  }

  bool has_dim(Dim d) const noexcept { return model_->find_slot(d).has_value(); }

  Extent length(Dim d) const {
    model_->throw_if_failed();
    return model_->extent(model_->slot_index(d));
  }

  /// Throws the first recorded constraint failure, if any.
  const Layout& check() const {
    model_->throw_if_failed();
    return *this;
  }

  bool resolved() const noexcept { return model_->resolved(); }

  std::size_t size_bytes() const { return model_->footprint(); }

  /// Byte offset of the element at `state`. Bindings for dims this layout does
  /// not have are ignored.
  std::int64_t offset(const IndexState& state) const {
    model_->require_resolved();
    detail::Model::RegisterFile regs(model_->register_count());
    const auto& slots = model_->slots();
    for (std::size_t i = 0; i < slots.size(); ++i) {
      auto v = state.get(slots[i].dim);
      if (!v) throw error(errc::missing_binding, "state " + state.to_string() + " does not bind '" +
                                                     slots[i].dim.name() + "'");
      auto ext = *model_->extent(i);
      if (*v >= ext)
        throw error(errc::out_of_range, "index " + std::to_string(*v) + " of '" + slots[i].dim.name() +
                                            "' is out of range (extent " + std::to_string(ext) + ")");
      regs.data()[model_->slot_register(i)] = static_cast<std::int64_t>(*v);
    }
    return model_->run(regs.span());
  }

  /// Offset from indices given per signature position, without range checks.
  std::int64_t offset_at(std::span<const std::size_t> slot_values) const {
    return model_->offset_unchecked(slot_values);
  }

  std::string to_string() const {
    std::string out = "scalar:" + std::string(scalar_token(scalar()));
    for (const auto& p : protos_) out += " ^ " + lacomm::to_string(p);
    return out;
  }

  const detail::Model& model() const noexcept { return *model_; }

 private:
  Layout(ScalarType scalar, std::vector<Proto> protos, bool view)
      : protos_(std::move(protos)), view_(view), model_(make_model(scalar, protos_, view)) {}

  static std::shared_ptr<const detail::Model> make_model(ScalarType scalar, const std::vector<Proto>& protos,
                                                        bool view) {
    (void)scalar_size(scalar);  // registry membership
    auto m = std::make_shared<detail::Model>(scalar, false);
    if (view) m->allow_bcast();
    for (const auto& p : protos) m->apply(p);
    m->finalize();
    return m;
  }

  std::vector<Proto> protos_;
  bool view_ = false;
  std::shared_ptr<const detail::Model> model_;
};

// -- operations -------------------------------------------------------------

inline Layout make_scalar(ScalarType t) { return Layout(t); }

template <class T>
Layout scalar() {
  return Layout(scalar_type_of<T>());
}

inline Layout apply_proto(const Layout& l, const Proto& p) { return l ^ p; }

/// Runs constraint deduction and reports contradictions or non-divisible
/// splits. Deduction itself happens on construction; this surfaces failures.
inline Layout resolve_extents(const Layout& l) {
  l.check();
  return l;
}

inline Signature signature_of(const Layout& l) { return l.signature(); }

inline Extent length_of(const Layout& l, Dim d) { return l.length(d); }

inline std::size_t size_bytes(const Layout& l) { return l.size_bytes(); }

inline std::int64_t offset_bytes(const Layout& l, const IndexState& s) { return l.offset(s); }

namespace detail {

/// Visits every point of `l`'s index space in signature order, as positional
/// index vectors.
template <class F>
void for_each_point(const Layout& l, F&& f) {
  const auto& m = l.model();
  const auto n = m.slots().size();
  std::vector<std::size_t> ext(n), vals(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ext[i] = *m.extent(i);
    if (ext[i] == 0) return;
  }
  while (true) {
    f(std::span<const std::size_t>(vals));
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++vals[k] < ext[k]) break;
      vals[k] = 0;
      if (k == 0) return;
    }
    if (n == 0) return;
  }
}

}  // namespace detail

/// Constant byte difference between consecutive indices of `d` with all other
/// dims held fixed; nullopt when the difference is not constant.
inline std::optional<std::int64_t> stride_along(const Layout& l, Dim d) {
  const auto& m = l.model();
  auto pos = m.slot_index(d);
  m.require_resolved();
  const auto n = m.slots().size();
  std::vector<std::size_t> zero(n, 0), one(n, 0);
  one[pos] = 1;
  if (!m.nonlinear(pos) || *m.extent(pos) < 2)
    return l.offset_at(one) - l.offset_at(zero);
  std::optional<std::int64_t> stride;
  bool constant = true;
  detail::for_each_point(l, [&](std::span<const std::size_t> v) {
    if (!constant || v[pos] + 1 >= *m.extent(pos)) return;
    std::vector<std::size_t> next(v.begin(), v.end());
    ++next[pos];
    auto diff = l.offset_at(next) - l.offset_at(v);
    if (!stride) stride = diff;
    else if (*stride != diff) constant = false;
  });
  if (!constant) return std::nullopt;
  return stride;
}

/// Byte offset contributed by index 0 of `d`: nonzero exactly when a slice
/// with a positive start applies to `d`.
inline std::int64_t lower_bound_along(const Layout& l, Dim d) {
  const auto& m = l.model();
  auto pos = m.slot_index(d);
  m.require_resolved();
  std::vector<std::size_t> zero(m.slots().size(), 0);
  return m.offset_unchecked(zero) - m.offset_without_slices_of(zero, pos);
}

/// True iff the sub-layout inside `d` (the dims after it in signature order)
/// has the same relative element sequence for every index of `d`.
inline bool is_uniform_along(const Layout& l, Dim d) {
  const auto& m = l.model();
  auto pos = m.slot_index(d);
  m.require_resolved();
  const auto n = m.slots().size();
  bool coupled = false;
  for (std::size_t i = pos + 1; i < n; ++i)
    for (std::size_t j = 0; j <= pos; ++j)
      if (m.coupling_class(i) == m.coupling_class(j)) coupled = true;
  if (!coupled) return true;

  // Exhaustive check: offset(prefix, x, inner) - offset(prefix, x, 0) must not
  // depend on x.
  bool uniform = true;
  detail::for_each_point(l, [&](std::span<const std::size_t> v) {
    if (!uniform || v[pos] == 0) return;
    std::vector<std::size_t> a(v.begin(), v.end()), a0 = a, b = a, b0 = a;
    for (std::size_t i = pos + 1; i < n; ++i) a0[i] = b0[i] = 0;
    b[pos] = b0[pos] = 0;
    auto rel_x = l.offset_at(a) - l.offset_at(a0);
    auto rel_0 = l.offset_at(b) - l.offset_at(b0);
    if (rel_x != rel_0) uniform = false;
  });
  return uniform;
}

/// Dense layout over `dims`, extents taken from `source`; the last listed dim
/// is outermost.
inline Layout make_dense_like(const Signature& source, const std::vector<Dim>& dims, ScalarType scalar) {
  Layout l(scalar);
  for (auto d : dims) {
    auto e = source.extent(d);
    if (!e) throw error(errc::open_extent, "extent of '" + d.name() + "' is not resolved in the source");
    l = l ^ vector(d, e);
  }
  return l;
}

inline Layout make_dense_like(const Layout& source, const std::vector<Dim>& dims, ScalarType scalar) {
  return make_dense_like(source.signature(), dims, scalar);
}

}  // namespace lacomm
