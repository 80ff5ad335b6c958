// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "lacomm/detail/model.hpp"
#include "lacomm/dim.hpp"
#include "lacomm/error.hpp"
#include "lacomm/layout.hpp"
#include "lacomm/proto.hpp"

namespace lacomm {

/// Iteration order over the joint index space of zero or more layouts.
///
/// The base order merges the layouts' signatures, prioritizing from the left.
/// Transforms rewrite the order with the same rules as layouts; Bcast adds a
/// loop dim that no layout consumes.
class Traverser {
 public:
  Traverser() : Traverser(std::vector<Layout>{}) {}
  explicit Traverser(std::vector<Layout> layouts, std::vector<Proto> protos = {})
      : layouts_(std::move(layouts)), protos_(std::move(protos)) {
    build();
  }

  friend Traverser operator^(const Traverser& t, const Proto& p) {
    auto protos = t.protos_;
    protos.push_back(p);
    return Traverser(t.layouts_, std::move(protos));
  }

  const std::vector<Layout>& layouts() const noexcept { return layouts_; }
  const std::vector<Proto>& protos() const noexcept { return protos_; }

  /// Live dims, outermost first.
  std::vector<Dim> order() const {
    std::vector<Dim> out;
    for (const auto& s : model_->slots()) out.push_back(s.dim);
    return out;
  }

  Signature signature() const {
    Signature s;
    for (std::size_t i = 0; i < model_->slots().size(); ++i)
      s.dims.emplace_back(model_->slots()[i].dim, model_->extent(i));
    return s;
  }

  bool has_dim(Dim d) const noexcept { return model_->find_slot(d).has_value(); }

  Extent length(Dim d) const {
    model_->throw_if_failed();
    return model_->extent(model_->slot_index(d));
  }

  /// Dims contributed by the layouts, before any transform.
  std::vector<Dim> base_dims() const {
    std::vector<Dim> out;
    for (const auto& s : base_) out.push_back(s.dim);
    return out;
  }

  bool has_base_dim(Dim d) const noexcept {
    return std::any_of(base_.begin(), base_.end(), [d](const detail::Slot& s) { return s.dim == d; });
  }

  /// Jointly deduced extent of a base dim.
  Extent base_length(Dim d) const {
    for (const auto& s : base_)
      if (s.dim == d) return model_->solver().value(s.var);
    throw error(errc::unknown_dim, "unknown base dimension '" + d.name() + "'");
  }

  /// Bindings accumulated from Fix transforms.
  IndexState fixed() const {
    IndexState out;
    for (const auto& p : protos_)
      if (const auto* f = std::get_if<proto::Fix>(&p)) out = out.merged(f->state);
    return out;
  }

  const Traverser& check() const {
    model_->throw_if_failed();
    return *this;
  }

  bool resolved() const noexcept { return model_->resolved(); }

  /// Calls `body(const IndexState&)` once per point, lexicographically in
  /// order. States bind the live dims, the fixed dims, and every dim the
  /// transforms decompose into; where a name exists at several levels the
  /// value is the one the participating layouts see.
  template <class F>
  void for_each(F&& body) const {
    const auto& m = *model_;
    m.require_resolved();
    const auto n = m.slots().size();
    std::vector<std::size_t> ext(n), vals(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ext[i] = *m.extent(i);
      if (ext[i] == 0) return;
    }
    const auto& names = m.register_names();
    detail::Model::RegisterFile regs(names.size());
    IndexState state;
    for (auto d : names) state.bind(d, 0);
    while (true) {
      for (std::size_t i = 0; i < n; ++i) regs.data()[m.slot_register(i)] = static_cast<std::int64_t>(vals[i]);
      m.run(regs.span());
      for (std::size_t r = 0; r < names.size(); ++r) state.value_at(r) = static_cast<std::size_t>(regs.data()[r]);
      body(static_cast<const IndexState&>(state));
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

  /// for_each over the points whose live dims agree with `s`.
  template <class F>
  void for_each_fixed(const IndexState& s, F&& body) const {
    IndexState live;
    for (const auto& e : s)
      if (has_dim(e.dim)) live.bind(e.dim, e.index);
    if (live.empty()) return for_each(std::forward<F>(body));
    (*this ^ fix(live)).for_each(std::forward<F>(body));
  }

  /// `l` (a layout over base dims) seen through this traverser's transforms:
  /// its dims become live traverser dims. A merge that finds only one of its
  /// components in `l` covers it partially; the missing component enters the
  /// view as a zero-stride dim, so the view repeats data along it.
  Layout view(const Layout& l) const;

  /// Dims that `view(l)` adds as zero-stride stand-ins.
  std::vector<Dim> view_virtual_dims(const Layout& l) const;

  const detail::Model& model() const noexcept { return *model_; }

 private:
  void build() {
    auto m = std::make_shared<detail::Model>(std::nullopt, true);
    auto& solver = m->solver();
    for (std::size_t li = 0; li < layouts_.size(); ++li) {
      const auto& lm = layouts_[li].model();
      auto off = solver.absorb(lm.solver());
      for (const auto& s : lm.slots()) {
        auto it = std::find_if(base_.begin(), base_.end(), [&](const detail::Slot& b) { return b.dim == s.dim; });
        if (it == base_.end()) {
          m->add_base_slot(s.dim, s.var + off);
          base_.push_back({s.dim, s.var + off});
          continue;
        }
        auto before = solver.value(it->var);
        if (!solver.equate(it->var, s.var + off))
          throw error(errc::extent_conflict, "dimension '" + s.dim.name() + "' has extent " +
                                                 extent_to_string(before) + " in an earlier layout but " +
                                                 extent_to_string(solver.value(s.var + off)) + " in layout " +
                                                 std::to_string(li));
      }
    }
    for (const auto& p : protos_) m->apply(p);
    m->finalize();
    model_ = std::move(m);
  }

  template <class F>
  void replay_view(const Layout& l, F&& on_virtual, std::vector<Proto>* out) const;

  std::vector<Layout> layouts_;
  std::vector<Proto> protos_;
  std::vector<detail::Slot> base_;
  std::shared_ptr<const detail::Model> model_;
};

template <class F>
void Traverser::replay_view(const Layout& l, F&& on_virtual, std::vector<Proto>* out) const {
  std::vector<Proto> protos = l.protos();
  std::vector<Dim> present = l.dims();
  auto has = [&](Dim d) { return std::find(present.begin(), present.end(), d) != present.end(); };
  auto drop = [&](Dim d) { present.erase(std::find(present.begin(), present.end(), d)); };

  for (auto d : present) {
    if (!has_base_dim(d))
      throw error(errc::not_subspace, "dimension '" + d.name() + "' is not traversed by the traverser");
    if (auto e = base_length(d)) protos.push_back(set_length(d, *e));
  }

  const auto& steps = model_->steps();
  std::size_t step = 0;
  for (const auto& p : protos_) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, proto::Hoist> || std::is_same_v<T, proto::SetLength>) {
            if (has(x.dim)) protos.push_back(x);
          } else if constexpr (std::is_same_v<T, proto::Slice>) {
            if (has(x.dim)) protos.push_back(x);
            ++step;
          } else if constexpr (std::is_same_v<T, proto::Bcast> || std::is_same_v<T, proto::Vector>) {
            ++step;
          } else if constexpr (std::is_same_v<T, proto::Fix>) {
            IndexState sub;
            for (const auto& e : x.state)
              if (has(e.dim)) {
                sub.bind(e.dim, e.index);
                drop(e.dim);
              }
            if (!sub.empty()) protos.push_back(fix(sub));
            ++step;
          } else if constexpr (std::is_same_v<T, proto::IntoBlocks>) {
            if (has(x.orig)) {
              protos.push_back(x);
              if (x.within != x.orig) drop(x.orig);
              present.push_back(x.block);
              if (x.within != x.orig) present.push_back(x.within);
            }
            ++step;
          } else if constexpr (std::is_same_v<T, proto::MergeBlocks>) {
            const auto& s = steps[step++];
            bool a = has(x.major), b = has(x.minor);
            if (!a && !b) return;
            if (a && b) {
              drop(x.major);
              drop(x.minor);
            } else {
              auto missing = a ? x.minor : x.major;
              protos.push_back(bcast(missing, model_->solver().value(a ? s.var : s.var2)));
              on_virtual(missing);
              drop(a ? x.major : x.minor);
            }
            protos.push_back(x);
            present.push_back(x.merged);
          }
        },
        p);
  }

  for (auto d : present)
    if (has_dim(d))
      if (auto e = length(d)) protos.push_back(set_length(d, *e));
  if (out) *out = std::move(protos);
}

inline Layout Traverser::view(const Layout& l) const {
  model_->throw_if_failed();
  std::vector<Proto> protos;
  replay_view(l, [](Dim) {}, &protos);
  return Layout::view(l.scalar(), std::move(protos));
}

inline std::vector<Dim> Traverser::view_virtual_dims(const Layout& l) const {
  std::vector<Dim> out;
  replay_view(l, [&](Dim d) { out.push_back(d); }, nullptr);
  return out;
}

// -- operations -------------------------------------------------------------

template <class... Ls>
  requires(std::is_same_v<std::remove_cvref_t<Ls>, Layout> && ...)
Traverser make_traverser(const Ls&... layouts) {
  return Traverser(std::vector<Layout>{layouts...});
}

inline Traverser make_traverser(std::vector<Layout> layouts) { return Traverser(std::move(layouts)); }

inline Traverser transform(const Traverser& t, const Proto& p) { return t ^ p; }

inline std::vector<Dim> traversal_order(const Traverser& t) { return t.order(); }

template <class F>
void for_each(const Traverser& t, F&& body) {
  t.for_each(std::forward<F>(body));
}

inline Layout view_of(const Layout& l, const Traverser& t) { return t.view(l); }

/// `l` in the traverser's live coordinates: unchanged when every dim of `l` is
/// a live traverser dim whose extent is open in `l` or equal to the
/// traverser's, otherwise its view through the transforms.
inline Layout as_seen_by(const Layout& l, const Traverser& t) {
  auto dims = l.dims();
  auto same = [&](Dim d) {
    if (!t.has_dim(d)) return false;
    auto e = l.length(d);
    return e.is_open() || e == t.length(d);
  };
  if (std::all_of(dims.begin(), dims.end(), same)) return l;
  return t.view(l);
}

inline Layout make_dense_like(const Traverser& source, const std::vector<Dim>& dims, ScalarType scalar) {
  return make_dense_like(source.signature(), dims, scalar);
}

}  // namespace lacomm
