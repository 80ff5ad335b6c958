// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lacomm/error.hpp"
#include "lacomm/layout.hpp"
#include "lacomm/plan.hpp"
#include "lacomm/traverser.hpp"

namespace lacomm {

namespace detail {

class PlanCompiler {
 public:
  PlanCompiler(const Layout& l, const std::vector<Dim>& order) : layout_(l), model_(l.model()) {
    model_.require_resolved();
    const auto n = model_.slots().size();
    if (order.size() != n) throw error(errc::bad_order, order_message(order));
    std::vector<bool> seen(n, false);
    for (auto d : order) {
      auto p = model_.find_slot(d);
      if (!p || seen[*p]) throw error(errc::bad_order, order_message(order));
      seen[*p] = true;
      pos_.push_back(*p);
      auto e = *model_.extent(*p);
      if (e == 0) throw error(errc::empty_extent, "dimension '" + d.name() + "' has extent 0");
      ext_.push_back(e);
    }
    // independent_[k]: the sub-plan below level k does not depend on the
    // indices at levels 0..k.
    independent_.assign(n, true);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = k + 1; i < n; ++i)
        for (std::size_t j = 0; j <= k; ++j)
          if (model_.coupling_class(pos_[i]) == model_.coupling_class(pos_[j])) independent_[k] = false;
    cache_.resize(n + 1);
  }

  DatatypePlan run() {
    std::vector<std::size_t> vals(pos_.size(), 0);
    return build(0, vals);
  }

 private:
  std::int64_t f(const std::vector<std::size_t>& vals) const { return model_.offset_unchecked(vals); }

  DatatypePlan build(std::size_t k, std::vector<std::size_t>& vals) {
    if (k == pos_.size()) return DatatypePlan::leaf(layout_.scalar());
    const auto p = pos_[k];
    const auto e = ext_[k];
    const std::int64_t z = k == 0 ? 0 : f(vals);
    std::vector<std::int64_t> disp(e);
    for (std::size_t x = 0; x < e; ++x) {
      vals[p] = x;
      disp[x] = f(vals) - z;
    }
    vals[p] = 0;

    std::optional<DatatypePlan> inner;
    std::vector<DatatypePlan> per_x;
    if (independent_[k]) {
      if (!cache_[k + 1]) cache_[k + 1] = build(k + 1, vals);
      inner = *cache_[k + 1];
    } else {
      for (std::size_t x = 0; x < e; ++x) {
        vals[p] = x;
        per_x.push_back(build(k + 1, vals));
      }
      vals[p] = 0;
      if (std::all_of(per_x.begin(), per_x.end(), [&](const DatatypePlan& q) { return q == per_x.front(); }))
        inner = per_x.front();
    }

    if (!inner) {
      std::vector<std::pair<std::int64_t, DatatypePlan>> parts;
      for (std::size_t x = 0; x < e; ++x) parts.emplace_back(disp[x], per_x[x]);
      return DatatypePlan::mixed(parts);
    }
    if (disp[0] == 0) {
      const std::int64_t s = e > 1 ? disp[1] : inner->extent();
      bool constant = true;
      for (std::size_t x = 0; x < e && constant; ++x) constant = disp[x] == static_cast<std::int64_t>(x) * s;
      if (constant && s == inner->extent()) return DatatypePlan::repeat(e, *inner);
      if (constant) return DatatypePlan::strided(e, s, *inner);
    }
    return DatatypePlan::indexed(std::move(disp), *inner);
  }

  std::string order_message(const std::vector<Dim>& order) const {
    std::string got, want;
    for (auto d : order) got += (got.empty() ? "" : ",") + d.name();
    for (const auto& s : model_.slots()) want += (want.empty() ? "" : ",") + s.dim.name();
    return "order (" + got + ") is not a permutation of the layout dims (" + want + ")";
  }

  const Layout& layout_;
  const Model& model_;
  std::vector<std::size_t> pos_;
  std::vector<std::size_t> ext_;
  std::vector<bool> independent_;
  std::vector<std::optional<DatatypePlan>> cache_;
};

}  // namespace detail

/// Lowers `l` traversed in `order` (outermost first) into a datatype plan.
inline DatatypePlan compile(const Layout& l, const std::vector<Dim>& order) {
  return detail::PlanCompiler(l, order).run();
}

/// Compiles under the layout's own signature order.
inline DatatypePlan compile(const Layout& l) { return compile(l, l.dims()); }

/// `order` restricted to the dims of `l`.
inline std::vector<Dim> restrict_order(const std::vector<Dim>& order, const Layout& l) {
  std::vector<Dim> out;
  for (auto d : order)
    if (l.has_dim(d)) out.push_back(d);
  return out;
}

/// Compiles `l` in the traverser's order; traverser-only dims are skipped.
inline DatatypePlan compile_for_traverser(const Layout& l, const Traverser& t) {
  auto seen = as_seen_by(l, t);
  return compile(seen, restrict_order(t.order(), seen));
}

}  // namespace lacomm
