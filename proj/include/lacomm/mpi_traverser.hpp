// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lacomm/error.hpp"
#include "lacomm/layout.hpp"
#include "lacomm/sim_group.hpp"
#include "lacomm/traverser.hpp"

namespace lacomm {

/// A traverser whose ranking dim is bound to the rank index of a group.
class MpiTraverser {
 public:
  MpiTraverser(Dim ranking, Traverser t, SimGroup& group)
      : ranking_(ranking), traverser_(std::move(t)), group_(&group) {}

  Dim ranking_dim() const noexcept { return ranking_; }
  const Traverser& traverser() const noexcept { return traverser_; }
  SimGroup& group() const noexcept { return *group_; }
  int rank() const noexcept { return group_->rank(); }
  int size() const noexcept { return group_->size(); }
  std::vector<Dim> order() const { return traverser_.order(); }

  /// This rank's share of the traversal: the ranking dim fixed to the rank.
  Traverser local() const {
    return traverser_ ^ fix(IndexState{{ranking_, static_cast<std::size_t>(rank())}});
  }

  template <class F>
  void for_each(F&& body) const {
    local().for_each(std::forward<F>(body));
  }

 private:
  Dim ranking_;
  Traverser traverser_;
  SimGroup* group_;
};

/// Binds `ranking` to the group: an open extent becomes the group size and
/// the constraints are solved again.
inline MpiTraverser make_mpi_traverser(Dim ranking, const Traverser& t, SimGroup& group) {
  if (!t.has_dim(ranking)) throw error(errc::unknown_dim, "ranking dimension '" + ranking.name() + "' is not traversed");
  t.check();
  const auto R = static_cast<std::size_t>(group.size());
  if (auto e = t.length(ranking); e && *e != R)
    throw error(errc::rank_mismatch, "ranking dimension '" + ranking.name() + "' has extent " + std::to_string(*e) +
                                         " but the group has " + std::to_string(R) + " ranks");
  auto bound = t ^ set_length(ranking, R);
  try {
    bound.check();
  } catch (const error& e) {
    if (e.code() == errc::non_divisible) throw;
    throw error(errc::rank_mismatch, "binding '" + ranking.name() + "' to " + std::to_string(R) +
                                         " ranks is inconsistent: " + e.message());
  }
  return MpiTraverser(ranking, std::move(bound), group);
}

inline int rank_of(const MpiTraverser& mt) { return mt.rank(); }
inline int size_of(const MpiTraverser& mt) { return mt.size(); }

namespace detail {

/// Checks that `local` is `root` (as seen by the traverser) with only the
/// ranking dim removed. Returns the violation instead of throwing.
inline std::optional<error> subspace_violation(const Layout& root, const Layout& local, const MpiTraverser& mt,
                                               bool for_gather) {
  const auto r = mt.ranking_dim();
  std::optional<Layout> view;
  try {
    view = as_seen_by(root, mt.traverser());
    view->check();
    local.check();
  } catch (const error& e) {
    return e;
  }
  for (auto d : local.dims()) {
    if (d == r)
      return error(errc::not_subspace, "local layout has the ranking dimension '" + r.name() + "'");
    if (!view->has_dim(d))
      return error(errc::not_subspace, "local dimension '" + d.name() + "' is not in the root index space");
    auto a = view->length(d), b = local.length(d);
    if (a != b)
      return error(errc::extent_mismatch, "dimension '" + d.name() + "' has extent " + extent_to_string(b) +
                                              " locally but " + extent_to_string(a) + " in the root");
  }
  for (auto d : view->dims()) {
    if (d != r && !local.has_dim(d))
      return error(errc::uncovered_residual, "root dimension '" + d.name() + "' is neither local nor absorbed by '" +
                                                 r.name() + "'");
  }
  const auto R = static_cast<std::size_t>(mt.size());
  if (view->has_dim(r) && view->length(r) != Extent(R))
    return error(errc::rank_mismatch, "residual extent " + extent_to_string(view->length(r)) + " differs from " +
                                          std::to_string(R) + " ranks");
  if (for_gather) {
    auto root_dims = root.dims();
    bool direct = std::all_of(root_dims.begin(), root_dims.end(), [&](Dim d) { return mt.traverser().has_dim(d); });
    auto virt = direct ? std::vector<Dim>{} : mt.traverser().view_virtual_dims(root);
    if (!view->has_dim(r) && R > 1)
      return error(errc::replicated_gather, "every rank would write the whole root structure");
    if (!virt.empty())
      return error(errc::replicated_gather, "dimension '" + virt.front().name() +
                                                "' is absent from the root, so several ranks would write the same "
                                                "elements");
  }
  return std::nullopt;
}

}  // namespace detail

/// Throws unless `local` is a valid per-rank piece of `root` under `mt`.
inline void check_subspace(const Layout& root, const Layout& local, const MpiTraverser& mt) {
  if (auto e = detail::subspace_violation(root, local, mt, false)) throw *e;
}

}  // namespace lacomm
