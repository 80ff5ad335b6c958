// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lacomm/detail/extent_solver.hpp"
#include "lacomm/dim.hpp"
#include "lacomm/error.hpp"
#include "lacomm/proto.hpp"
#include "lacomm/scalar.hpp"

namespace lacomm::detail {

struct Slot {
  Dim dim;
  std::size_t var;
};

enum class StepKind : std::uint8_t { vector, split, merge, slice, fix, bcast };

/// One recorded transform, kept in application order. Offsets are evaluated by
/// walking steps backwards: from the outermost (last applied) transform down to
/// the physical vectors.
struct Step {
  StepKind kind = StepKind::vector;
  Dim a, b, c;  // vector/slice/bcast: a; split: a=orig b=block c=within; merge: a=major b=minor c=merged
  std::size_t var = 0;  // vector/bcast: own extent; split: block size; merge: minor extent; slice: original
  std::size_t var2 = 0;  // merge: major extent
  std::size_t start = 0;
  std::size_t length = 0;
  IndexState fixed;
  std::vector<std::size_t> fixed_vars;

  // Filled in by Model::finalize.
  std::int64_t stride = 0;  // vector: byte stride
  std::size_t factor = 0;   // split: block size; merge: minor extent
  std::size_t ra = 0, rb = 0, rc = 0;
  std::vector<std::pair<std::size_t, std::size_t>> fixed_regs;  // (register, value)
};

/// Shared representation behind layouts and traversers: the live signature,
/// the recorded transforms, the extent constraint system, and a register
/// program that maps top-level indices to byte offsets (layouts) or to the
/// indices of the underlying dims (traversers).
class Model {
 public:
  static constexpr std::size_t max_live_dims = 64;

  explicit Model(std::optional<ScalarType> scalar, bool traverser) : scalar_(scalar), traverser_(traverser) {}

  // -- construction ---------------------------------------------------------

  void add_base_slot(Dim d, std::size_t var) {
    if (find_slot(d)) throw error(errc::duplicate_dim, "dimension '" + d.name() + "' already present");
    slots_.push_back({d, var});
  }

  ExtentSolver& solver() noexcept { return solver_; }
  const ExtentSolver& solver() const noexcept { return solver_; }

  void apply(const Proto& p) {
    std::visit([this](const auto& x) { apply_one(x); }, p);
  }

  void finalize() {
    solver_.solve();
    validate_ranges();
    assign_registers();
    resolve_numbers();
    analyze_coupling();
  }

  // -- structure --------------------------------------------------------------

  const std::vector<Slot>& slots() const noexcept { return slots_; }
  const std::vector<Step>& steps() const noexcept { return steps_; }
  std::optional<ScalarType> scalar() const noexcept { return scalar_; }
  bool is_traverser() const noexcept { return traverser_; }

  /// Lets a layout model take bcast steps: a traverser view of a layout uses
  /// them for dims the layout does not have.
  void allow_bcast() noexcept { allow_bcast_ = true; }

  std::optional<std::size_t> find_slot(Dim d) const noexcept {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      if (slots_[i].dim == d) return i;
    return std::nullopt;
  }

  std::size_t slot_index(Dim d) const {
    if (auto i = find_slot(d)) return *i;
    throw error(errc::unknown_dim, "unknown dimension '" + d.name() + "'");
  }

  Extent extent(std::size_t slot) const { return solver_.value(slots_[slot].var); }

  void throw_if_failed() const {
    if (solver_.failure()) throw *solver_.failure();
  }

  /// Every live extent and every extent the register program needs is known.
  bool resolved() const noexcept { return resolved_ && !solver_.failure(); }

  void require_resolved() const {
    throw_if_failed();
    if (!resolved_) throw error(errc::open_extent, first_open_ + " is open");
  }

  bool physical_resolved() const noexcept { return physical_resolved_; }

  /// Byte footprint: scalar size times the product of physical extents.
  std::size_t footprint() const {
    throw_if_failed();
    if (!physical_resolved_) throw error(errc::open_extent, first_open_physical_ + " is open");
    return footprint_;
  }

  // -- register program -------------------------------------------------------

  std::size_t register_count() const noexcept { return reg_names_.size(); }
  const std::vector<Dim>& register_names() const noexcept { return reg_names_; }
  std::size_t slot_register(std::size_t slot) const noexcept { return slot_regs_[slot]; }

  /// Runs the backward walk over `regs` (top-level registers pre-filled) and
  /// returns the accumulated byte offset. Traverser models accumulate nothing
  /// but leave the underlying indices in `regs`.
  std::int64_t run(std::span<std::int64_t> regs) const noexcept { return walk(regs, 0); }

  /// Offset for indices given positionally per live slot, no range checks.
  std::int64_t offset_unchecked(std::span<const std::size_t> slot_values) const {
    RegisterFile regs(register_count());
    load(regs, slot_values);
    return walk(regs.span(), 0);
  }

  /// Same as offset_unchecked, but slices whose index depends on exactly the
  /// top-level slot `slot` do not contribute their start.
  std::int64_t offset_without_slices_of(std::span<const std::size_t> slot_values, std::size_t slot) const {
    RegisterFile regs(register_count());
    load(regs, slot_values);
    return walk(regs.span(), std::uint64_t{1} << slot);
  }

  // -- dependence analysis ----------------------------------------------------

  /// Slots whose indices pass through a div/mod (merge) somewhere below.
  bool nonlinear(std::size_t slot) const noexcept { return (nonlinear_mask_ >> slot) & 1u; }

  /// Representative of the coupling class: two slots are coupled when a
  /// div/mod is applied to an expression that depends on both of them.
  std::size_t coupling_class(std::size_t slot) const noexcept { return coupling_[slot]; }

  /// Small fixed-capacity register storage; spills to the heap past 32.
  class RegisterFile {
   public:
    explicit RegisterFile(std::size_t n) : n_(n) {
      if (n > inline_.size()) heap_.assign(n, 0);
      else std::fill(inline_.begin(), inline_.begin() + static_cast<std::ptrdiff_t>(n), 0);
    }
    std::int64_t* data() noexcept { return heap_.empty() ? inline_.data() : heap_.data(); }
    std::span<std::int64_t> span() noexcept { return {data(), n_}; }

   private:
    std::size_t n_;
    std::array<std::int64_t, 32> inline_{};
    std::vector<std::int64_t> heap_;
  };

 private:
  template <class Regs>
  void load(Regs& regs, std::span<const std::size_t> slot_values) const {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      regs.data()[slot_regs_[i]] = static_cast<std::int64_t>(slot_values[i]);
  }

  std::int64_t walk(std::span<std::int64_t> regs, std::uint64_t skip_slice_deps) const noexcept {
    std::int64_t off = 0;
    for (std::size_t k = steps_.size(); k-- > 0;) {
      const Step& s = steps_[k];
      switch (s.kind) {
        case StepKind::vector:
          off += regs[s.ra] * s.stride;
          break;
        case StepKind::split:
          regs[s.ra] = regs[s.rb] * static_cast<std::int64_t>(s.factor) + regs[s.rc];
          break;
        case StepKind::merge: {
          auto v = regs[s.rc];
          auto e = static_cast<std::int64_t>(s.factor);
          regs[s.ra] = e ? v / e : 0;
          regs[s.rb] = e ? v % e : 0;
          break;
        }
        case StepKind::slice:
          if (skip_slice_deps == 0 || slice_deps_[k] != skip_slice_deps)
            regs[s.ra] += static_cast<std::int64_t>(s.start);
          break;
        case StepKind::fix:
          for (auto [r, v] : s.fixed_regs) regs[r] = static_cast<std::int64_t>(v);
          break;
        case StepKind::bcast:
          break;
      }
    }
    return off;
  }

  // -- proto application ------------------------------------------------------

  void require_live(Dim d) const {
    if (!find_slot(d)) throw error(errc::unknown_dim, "unknown dimension '" + d.name() + "'");
  }
  void require_fresh(Dim d) const {
    if (find_slot(d)) throw error(errc::duplicate_dim, "dimension '" + d.name() + "' already present");
  }

  void apply_one(const proto::Vector& v) {
    if (traverser_) throw error(errc::layout_only_proto, "vector changes the physical layout; use bcast on traversers");
    require_fresh(v.dim);
    auto var = solver_.add(v.extent, "extent of '" + v.dim.name() + "'");
    slots_.insert(slots_.begin(), {v.dim, var});
    Step s;
    s.kind = StepKind::vector;
    s.a = v.dim;
    s.var = var;
    steps_.push_back(std::move(s));
  }

  void apply_one(const proto::IntoBlocks& b) {
    auto pos = slot_index(b.orig);
    if (b.block == b.within) throw error(errc::duplicate_dim, "into_blocks: block and within dims coincide");
    require_fresh(b.block);
    if (b.within != b.orig) require_fresh(b.within);
    auto orig_var = slots_[pos].var;
    auto block_var = solver_.add(open_extent, "block count '" + b.block.name() + "'");
    auto within_var = solver_.add(b.block_size, "block size '" + b.within.name() + "'");
    solver_.product(orig_var, block_var, within_var);
    slots_[pos] = {b.within, within_var};
    slots_.insert(slots_.begin() + static_cast<std::ptrdiff_t>(pos), {b.block, block_var});
    Step s;
    s.kind = StepKind::split;
    s.a = b.orig;
    s.b = b.block;
    s.c = b.within;
    s.var = within_var;
    steps_.push_back(std::move(s));
  }

  void apply_one(const proto::MergeBlocks& m) {
    auto p1 = slot_index(m.major);
    auto p2 = slot_index(m.minor);
    if (p1 == p2) throw error(errc::duplicate_dim, "merge_blocks: major and minor dims coincide");
    if (m.merged != m.major && m.merged != m.minor) require_fresh(m.merged);
    auto v1 = slots_[p1].var, v2 = slots_[p2].var;
    auto merged_var = solver_.add(open_extent, "extent of '" + m.merged.name() + "'");
    solver_.product(merged_var, v1, v2);
    auto outer = std::min(p1, p2), inner = std::max(p1, p2);
    slots_[outer] = {m.merged, merged_var};
    slots_.erase(slots_.begin() + static_cast<std::ptrdiff_t>(inner));
    Step s;
    s.kind = StepKind::merge;
    s.a = m.major;
    s.b = m.minor;
    s.c = m.merged;
    s.var = v2;
    s.var2 = v1;
    steps_.push_back(std::move(s));
  }

  void apply_one(const proto::Hoist& h) {
    auto pos = slot_index(h.dim);
    auto slot = slots_[pos];
    slots_.erase(slots_.begin() + static_cast<std::ptrdiff_t>(pos));
    slots_.insert(slots_.begin(), slot);
  }

  void apply_one(const proto::Fix& f) {
    Step s;
    s.kind = StepKind::fix;
    s.fixed = f.state;
    for (const auto& e : f.state) {
      auto pos = slot_index(e.dim);
      s.fixed_vars.push_back(slots_[pos].var);
      slots_.erase(slots_.begin() + static_cast<std::ptrdiff_t>(pos));
    }
    steps_.push_back(std::move(s));
  }

  void apply_one(const proto::SetLength& l) {
    auto pos = slot_index(l.dim);
    solver_.pin(slots_[pos].var, l.length);
  }

  void apply_one(const proto::Slice& sl) {
    auto pos = slot_index(sl.dim);
    Step s;
    s.kind = StepKind::slice;
    s.a = sl.dim;
    s.var = slots_[pos].var;
    s.start = sl.start;
    s.length = sl.length;
    slots_[pos].var = solver_.add(Extent(sl.length), "slice of '" + sl.dim.name() + "'");
    steps_.push_back(std::move(s));
  }

  void apply_one(const proto::Bcast& b) {
    if (!traverser_ && !allow_bcast_) throw error(errc::traverser_only_proto, "bcast is only valid on traversers");
    require_fresh(b.dim);
    auto var = solver_.add(b.extent, "extent of '" + b.dim.name() + "'");
    slots_.insert(slots_.begin(), {b.dim, var});
    Step s;
    s.kind = StepKind::bcast;
    s.a = b.dim;
    s.var = var;
    steps_.push_back(std::move(s));
  }

  // -- finalization -----------------------------------------------------------

  void validate_ranges() {
    if (solver_.failure()) return;
    for (const auto& s : steps_) {
      if (s.kind == StepKind::slice) {
        auto e = solver_.value(s.var);
        if (e && s.start + s.length > *e)
          solver_.fail(errc::out_of_range, "slice [" + std::to_string(s.start) + ", " +
                                               std::to_string(s.start + s.length) + ") of '" + s.a.name() +
                                               "' exceeds extent " + std::to_string(*e));
      } else if (s.kind == StepKind::fix) {
        std::size_t k = 0;
        for (const auto& e : s.fixed) {
          auto ext = solver_.value(s.fixed_vars[k++]);
          if (ext && e.index >= *ext)
            solver_.fail(errc::out_of_range, "fixed index " + std::to_string(e.index) + " of '" + e.dim.name() +
                                                 "' is out of range (extent " + std::to_string(*ext) + ")");
        }
      }
    }
  }

  std::size_t reg_of(Dim d) {
    for (std::size_t i = 0; i < reg_names_.size(); ++i)
      if (reg_names_[i] == d) return i;
    reg_names_.push_back(d);
    return reg_names_.size() - 1;
  }

  void assign_registers() {
    reg_names_.clear();
    slot_regs_.clear();
    for (const auto& s : slots_) slot_regs_.push_back(reg_of(s.dim));
    for (auto& s : steps_) {
      switch (s.kind) {
        case StepKind::vector:
        case StepKind::slice:
        case StepKind::bcast:
          s.ra = reg_of(s.a);
          break;
        case StepKind::split:
        case StepKind::merge:
          s.ra = reg_of(s.a);
          s.rb = reg_of(s.b);
          s.rc = reg_of(s.c);
          break;
        case StepKind::fix:
          s.fixed_regs.clear();
          for (const auto& e : s.fixed) s.fixed_regs.emplace_back(reg_of(e.dim), e.index);
          break;
      }
    }
  }

  void resolve_numbers() {
    resolved_ = true;
    physical_resolved_ = true;
    first_open_.clear();
    first_open_physical_.clear();
    auto mark_open = [this](std::size_t var, bool physical) {
      if (resolved_) first_open_ = solver_.label(var);
      resolved_ = false;
      if (physical) {
        if (physical_resolved_) first_open_physical_ = solver_.label(var);
        physical_resolved_ = false;
      }
    };
    for (const auto& s : slots_)
      if (!solver_.value(s.var)) mark_open(s.var, false);
    std::size_t running = scalar_ ? scalar_size(*scalar_) : 0;
    for (auto& s : steps_) {
      switch (s.kind) {
        case StepKind::vector:
          s.stride = static_cast<std::int64_t>(running);
          if (auto e = solver_.value(s.var)) running *= *e;
          else mark_open(s.var, true);
          break;
        case StepKind::split:
        case StepKind::merge:
          if (auto e = solver_.value(s.var)) s.factor = *e;
          else mark_open(s.var, false);
          break;
        default:
          break;
      }
    }
    footprint_ = running;
  }

  void analyze_coupling() {
    const auto n = slots_.size();
    coupling_.resize(n);
    for (std::size_t i = 0; i < n; ++i) coupling_[i] = i;
    nonlinear_mask_ = 0;
    slice_deps_.assign(steps_.size(), 0);
    if (n > max_live_dims) return;

    // Each register holds a sum of terms; a term is a mask of the top-level
    // slots it depends on.
    std::vector<std::vector<std::uint64_t>> terms(register_count());
    for (std::size_t i = 0; i < n; ++i) terms[slot_regs_[i]] = {std::uint64_t{1} << i};

    auto unite = [this](std::uint64_t mask) {
      if (std::popcount(mask) < 2) return;
      auto first = static_cast<std::size_t>(std::countr_zero(mask));
      for (std::size_t i = 0; i < coupling_.size(); ++i)
        if ((mask >> i) & 1u) relabel(coupling_[i], coupling_[first]);
    };

    for (std::size_t k = steps_.size(); k-- > 0;) {
      const Step& s = steps_[k];
      switch (s.kind) {
        case StepKind::split: {
          auto combined = terms[s.rb];
          combined.insert(combined.end(), terms[s.rc].begin(), terms[s.rc].end());
          terms[s.ra] = std::move(combined);
          break;
        }
        case StepKind::merge: {
          std::uint64_t all = 0;
          for (auto t : terms[s.rc]) all |= t;
          unite(all);
          nonlinear_mask_ |= all;
          std::vector<std::uint64_t> t;
          if (all) t.push_back(all);
          terms[s.ra] = t;
          terms[s.rb] = t;
          break;
        }
        case StepKind::slice: {
          std::uint64_t all = 0;
          for (auto t : terms[s.ra]) all |= t;
          slice_deps_[k] = all;
          break;
        }
        case StepKind::fix:
          for (auto [r, v] : s.fixed_regs) terms[r].clear();
          break;
        default:
          break;
      }
    }
  }

  void relabel(std::size_t from, std::size_t to) {
    if (from == to) return;
    for (auto& c : coupling_)
      if (c == from) c = to;
  }

  std::optional<ScalarType> scalar_;
  bool traverser_;
  bool allow_bcast_ = false;
  std::vector<Slot> slots_;  // outermost first
  std::vector<Step> steps_;  // application order
  ExtentSolver solver_;

  std::vector<Dim> reg_names_;
  std::vector<std::size_t> slot_regs_;
  bool resolved_ = false;
  bool physical_resolved_ = false;
  std::string first_open_;
  std::string first_open_physical_;
  std::size_t footprint_ = 0;
  std::vector<std::size_t> coupling_;
  std::uint64_t nonlinear_mask_ = 0;
  std::vector<std::uint64_t> slice_deps_;  // per step: top-level slots a slice's index depends on
};

}  // namespace lacomm::detail
