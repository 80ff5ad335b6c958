// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Layout-agnostic collectives over a simulated group. Every endpoint compiles
// its layout in the MPI traverser's order; only element counts and scalar
// signatures are exchanged for validation, then packed element streams move.
//
// Protocol per collective (tags from the rank's collective sequence):
//   1. every non-root rank sends the root a header: kind, root, local status,
//      local type signature
//   2. the root answers every rank with one verdict
//   3. data moves only after an all-clear verdict

#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacomm/bag.hpp"
#include "lacomm/compile.hpp"
#include "lacomm/error.hpp"
#include "lacomm/mpi_traverser.hpp"
#include "lacomm/plan.hpp"
#include "lacomm/sim_group.hpp"

namespace lacomm {

namespace detail {

enum class Collective : std::uint8_t { broadcast = 1, scatter, gather };

inline const char* collective_name(Collective c) {
  switch (c) {
    case Collective::broadcast: return "broadcast";
    case Collective::scatter: return "scatter";
    case Collective::gather: return "gather";
  }
  return "?";
}

class Writer {
 public:
  template <class T>
  Writer& put(T v) {
    auto n = out_.size();
    out_.resize(n + sizeof v);
    std::memcpy(out_.data() + n, &v, sizeof v);
    return *this;
  }
  Writer& put(const std::string& s) {
    put<std::uint64_t>(s.size());
    for (char c : s) put(c);
    return *this;
  }
  Writer& put(const TypeSignature& sig) {
    put<std::uint64_t>(sig.size());
    for (const auto& [t, n] : sig) put(static_cast<std::uint8_t>(t)).put<std::uint64_t>(n);
    return *this;
  }
  std::vector<std::byte> take() { return std::move(out_); }

 private:
  std::vector<std::byte> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::byte>& in) : in_(in) {}
  template <class T>
  T get() {
    T v{};
    if (pos_ + sizeof v > in_.size()) throw error(errc::collective_mismatch, "malformed collective message");
    std::memcpy(&v, in_.data() + pos_, sizeof v);
    pos_ += sizeof v;
    return v;
  }
  std::string get_string() {
    auto n = get<std::uint64_t>();
    std::string s;
    for (std::uint64_t i = 0; i < n; ++i) s.push_back(get<char>());
    return s;
  }
  TypeSignature get_signature() {
    TypeSignature sig;
    auto n = get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      auto t = static_cast<ScalarType>(get<std::uint8_t>());
      sig.emplace_back(t, get<std::uint64_t>());
    }
    return sig;
  }

 private:
  const std::vector<std::byte>& in_;
  std::size_t pos_ = 0;
};

inline void put_status(Writer& w, const std::optional<error>& e) {
  w.put<std::int32_t>(e ? static_cast<std::int32_t>(e->code()) : -1);
  w.put(e ? e->message() : std::string());
}

inline std::optional<error> get_status(Reader& r) {
  auto code = r.get<std::int32_t>();
  auto msg = r.get_string();
  if (code < 0) return std::nullopt;
  return error(static_cast<errc>(code), msg);
}

inline std::string describe(const TypeSignature& sig) {
  std::string out;
  for (const auto& [t, n] : sig) out += (out.empty() ? "" : " + ") + std::to_string(n) + " x " + std::string(scalar_token(t));
  return out.empty() ? "nothing" : out;
}

/// Plan of `l` in the traverser's live coordinates and order.
inline DatatypePlan local_plan(const Layout& l, const MpiTraverser& mt) { return compile_for_traverser(l, mt.traverser()); }

/// Per-rank part of the root structure: the root view with the ranking dim
/// fixed to `q` (unchanged when the view lacks the ranking dim).
inline DatatypePlan rank_plan(const Layout& view, const MpiTraverser& mt, int q) {
  auto r = mt.ranking_dim();
  auto part = view.has_dim(r) ? view ^ fix(IndexState{{r, static_cast<std::size_t>(q)}}) : view;
  return compile(part, restrict_order(mt.order(), part));
}

/// Steps 1 and 2 of the protocol. `local` is this rank's own status and
/// signature; `expected(q)` gives the root's signature for rank q. Throws the
/// verdict's error on every rank.
template <class Expected>
void validate(const MpiTraverser& mt, Collective kind, int root, int tag, const std::optional<error>& local_status,
              const TypeSignature& local_sig, Expected&& expected) {
  auto& g = mt.group();
  const int R = g.size();
  if (g.rank() != root) {
    Writer w;
    w.put(static_cast<std::uint8_t>(kind)).put<std::int32_t>(root);
    put_status(w, local_status);
    w.put(local_sig);
    g.post(root, tag, w.take());
    auto reply = g.take(root, tag - 1);
    Reader r(reply);
    if (auto e = get_status(r)) throw *e;
    return;
  }

  std::optional<error> verdict;
  auto note = [&](const std::optional<error>& e) {
    if (!verdict && e) verdict = e;
  };
  if (local_status) note(error(local_status->code(), "rank " + std::to_string(root) + ": " + local_status->message()));
  for (int q = 0; q < R; ++q) {
    std::optional<error> status;
    TypeSignature sig;
    if (q == root) {
      sig = local_sig;
    } else {
      auto msg = g.take(q, tag);
      Reader r(msg);
      auto k = static_cast<Collective>(r.get<std::uint8_t>());
      auto their_root = r.get<std::int32_t>();
      if (k != kind || their_root != root) {
        note(error(errc::collective_mismatch, "rank " + std::to_string(q) + " entered " + collective_name(k) +
                                                  " with root " + std::to_string(their_root) + ", rank " +
                                                  std::to_string(root) + " entered " + collective_name(kind) +
                                                  " as root"));
        continue;
      }
      status = get_status(r);
      sig = r.get_signature();
    }
    if (status) {
      note(error(status->code(), "rank " + std::to_string(q) + ": " + status->message()));
      continue;
    }
    if (!verdict) {
      std::optional<TypeSignature> want;
      try {
        want = expected(q);
      } catch (const error& e) {
        note(e);
        continue;
      }
      if (*want != sig)
        note(error(errc::incompatible_plans, "rank " + std::to_string(q) + " has " + describe(sig) +
                                                 ", the root side has " + describe(*want)));
    }
  }
  for (int q = 0; q < R; ++q) {
    if (q == root) continue;
    Writer w;
    put_status(w, verdict);
    g.post(q, tag - 1, w.take());
  }
  if (verdict) throw *verdict;
}

inline void check_root(const MpiTraverser& mt, int root) {
  if (root < 0 || root >= mt.size())
    throw error(errc::invalid_rank, "root " + std::to_string(root) + " is outside [0, " + std::to_string(mt.size()) + ")");
}

template <class F>
std::optional<error> capture(F&& f) {
  try {
    f();
  } catch (const error& e) {
    return e;
  }
  return std::nullopt;
}

}  // namespace detail

/// After the call every rank's bag holds, at each logical index, the root's
/// value at that index, whatever the per-rank physical layouts.
inline void broadcast(Bag& bag, const MpiTraverser& mt, int root) {
  detail::check_root(mt, root);
  auto& g = mt.group();
  const int tag = g.next_collective_tag();
  std::optional<DatatypePlan> plan;
  auto status = detail::capture([&] { plan = detail::local_plan(bag.layout(), mt); });
  TypeSignature sig = plan ? type_signature(*plan) : TypeSignature{};
  detail::validate(mt, detail::Collective::broadcast, root, tag, status, sig, [&](int) { return sig; });

  if (g.rank() == root) {
    auto data = pack(*plan, bag.bytes());
    for (int q = 0; q < g.size(); ++q)
      if (q != root) g.post(q, tag - 2, data);
  } else {
    unpack(*plan, g.take(root, tag - 2), bag.bytes());
  }
}

/// Root-side data given as a layout plus bytes; non-root ranks may pass an
/// empty span.
inline void scatter(const Layout& root_layout, std::span<const std::byte> root_data, Bag& local, const MpiTraverser& mt,
                    int root) {
  detail::check_root(mt, root);
  auto& g = mt.group();
  const int tag = g.next_collective_tag();
  const bool is_root = g.rank() == root;
  std::optional<DatatypePlan> plan;
  std::optional<Layout> view;
  auto status = detail::subspace_violation(root_layout, local.layout(), mt, false);
  if (!status) status = detail::capture([&] { plan = detail::local_plan(local.layout(), mt); });
  if (!status && is_root) status = detail::capture([&] {
    view = as_seen_by(root_layout, mt.traverser());
    if (root_data.size() < root_layout.size_bytes())
      throw error(errc::buffer_too_small, "root buffer of " + std::to_string(root_data.size()) +
                                              " bytes is smaller than the root layout (" +
                                              std::to_string(root_layout.size_bytes()) + ")");
  });
  TypeSignature sig = plan ? type_signature(*plan) : TypeSignature{};
  std::vector<std::optional<DatatypePlan>> parts(static_cast<std::size_t>(g.size()));
  detail::validate(mt, detail::Collective::scatter, root, tag, status, sig, [&](int q) {
    auto& p = parts[static_cast<std::size_t>(q)];
    if (!p) p = detail::rank_plan(*view, mt, q);
    return type_signature(*p);
  });

  if (is_root) {
    for (int q = 0; q < g.size(); ++q) {
      auto data = pack(*parts[static_cast<std::size_t>(q)], root_data);
      if (q == root) unpack(*plan, data, local.bytes());
      else g.post(q, tag - 2, std::move(data));
    }
  } else {
    unpack(*plan, g.take(root, tag - 2), local.bytes());
  }
}

inline void scatter(const Bag& root_bag, Bag& local, const MpiTraverser& mt, int root) {
  scatter(root_bag.layout(), root_bag.bytes(), local, mt, root);
}

/// Inverse of scatter. Replicated decompositions are rejected.
inline void gather(const Bag& local, const Layout& root_layout, std::span<std::byte> root_data, const MpiTraverser& mt,
                   int root) {
  detail::check_root(mt, root);
  auto& g = mt.group();
  const int tag = g.next_collective_tag();
  const bool is_root = g.rank() == root;
  std::optional<DatatypePlan> plan;
  std::optional<Layout> view;
  auto status = detail::subspace_violation(root_layout, local.layout(), mt, true);
  if (!status) status = detail::capture([&] { plan = detail::local_plan(local.layout(), mt); });
  if (!status && is_root) status = detail::capture([&] {
    view = as_seen_by(root_layout, mt.traverser());
    if (root_data.size() < root_layout.size_bytes())
      throw error(errc::buffer_too_small, "root buffer of " + std::to_string(root_data.size()) +
                                              " bytes is smaller than the root layout (" +
                                              std::to_string(root_layout.size_bytes()) + ")");
  });
  TypeSignature sig = plan ? type_signature(*plan) : TypeSignature{};
  std::vector<std::optional<DatatypePlan>> parts(static_cast<std::size_t>(g.size()));
  detail::validate(mt, detail::Collective::gather, root, tag, status, sig, [&](int q) {
    auto& p = parts[static_cast<std::size_t>(q)];
    if (!p) p = detail::rank_plan(*view, mt, q);
    return type_signature(*p);
  });

  if (is_root) {
    for (int q = 0; q < g.size(); ++q) {
      auto data = q == root ? pack(*plan, local.bytes()) : g.take(q, tag - 2);
      unpack(*parts[static_cast<std::size_t>(q)], data, root_data);
    }
  } else {
    g.post(root, tag - 2, pack(*plan, local.bytes()));
  }
}

inline void gather(const Bag& local, Bag& root_bag, const MpiTraverser& mt, int root) {
  gather(local, root_bag.layout(), root_bag.bytes(), mt, root);
}

/// Logical-index-preserving point-to-point transfer. The receiver checks
/// plan compatibility when the message is matched.
inline void send(const Bag& bag, const MpiTraverser& mt, int dest, int tag) {
  auto plan = detail::local_plan(bag.layout(), mt);
  detail::Writer w;
  w.put(type_signature(plan));
  auto data = pack(plan, bag.bytes());
  auto header = w.take();
  header.insert(header.end(), data.begin(), data.end());
  mt.group().send_bytes(dest, tag, std::move(header));
}

inline void recv(Bag& bag, const MpiTraverser& mt, int src, int tag) {
  auto plan = detail::local_plan(bag.layout(), mt);
  auto msg = mt.group().recv_bytes(src, tag);
  detail::Reader r(msg);
  auto sig = r.get_signature();
  if (sig != type_signature(plan))
    throw error(errc::incompatible_plans, "message from rank " + std::to_string(src) + " carries " +
                                              detail::describe(sig) + ", the receiving layout expects " +
                                              detail::describe(type_signature(plan)));
  auto header = msg.size() - packed_size(plan);
  unpack(plan, std::span<const std::byte>(msg).subspan(header), bag.bytes());
}

}  // namespace lacomm
