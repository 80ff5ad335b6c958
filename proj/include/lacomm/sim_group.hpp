// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "lacomm/error.hpp"

namespace lacomm {

struct SpmdOptions {
  std::chrono::milliseconds timeout{30000};
};

namespace detail {

struct Message {
  int src;
  int tag;
  std::vector<std::byte> payload;
};

/// Mailboxes and failure state shared by the ranks of one group. One lock
/// guards everything; blocked receivers wait on one condition variable.
class GroupState {
 public:
  GroupState(int size, std::chrono::milliseconds timeout)
      : size_(size), timeout_(timeout), mailboxes_(size), status_(size, Status::running), waits_(size) {}

  int size() const noexcept { return size_; }

  void post(int src, int dest, int tag, std::vector<std::byte> payload) {
    std::lock_guard lock(mu_);
    if (failure_) throw aborted();
    mailboxes_[dest].push_back({src, tag, std::move(payload)});
    cv_.notify_all();
  }

  std::vector<std::byte> take(int me, int src, int tag) {
    std::unique_lock lock(mu_);
    auto deadline = std::chrono::steady_clock::now() + timeout_;
    while (true) {
      if (failure_) throw aborted();
      auto& box = mailboxes_[me];
      for (auto it = box.begin(); it != box.end(); ++it) {
        if (it->src == src && it->tag == tag) {
          auto payload = std::move(it->payload);
          box.erase(it);
          return payload;
        }
      }
      status_[me] = Status::blocked;
      waits_[me] = {src, tag};
      if (deadlocked()) {
        record(errc::deadlock, blocked_report());
        cv_.notify_all();
        throw *failure_;
      }
      if (cv_.wait_until(lock, deadline) == std::cv_status::timeout && !failure_ && !has_match(me)) {
        record(errc::timeout, "rank " + std::to_string(me) + " waited longer than " +
                                  std::to_string(timeout_.count()) + " ms; " + blocked_report());
        cv_.notify_all();
        throw *failure_;
      }
      status_[me] = Status::running;
    }
  }

  void finish(int me) {
    std::lock_guard lock(mu_);
    status_[me] = Status::finished;
    if (!failure_ && deadlocked()) record(errc::deadlock, blocked_report());
    cv_.notify_all();
  }

  /// Records the first failure; later ones (usually consequences) are dropped.
  void fail(int rank, errc code, const std::string& message) {
    std::lock_guard lock(mu_);
    if (code == errc::group_aborted && failure_) return;
    record(code, "rank " + std::to_string(rank) + ": " + message);
    cv_.notify_all();
  }

  std::optional<error> failure() const {
    std::lock_guard lock(mu_);
    return failure_;
  }

  void check_undelivered() const {
    std::lock_guard lock(mu_);
    for (int d = 0; d < size_; ++d) {
      if (mailboxes_[d].empty()) continue;
      const auto& m = mailboxes_[d].front();
      throw error(errc::undelivered_message, "rank " + std::to_string(d) + " has " +
                                                 std::to_string(mailboxes_[d].size()) +
                                                 " undelivered message(s), first from rank " + std::to_string(m.src) +
                                                 " with tag " + std::to_string(m.tag));
    }
  }

 private:
  enum class Status { running, blocked, finished };
  struct Wait {
    int src = 0;
    int tag = 0;
  };

  error aborted() const { return error(errc::group_aborted, "group aborted: " + failure_->message()); }

  void record(errc code, const std::string& message) {
    if (!failure_) failure_ = error(code, message);
  }

  bool has_match(int r) const {
    for (const auto& m : mailboxes_[r])
      if (m.src == waits_[r].src && m.tag == waits_[r].tag) return true;
    return false;
  }

  // Every rank that has not finished is blocked, and none can make progress.
  bool deadlocked() const {
    bool any_blocked = false;
    for (int r = 0; r < size_; ++r) {
      if (status_[r] == Status::finished) continue;
      if (status_[r] != Status::blocked || has_match(r)) return false;
      any_blocked = true;
    }
    return any_blocked;
  }

  std::string blocked_report() const {
    std::string out = "blocked ranks:";
    for (int r = 0; r < size_; ++r) {
      if (status_[r] != Status::blocked) continue;
      out += " " + std::to_string(r) + " (waiting for rank " + std::to_string(waits_[r].src) + ", tag " +
             std::to_string(waits_[r].tag) + ")";
    }
    return out;
  }

  int size_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::deque<Message>> mailboxes_;
  std::vector<Status> status_;
  std::vector<Wait> waits_;
  std::optional<error> failure_;
};

}  // namespace detail

/// One rank's handle on a simulated group. Messages are copied on send and
/// buffered until received, so sends never block.
class SimGroup {
 public:
  SimGroup(std::shared_ptr<detail::GroupState> state, int rank) : state_(std::move(state)), rank_(rank) {}

  int rank() const noexcept { return rank_; }
  int size() const noexcept { return state_->size(); }

  /// Point-to-point send of raw bytes; user tags are non-negative.
  void send_bytes(int dest, int tag, std::vector<std::byte> payload) {
    if (tag < 0) throw error(errc::invalid_tag, "tag " + std::to_string(tag) + " is reserved");
    post(dest, tag, std::move(payload));
  }

  std::vector<std::byte> recv_bytes(int src, int tag) {
    if (tag < 0) throw error(errc::invalid_tag, "tag " + std::to_string(tag) + " is reserved");
    return take(src, tag);
  }

  /// Any-tag variants used by the collectives.
  void post(int dest, int tag, std::vector<std::byte> payload) {
    check_peer(dest);
    state_->post(rank_, dest, tag, std::move(payload));
  }

  std::vector<std::byte> take(int src, int tag) {
    check_peer(src);
    return state_->take(rank_, src, tag);
  }

  /// Tag block for the next collective on this rank. Ranks that enter
  /// collectives in the same order get the same blocks.
  int next_collective_tag() noexcept { return -static_cast<int>(8 * ++collectives_); }

  void barrier() {
    int tag = next_collective_tag();
    if (rank_ == 0) {
      for (int r = 1; r < size(); ++r) take(r, tag);
      for (int r = 1; r < size(); ++r) post(r, tag - 1, {});
    } else {
      post(0, tag, {});
      take(0, tag - 1);
    }
  }

 private:
  void check_peer(int peer) const {
    if (peer < 0 || peer >= size())
      throw error(errc::invalid_rank, "rank " + std::to_string(peer) + " is outside [0, " + std::to_string(size()) + ")");
    if (peer == rank_) throw error(errc::self_send, "rank " + std::to_string(rank_) + " cannot message itself");
  }

  std::shared_ptr<detail::GroupState> state_;
  int rank_;
  std::size_t collectives_ = 0;
};

/// Runs `body(rank, group)` on `ranks` threads and returns the per-rank
/// results in rank order. The first failing rank aborts the group; its error
/// is rethrown here with the rank named.
template <class F>
auto run_spmd(int ranks, F&& body, SpmdOptions options = {}) {
  using R = std::invoke_result_t<F&, int, SimGroup&>;
  if (ranks < 1) throw error(errc::invalid_rank, "group size must be at least 1, got " + std::to_string(ranks));
  auto state = std::make_shared<detail::GroupState>(ranks, options.timeout);
  using Slot = std::conditional_t<std::is_void_v<R>, char, std::optional<R>>;
  std::vector<Slot> results(static_cast<std::size_t>(ranks));

  auto run_rank = [&](int r) {
    SimGroup g(state, r);
    try {
      if constexpr (std::is_void_v<R>) body(r, g);
      else results[static_cast<std::size_t>(r)].emplace(body(r, g));
    } catch (const error& e) {
      state->fail(r, e.code(), e.message());
    } catch (const std::exception& e) {
      state->fail(r, errc::rank_failed, e.what());
    } catch (...) {
      state->fail(r, errc::rank_failed, "unknown exception");
    }
    state->finish(r);
  };

  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(ranks));
  for (int r = 0; r < ranks; ++r) threads.emplace_back(run_rank, r);
  for (auto& t : threads) t.join();

  if (auto f = state->failure()) throw *f;
  state->check_undelivered();
  if constexpr (!std::is_void_v<R>) {
    std::vector<R> out;
    out.reserve(results.size());
    for (auto& r : results) out.push_back(std::move(*r));
    return out;
  }
}

}  // namespace lacomm
