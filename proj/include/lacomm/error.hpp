// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lacomm {

/// Error categories. Every failure raised by the library carries exactly one.
enum class errc {
  invalid_dim,         // malformed dimension identifier
  unknown_scalar,      // scalar type not in the registry
  duplicate_dim,       // a fresh dim collides with a live one
  unknown_dim,         // proto or query refers to a dim that is not live
  layout_only_proto,   // vector applied to a traverser
  traverser_only_proto,// bcast applied to a layout
  open_extent,         // query needs an extent that is still open
  contradiction,       // known extents violate a constraint
  non_divisible,       // multiplicative constraint does not divide evenly
  out_of_range,        // index outside its extent
  missing_binding,     // state does not bind a required dim
  type_mismatch,       // scalar type of a value does not match the layout
  buffer_too_small,    // observing bag over an undersized region
  bad_order,           // traversal order is not a permutation of the dims
  empty_extent,        // zero-length dim where a plan needs at least one element
  extent_conflict,     // shared dim with different extents across layouts
  parse_error,         // layout mini-language
  not_subspace,        // local dim absent from the root index space
  extent_mismatch,     // local/root extents of a shared dim differ
  uncovered_residual,  // residual root dim not absorbed by the ranking dim
  rank_mismatch,       // ranking extent differs from the group size
  replicated_gather,   // gather over a replicated decomposition
  incompatible_plans,  // element counts or scalar signatures differ
  collective_mismatch, // ranks entered different collectives
  invalid_rank,        // rank or root outside [0, R)
  self_send,           // point-to-point with src == dest
  invalid_tag,         // negative user tag (reserved for collectives)
  deadlock,            // every live rank blocked with no satisfiable wait
  timeout,             // wait exceeded the configured limit
  group_aborted,       // another rank failed
  undelivered_message, // message left in a mailbox at teardown
  rank_failed,         // rank body threw a non-library exception
  invalid_config,      // gemm-bench configuration error
};

inline constexpr std::string_view to_string(errc e) noexcept {
  switch (e) {
    case errc::invalid_dim: return "invalid_dim";
    case errc::unknown_scalar: return "unknown_scalar";
    case errc::duplicate_dim: return "duplicate_dim";
    case errc::unknown_dim: return "unknown_dim";
    case errc::layout_only_proto: return "layout_only_proto";
    case errc::traverser_only_proto: return "traverser_only_proto";
    case errc::open_extent: return "open_extent";
    case errc::contradiction: return "contradiction";
    case errc::non_divisible: return "non_divisible";
    case errc::out_of_range: return "out_of_range";
    case errc::missing_binding: return "missing_binding";
    case errc::type_mismatch: return "type_mismatch";
    case errc::buffer_too_small: return "buffer_too_small";
    case errc::bad_order: return "bad_order";
    case errc::empty_extent: return "empty_extent";
    case errc::extent_conflict: return "extent_conflict";
    case errc::parse_error: return "parse_error";
    case errc::not_subspace: return "not_subspace";
    case errc::extent_mismatch: return "extent_mismatch";
    case errc::uncovered_residual: return "uncovered_residual";
    case errc::rank_mismatch: return "rank_mismatch";
    case errc::replicated_gather: return "replicated_gather";
    case errc::incompatible_plans: return "incompatible_plans";
    case errc::collective_mismatch: return "collective_mismatch";
    case errc::invalid_rank: return "invalid_rank";
    case errc::self_send: return "self_send";
    case errc::invalid_tag: return "invalid_tag";
    case errc::deadlock: return "deadlock";
    case errc::timeout: return "timeout";
    case errc::group_aborted: return "group_aborted";
    case errc::undelivered_message: return "undelivered_message";
    case errc::rank_failed: return "rank_failed";
    case errc::invalid_config: return "invalid_config";
  }
  return "unknown";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

  errc code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  errc code_;
  std::string message_;
};

}  // namespace lacomm
