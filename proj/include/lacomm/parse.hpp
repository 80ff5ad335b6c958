// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Layout mini-language, one transform per '^'-separated token:
//
//   scalar:f64 ^ vector:i:64 ^ vector:j:64 ^ into_blocks:i:I:8 ^ hoist:j
//     ^ slice:j:2:16 ^ set_length:I:8
//
// Open extents are written '?'. Whitespace is ignored. Other forms:
//   into_blocks:m:r:s[:N]   split m into block r and in-block s
//   merge_blocks:M:N:r      fix:i=1,j=2      bcast:q:4

#include <charconv>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lacomm/error.hpp"
#include "lacomm/layout.hpp"
#include "lacomm/proto.hpp"

namespace lacomm {

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline bool is_number(std::string_view s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
}

inline std::size_t parse_number(std::string_view s, std::string_view token) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (!is_number(s) || ec != std::errc() || p != s.data() + s.size())
    throw error(errc::parse_error, "expected a number, got '" + std::string(s) + "' in '" + std::string(token) + "'");
  return v;
}

inline Extent parse_extent(std::string_view s, std::string_view token) {
  if (s == "?") return open_extent;
  return Extent(parse_number(s, token));
}

inline Dim parse_dim(std::string_view s, std::string_view token) {
  try {
    return Dim(s);
  } catch (const error&) {
    throw error(errc::parse_error, "invalid dimension '" + std::string(s) + "' in '" + std::string(token) + "'");
  }
}

inline Proto parse_proto(std::string_view token) {
  auto f = split(token, ':');
  const auto& kind = f[0];
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (f.size() < lo || f.size() > hi)
      throw error(errc::parse_error, "wrong number of fields in '" + std::string(token) + "'");
  };
  if (kind == "vector") {
    need(3, 3);
    return vector(parse_dim(f[1], token), parse_extent(f[2], token));
  }
  if (kind == "into_blocks") {
    need(3, 5);
    auto orig = parse_dim(f[1], token);
    auto block = parse_dim(f[2], token);
    if (f.size() == 3) return into_blocks(orig, block);
    if (f.size() == 4 && (f[3] == "?" || is_number(f[3]))) return into_blocks(orig, block, parse_extent(f[3], token));
    auto within = parse_dim(f[3], token);
    return into_blocks(orig, block, within, f.size() == 5 ? parse_extent(f[4], token) : open_extent);
  }
  if (kind == "merge_blocks") {
    need(4, 4);
    return merge_blocks(parse_dim(f[1], token), parse_dim(f[2], token), parse_dim(f[3], token));
  }
  if (kind == "hoist") {
    need(2, 2);
    return hoist(parse_dim(f[1], token));
  }
  if (kind == "fix") {
    need(2, 2);
    IndexState s;
    for (const auto& b : split(f[1], ',')) {
      auto kv = split(b, '=');
      if (kv.size() != 2) throw error(errc::parse_error, "expected dim=index in '" + std::string(token) + "'");
      s.bind(parse_dim(kv[0], token), parse_number(kv[1], token));
    }
    return fix(std::move(s));
  }
  if (kind == "set_length") {
    need(3, 3);
    return set_length(parse_dim(f[1], token), parse_number(f[2], token));
  }
  if (kind == "slice") {
    need(4, 4);
    return slice(parse_dim(f[1], token), parse_number(f[2], token), parse_number(f[3], token));
  }
  if (kind == "bcast") {
    need(3, 3);
    return bcast(parse_dim(f[1], token), parse_extent(f[2], token));
  }
  throw error(errc::parse_error, "unknown token '" + std::string(token) + "'");
}

inline std::string strip_spaces(std::string_view text) {
  std::string out;
  for (char c : text)
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') out.push_back(c);
  return out;
}

}  // namespace detail

/// Parses a '^'-separated proto chain without a scalar head (traverser form).
inline std::vector<Proto> parse_protos(std::string_view text) {
  auto clean = detail::strip_spaces(text);
  std::vector<Proto> out;
  if (clean.empty()) return out;
  for (const auto& tok : detail::split(clean, '^')) {
    if (tok.empty()) throw error(errc::parse_error, "empty token in '" + std::string(text) + "'");
    out.push_back(detail::parse_proto(tok));
  }
  return out;
}

/// Parses "scalar:<type> ^ <proto> ^ ...".
inline Layout parse_layout(std::string_view text) {
  auto clean = detail::strip_spaces(text);
  auto tokens = detail::split(clean, '^');
  auto head = detail::split(tokens.front(), ':');
  if (head.size() != 2 || head[0] != "scalar")
    throw error(errc::parse_error, "layout must start with scalar:<type>, got '" + tokens.front() + "'");
  ScalarType t;
  try {
    t = parse_scalar(head[1]);
  } catch (const error&) {
    throw error(errc::parse_error, "unknown scalar type '" + head[1] + "'");
  }
  std::vector<Proto> protos;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (tokens[i].empty()) throw error(errc::parse_error, "empty token in '" + std::string(text) + "'");
    protos.push_back(detail::parse_proto(tokens[i]));
  }
  return Layout(t, std::move(protos));
}

}  // namespace lacomm
