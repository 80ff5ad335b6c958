// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>

#include "lacomm/error.hpp"

namespace lacomm {

enum class ScalarType : std::uint8_t { i32, i64, f32, f64 };

/// A value crossing the element-access boundary.
using Scalar = std::variant<std::int32_t, std::int64_t, float, double>;

namespace detail {

struct ScalarInfo {
  ScalarType type;
  std::size_t size;
  std::string_view token;      // mini-language spelling
  std::string_view signature;  // leaf name in signatures
  std::string_view mpi_name;   // equivalent MPI predefined datatype
};

// The one registration point for scalar types.
inline constexpr std::array<ScalarInfo, 4> scalar_registry{{
    {ScalarType::i32, 4, "i32", "Int", "MPI_INT"},
    {ScalarType::i64, 8, "i64", "Long", "MPI_INT64_T"},
    {ScalarType::f32, 4, "f32", "Float", "MPI_FLOAT"},
    {ScalarType::f64, 8, "f64", "Double", "MPI_DOUBLE"},
}};

inline const ScalarInfo& info(ScalarType t) {
  for (const auto& s : scalar_registry)
    if (s.type == t) return s;
  throw error(errc::unknown_scalar, "scalar type id " + std::to_string(static_cast<int>(t)));
}

}  // namespace detail

inline std::size_t scalar_size(ScalarType t) { return detail::info(t).size; }
inline std::string_view scalar_token(ScalarType t) { return detail::info(t).token; }
inline std::string_view scalar_signature_name(ScalarType t) { return detail::info(t).signature; }
inline std::string_view scalar_mpi_name(ScalarType t) { return detail::info(t).mpi_name; }

inline ScalarType parse_scalar(std::string_view token) {
  for (const auto& s : detail::scalar_registry)
    if (s.token == token) return s.type;
  throw error(errc::unknown_scalar, "unknown scalar type '" + std::string(token) + "'");
}

template <class T>
inline constexpr bool is_registered_scalar_v =
    std::is_same_v<T, std::int32_t> || std::is_same_v<T, std::int64_t> || std::is_same_v<T, float> ||
    std::is_same_v<T, double>;

template <class T>
constexpr ScalarType scalar_type_of() {
  static_assert(is_registered_scalar_v<T>, "type is not in the scalar registry");
  if constexpr (std::is_same_v<T, std::int32_t>) return ScalarType::i32;
  else if constexpr (std::is_same_v<T, std::int64_t>) return ScalarType::i64;
  else if constexpr (std::is_same_v<T, float>) return ScalarType::f32;
  else return ScalarType::f64;
}

inline ScalarType scalar_type_of(const Scalar& v) {
  return std::visit([](auto x) { return scalar_type_of<decltype(x)>(); }, v);
}

}  // namespace lacomm
