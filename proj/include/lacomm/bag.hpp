// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <variant>

#include "lacomm/error.hpp"
#include "lacomm/layout.hpp"
#include "lacomm/scalar.hpp"

namespace lacomm {

/// A layout bound to a byte buffer, either owned (zero-initialized) or
/// observed. Move-only; the observed buffer must outlive the bag.
class Bag {
 public:
  static Bag allocate(Layout layout) {
    auto n = layout.size_bytes();
    std::unique_ptr<std::byte[]> owned(new std::byte[n == 0 ? 1 : n]());
    std::span<std::byte> data(owned.get(), n);
    return Bag(std::move(layout), std::move(owned), data);
  }

  static Bag bind(Layout layout, std::span<std::byte> buffer) {
    auto n = layout.size_bytes();
    if (buffer.size() < n)
      throw error(errc::buffer_too_small, "buffer of " + std::to_string(buffer.size()) + " bytes is smaller than the " +
                                              std::to_string(n) + " bytes the layout needs");
    return Bag(std::move(layout), nullptr, buffer);
  }

  Bag(Bag&&) noexcept = default;
  Bag& operator=(Bag&&) noexcept = default;

  const Layout& layout() const noexcept { return layout_; }
  bool owning() const noexcept { return owned_ != nullptr; }
  std::span<std::byte> bytes() noexcept { return data_; }
  std::span<const std::byte> bytes() const noexcept { return data_; }

  Scalar load(const IndexState& s) const {
    auto off = checked_offset(s);
    switch (layout_.scalar()) {
      case ScalarType::i32: return read<std::int32_t>(off);
      case ScalarType::i64: return read<std::int64_t>(off);
      case ScalarType::f32: return read<float>(off);
      case ScalarType::f64: return read<double>(off);
    }
    return {};
  }

  void store(const IndexState& s, const Scalar& v) {
    if (scalar_type_of(v) != layout_.scalar())
      throw error(errc::type_mismatch, "storing a " + std::string(scalar_token(scalar_type_of(v))) + " into a " +
                                           std::string(scalar_token(layout_.scalar())) + " layout");
    auto off = checked_offset(s);
    std::visit([&](auto x) { std::memcpy(data_.data() + off, &x, sizeof x); }, v);
  }

  /// Typed read; T must match the layout's scalar.
  template <class T>
  T get(const IndexState& s) const {
    require_type<T>();
    return read<T>(checked_offset(s));
  }

  template <class T>
  void set(const IndexState& s, T v) {
    require_type<T>();
    std::memcpy(data_.data() + checked_offset(s), &v, sizeof v);
  }

  /// Reference to the element; the buffer must be suitably aligned.
  template <class T>
  T& at(const IndexState& s) {
    require_type<T>();
    auto* p = data_.data() + checked_offset(s);
    if (reinterpret_cast<std::uintptr_t>(p) % alignof(T) != 0)
      throw error(errc::type_mismatch, "element is not aligned for direct access");
    return *std::launder(reinterpret_cast<T*>(p));
  }

  template <class T>
  const T& at(const IndexState& s) const {
    return const_cast<Bag*>(this)->at<T>(s);
  }

 private:
  Bag(Layout layout, std::unique_ptr<std::byte[]> owned, std::span<std::byte> data)
      : layout_(std::move(layout)), owned_(std::move(owned)), data_(data) {}

  std::size_t checked_offset(const IndexState& s) const {
    auto off = layout_.offset(s);
    auto w = scalar_size(layout_.scalar());
    if (off < 0 || static_cast<std::size_t>(off) + w > data_.size())
      throw error(errc::out_of_range, "offset " + std::to_string(off) + " is outside the buffer");
    return static_cast<std::size_t>(off);
  }

  template <class T>
  void require_type() const {
    if (scalar_type_of<T>() != layout_.scalar())
      throw error(errc::type_mismatch, "accessing a " + std::string(scalar_token(layout_.scalar())) +
                                           " layout as " + std::string(scalar_token(scalar_type_of<T>())));
  }

  template <class T>
  T read(std::size_t off) const {
    T v;
    std::memcpy(&v, data_.data() + off, sizeof v);
    return v;
  }

  Layout layout_;
  std::unique_ptr<std::byte[]> owned_;
  std::span<std::byte> data_;
};

inline Bag allocate_bag(Layout layout) { return Bag::allocate(std::move(layout)); }

inline Bag bind_bag(Layout layout, std::span<std::byte> buffer) { return Bag::bind(std::move(layout), buffer); }

inline Scalar load(const Bag& b, const IndexState& s) { return b.load(s); }

inline void store(Bag& b, const IndexState& s, const Scalar& v) { b.store(s, v); }

}  // namespace lacomm
