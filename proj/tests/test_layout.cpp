// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <set>

#include "lacomm/layout.hpp"
#include "support/random_layout.hpp"

using namespace lacomm;

namespace {

// Column-major 2x3: i is contiguous.
Layout col_major_2x3() { return Layout(ScalarType::i32) ^ vector('i', 2) ^ vector('j', 3); }

// 4x4 i32 matrix tiled into 2x2 blocks of 2x2 elements.
Layout tiled_4x4() {
  return Layout(ScalarType::i32) ^ vector('n', 4) ^ vector('m', 4) ^ into_blocks('m', 'M', 2) ^
         into_blocks('n', 'N', 2);
}

errc code_of(auto&& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return errc::invalid_config;
}

}  // namespace

TEST(MakeScalar, SizeAndSignature) {
  auto l = make_scalar(ScalarType::i32);
  EXPECT_EQ(size_bytes(l), 4u);
  EXPECT_EQ(signature_of(l).to_string(), "Int");
  EXPECT_EQ(size_bytes(make_scalar(ScalarType::f64)), 8u);
  EXPECT_EQ(offset_bytes(l, {}), 0);
}

TEST(MakeScalar, TemplateForm) {
  EXPECT_EQ(scalar<float>().scalar(), ScalarType::f32);
  EXPECT_EQ(scalar<std::int64_t>().scalar(), ScalarType::i64);
}

TEST(Signature, VectorPrependsOutermost) {
  auto l = Layout(ScalarType::i32) ^ vector('i', 5) ^ vector('j', 7);
  EXPECT_EQ(signature_of(l).to_string(), "j -> i -> Int");
}

TEST(Signature, IntoBlocksInsertsBlockAboveOriginal) {
  auto l = Layout(ScalarType::i32) ^ vector('i', 8) ^ vector('j', 7) ^ into_blocks('i', 'b', 4);
  EXPECT_EQ(signature_of(l).to_string(), "j -> b -> i -> Int");
}

TEST(Signature, TiledMatrix) {
  auto l = Layout(ScalarType::i32) ^ vector('n', 10) ^ vector('m', 12) ^ into_blocks('m', 'M') ^ into_blocks('n', 'N');
  EXPECT_EQ(signature_of(l).to_string(), "M -> m -> N -> n -> Int");
}

TEST(Signature, HoistMovesToFront) {
  auto l = Layout(ScalarType::i32) ^ vector('i', 2) ^ vector('j', 3) ^ hoist('i');
  EXPECT_EQ(signature_of(l).to_string(), "i -> j -> Int");
}

TEST(Signature, MergeReplacesOuterAndDropsInner) {
  auto l = Layout(ScalarType::f32) ^ vector('a', 2) ^ vector('b', 3) ^ vector('c', 4) ^ merge_blocks('c', 'a', 'r');
  EXPECT_EQ(signature_of(l).to_string(), "r -> b -> Float");
  EXPECT_EQ(*length_of(l, 'r'), 8u);
}

TEST(Signature, FixRemovesDims) {
  auto l = col_major_2x3() ^ fix({{'i', 1}});
  EXPECT_EQ(signature_of(l).to_string(), "j -> Int");
  EXPECT_EQ(size_bytes(l), 24u);
}

TEST(Errors, DuplicateDim) {
  EXPECT_EQ(code_of([] { (Layout(ScalarType::i32) ^ vector('i', 2) ^ vector('i', 3)).check(); }),
            errc::duplicate_dim);
}

TEST(Errors, UnknownDim) {
  EXPECT_EQ(code_of([] { (col_major_2x3() ^ hoist('k')).check(); }), errc::unknown_dim);
  EXPECT_EQ(code_of([] { (void)length_of(col_major_2x3(), 'k'); }), errc::unknown_dim);
}

TEST(Errors, BcastRejectedOnLayouts) {
  EXPECT_EQ(code_of([] { (col_major_2x3() ^ bcast('q', 4)).check(); }), errc::traverser_only_proto);
}

TEST(Errors, OpenExtentAtQueryTime) {
  auto l = Layout(ScalarType::i32) ^ vector('i');
  EXPECT_FALSE(l.resolved());
  EXPECT_EQ(code_of([&] { (void)size_bytes(l); }), errc::open_extent);
  EXPECT_EQ(code_of([&] { (void)offset_bytes(l, {{'i', 0}}); }), errc::open_extent);
}

TEST(ResolveExtents, BlockCountFromSize) {
  auto l = Layout(ScalarType::i32) ^ vector('i', 64) ^ into_blocks('i', 'b', 8);
  EXPECT_EQ(*length_of(resolve_extents(l), 'b'), 8u);
}

TEST(ResolveExtents, BlockSizeFromCount) {
  auto l = Layout(ScalarType::i32) ^ vector('m', 64) ^ into_blocks('m', 'M');
  EXPECT_FALSE(length_of(l, 'M').has_value());
  auto pinned = l ^ set_length('M', 4);
  EXPECT_EQ(*length_of(pinned, 'M'), 4u);
  EXPECT_EQ(*length_of(pinned, 'm'), 16u);
}

TEST(ResolveExtents, MergeDeducesOtherFactor) {
  auto l = Layout(ScalarType::i32) ^ vector('N') ^ vector('M') ^ set_length('M', 4) ^ merge_blocks('M', 'N', 'r') ^
           set_length('r', 16);
  // N = 16 / 4 is needed to place r = 5 at (M = 1, N = 1).
  ASSERT_TRUE(l.resolved());
  EXPECT_EQ(offset_bytes(l, {{'r', 5}}), (1 + 1 * 4) * 4);
  EXPECT_EQ(size_bytes(l), 64u);
}

TEST(ResolveExtents, NonDivisible) {
  auto l = Layout(ScalarType::i32) ^ vector('i', 10) ^ into_blocks('i', 'b', 4);
  try {
    resolve_extents(l);
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::non_divisible);
    EXPECT_NE(std::string(e.what()).find("10"), std::string::npos);
  }
}

TEST(ResolveExtents, Contradiction) {
  auto l = Layout(ScalarType::i32) ^ vector('i', 8) ^ set_length('i', 4);
  EXPECT_EQ(code_of([&] { resolve_extents(l); }), errc::contradiction);
}

TEST(LengthOf, Examples) {
  EXPECT_EQ(*length_of(Layout(ScalarType::i32) ^ vector('i', 5), 'i'), 5u);
  auto open = Layout(ScalarType::i32) ^ vector('m', 64) ^ into_blocks('m', 'M');
  EXPECT_FALSE(length_of(open, 'M').has_value());
  EXPECT_EQ(*length_of(Layout(ScalarType::i32) ^ vector('m', 64) ^ into_blocks('m', 'M', 16), 'M'), 4u);
}

TEST(SizeBytes, Examples) {
  EXPECT_EQ(size_bytes(Layout(ScalarType::f64) ^ vector('i', 3) ^ vector('j', 2)), 48u);
  EXPECT_EQ(size_bytes(Layout(ScalarType::i32) ^ vector('n', 64) ^ vector('m', 64)), 16384u);
}

TEST(SizeBytes, SliceKeepsFootprint) {
  auto l = Layout(ScalarType::f32) ^ vector('i', 10) ^ slice('i', 2, 3);
  EXPECT_EQ(size_bytes(l), 40u);
  EXPECT_EQ(*length_of(l, 'i'), 3u);
}

TEST(OffsetBytes, ColumnMajor) { EXPECT_EQ(offset_bytes(col_major_2x3(), {{'i', 1}, {'j', 2}}), 20); }

TEST(OffsetBytes, TiledMatrix) {
  EXPECT_EQ(offset_bytes(tiled_4x4(), {{'M', 1}, {'m', 0}, {'N', 0}, {'n', 1}}), 36);
}

TEST(OffsetBytes, ZeroStateIsZero) {
  EXPECT_EQ(offset_bytes(tiled_4x4(), {{'M', 0}, {'m', 0}, {'N', 0}, {'n', 0}}), 0);
}

TEST(OffsetBytes, ExtraBindingsIgnored) {
  EXPECT_EQ(offset_bytes(col_major_2x3(), {{'i', 1}, {'j', 2}, {'q', 7}}), 20);
}

TEST(OffsetBytes, MissingAndOutOfRange) {
  EXPECT_EQ(code_of([] { (void)offset_bytes(col_major_2x3(), {{'i', 1}}); }), errc::missing_binding);
  EXPECT_EQ(code_of([] { (void)offset_bytes(col_major_2x3(), {{'i', 2}, {'j', 0}}); }), errc::out_of_range);
}

TEST(OffsetBytes, FixSubstitutesIndex) {
  auto l = col_major_2x3() ^ fix({{'j', 2}});
  EXPECT_EQ(offset_bytes(l, {{'i', 1}}), 20);
}

TEST(OffsetBytes, SlicePreservesOffsets) {
  auto base = Layout(ScalarType::i64) ^ vector('i', 9);
  auto sliced = base ^ slice('i', 3, 4);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(offset_bytes(sliced, {{'i', k}}), offset_bytes(base, {{'i', 3 + k}}));
}

TEST(OffsetBytes, IntoBlocksThenMergeIsIdentity) {
  auto base = Layout(ScalarType::f64) ^ vector('o', 12) ^ vector('z', 2);
  auto round = base ^ into_blocks('o', 'b', 3) ^ merge_blocks('b', 'o', 'p');
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t o = 0; o < 12; ++o)
      EXPECT_EQ(offset_bytes(round, {{'p', o}, {'z', z}}), offset_bytes(base, {{'o', o}, {'z', z}}));
}

TEST(OffsetBytes, DenseBijection) {
  auto l = tiled_4x4();
  std::set<std::int64_t> seen;
  for (std::size_t M = 0; M < 2; ++M)
    for (std::size_t m = 0; m < 2; ++m)
      for (std::size_t N = 0; N < 2; ++N)
        for (std::size_t n = 0; n < 2; ++n) seen.insert(offset_bytes(l, {{'M', M}, {'m', m}, {'N', N}, {'n', n}}));
  ASSERT_EQ(seen.size(), 16u);
  EXPECT_EQ(*seen.begin(), 0);
  EXPECT_EQ(*seen.rbegin(), 60);
}

TEST(StrideAlong, Examples) {
  EXPECT_EQ(stride_along(col_major_2x3(), 'i'), 4);
  EXPECT_EQ(stride_along(col_major_2x3(), 'j'), 8);
  EXPECT_EQ(stride_along(Layout(ScalarType::f64) ^ vector('x', 5), 'x'), 8);
  EXPECT_EQ(stride_along(tiled_4x4(), 'M'), 2 * 4 * 4);
}

TEST(StrideAlong, NonConstantThroughMergedDims) {
  // r walks (b, o) with o inner of extent 2 and b outer of stride 24: steps 8, 16.
  auto l = Layout(ScalarType::f64) ^ vector('o', 3) ^ vector('b', 2) ^ slice('o', 0, 2) ^ merge_blocks('b', 'o', 'r');
  EXPECT_FALSE(stride_along(l, 'r').has_value());
}

TEST(LowerBoundAlong, Examples) {
  EXPECT_EQ(lower_bound_along(col_major_2x3(), 'i'), 0);
  EXPECT_EQ(lower_bound_along(Layout(ScalarType::f32) ^ vector('i', 8) ^ slice('i', 2, 3), 'i'), 8);
  EXPECT_EQ(lower_bound_along(col_major_2x3() ^ slice('j', 1, 2), 'j'), 8);
  EXPECT_EQ(lower_bound_along(col_major_2x3() ^ slice('j', 1, 2), 'i'), 0);
}

TEST(IsUniformAlong, GeneratedLayoutsAreUniform) {
  lacomm::testing::LayoutGenerator gen(7);
  for (int n = 0; n < 200; ++n) {
    auto g = gen.next();
    for (auto d : g.layout.dims()) EXPECT_TRUE(is_uniform_along(g.layout, d)) << g.layout.to_string();
  }
}

TEST(MakeDenseLike, LastListedOutermost) {
  auto src = Layout(ScalarType::f32) ^ vector('s', 16) ^ vector('m', 4);
  auto l = make_dense_like(src, {'s', 'm'}, ScalarType::f32);
  EXPECT_EQ(signature_of(l).to_string(), "m -> s -> Float");
  EXPECT_EQ(size_bytes(l), 256u);
  auto v = make_dense_like(src, {'s'}, ScalarType::f64);
  EXPECT_EQ(signature_of(v).to_string(), "s -> Double");
}

TEST(MakeDenseLike, UnknownAndOpen) {
  auto src = Layout(ScalarType::f32) ^ vector('s') ^ vector('m', 4);
  EXPECT_EQ(code_of([&] { (void)make_dense_like(src, {'s'}, ScalarType::f32); }), errc::open_extent);
  EXPECT_EQ(code_of([&] { (void)make_dense_like(src, {'q'}, ScalarType::f32); }), errc::unknown_dim);
}

TEST(Generated, SignatureMatchesReferenceRewriter) {
  lacomm::testing::LayoutGenerator gen(99);
  for (int n = 0; n < 300; ++n) {
    auto g = gen.next();
    auto sig = signature_of(g.layout);
    ASSERT_EQ(sig.dims.size(), g.ref.live().size()) << g.layout.to_string();
    for (std::size_t k = 0; k < sig.dims.size(); ++k) {
      EXPECT_EQ(sig.dims[k].first.name(), g.ref.live()[k].first) << g.layout.to_string();
      EXPECT_EQ(sig.dims[k].second, Extent(g.ref.live()[k].second)) << g.layout.to_string();
    }
    EXPECT_EQ(size_bytes(g.layout), g.ref.size_bytes()) << g.layout.to_string();
  }
}
