// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0

// The reference interpreter is the oracle for the property tests, so it gets
// its own hand-computed checks.

#include <gtest/gtest.h>

#include "support/random_layout.hpp"

using lacomm::testing::RefLayout;

TEST(Reference, ColumnMajor) {
  RefLayout r(4);
  r.vector("i", 2);
  r.vector("j", 3);
  EXPECT_EQ(r.offset({{"i", 1}, {"j", 2}}), 20);
  EXPECT_EQ(r.size_bytes(), 24u);
  EXPECT_EQ(r.enumerate({"i", "j"}), (std::vector<std::int64_t>{0, 8, 16, 4, 12, 20}));
}

TEST(Reference, TiledMatrix) {
  RefLayout r(4);
  r.vector("n", 4);
  r.vector("m", 4);
  r.into_blocks("m", "M", "m", 2);
  r.into_blocks("n", "N", "n", 2);
  ASSERT_EQ(r.live().size(), 4u);
  EXPECT_EQ(r.live()[0].first, "M");
  EXPECT_EQ(r.live()[3].first, "n");
  // m = 2, n = 1 -> (2 * 4 + 1) * 4.
  EXPECT_EQ(r.offset({{"M", 1}, {"m", 0}, {"N", 0}, {"n", 1}}), 36);
}

TEST(Reference, MergeSliceFixHoist) {
  RefLayout r(8);
  r.vector("a", 3);  // stride 8
  r.vector("b", 4);  // stride 24
  r.slice("a", 1, 2);
  r.merge("b", "a", "x");  // x = b * 2 + a
  EXPECT_EQ(r.extent("x"), 8u);
  EXPECT_EQ(r.offset({{"x", 5}}), 2 * 24 + (1 + 1) * 8);
  RefLayout f(4);
  f.vector("p", 5);
  f.vector("q", 2);
  f.hoist("p");
  EXPECT_EQ(f.live()[0].first, "p");
  f.fix("q", 1);
  EXPECT_EQ(f.enumerate({"p"}), (std::vector<std::int64_t>{20, 24, 28, 32, 36}));
}

TEST(Reference, IntoBlocksWithinName) {
  RefLayout r(4);
  r.vector("o", 6);
  r.into_blocks("o", "B", "w", 3);
  EXPECT_FALSE(r.has("o"));
  EXPECT_EQ(r.offset({{"B", 1}, {"w", 2}}), 20);
}
