// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0

// Rank 0 holds a column-major matrix, the others row-major. One broadcast
// under a shared traversal order delivers every element to its logical place.

#include <cstdio>

#include "lacomm/lacomm.hpp"

using namespace lacomm;

int main() {
  constexpr std::size_t rows = 3, cols = 4;
  auto col_major = Layout(ScalarType::i32) ^ vector('i', rows) ^ vector('j', cols);
  auto row_major = Layout(ScalarType::i32) ^ vector('j', cols) ^ vector('i', rows);
  auto trav = make_traverser(row_major) ^ bcast('r');

  auto ok = run_spmd(3, [&](int rank, SimGroup& g) {
    auto mt = make_mpi_traverser('r', trav, g);
    auto bag = allocate_bag(rank == 0 ? col_major : row_major);
    if (rank == 0)
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) bag.set<std::int32_t>({{'i', i}, {'j', j}}, static_cast<int>(10 * i + j));
    broadcast(bag, mt, 0);
    bool good = true;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) good = good && bag.get<std::int32_t>({{'i', i}, {'j', j}}) == int(10 * i + j);
    return good;
  });

  std::printf("root plan:\n%s", render_calls(compile_for_traverser(col_major, trav)).c_str());
  std::printf("receiver plan:\n%s", render_calls(normalize(compile_for_traverser(row_major, trav))).c_str());
  for (std::size_t r = 0; r < ok.size(); ++r) std::printf("rank %zu: %s\n", r, ok[r] ? "ok" : "WRONG");
  return ok[1] && ok[2] ? 0 : 1;
}
