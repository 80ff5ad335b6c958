// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0

// A 16x16 matrix split over a 4x4 grid of ranks: M is pinned, N follows from
// the group size, and each rank gets its tile in its own layout.

#include <cstdio>
#include <cstring>

#include "lacomm/lacomm.hpp"

using namespace lacomm;

int main() {
  auto matrix = Layout(ScalarType::f32) ^ vector('n', 16) ^ vector('m', 16);
  auto trav = make_traverser(matrix) ^ into_blocks('m', 'M') ^ into_blocks('n', 'N') ^ set_length('M', 4) ^
              merge_blocks('M', 'N', 'r');

  auto firsts = run_spmd(16, [&](int rank, SimGroup& g) {
    auto mt = make_mpi_traverser('r', trav, g);
    auto root = allocate_bag(matrix);
    if (rank == 0)
      for (std::size_t m = 0; m < 16; ++m)
        for (std::size_t n = 0; n < 16; ++n) root.set<float>({{'m', m}, {'n', n}}, float(100 * m + n));
    // Odd ranks store their tile transposed.
    auto tile = allocate_bag(make_dense_like(mt.traverser(), rank % 2 ? std::vector<Dim>{'m', 'n'}
                                                                      : std::vector<Dim>{'n', 'm'},
                                             ScalarType::f32));
    scatter(root, tile, mt, 0);
    auto back = allocate_bag(matrix);
    gather(tile, back, mt, 0);
    if (rank == 0 && std::memcmp(root.bytes().data(), back.bytes().data(), root.bytes().size()) != 0)
      throw error(errc::rank_failed, "gather did not restore the matrix");
    return tile.get<float>({{'m', 0}, {'n', 0}});
  });

  for (std::size_t r = 0; r < firsts.size(); ++r) std::printf("rank %2zu tile starts at %g\n", r, firsts[r]);
  return 0;
}
