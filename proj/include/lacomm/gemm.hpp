// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Distributed GEMM, C = alpha * A * B + beta * C, on the simulated group.
// C is tiled over an M x (R/M) grid merged into the ranking dim 'r'; A row
// slabs and B column slabs reach every rank that needs them through scatter
// replication.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lacomm/bag.hpp"
#include "lacomm/collectives.hpp"
#include "lacomm/compile.hpp"
#include "lacomm/error.hpp"
#include "lacomm/layout.hpp"
#include "lacomm/mpi_traverser.hpp"
#include "lacomm/sim_group.hpp"
#include "lacomm/traverser.hpp"

namespace lacomm::gemm {

struct Sizes {
  std::size_t ni, nj, nk;
  friend bool operator==(const Sizes&, const Sizes&) = default;
};

struct Dataset {
  const char* name;
  Sizes sizes;
};

// PolyBench 4.2 sizes rounded up to multiples of 64; EXTRALARGE as published
// for the cluster runs.
inline constexpr Dataset datasets[] = {
    {"MINI", {64, 64, 64}},
    {"SMALL", {64, 128, 128}},
    {"MEDIUM", {256, 256, 256}},
    {"LARGE", {1024, 1152, 1216}},
    {"EXTRALARGE", {2048, 2560, 1408}},
};

inline Sizes dataset_sizes(std::string_view name) {
  for (const auto& d : datasets)
    if (name == d.name) return d.sizes;
  throw error(errc::invalid_config, "unknown dataset '" + std::string(name) + "'");
}

/// Major (outermost) dim of each privatized tile: C in {I,J}, A in {I,K}, B in {K,J}.
struct Majors {
  char c = 'I', a = 'I', b = 'J';
  std::string to_string() const { return std::string{c, '/', a, '/', b}; }
  friend bool operator==(const Majors&, const Majors&) = default;
};

inline Majors parse_majors(std::string_view s) {
  if (s.size() != 5 || s[1] != '/' || s[3] != '/' || (s[0] != 'I' && s[0] != 'J') || (s[2] != 'I' && s[2] != 'K') ||
      (s[4] != 'K' && s[4] != 'J'))
    throw error(errc::invalid_config, "majors must look like I/I/J with C in {I,J}, A in {I,K}, B in {K,J}; got '" +
                                          std::string(s) + "'");
  return {s[0], s[2], s[4]};
}

inline std::vector<Majors> all_majors() {
  std::vector<Majors> out;
  for (char c : {'I', 'J'})
    for (char a : {'I', 'K'})
      for (char b : {'K', 'J'}) out.push_back({c, a, b});
  return out;
}

/// Largest divisor of R not above sqrt(R).
inline int default_grid_m(int ranks) {
  int m = 1;
  for (int d = 1; d * d <= ranks; ++d)
    if (ranks % d == 0) m = d;
  return m;
}

struct Config {
  std::string dataset = "MINI";
  Sizes sizes{64, 64, 64};
  int ranks = 1;
  int grid_m = 1;
  Majors majors;
  int repeats = 1;
  double alpha = 1.5;
  double beta = 1.2;
};

inline void check_config(const Config& c) {
  auto fail = [](const std::string& m) { throw error(errc::invalid_config, m); };
  if (c.ranks < 1) fail("ranks must be at least 1");
  if (c.grid_m < 1 || c.ranks % c.grid_m != 0)
    fail("grid M = " + std::to_string(c.grid_m) + " does not divide " + std::to_string(c.ranks) + " ranks");
  if (c.repeats < 0) fail("repeats must be non-negative");
  const auto M = static_cast<std::size_t>(c.grid_m), N = static_cast<std::size_t>(c.ranks / c.grid_m);
  if (c.sizes.ni == 0 || c.sizes.nj == 0 || c.sizes.nk == 0) fail("matrix dimensions must be positive");
  if (c.sizes.ni % M != 0) fail("ni = " + std::to_string(c.sizes.ni) + " is not divisible by M = " + std::to_string(M));
  if (c.sizes.nj % N != 0)
    fail("nj = " + std::to_string(c.sizes.nj) + " is not divisible by R/M = " + std::to_string(N));
  (void)parse_majors(c.majors.to_string());
}

/// Layouts and traverser of one configuration.
struct Problem {
  Layout c_root, a_root, b_root;  // row-major, tiled into I x J blocks
  Traverser traverser;            // ranking dim 'r' bound to R
  Layout c_tile, a_tile, b_tile;  // dense tiles with the configured majors
};

inline Layout tile_layout(const Traverser& t, char major, char row, char col) {
  // make_dense_like puts the last listed dim outermost.
  auto lower = [](char c) { return Dim(static_cast<char>(c - 'A' + 'a')); };
  if (major == row) return make_dense_like(t, {lower(col), lower(row)}, ScalarType::f64);
  return make_dense_like(t, {lower(row), lower(col)}, ScalarType::f64);
}

inline Problem build_problem(const Config& c) {
  check_config(c);
  const auto [ni, nj, nk] = c.sizes;
  auto f64 = Layout(ScalarType::f64);
  auto C = f64 ^ vector('j', nj) ^ vector('i', ni) ^ into_blocks('i', 'I') ^ into_blocks('j', 'J');
  auto A = f64 ^ vector('k', nk) ^ vector('i', ni) ^ into_blocks('i', 'I');
  auto B = f64 ^ vector('j', nj) ^ vector('k', nk) ^ into_blocks('j', 'J');
  auto t = make_traverser(C, A, B) ^ set_length('I', static_cast<std::size_t>(c.grid_m)) ^
           merge_blocks('I', 'J', 'r') ^ set_length('r', static_cast<std::size_t>(c.ranks));
  t.check();
  return Problem{C,
                 A,
                 B,
                 t,
                 tile_layout(t, c.majors.c, 'I', 'J'),
                 tile_layout(t, c.majors.a, 'I', 'K'),
                 tile_layout(t, c.majors.b, 'K', 'J')};
}

// PolyBench/C 4.2 gemm initialization.
inline double init_c(std::size_t i, std::size_t j, const Sizes& s) {
  return static_cast<double>((i * j + 1) % s.ni) / static_cast<double>(s.ni);
}
inline double init_a(std::size_t i, std::size_t k, const Sizes& s) {
  return static_cast<double>(i * (k + 1) % s.nk) / static_cast<double>(s.nk);
}
inline double init_b(std::size_t k, std::size_t j, const Sizes& s) {
  return static_cast<double>(k * (j + 2) % s.nj) / static_cast<double>(s.nj);
}

/// Row-major sequential reference with the same summation order as the ranks.
inline std::vector<double> sequential_gemm(const Config& c) {
  const auto [ni, nj, nk] = c.sizes;
  std::vector<double> C(ni * nj), A(ni * nk), B(nk * nj);
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t j = 0; j < nj; ++j) C[i * nj + j] = init_c(i, j, c.sizes);
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t k = 0; k < nk; ++k) A[i * nk + k] = init_a(i, k, c.sizes);
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t j = 0; j < nj; ++j) B[k * nj + j] = init_b(k, j, c.sizes);
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t j = 0; j < nj; ++j) {
      C[i * nj + j] *= c.beta;
      for (std::size_t k = 0; k < nk; ++k) C[i * nj + j] += c.alpha * A[i * nk + k] * B[k * nj + j];
    }
  return C;
}

/// Per-rank kernel over the tiles, traversed in (i, j, k) order.
inline void tile_kernel(Bag& C, const Bag& A, const Bag& B, double alpha, double beta) {
  auto scale = make_traverser(C.layout()) ^ hoist('j') ^ hoist('i');
  scale.for_each([&](const IndexState& s) { C.at<double>(s) *= beta; });
  auto t = make_traverser(C.layout(), A.layout(), B.layout()) ^ hoist('k') ^ hoist('j') ^ hoist('i');
  t.for_each([&](const IndexState& s) { C.at<double>(s) += alpha * A.at<double>(s) * B.at<double>(s); });
}

struct PhaseTiming {
  std::string phase;
  int repeat;
  double seconds;
};

struct RunResult {
  std::vector<PhaseTiming> timings;
  std::vector<double> c;  // gathered C, row-major ni x nj
};

inline constexpr const char* phases[] = {"scatter", "compute", "gather"};

inline RunResult run_distributed_gemm(const Config& c, SpmdOptions options = {}) {
  auto problem = build_problem(c);
  const auto [ni, nj, nk] = c.sizes;
  RunResult result;
  result.c.assign(ni * nj, 0.0);
  std::vector<double> A(ni * nk), B(nk * nj);
  for (std::size_t i = 0; i < ni; ++i)
    for (std::size_t k = 0; k < nk; ++k) A[i * nk + k] = init_a(i, k, c.sizes);
  for (std::size_t k = 0; k < nk; ++k)
    for (std::size_t j = 0; j < nj; ++j) B[k * nj + j] = init_b(k, j, c.sizes);

  run_spmd(
      c.ranks,
      [&](int rank, SimGroup& g) {
        auto mt = make_mpi_traverser('r', problem.traverser, g);
        auto Ct = allocate_bag(problem.c_tile);
        auto At = allocate_bag(problem.a_tile);
        auto Bt = allocate_bag(problem.b_tile);
        const bool root = rank == 0;
        auto bytes = [&](std::vector<double>& v) {
          return root ? std::as_writable_bytes(std::span(v)) : std::span<std::byte>();
        };
        using clock = std::chrono::steady_clock;
        for (int rep = 0; rep < c.repeats; ++rep) {
          if (root)
            for (std::size_t i = 0; i < ni; ++i)
              for (std::size_t j = 0; j < nj; ++j) result.c[i * nj + j] = init_c(i, j, c.sizes);
          g.barrier();
          auto t0 = clock::now();
          scatter(problem.c_root, bytes(result.c), Ct, mt, 0);
          scatter(problem.a_root, bytes(A), At, mt, 0);
          scatter(problem.b_root, bytes(B), Bt, mt, 0);
          g.barrier();
          auto t1 = clock::now();
          tile_kernel(Ct, At, Bt, c.alpha, c.beta);
          g.barrier();
          auto t2 = clock::now();
          gather(Ct, problem.c_root, bytes(result.c), mt, 0);
          g.barrier();
          auto t3 = clock::now();
          if (root) {
            auto sec = [](auto a, auto b) { return std::chrono::duration<double>(b - a).count(); };
            result.timings.push_back({"scatter", rep, sec(t0, t1)});
            result.timings.push_back({"compute", rep, sec(t1, t2)});
            result.timings.push_back({"gather", rep, sec(t2, t3)});
          }
        }
      },
      options);
  return result;
}

struct Validation {
  bool pass = true;
  std::string message;
};

/// Bit-exact comparison against the sequential reference.
inline Validation validate(const Config& c, std::span<const double> gathered) {
  auto ref = sequential_gemm(c);
  if (gathered.size() != ref.size())
    return {false, "gathered " + std::to_string(gathered.size()) + " elements, expected " + std::to_string(ref.size())};
  for (std::size_t x = 0; x < ref.size(); ++x) {
    if (std::memcmp(&ref[x], &gathered[x], sizeof(double)) != 0) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "C[%zu][%zu] = %.17g, expected %.17g", x / c.sizes.nj, x % c.sizes.nj,
                    gathered[x], ref[x]);
      return {false, buf};
    }
  }
  return {true, "bit-exact match over " + std::to_string(ref.size()) + " elements"};
}

/// One CSV row: the timing plus the configuration it belongs to.
struct TimingRow {
  std::string dataset;
  int ranks;
  int grid_m;
  std::string config;
  std::string phase;
  int repeat;
  double seconds;
};

inline std::vector<TimingRow> timing_rows(const Config& c, const RunResult& r) {
  std::vector<TimingRow> out;
  for (const auto& t : r.timings)
    out.push_back({c.dataset, c.ranks, c.grid_m, c.majors.to_string(), t.phase, t.repeat, t.seconds});
  return out;
}

inline std::string format_seconds(double s) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", s);
  return buf;
}

/// Data rows, then a blank line and a per-(config, phase) summary with the
/// mean and sample standard deviation. No rows gives the header only.
inline std::string report_csv(const std::vector<TimingRow>& rows) {
  std::ostringstream os;
  os << "dataset,ranks,grid_M,config,phase,repeat,seconds\n";
  if (rows.empty()) return os.str();
  for (const auto& r : rows)
    os << r.dataset << ',' << r.ranks << ',' << r.grid_m << ',' << r.config << ',' << r.phase << ',' << r.repeat << ','
       << format_seconds(r.seconds) << '\n';

  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : rows) {
    std::pair key{r.dataset + "," + std::to_string(r.ranks) + "," + std::to_string(r.grid_m) + "," + r.config, r.phase};
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(r.seconds);
  }
  os << "\ndataset,ranks,grid_M,config,phase,count,mean_seconds,stddev_seconds\n";
  for (const auto& key : keys) {
    const auto& v = groups[key];
    double mean = 0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0;
    for (double x : v) ss += (x - mean) * (x - mean);
    double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    os << key.first << ',' << key.second << ',' << v.size() << ',' << format_seconds(mean) << ','
       << format_seconds(sd) << '\n';
  }
  return os.str();
}

/// render_calls for the six endpoint plans seen by rank 0: the root-side
/// parts of C, A, B and the three local tiles.
inline std::string render_endpoint_plans(const Config& c) {
  auto p = build_problem(c);
  auto order = p.traverser.order();
  auto part = [&](const Layout& root) {
    auto v = as_seen_by(root, p.traverser);
    auto fixed = v.has_dim('r') ? v ^ fix(IndexState{{'r', 0}}) : v;
    return compile(fixed, restrict_order(order, fixed));
  };
  std::string out;
  auto add = [&](const std::string& title, const DatatypePlan& plan) {
    out += "# " + title + "\n" + render_calls(normalize(plan));
  };
  add("C root part (rank 0)", part(p.c_root));
  add("A root part (rank 0)", part(p.a_root));
  add("B root part (rank 0)", part(p.b_root));
  add("C tile", compile_for_traverser(p.c_tile, p.traverser));
  add("A tile", compile_for_traverser(p.a_tile, p.traverser));
  add("B tile", compile_for_traverser(p.b_tile, p.traverser));
  return out;
}

}  // namespace lacomm::gemm
