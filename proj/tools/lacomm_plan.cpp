// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0

// lacomm-plan: compiles a mini-language layout and prints its signature,
// size and datatype construction calls.
//
//   lacomm-plan --layout "scalar:i32 ^ vector:j:6 ^ vector:i:4" --order j,i

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "lacomm/lacomm.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Compile a layout into datatype construction calls", "lacomm-plan"};
  std::string text;
  std::vector<std::string> order_names;
  bool coalesced = false;
  bool offsets = false;
  app.add_option("--layout", text, "layout in the mini-language, e.g. \"scalar:f64 ^ vector:j:4 ^ vector:i:3\"")
      ->required();
  app.add_option("--order", order_names, "traversal order, outermost first; default: the layout signature")
      ->delimiter(',');
  app.add_flag("--coalesce", coalesced, "merge adjacent contiguous runs before rendering");
  app.add_flag("--offsets", offsets, "also print the element byte offsets");
  CLI11_PARSE(app, argc, argv);

  try {
    auto layout = lacomm::parse_layout(text);
    auto order = layout.dims();
    if (!order_names.empty()) {
      order.clear();
      for (const auto& n : order_names) order.emplace_back(n);
    }
    auto plan = lacomm::normalize(lacomm::compile(layout, order));
    if (coalesced) plan = lacomm::coalesce(plan);
    std::cout << "signature: " << layout.signature().to_string() << "\n";
    std::cout << "size: " << lacomm::size_bytes(layout) << " bytes\n";
    std::cout << lacomm::render_calls(plan);
    if (offsets) {
      std::cout << "offsets:";
      for (const auto& e : lacomm::element_sequence(plan)) std::cout << ' ' << e.offset;
      std::cout << '\n';
    }
  } catch (const lacomm::error& e) {
    std::fprintf(stderr, "lacomm-plan: %s\n", e.what());
    return 2;
  }
  return 0;
}
