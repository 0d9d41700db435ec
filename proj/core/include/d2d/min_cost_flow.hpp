// Copyright 2026 The d2d-auction Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

namespace d2d {

/// Min-cost flow on a small directed graph via successive shortest paths
/// with Johnson potentials. Arc costs may be negative as long as the graph
/// has no negative cycle; initial potentials come from Bellman-Ford.
class MinCostFlow {
 public:
  explicit MinCostFlow(int node_count);

  /// Returns the arc index.
  int add_arc(int from, int to, std::int64_t capacity, std::int64_t unit_cost);

  struct Result {
    std::int64_t flow = 0;
    std::int64_t cost = 0;
    int augmentations = 0;
  };

  /// Augments along shortest paths while the path cost is strictly negative,
  /// which yields the minimum-cost flow of any size (i.e. the maximum-weight
  /// flow when costs are negated weights).
  Result solve_min_cost(int source, int sink);

  std::int64_t flow(int arc) const;

 private:
  struct Arc {
    int to;
    int rev;
    std::int64_t capacity;
    std::int64_t cost;
  };
  std::vector<std::vector<Arc>> graph_;
  std::vector<std::pair<int, int>> arc_pos_;
  std::vector<std::int64_t> original_capacity_;
};

}  // namespace d2d
