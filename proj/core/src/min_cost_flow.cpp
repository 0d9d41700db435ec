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

#include "d2d/min_cost_flow.hpp"

#include <functional>
#include <limits>
#include <queue>

#include "d2d/error.hpp"

namespace d2d {

namespace {
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
}

MinCostFlow::MinCostFlow(int node_count) : graph_(static_cast<std::size_t>(node_count)) {
  if (node_count < 0) throw InputError("MinCostFlow: negative node count");
}

int MinCostFlow::add_arc(int from, int to, std::int64_t capacity, std::int64_t unit_cost) {
  const auto n = static_cast<int>(graph_.size());
  if (from < 0 || to < 0 || from >= n || to >= n) throw InputError("MinCostFlow: arc endpoint out of range");
  if (capacity < 0) throw InputError("MinCostFlow: negative capacity");
  auto& out = graph_[static_cast<std::size_t>(from)];
  auto& in = graph_[static_cast<std::size_t>(to)];
  const int fwd = static_cast<int>(out.size());
  const int bwd = static_cast<int>(in.size()) + (from == to ? 1 : 0);
  out.push_back({to, bwd, capacity, unit_cost});
  in.push_back({from, fwd, 0, -unit_cost});
  arc_pos_.emplace_back(from, fwd);
  original_capacity_.push_back(capacity);
  return static_cast<int>(arc_pos_.size()) - 1;
}

std::int64_t MinCostFlow::flow(int arc) const {
  const auto [node, idx] = arc_pos_.at(static_cast<std::size_t>(arc));
  return original_capacity_[static_cast<std::size_t>(arc)] -
         graph_[static_cast<std::size_t>(node)][static_cast<std::size_t>(idx)].capacity;
}

MinCostFlow::Result MinCostFlow::solve_min_cost(int source, int sink) {
  const std::size_t n = graph_.size();
  Result result;

  // Bellman-Ford for initial potentials; residual arcs start empty so only
  // forward arcs with capacity count.
  std::vector<std::int64_t> potential(n, kInf);
  potential[static_cast<std::size_t>(source)] = 0;
  for (std::size_t round = 0; round + 1 < n || round == 0; ++round) {
    bool changed = false;
    for (std::size_t u = 0; u < n; ++u) {
      if (potential[u] == kInf) continue;
      for (const auto& a : graph_[u]) {
        if (a.capacity <= 0) continue;
        const auto cand = potential[u] + a.cost;
        if (cand < potential[static_cast<std::size_t>(a.to)]) {
          potential[static_cast<std::size_t>(a.to)] = cand;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  for (auto& p : potential)
    if (p == kInf) p = 0;

  std::vector<std::int64_t> dist(n);
  std::vector<int> prev_node(n);
  std::vector<int> prev_arc(n);
  using Item = std::pair<std::int64_t, int>;

  for (;;) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev_node.begin(), prev_node.end(), -1);
    dist[static_cast<std::size_t>(source)] = 0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0, source);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      const auto uu = static_cast<std::size_t>(u);
      if (d > dist[uu]) continue;
      for (std::size_t k = 0; k < graph_[uu].size(); ++k) {
        const auto& a = graph_[uu][k];
        if (a.capacity <= 0) continue;
        const auto vv = static_cast<std::size_t>(a.to);
        const auto nd = d + a.cost + potential[uu] - potential[vv];
        if (nd < dist[vv]) {
          dist[vv] = nd;
          prev_node[vv] = u;
          prev_arc[vv] = static_cast<int>(k);
          heap.emplace(nd, a.to);
        }
      }
    }
    const auto t = static_cast<std::size_t>(sink);
    if (dist[t] == kInf) break;
    const auto path_cost = dist[t] + potential[t] - potential[static_cast<std::size_t>(source)];
    if (path_cost >= 0) break;

    for (std::size_t v = 0; v < n; ++v) potential[v] += std::min(dist[v], dist[t]);

    std::int64_t push = kInf;
    for (int v = sink; v != source; v = prev_node[static_cast<std::size_t>(v)]) {
      const auto& a = graph_[static_cast<std::size_t>(prev_node[static_cast<std::size_t>(v)])]
                            [static_cast<std::size_t>(prev_arc[static_cast<std::size_t>(v)])];
      push = std::min(push, a.capacity);
    }
    for (int v = sink; v != source; v = prev_node[static_cast<std::size_t>(v)]) {
      auto& a = graph_[static_cast<std::size_t>(prev_node[static_cast<std::size_t>(v)])]
                      [static_cast<std::size_t>(prev_arc[static_cast<std::size_t>(v)])];
      a.capacity -= push;
      graph_[static_cast<std::size_t>(v)][static_cast<std::size_t>(a.rev)].capacity += push;
    }
    result.flow += push;
    result.cost += push * path_cost;
    ++result.augmentations;
  }
  return result;
}

}  // namespace d2d
