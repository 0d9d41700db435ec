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

// The distributed greedy allocation as per-agent state machines. An agent only ever reads its own
// remaining quantity and the neighbour table it maintains from status
// messages; requests and grants travel as explicit messages.

#include <algorithm>
#include <optional>
#include <tuple>
#include <unordered_map>

#include "d2d/allocation.hpp"
#include "d2d/error.hpp"
#include "d2d/random.hpp"

namespace d2d {

namespace {

struct NeighborEntry {
  std::size_t peer;
  int peer_id;
  int weight;
  int remaining;  // last quantity the peer announced
};

struct Request {
  std::size_t peer;
  int units;
};

class Agent {
 public:
  Agent(int quantity, std::vector<NeighborEntry> table) : remaining_(quantity), table_(std::move(table)) {
    std::sort(table_.begin(), table_.end(), [](const NeighborEntry& a, const NeighborEntry& b) {
      return std::tie(b.weight, a.peer_id) < std::tie(a.weight, b.peer_id);
    });
    for (std::size_t k = 0; k < table_.size(); ++k) slot_.emplace(table_[k].peer, k);
  }

  int remaining() const { return remaining_; }
  void consume(int units) { remaining_ -= units; }

  // Request rule: walk the best min(remaining, |active neighbours|) peers and ask
  // each for what the better-ranked ones cannot cover.
  std::vector<Request> compute_requests() const {
    std::vector<Request> out;
    if (remaining_ <= 0) return out;
    int considered = 0;
    long long covered = 0;
    for (const auto& e : table_) {
      if (e.remaining <= 0) continue;
      if (considered == remaining_) break;
      ++considered;
      const long long want = std::min<long long>(remaining_ - covered, e.remaining);
      covered += e.remaining;
      if (want > 0) out.push_back({e.peer, static_cast<int>(want)});
    }
    return out;
  }

  // Status message from a neighbour; remaining == 0 removes it from S(i)/B(j).
  void on_status(std::size_t peer, int remaining) {
    auto it = slot_.find(peer);
    if (it != slot_.end()) table_[it->second].remaining = remaining;
  }

  const std::vector<NeighborEntry>& table() const { return table_; }

 private:
  int remaining_;
  std::vector<NeighborEntry> table_;
  std::unordered_map<std::size_t, std::size_t> slot_;
};

int requested_units(const std::vector<Request>& requests, std::size_t peer) {
  for (const auto& r : requests)
    if (r.peer == peer) return r.units;
  return 0;
}

class Network {
 public:
  Network(const MarketInstance& instance, const DeclarationProfile& decl) : instance_(instance) {
    const auto& buyers = instance.buyers();
    const auto& sellers = instance.sellers();
    std::vector<std::vector<NeighborEntry>> btab(buyers.size());
    std::vector<std::vector<NeighborEntry>> stab(sellers.size());
    for (const auto& e : instance.edges()) {
      const int w = edge_weight(decl.buyers[e.buyer].unit_price, decl.sellers[e.seller].unit_price);
      if (w < 0) continue;
      // Initial declarations exchanged with every neighbour.
      btab[e.buyer].push_back({e.seller, sellers[e.seller].id, w, decl.sellers[e.seller].quantity});
      stab[e.seller].push_back({e.buyer, buyers[e.buyer].id, w, decl.buyers[e.buyer].quantity});
    }
    for (std::size_t i = 0; i < buyers.size(); ++i) buyers_.emplace_back(decl.buyers[i].quantity, std::move(btab[i]));
    for (std::size_t j = 0; j < sellers.size(); ++j)
      sellers_.emplace_back(decl.sellers[j].quantity, std::move(stab[j]));
  }

  void grant(std::size_t buyer, std::size_t seller, int units, Allocation& alloc) {
    buyers_[buyer].consume(units);
    sellers_[seller].consume(units);
    alloc.flows[{instance_.buyers()[buyer].id, instance_.sellers()[seller].id}] += units;
  }

  template <typename OnNotify>
  void broadcast_buyer(std::size_t buyer, OnNotify&& notify) {
    for (const auto& e : buyers_[buyer].table()) {
      sellers_[e.peer].on_status(buyer, buyers_[buyer].remaining());
      notify(e.peer);
    }
  }

  template <typename OnNotify>
  void broadcast_seller(std::size_t seller, OnNotify&& notify) {
    for (const auto& e : sellers_[seller].table()) {
      buyers_[e.peer].on_status(seller, sellers_[seller].remaining());
      notify(e.peer);
    }
  }

  Allocation run_synchronous(const IterationObserver& observe) {
    Allocation alloc;
    alloc.engine = to_string(Engine::Distributed);
    std::vector<std::vector<Request>> buyer_out(buyers_.size());
    std::vector<std::vector<Request>> seller_out(sellers_.size());
    std::vector<std::vector<Request>> buyer_in(buyers_.size());
    std::vector<std::vector<Request>> seller_in(sellers_.size());
    std::vector<int> buyer_before(buyers_.size());
    std::vector<int> seller_before(sellers_.size());

    for (;;) {
      bool any = false;
      for (std::size_t i = 0; i < buyers_.size(); ++i) {
        buyer_out[i] = buyers_[i].compute_requests();
        buyer_in[i].clear();
        any = any || !buyer_out[i].empty();
      }
      for (std::size_t j = 0; j < sellers_.size(); ++j) {
        seller_out[j] = sellers_[j].compute_requests();
        seller_in[j].clear();
        any = any || !seller_out[j].empty();
      }
      if (!any) break;
      ++alloc.iterations_used;

      for (std::size_t i = 0; i < buyers_.size(); ++i)
        for (const auto& r : buyer_out[i]) seller_in[r.peer].push_back({i, r.units});
      for (std::size_t j = 0; j < sellers_.size(); ++j)
        for (const auto& r : seller_out[j]) buyer_in[r.peer].push_back({j, r.units});

      for (std::size_t i = 0; i < buyers_.size(); ++i) buyer_before[i] = buyers_[i].remaining();
      for (std::size_t j = 0; j < sellers_.size(); ++j) seller_before[j] = sellers_[j].remaining();

      // Assignment phase: a pair requested from both sides trades
      // min(f^B, f^S). Both endpoints see the same two messages.
      bool progressed = false;
      for (std::size_t i = 0; i < buyers_.size(); ++i) {
        for (const auto& r : buyer_out[i]) {
          const int theirs = requested_units(buyer_in[i], r.peer);
          if (theirs <= 0) continue;
          grant(i, r.peer, std::min(r.units, theirs), alloc);
          progressed = true;
        }
      }
      if (!progressed) throw Error("distributed allocation stalled with outstanding requests");
      if (observe) observe(alloc.iterations_used, alloc.total_units());

      auto ignore = [](std::size_t) {};
      for (std::size_t i = 0; i < buyers_.size(); ++i)
        if (buyers_[i].remaining() != buyer_before[i]) broadcast_buyer(i, ignore);
      for (std::size_t j = 0; j < sellers_.size(); ++j)
        if (sellers_[j].remaining() != seller_before[j]) broadcast_seller(j, ignore);
    }
    return alloc;
  }

  Allocation run_async(std::uint64_t seed, const IterationObserver& observe) {
    Allocation alloc;
    alloc.engine = to_string(Engine::Distributed);
    Rng rng(seed);

    // Agents are numbered buyers first, then sellers. A published request
    // list is valid until the agent or one of its neighbours changes state.
    const std::size_t m = buyers_.size();
    const std::size_t total = m + sellers_.size();
    std::vector<std::vector<Request>> published(total);
    std::vector<char> valid(total, 0);
    std::vector<std::size_t> order(total);
    for (std::size_t k = 0; k < total; ++k) order[k] = k;

    auto invalidate_buyer = [&](std::size_t i) { valid[i] = 0; };
    auto invalidate_seller = [&](std::size_t j) { valid[m + j] = 0; };

    for (;;) {
      for (std::size_t k = total; k > 1; --k) {
        const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(k) - 1));
        std::swap(order[k - 1], order[pick]);
      }
      bool progressed = false;
      for (std::size_t agent : order) {
        const bool is_buyer = agent < m;
        const std::size_t self = is_buyer ? agent : agent - m;
        for (;;) {
          Agent& me = is_buyer ? buyers_[self] : sellers_[self];
          published[agent] = me.compute_requests();
          valid[agent] = 1;
          std::optional<std::pair<std::size_t, int>> match;
          for (const auto& r : published[agent]) {
            const std::size_t other = is_buyer ? m + r.peer : r.peer;
            if (!valid[other]) continue;
            const int theirs = requested_units(published[other], self);
            if (theirs > 0) {
              match = {r.peer, std::min(r.units, theirs)};
              break;
            }
          }
          if (!match) break;
          const std::size_t buyer = is_buyer ? self : match->first;
          const std::size_t seller = is_buyer ? match->first : self;
          grant(buyer, seller, match->second, alloc);
          progressed = true;
          valid[buyer] = 0;
          valid[m + seller] = 0;
          broadcast_buyer(buyer, invalidate_seller);
          broadcast_seller(seller, invalidate_buyer);
        }
      }
      if (!progressed) break;
      ++alloc.iterations_used;
      if (observe) observe(alloc.iterations_used, alloc.total_units());
    }
    return alloc;
  }

 private:
  const MarketInstance& instance_;
  std::vector<Agent> buyers_;
  std::vector<Agent> sellers_;
};

}  // namespace

Allocation allocate_distributed(const MarketInstance& instance, const DeclarationProfile& decl, Schedule schedule,
                                std::uint64_t async_seed, const IterationObserver& observe) {
  require_coverage(instance, decl);
  Network net(instance, decl);
  return schedule == Schedule::SynchronousRounds ? net.run_synchronous(observe) : net.run_async(async_seed, observe);
}

}  // namespace d2d
