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

#include "d2d/market.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "d2d/error.hpp"
#include "d2d/random.hpp"

namespace d2d {

std::string to_string(Role role) { return role == Role::Buyer ? "buyer" : "seller"; }

std::vector<int> PriceRange::values() const {
  std::vector<int> out;
  for (int p = lo; p <= hi; ++p) out.push_back(p);
  return out;
}

void MarketConfig::validate() const {
  if (!(cell_radius > 0.0) || !std::isfinite(cell_radius)) throw ConfigError("cell_radius must be > 0");
  if (!(comm_range >= 0.0) || !std::isfinite(comm_range)) throw ConfigError("comm_range must be >= 0");
  if (!(mean_user_count >= 0.0) || !std::isfinite(mean_user_count))
    throw ConfigError("mean_user_count must be >= 0");
  if (values.size() == 0) throw ConfigError("value set is empty");
  if (costs.size() == 0) throw ConfigError("cost set is empty");
  if (quantities.empty()) throw ConfigError("quantity set is empty");
  for (int q : quantities)
    if (q <= 0) throw ConfigError("quantity set must contain positive integers");
  std::set<int> distinct(quantities.begin(), quantities.end());
  if (distinct.size() != quantities.size()) throw ConfigError("quantity set has duplicates");
  if (!(buyer_probability >= 0.0 && buyer_probability <= 1.0))
    throw ConfigError("buyer_probability must be in [0, 1]");
}

MarketInstance::MarketInstance(std::vector<Participant> buyers, std::vector<Participant> sellers,
                               std::vector<std::vector<std::size_t>> buyer_neighbors,
                               std::vector<std::vector<std::size_t>> seller_neighbors)
    : buyers_(std::move(buyers)),
      sellers_(std::move(sellers)),
      buyer_neighbors_(std::move(buyer_neighbors)),
      seller_neighbors_(std::move(seller_neighbors)) {
  if (buyer_neighbors_.size() != buyers_.size() || seller_neighbors_.size() != sellers_.size())
    throw InputError("MarketInstance: neighbour lists must match participant counts");
  for (std::size_t i = 0; i < buyers_.size(); ++i) buyer_ids_.emplace(buyers_[i].id, i);
  for (std::size_t j = 0; j < sellers_.size(); ++j) seller_ids_.emplace(sellers_[j].id, j);
}

MarketInstance MarketInstance::from_edges(std::vector<Participant> buyers,
                                          std::vector<Participant> sellers,
                                          std::span<const EdgeRef> edges) {
  std::vector<std::vector<std::size_t>> bn(buyers.size());
  std::vector<std::vector<std::size_t>> sn(sellers.size());
  for (const auto& e : edges) {
    if (e.buyer >= buyers.size() || e.seller >= sellers.size())
      throw InputError("edge references a participant that does not exist");
    bn[e.buyer].push_back(e.seller);
    sn[e.seller].push_back(e.buyer);
  }
  for (auto& v : bn) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  for (auto& v : sn) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return MarketInstance(std::move(buyers), std::move(sellers), std::move(bn), std::move(sn));
}

namespace {

bool within_range(const Point& a, const Point& b, double range) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy < range * range;
}

}  // namespace

MarketInstance MarketInstance::from_positions(std::vector<Participant> buyers,
                                              std::vector<Participant> sellers,
                                              double comm_range) {
  std::vector<EdgeRef> edges;
  if (comm_range > 0.0 && !buyers.empty() && !sellers.empty()) {
    // Bucket sellers into cells of side L; only the 3x3 block around a buyer
    // can hold sellers closer than L.
    auto cell_of = [comm_range](const Point& p) {
      return std::pair<long long, long long>{static_cast<long long>(std::floor(p.x / comm_range)),
                                             static_cast<long long>(std::floor(p.y / comm_range))};
    };
    std::map<std::pair<long long, long long>, std::vector<std::size_t>> cells;
    for (std::size_t j = 0; j < sellers.size(); ++j) cells[cell_of(sellers[j].position)].push_back(j);
    std::vector<std::size_t> found;
    for (std::size_t i = 0; i < buyers.size(); ++i) {
      const auto [cx, cy] = cell_of(buyers[i].position);
      found.clear();
      for (long long dx = -1; dx <= 1; ++dx) {
        for (long long dy = -1; dy <= 1; ++dy) {
          auto it = cells.find({cx + dx, cy + dy});
          if (it == cells.end()) continue;
          for (std::size_t j : it->second)
            if (within_range(buyers[i].position, sellers[j].position, comm_range)) found.push_back(j);
        }
      }
      std::sort(found.begin(), found.end());
      for (std::size_t j : found) edges.push_back({i, j});
    }
  }
  return from_edges(std::move(buyers), std::move(sellers), edges);
}

std::vector<EdgeRef> MarketInstance::edges() const {
  std::vector<EdgeRef> out;
  out.reserve(edge_count());
  for (std::size_t i = 0; i < buyer_neighbors_.size(); ++i)
    for (std::size_t j : buyer_neighbors_[i]) out.push_back({i, j});
  return out;
}

std::size_t MarketInstance::edge_count() const {
  std::size_t n = 0;
  for (const auto& v : buyer_neighbors_) n += v.size();
  return n;
}

std::optional<std::size_t> MarketInstance::buyer_index(int id) const {
  auto it = buyer_ids_.find(id);
  if (it == buyer_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> MarketInstance::seller_index(int id) const {
  auto it = seller_ids_.find(id);
  if (it == seller_ids_.end()) return std::nullopt;
  return it->second;
}

DeclarationProfile DeclarationProfile::truthful(const MarketInstance& instance) {
  DeclarationProfile d;
  d.buyers.reserve(instance.buyers().size());
  d.sellers.reserve(instance.sellers().size());
  for (const auto& b : instance.buyers()) d.buyers.push_back({b.type.quantity, b.type.unit_price});
  for (const auto& s : instance.sellers()) d.sellers.push_back({s.type.quantity, s.type.unit_price});
  return d;
}

void require_coverage(const MarketInstance& instance, const DeclarationProfile& decl) {
  if (decl.buyers.size() != instance.buyers().size()) {
    std::ostringstream os;
    os << "declarations cover " << decl.buyers.size() << " of " << instance.buyers().size() << " buyers";
    throw InputError(os.str());
  }
  if (decl.sellers.size() != instance.sellers().size()) {
    std::ostringstream os;
    os << "declarations cover " << decl.sellers.size() << " of " << instance.sellers().size() << " sellers";
    throw InputError(os.str());
  }
  for (const auto& d : decl.buyers)
    if (d.quantity < 0) throw InputError("declared buyer quantity is negative");
  for (const auto& d : decl.sellers)
    if (d.quantity < 0) throw InputError("declared seller quantity is negative");
}

std::vector<std::string> check_declarations(const MarketInstance& instance,
                                            const DeclarationProfile& decl,
                                            const MarketConfig& config) {
  std::vector<std::string> out;
  if (decl.buyers.size() != instance.buyers().size() || decl.sellers.size() != instance.sellers().size()) {
    out.emplace_back("declaration profile does not cover every participant");
    return out;
  }
  const int max_q = *std::max_element(config.quantities.begin(), config.quantities.end());
  for (std::size_t i = 0; i < decl.buyers.size(); ++i) {
    const auto& d = decl.buyers[i];
    const int id = instance.buyers()[i].id;
    if (!config.values.contains(d.unit_price))
      out.push_back("buyer " + std::to_string(id) + ": declared value outside the value set");
    if (d.quantity < 0 || d.quantity > max_q)
      out.push_back("buyer " + std::to_string(id) + ": declared demand outside 0.." + std::to_string(max_q));
  }
  for (std::size_t j = 0; j < decl.sellers.size(); ++j) {
    const auto& d = decl.sellers[j];
    const int id = instance.sellers()[j].id;
    if (!config.costs.contains(d.unit_price))
      out.push_back("seller " + std::to_string(id) + ": declared cost outside the cost set");
    if (d.quantity < 0 || d.quantity > max_q)
      out.push_back("seller " + std::to_string(id) + ": declared supply outside 0.." + std::to_string(max_q));
    if (d.quantity > instance.sellers()[j].type.quantity)
      out.push_back("seller " + std::to_string(id) + ": declared supply exceeds true supply");
  }
  return out;
}

UserType sample_user_type(Rng& rng, const MarketConfig& config) {
  UserType t;
  t.role = rng.bernoulli(config.buyer_probability) ? Role::Buyer : Role::Seller;
  const auto qi = rng.uniform_int(0, static_cast<std::int64_t>(config.quantities.size()) - 1);
  t.quantity = config.quantities[static_cast<std::size_t>(qi)];
  const PriceRange& prices = t.role == Role::Buyer ? config.values : config.costs;
  t.unit_price = static_cast<int>(rng.uniform_int(prices.lo, prices.hi));
  return t;
}

Point sample_position(Rng& rng, double radius) {
  for (;;) {
    const double x = rng.uniform(-radius, radius);
    const double y = rng.uniform(-radius, radius);
    if (x * x + y * y < radius * radius) return {x, y};
  }
}

MarketInstance generate_population(const MarketConfig& config, std::int64_t user_count, Rng& rng) {
  config.validate();
  std::vector<Participant> buyers;
  std::vector<Participant> sellers;
  for (std::int64_t u = 0; u < user_count; ++u) {
    Participant p;
    p.position = sample_position(rng, config.cell_radius);
    p.type = sample_user_type(rng, config);
    if (p.type.role == Role::Buyer) {
      p.id = static_cast<int>(buyers.size()) + 1;
      buyers.push_back(p);
    } else {
      p.id = static_cast<int>(sellers.size()) + 1;
      sellers.push_back(p);
    }
  }
  return MarketInstance::from_positions(std::move(buyers), std::move(sellers), config.comm_range);
}

MarketInstance generate_market(const MarketConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  const auto count = rng.poisson(config.mean_user_count);
  return generate_population(config, count, rng);
}

std::vector<std::string> validate_instance(const MarketInstance& instance, std::optional<double> comm_range) {
  std::vector<std::string> out;
  const auto& buyers = instance.buyers();
  const auto& sellers = instance.sellers();

  auto check_ids = [&out](const std::vector<Participant>& ps, Role role) {
    std::set<int> seen;
    for (const auto& p : ps) {
      if (!seen.insert(p.id).second)
        out.push_back(to_string(role) + " " + std::to_string(p.id) + ": duplicate id");
      if (p.type.quantity < 0)
        out.push_back(to_string(role) + " " + std::to_string(p.id) + ": negative quantity");
      if (p.type.role != role)
        out.push_back(to_string(role) + " " + std::to_string(p.id) + ": role field disagrees with side");
    }
  };
  check_ids(buyers, Role::Buyer);
  check_ids(sellers, Role::Seller);

  std::set<std::pair<std::size_t, std::size_t>> from_buyers;
  std::set<std::pair<std::size_t, std::size_t>> from_sellers;
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    std::set<std::size_t> local;
    for (std::size_t j : instance.sellers_of(i)) {
      if (j >= sellers.size()) {
        out.push_back("buyer " + std::to_string(buyers[i].id) + ": neighbour index " + std::to_string(j) +
                      " out of range");
        continue;
      }
      if (!local.insert(j).second)
        out.push_back("buyer " + std::to_string(buyers[i].id) + ": seller " + std::to_string(sellers[j].id) +
                      " listed twice");
      from_buyers.insert({i, j});
    }
  }
  for (std::size_t j = 0; j < sellers.size(); ++j) {
    std::set<std::size_t> local;
    for (std::size_t i : instance.buyers_of(j)) {
      if (i >= buyers.size()) {
        out.push_back("seller " + std::to_string(sellers[j].id) + ": neighbour index " + std::to_string(i) +
                      " out of range");
        continue;
      }
      if (!local.insert(i).second)
        out.push_back("seller " + std::to_string(sellers[j].id) + ": buyer " + std::to_string(buyers[i].id) +
                      " listed twice");
      from_sellers.insert({i, j});
    }
  }
  for (const auto& [i, j] : from_buyers)
    if (!from_sellers.contains({i, j}))
      out.push_back("asymmetric edge: seller " + std::to_string(sellers[j].id) + " in S(buyer " +
                    std::to_string(buyers[i].id) + ") but buyer not in B(seller)");
  for (const auto& [i, j] : from_sellers)
    if (!from_buyers.contains({i, j}))
      out.push_back("asymmetric edge: buyer " + std::to_string(buyers[i].id) + " in B(seller " +
                    std::to_string(sellers[j].id) + ") but seller not in S(buyer)");

  if (comm_range) {
    for (std::size_t i = 0; i < buyers.size(); ++i) {
      for (std::size_t j = 0; j < sellers.size(); ++j) {
        const bool close = within_range(buyers[i].position, sellers[j].position, *comm_range);
        const bool linked = from_buyers.contains({i, j});
        if (close != linked)
          out.push_back("buyer " + std::to_string(buyers[i].id) + " / seller " + std::to_string(sellers[j].id) +
                        (close ? ": within range but not connected" : ": connected but out of range"));
      }
    }
  }
  return out;
}

}  // namespace d2d
