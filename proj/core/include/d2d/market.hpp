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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace d2d {

class Rng;

enum class Role { Buyer, Seller };

std::string to_string(Role role);

/// A participant's private type: demand and unit value for a buyer, supply
/// and unit cost for a seller.
struct UserType {
  Role role = Role::Buyer;
  int quantity = 0;
  int unit_price = 0;

  friend bool operator==(const UserType&, const UserType&) = default;
};

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Closed range of consecutive integers [lo, hi]; the unit gap is what makes
/// "adjacent" declarations well defined.
struct PriceRange {
  int lo = 0;
  int hi = 0;

  int size() const { return hi >= lo ? hi - lo + 1 : 0; }
  bool contains(int p) const { return p >= lo && p <= hi; }
  std::vector<int> values() const;

  friend bool operator==(const PriceRange&, const PriceRange&) = default;
};

/// Spatial market model. Defaults are the desk-scale variant of the
/// evaluation setup (1 km cell, 100 m range, values 5..10, costs 0..5,
/// quantities 1..4, even buyer/seller split).
struct MarketConfig {
  double cell_radius = 1000.0;     // R, metres
  double mean_user_count = 500.0;  // rho
  double comm_range = 100.0;       // L, metres
  PriceRange values{5, 10};
  PriceRange costs{0, 5};
  std::vector<int> quantities{1, 2, 3, 4};
  double buyer_probability = 0.5;

  /// Throws ConfigError. R must be > 0; L and rho may be 0 (empty graphs).
  void validate() const;

  friend bool operator==(const MarketConfig&, const MarketConfig&) = default;
};

struct Participant {
  int id = 0;
  UserType type;
  Point position;

  friend bool operator==(const Participant&, const Participant&) = default;
};

/// Buyer/seller index pair into a MarketInstance.
struct EdgeRef {
  std::size_t buyer = 0;
  std::size_t seller = 0;

  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
};

/// Bipartite trading graph for one round. Neighbour sets are stored as index
/// lists on both sides; instances built through from_edges() or
/// generate_market() are symmetric by construction, the raw constructor is
/// there so broken instances can be represented and diagnosed.
class MarketInstance {
 public:
  MarketInstance() = default;
  MarketInstance(std::vector<Participant> buyers, std::vector<Participant> sellers,
                 std::vector<std::vector<std::size_t>> buyer_neighbors,
                 std::vector<std::vector<std::size_t>> seller_neighbors);

  static MarketInstance from_edges(std::vector<Participant> buyers,
                                   std::vector<Participant> sellers,
                                   std::span<const EdgeRef> edges);

  /// Connects every buyer/seller pair at distance strictly below comm_range.
  static MarketInstance from_positions(std::vector<Participant> buyers,
                                       std::vector<Participant> sellers,
                                       double comm_range);

  const std::vector<Participant>& buyers() const { return buyers_; }
  const std::vector<Participant>& sellers() const { return sellers_; }

  /// S(i): seller indices adjacent to buyer index i, ascending.
  std::span<const std::size_t> sellers_of(std::size_t buyer) const { return buyer_neighbors_[buyer]; }
  /// B(j): buyer indices adjacent to seller index j, ascending.
  std::span<const std::size_t> buyers_of(std::size_t seller) const { return seller_neighbors_[seller]; }

  /// Edge list derived from the buyer-side neighbour sets, buyer-major.
  std::vector<EdgeRef> edges() const;
  std::size_t edge_count() const;
  std::size_t participant_count() const { return buyers_.size() + sellers_.size(); }

  std::optional<std::size_t> buyer_index(int id) const;
  std::optional<std::size_t> seller_index(int id) const;

  friend bool operator==(const MarketInstance& a, const MarketInstance& b) {
    return a.buyers_ == b.buyers_ && a.sellers_ == b.sellers_ &&
           a.buyer_neighbors_ == b.buyer_neighbors_ && a.seller_neighbors_ == b.seller_neighbors_;
  }

 private:
  std::vector<Participant> buyers_;
  std::vector<Participant> sellers_;
  std::vector<std::vector<std::size_t>> buyer_neighbors_;
  std::vector<std::vector<std::size_t>> seller_neighbors_;
  std::unordered_map<int, std::size_t> buyer_ids_;
  std::unordered_map<int, std::size_t> seller_ids_;
};

/// A reported (quantity, unit price) pair.
struct Declaration {
  int quantity = 0;
  int unit_price = 0;

  friend bool operator==(const Declaration&, const Declaration&) = default;
};

/// Declarations aligned with MarketInstance::buyers() / sellers().
struct DeclarationProfile {
  std::vector<Declaration> buyers;
  std::vector<Declaration> sellers;

  static DeclarationProfile truthful(const MarketInstance& instance);

  friend bool operator==(const DeclarationProfile&, const DeclarationProfile&) = default;
};

/// Throws InputError unless `decl` covers every participant of `instance`.
void require_coverage(const MarketInstance& instance, const DeclarationProfile& decl);

/// Declarations outside the configured grids, and sellers over-reporting
/// supply. Empty when the profile is admissible.
std::vector<std::string> check_declarations(const MarketInstance& instance,
                                            const DeclarationProfile& decl,
                                            const MarketConfig& config);

/// w_ij = v_i - c_j.
constexpr int edge_weight(int declared_value, int declared_cost) {
  return declared_value - declared_cost;
}

/// Draws one user's role and type. Position is drawn separately.
UserType sample_user_type(Rng& rng, const MarketConfig& config);

/// Uniform point in the open disc of radius R: x, y uniform on [-R, R],
/// rejected while x^2 + y^2 >= R^2.
Point sample_position(Rng& rng, double radius);

/// Random spatial market: Poisson(rho) users drawn in order, each as
/// (position, role, quantity, unit price). Ids count from 1 per role in
/// sampling order.
MarketInstance generate_market(const MarketConfig& config, std::uint64_t seed);

/// Same recipe with an explicit user count, drawing from `rng`.
MarketInstance generate_population(const MarketConfig& config, std::int64_t user_count, Rng& rng);

/// Structural invariants: unique ids per role, neighbour indices in range,
/// no duplicate neighbours, j in S(i) <=> i in B(j), non-negative quantities.
/// When `comm_range` is given, also checks that edges are exactly the pairs
/// closer than it. Each entry names the entity and the broken rule.
std::vector<std::string> validate_instance(const MarketInstance& instance,
                                           std::optional<double> comm_range = std::nullopt);

}  // namespace d2d
