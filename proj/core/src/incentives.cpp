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

#include "d2d/incentives.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "d2d/error.hpp"
#include "d2d/random.hpp"

namespace d2d {

std::string to_string(Population population) {
  switch (population) {
    case Population::Spatial: return "spatial";
    case Population::Micro: return "micro";
    case Population::Fixed: return "fixed";
  }
  return "unknown";
}

Population population_from_string(const std::string& name) {
  if (name == "spatial") return Population::Spatial;
  if (name == "micro") return Population::Micro;
  if (name == "fixed") return Population::Fixed;
  throw ConfigError("unknown population '" + name + "' (expected spatial|micro|fixed)");
}

std::string to_string(Estimator estimator) {
  return estimator == Estimator::MonteCarlo ? "montecarlo" : "exact";
}

Estimator estimator_from_string(const std::string& name) {
  if (name == "montecarlo") return Estimator::MonteCarlo;
  if (name == "exact") return Estimator::ExactEnumeration;
  throw ConfigError("unknown estimator '" + name + "' (expected montecarlo|exact)");
}

std::string to_string(IcScope scope) { return scope == IcScope::AdjacentOnly ? "adjacent" : "full"; }

IcScope ic_scope_from_string(const std::string& name) {
  if (name == "adjacent") return IcScope::AdjacentOnly;
  if (name == "full") return IcScope::FullGrid;
  throw ConfigError("unknown IC scope '" + name + "' (expected adjacent|full)");
}

void Environment::validate() const {
  market.validate();
  if (population == Population::Micro) {
    if (micro.buyers < 1 || micro.sellers < 1) throw ConfigError("micro environment needs >= 1 buyer and seller");
    if (!(micro.edge_probability >= 0.0 && micro.edge_probability <= 1.0))
      throw ConfigError("micro edge_probability must be in [0, 1]");
  }
  if (population == Population::Fixed) {
    if (!fixed_instance) throw ConfigError("fixed population needs an instance");
    if (fixed_instance->buyers().empty() || fixed_instance->sellers().empty())
      throw ConfigError("fixed instance needs at least one buyer and one seller");
  }
}

// ---------------------------------------------------------------------------
// ExpectedTables

ExpectedTables::ExpectedTables(std::vector<int> quantities, PriceRange values, PriceRange costs)
    : quantities_(std::move(quantities)), values_(values), costs_(costs) {
  std::sort(quantities_.begin(), quantities_.end());
  quantities_.erase(std::unique(quantities_.begin(), quantities_.end()), quantities_.end());
  if (quantities_.empty() || values_.size() == 0 || costs_.size() == 0)
    throw InputError("ExpectedTables: empty type grid");
  const std::size_t nq = quantities_.size();
  const auto nv = static_cast<std::size_t>(values_.size());
  const auto nc = static_cast<std::size_t>(costs_.size());
  buyer_utility_.assign(nq * nv * nq * nv, 0.0);
  seller_utility_.assign(nq * nc * nq * nc, 0.0);
  buyer_quantity_.assign(nq * nv, 0.0);
  seller_quantity_.assign(nq * nc, 0.0);
}

std::size_t ExpectedTables::q_index(int q) const {
  auto it = std::lower_bound(quantities_.begin(), quantities_.end(), q);
  if (it == quantities_.end() || *it != q)
    throw CalibrationError("quantity " + std::to_string(q) + " is outside the table grid");
  return static_cast<std::size_t>(it - quantities_.begin());
}

std::size_t ExpectedTables::v_index(int v) const {
  if (!values_.contains(v)) throw CalibrationError("value " + std::to_string(v) + " is outside the table grid");
  return static_cast<std::size_t>(v - values_.lo);
}

std::size_t ExpectedTables::c_index(int c) const {
  if (!costs_.contains(c)) throw CalibrationError("cost " + std::to_string(c) + " is outside the table grid");
  return static_cast<std::size_t>(c - costs_.lo);
}

std::size_t ExpectedTables::buyer_slot(int a, int v, int ah, int vh) const {
  const std::size_t nq = quantities_.size();
  const auto nv = static_cast<std::size_t>(values_.size());
  return ((q_index(a) * nv + v_index(v)) * nq + q_index(ah)) * nv + v_index(vh);
}

std::size_t ExpectedTables::seller_slot(int b, int c, int bh, int ch) const {
  if (bh > b) throw CalibrationError("seller tables do not cover supply over-reporting");
  const std::size_t nq = quantities_.size();
  const auto nc = static_cast<std::size_t>(costs_.size());
  return ((q_index(b) * nc + c_index(c)) * nq + q_index(bh)) * nc + c_index(ch);
}

double ExpectedTables::buyer_utility(int a, int v, int ah, int vh) const { return buyer_utility_[buyer_slot(a, v, ah, vh)]; }
double ExpectedTables::seller_utility(int b, int c, int bh, int ch) const { return seller_utility_[seller_slot(b, c, bh, ch)]; }

double ExpectedTables::buyer_quantity(int ah, int vh) const {
  return buyer_quantity_[q_index(ah) * static_cast<std::size_t>(values_.size()) + v_index(vh)];
}

double ExpectedTables::seller_quantity(int bh, int ch) const {
  return seller_quantity_[q_index(bh) * static_cast<std::size_t>(costs_.size()) + c_index(ch)];
}

void ExpectedTables::set_buyer_utility(int a, int v, int ah, int vh, double u) { buyer_utility_[buyer_slot(a, v, ah, vh)] = u; }
void ExpectedTables::set_seller_utility(int b, int c, int bh, int ch, double u) { seller_utility_[seller_slot(b, c, bh, ch)] = u; }

void ExpectedTables::set_buyer_quantity(int ah, int vh, double q) {
  if (!(q >= 0.0)) throw InputError("expected quantity must be non-negative");
  buyer_quantity_[q_index(ah) * static_cast<std::size_t>(values_.size()) + v_index(vh)] = q;
}

void ExpectedTables::set_seller_quantity(int bh, int ch, double q) {
  if (!(q >= 0.0)) throw InputError("expected quantity must be non-negative");
  seller_quantity_[q_index(bh) * static_cast<std::size_t>(costs_.size()) + c_index(ch)] = q;
}

// ---------------------------------------------------------------------------
// Estimation

namespace {

// Running weighted sums for one table build; dense, indexed like the grid.
class Accumulator {
 public:
  Accumulator(const Environment& env)
      : engine_(env.engine),
        quantities_(env.market.quantities),
        values_(env.market.values.values()),
        costs_(env.market.costs.values()) {
    std::sort(quantities_.begin(), quantities_.end());
    const std::size_t nq = quantities_.size();
    buyer_u_.assign(nq * values_.size() * nq * values_.size(), 0.0);
    seller_u_.assign(nq * costs_.size() * nq * costs_.size(), 0.0);
    buyer_q_.assign(nq * values_.size(), 0.0);
    seller_q_.assign(nq * costs_.size(), 0.0);
  }

  // Tagged buyer is buyers()[0]; `decl` is everybody else's truthful profile.
  void add_buyer_outcome(const MarketInstance& instance, DeclarationProfile decl, double weight) {
    const int tagged = instance.buyers().front().id;
    const std::size_t nq = quantities_.size();
    const std::size_t nv = values_.size();
    for (std::size_t ahi = 0; ahi < nq; ++ahi) {
      for (std::size_t vhi = 0; vhi < nv; ++vhi) {
        const int vh = values_[vhi];
        decl.buyers.front() = {quantities_[ahi], vh};
        const auto alloc = allocate(instance, decl, engine_);
        long long received = 0;
        double paid = 0.0;
        for (auto it = alloc.flows.lower_bound({tagged, std::numeric_limits<int>::min()});
             it != alloc.flows.end() && it->first.first == tagged; ++it) {
          const int c = decl.sellers[*instance.seller_index(it->first.second)].unit_price;
          received += it->second;
          paid += it->second * basic_price(vh, c);
        }
        buyer_q_[ahi * nv + vhi] += weight * static_cast<double>(received);
        for (std::size_t ai = 0; ai < nq; ++ai) {
          const double useful = static_cast<double>(std::min<long long>(quantities_[ai], received));
          for (std::size_t vi = 0; vi < nv; ++vi)
            buyer_u_[((ai * nv + vi) * nq + ahi) * nv + vhi] += weight * (values_[vi] * useful - paid);
        }
      }
    }
  }

  // Tagged seller is sellers()[0].
  void add_seller_outcome(const MarketInstance& instance, DeclarationProfile decl, double weight) {
    const int tagged = instance.sellers().front().id;
    const std::size_t nq = quantities_.size();
    const std::size_t nc = costs_.size();
    for (std::size_t bhi = 0; bhi < nq; ++bhi) {
      for (std::size_t chi = 0; chi < nc; ++chi) {
        const int ch = costs_[chi];
        decl.sellers.front() = {quantities_[bhi], ch};
        const auto alloc = allocate(instance, decl, engine_);
        long long sold = 0;
        double revenue = 0.0;
        for (const auto& [pair, f] : alloc.flows) {
          if (pair.second != tagged) continue;
          const int v = decl.buyers[*instance.buyer_index(pair.first)].unit_price;
          sold += f;
          revenue += f * basic_price(v, ch);
        }
        seller_q_[bhi * nc + chi] += weight * static_cast<double>(sold);
        for (std::size_t bi = bhi; bi < nq; ++bi)
          for (std::size_t ci = 0; ci < nc; ++ci)
            seller_u_[((bi * nc + ci) * nq + bhi) * nc + chi] +=
                weight * (revenue - costs_[ci] * static_cast<double>(sold));
      }
    }
  }

  void write(ExpectedTables& out, double buyer_weight, double seller_weight) const {
    const std::size_t nq = quantities_.size();
    const std::size_t nv = values_.size();
    const std::size_t nc = costs_.size();
    for (std::size_t ai = 0; ai < nq; ++ai) {
      for (std::size_t vi = 0; vi < nv; ++vi) {
        if (buyer_weight > 0)
          out.set_buyer_quantity(quantities_[ai], values_[vi], buyer_q_[ai * nv + vi] / buyer_weight);
        for (std::size_t ahi = 0; ahi < nq; ++ahi)
          for (std::size_t vhi = 0; vhi < nv; ++vhi)
            if (buyer_weight > 0)
              out.set_buyer_utility(quantities_[ai], values_[vi], quantities_[ahi], values_[vhi],
                                    buyer_u_[((ai * nv + vi) * nq + ahi) * nv + vhi] / buyer_weight);
      }
      for (std::size_t ci = 0; ci < nc; ++ci) {
        if (seller_weight > 0)
          out.set_seller_quantity(quantities_[ai], costs_[ci], seller_q_[ai * nc + ci] / seller_weight);
        for (std::size_t bhi = 0; bhi <= ai; ++bhi)
          for (std::size_t chi = 0; chi < nc; ++chi)
            if (seller_weight > 0)
              out.set_seller_utility(quantities_[ai], costs_[ci], quantities_[bhi], costs_[chi],
                                     seller_u_[((ai * nc + ci) * nq + bhi) * nc + chi] / seller_weight);
      }
    }
  }

 private:
  EngineSpec engine_;
  std::vector<int> quantities_;
  std::vector<int> values_;
  std::vector<int> costs_;
  std::vector<double> buyer_u_;
  std::vector<double> seller_u_;
  std::vector<double> buyer_q_;
  std::vector<double> seller_q_;
};

Participant make_participant(int id, Role role, int quantity, int price) {
  return Participant{id, UserType{role, quantity, price}, Point{}};
}

// Micro instance from explicit edge bits and types. Bit (i * N + j) links
// buyer i and seller j.
MarketInstance micro_instance(const std::vector<UserType>& buyer_types, const std::vector<UserType>& seller_types,
                              std::uint64_t edge_bits) {
  std::vector<Participant> buyers;
  std::vector<Participant> sellers;
  for (std::size_t i = 0; i < buyer_types.size(); ++i)
    buyers.push_back(make_participant(static_cast<int>(i) + 1, Role::Buyer, buyer_types[i].quantity,
                                      buyer_types[i].unit_price));
  for (std::size_t j = 0; j < seller_types.size(); ++j)
    sellers.push_back(make_participant(static_cast<int>(j) + 1, Role::Seller, seller_types[j].quantity,
                                       seller_types[j].unit_price));
  std::vector<EdgeRef> edges;
  const std::size_t n = seller_types.size();
  for (std::size_t i = 0; i < buyer_types.size(); ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((edge_bits >> (i * n + j)) & 1ULL) edges.push_back({i, j});
  return MarketInstance::from_edges(std::move(buyers), std::move(sellers), edges);
}

MarketInstance sample_micro(const Environment& env, Rng& rng) {
  const auto& m = env.market;
  std::vector<UserType> bt(static_cast<std::size_t>(env.micro.buyers));
  std::vector<UserType> st(static_cast<std::size_t>(env.micro.sellers));
  for (auto& t : bt) {
    t.role = Role::Buyer;
    t.quantity = m.quantities[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m.quantities.size()) - 1))];
    t.unit_price = static_cast<int>(rng.uniform_int(m.values.lo, m.values.hi));
  }
  for (auto& t : st) {
    t.role = Role::Seller;
    t.quantity = m.quantities[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m.quantities.size()) - 1))];
    t.unit_price = static_cast<int>(rng.uniform_int(m.costs.lo, m.costs.hi));
  }
  std::uint64_t bits = 0;
  const std::size_t pairs = bt.size() * st.size();
  for (std::size_t k = 0; k < pairs; ++k)
    if (rng.bernoulli(env.micro.edge_probability)) bits |= (1ULL << k);
  return micro_instance(bt, st, bits);
}

// Adds a user of `role` at a uniform position when the sample has none.
MarketInstance ensure_role(MarketInstance instance, const MarketConfig& config, Role role, Rng& rng) {
  const bool missing = role == Role::Buyer ? instance.buyers().empty() : instance.sellers().empty();
  if (!missing) return instance;
  auto buyers = instance.buyers();
  auto sellers = instance.sellers();
  Participant p;
  p.id = 1;
  p.position = sample_position(rng, config.cell_radius);
  p.type.role = role;
  p.type.quantity = config.quantities.front();
  p.type.unit_price = role == Role::Buyer ? config.values.lo : config.costs.lo;
  (role == Role::Buyer ? buyers : sellers).push_back(p);
  return MarketInstance::from_positions(std::move(buyers), std::move(sellers), config.comm_range);
}

// Visits every micro outcome with the tagged user pinned at index 0 of
// `role`. Weight = P(edges) * P(other users' types).
template <typename Visit>
void enumerate_micro(const Environment& env, Role role, Visit&& visit) {
  const auto& m = env.market;
  const std::size_t nb = static_cast<std::size_t>(env.micro.buyers);
  const std::size_t ns = static_cast<std::size_t>(env.micro.sellers);
  const std::size_t pairs = nb * ns;
  if (pairs > 20) throw InputError("micro environment too large to enumerate (buyers * sellers > 20)");

  std::vector<UserType> buyer_choices;
  std::vector<UserType> seller_choices;
  for (int q : m.quantities) {
    for (int v = m.values.lo; v <= m.values.hi; ++v) buyer_choices.push_back({Role::Buyer, q, v});
    for (int c = m.costs.lo; c <= m.costs.hi; ++c) seller_choices.push_back({Role::Seller, q, c});
  }
  const double pb = 1.0 / static_cast<double>(buyer_choices.size());
  const double ps = 1.0 / static_cast<double>(seller_choices.size());

  // Free slots: every user except the tagged one.
  struct Slot {
    bool buyer;
    std::size_t index;
  };
  std::vector<Slot> slots;
  for (std::size_t i = (role == Role::Buyer ? 1 : 0); i < nb; ++i) slots.push_back({true, i});
  for (std::size_t j = (role == Role::Seller ? 1 : 0); j < ns; ++j) slots.push_back({false, j});

  std::vector<UserType> bt(nb, buyer_choices.front());
  std::vector<UserType> st(ns, seller_choices.front());
  std::vector<std::size_t> digit(slots.size(), 0);
  double type_weight = 1.0;
  for (const auto& s : slots) type_weight *= s.buyer ? pb : ps;

  const double q = env.micro.edge_probability;
  for (;;) {
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (slots[k].buyer)
        bt[slots[k].index] = buyer_choices[digit[k]];
      else
        st[slots[k].index] = seller_choices[digit[k]];
    }
    for (std::uint64_t bits = 0; bits < (1ULL << pairs); ++bits) {
      const auto present = static_cast<int>(std::popcount(bits));
      const double edge_weight_p =
          std::pow(q, present) * std::pow(1.0 - q, static_cast<int>(pairs) - present);
      if (edge_weight_p == 0.0) continue;
      visit(micro_instance(bt, st, bits), edge_weight_p * type_weight);
    }
    std::size_t k = 0;
    for (; k < slots.size(); ++k) {
      const std::size_t radix = slots[k].buyer ? buyer_choices.size() : seller_choices.size();
      if (++digit[k] < radix) break;
      digit[k] = 0;
    }
    if (k == slots.size()) break;
  }
}

}  // namespace

std::size_t enumeration_size(const Environment& env, Role role) {
  if (env.population == Population::Fixed) return 1;
  if (env.population != Population::Micro) return 0;
  const auto& m = env.market;
  const std::size_t nb = static_cast<std::size_t>(env.micro.buyers);
  const std::size_t ns = static_cast<std::size_t>(env.micro.sellers);
  const std::size_t bchoices = m.quantities.size() * static_cast<std::size_t>(m.values.size());
  const std::size_t schoices = m.quantities.size() * static_cast<std::size_t>(m.costs.size());
  std::size_t n = std::size_t{1} << (nb * ns);
  for (std::size_t i = (role == Role::Buyer ? 1 : 0); i < nb; ++i) n *= bchoices;
  for (std::size_t j = (role == Role::Seller ? 1 : 0); j < ns; ++j) n *= schoices;
  return n;
}

ExpectedTables estimate_tables(const Environment& env, const EstimateOptions& options) {
  env.validate();
  if (options.samples == 0) throw InputError("estimate_tables: samples must be > 0");
  ExpectedTables out(env.market.quantities, env.market.values, env.market.costs);
  out.estimator = options.estimator;
  out.seed = options.seed;
  Accumulator acc(env);

  if (options.estimator == Estimator::ExactEnumeration) {
    if (env.population == Population::Spatial)
      throw InputError("exact enumeration needs a micro or fixed population");
    double bw = 0.0;
    double sw = 0.0;
    if (env.population == Population::Fixed) {
      const auto& inst = *env.fixed_instance;
      acc.add_buyer_outcome(inst, DeclarationProfile::truthful(inst), 1.0);
      acc.add_seller_outcome(inst, DeclarationProfile::truthful(inst), 1.0);
      bw = sw = 1.0;
    } else {
      enumerate_micro(env, Role::Buyer, [&](const MarketInstance& inst, double w) {
        acc.add_buyer_outcome(inst, DeclarationProfile::truthful(inst), w);
        bw += w;
      });
      enumerate_micro(env, Role::Seller, [&](const MarketInstance& inst, double w) {
        acc.add_seller_outcome(inst, DeclarationProfile::truthful(inst), w);
        sw += w;
      });
    }
    acc.write(out, bw, sw);
    out.sample_count = enumeration_size(env, Role::Buyer) + enumeration_size(env, Role::Seller);
  } else {
    for (std::size_t s = 0; s < options.samples; ++s) {
      Rng rng(derive_seed(options.seed, 0x7461626cULL, s));
      MarketInstance inst;
      switch (env.population) {
        case Population::Spatial:
          inst = generate_population(env.market, rng.poisson(env.market.mean_user_count), rng);
          inst = ensure_role(std::move(inst), env.market, Role::Buyer, rng);
          inst = ensure_role(std::move(inst), env.market, Role::Seller, rng);
          break;
        case Population::Micro: inst = sample_micro(env, rng); break;
        case Population::Fixed: inst = *env.fixed_instance; break;
      }
      const auto decl = DeclarationProfile::truthful(inst);
      acc.add_buyer_outcome(inst, decl, 1.0);
      acc.add_seller_outcome(inst, decl, 1.0);
    }
    const auto n = static_cast<double>(options.samples);
    acc.write(out, n, n);
    out.sample_count = options.samples;
  }
  if (options.isotonize) isotonize_quantities(out);
  return out;
}

// ---------------------------------------------------------------------------
// Isotonic regression

namespace {

// Least-squares non-decreasing fit, equal weights.
void pava_increasing(std::vector<double>& y) {
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (double v : y) {
    blocks.push_back({v, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() > blocks.back().mean()) {
      blocks[blocks.size() - 2].sum += blocks.back().sum;
      blocks[blocks.size() - 2].count += blocks.back().count;
      blocks.pop_back();
    }
  }
  std::size_t k = 0;
  for (const auto& b : blocks)
    for (std::size_t c = 0; c < b.count; ++c) y[k++] = b.mean();
}

template <typename Get, typename Set>
bool isotonize_line(std::size_t n, bool increasing, Get get, Set set) {
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = get(increasing ? k : n - 1 - k);
  bool monotone = true;
  for (std::size_t k = 1; k < n; ++k)
    if (y[k] < y[k - 1]) monotone = false;
  if (monotone) return false;
  pava_increasing(y);
  for (std::size_t k = 0; k < n; ++k) set(increasing ? k : n - 1 - k, y[k]);
  return true;
}

}  // namespace

void isotonize_quantities(ExpectedTables& t) {
  const auto& qs = t.quantities();
  const auto vs = t.values().values();
  const auto cs = t.costs().values();
  for (int pass = 0; pass < 100; ++pass) {
    bool changed = false;
    for (int q : qs) {
      changed |= isotonize_line(
          vs.size(), true, [&](std::size_t k) { return t.buyer_quantity(q, vs[k]); },
          [&](std::size_t k, double x) { t.set_buyer_quantity(q, vs[k], x); });
      changed |= isotonize_line(
          cs.size(), false, [&](std::size_t k) { return t.seller_quantity(q, cs[k]); },
          [&](std::size_t k, double x) { t.set_seller_quantity(q, cs[k], x); });
    }
    for (int v : vs)
      changed |= isotonize_line(
          qs.size(), true, [&](std::size_t k) { return t.buyer_quantity(qs[k], v); },
          [&](std::size_t k, double x) { t.set_buyer_quantity(qs[k], v, x); });
    for (int c : cs)
      changed |= isotonize_line(
          qs.size(), true, [&](std::size_t k) { return t.seller_quantity(qs[k], c); },
          [&](std::size_t k, double x) { t.set_seller_quantity(qs[k], c, x); });
    if (!changed) break;
  }
  t.isotonized = true;
}

// ---------------------------------------------------------------------------
// Progression check and adjacent-IC payment search

double check_arithmetic_progression(const ExpectedTables& t) {
  double worst = 0.0;
  const auto& qs = t.quantities();
  const auto values = t.values();
  const auto costs = t.costs();
  for (int a : qs) {
    for (int ah : qs) {
      if (ah > a) continue;  // over-reported demand caps useful units at a
      for (int v = values.lo + 1; v <= values.hi; ++v)
        for (int vh = values.lo; vh <= values.hi; ++vh)
          worst = std::max(worst, std::abs(t.buyer_utility(a, v, ah, vh) - t.buyer_utility(a, v - 1, ah, vh) -
                                           t.buyer_quantity(ah, vh)));
    }
  }
  for (int b : qs) {
    for (int bh : qs) {
      if (bh > b) continue;
      for (int c = costs.lo + 1; c <= costs.hi; ++c)
        for (int ch = costs.lo; ch <= costs.hi; ++ch)
          worst = std::max(worst, std::abs(t.seller_utility(b, c, bh, ch) - t.seller_utility(b, c - 1, bh, ch) +
                                           t.seller_quantity(bh, ch)));
    }
  }
  return worst;
}

std::vector<double> adjacent_ic_payments(const std::vector<std::vector<double>>& utility,
                                         const std::function<void(std::size_t, double)>& on_raise) {
  const std::size_t n = utility.size();
  for (const auto& row : utility)
    if (row.size() != n) throw InputError("adjacent_ic_payments: utility matrix must be square");
  std::vector<double> pay(n, 0.0);
  if (n < 2) return pay;

  // corrected[t][d] = utility[t][d] + pay[d]
  auto corrected = [&](std::size_t t, std::size_t d) { return utility[t][d] + pay[d]; };
  auto best_adjacent = [&](std::size_t t) {
    double best = -std::numeric_limits<double>::infinity();
    if (t + 1 < n) best = std::max(best, corrected(t, t + 1));
    if (t > 0) best = std::max(best, corrected(t, t - 1));
    return best;
  };
  auto raise = [&](std::size_t d, double delta) {
    pay[d] += delta;
    if (on_raise) on_raise(d, delta);
  };

  std::size_t tau = 0;
  while (tau < n && !(best_adjacent(tau) > corrected(tau, tau))) ++tau;

  for (; tau < n; ++tau) {
    const double best = best_adjacent(tau);
    if (!(best > corrected(tau, tau))) continue;
    raise(tau, best - corrected(tau, tau));
    // Cascade: a lower type may now prefer declaring one step up.
    for (std::size_t v = tau; v-- > 0;) {
      if (!(corrected(v, v) < corrected(v, v + 1))) break;
      raise(v, corrected(v, v + 1) - corrected(v, v));
    }
  }
  return pay;
}

CorrectionTable compute_corrections(const ExpectedTables& t, const CalibrationOptions& options) {
  const auto& qs = t.quantities();
  const auto vs = t.values().values();
  const auto cs = t.costs().values();
  const double tol = options.monotonicity_tolerance;

  std::vector<std::string> cells;
  auto flag = [&cells](const std::string& what) { cells.push_back(what); };
  for (std::size_t a = 0; a < qs.size(); ++a) {
    for (std::size_t k = 0; k + 1 < vs.size(); ++k) {
      const double lo = t.buyer_quantity(qs[a], vs[k]);
      const double hi = t.buyer_quantity(qs[a], vs[k + 1]);
      if (lo - hi > tol) {
        std::ostringstream os;
        os << "Q^B(" << qs[a] << "," << vs[k] << ")=" << lo << " > Q^B(" << qs[a] << "," << vs[k + 1] << ")=" << hi;
        flag(os.str());
      }
    }
    for (std::size_t k = 0; k + 1 < cs.size(); ++k) {
      const double lo = t.seller_quantity(qs[a], cs[k]);
      const double hi = t.seller_quantity(qs[a], cs[k + 1]);
      if (hi - lo > tol) {
        std::ostringstream os;
        os << "Q^S(" << qs[a] << "," << cs[k + 1] << ")=" << hi << " > Q^S(" << qs[a] << "," << cs[k] << ")=" << lo;
        flag(os.str());
      }
    }
    if (a + 1 < qs.size()) {
      for (int v : vs) {
        if (t.buyer_quantity(qs[a], v) - t.buyer_quantity(qs[a + 1], v) > tol) {
          std::ostringstream os;
          os << "Q^B(" << qs[a] << "," << v << ") > Q^B(" << qs[a + 1] << "," << v << ")";
          flag(os.str());
        }
      }
      for (int c : cs) {
        if (t.seller_quantity(qs[a], c) - t.seller_quantity(qs[a + 1], c) > tol) {
          std::ostringstream os;
          os << "Q^S(" << qs[a] << "," << c << ") > Q^S(" << qs[a + 1] << "," << c << ")";
          flag(os.str());
        }
      }
    }
  }
  if (!cells.empty()) {
    std::ostringstream os;
    os << "expected-quantity tables are not monotone (" << cells.size() << " cells):";
    for (std::size_t k = 0; k < cells.size() && k < 20; ++k) os << "\n  " << cells[k];
    if (cells.size() > 20) os << "\n  ...";
    throw CalibrationError(os.str());
  }

  CorrectionTable table;
  for (int q : qs) {
    std::vector<std::vector<double>> u(vs.size(), std::vector<double>(vs.size()));
    for (std::size_t ti = 0; ti < vs.size(); ++ti)
      for (std::size_t di = 0; di < vs.size(); ++di) u[ti][di] = t.buyer_utility(q, vs[ti], q, vs[di]);
    const auto pay = adjacent_ic_payments(u);
    for (std::size_t d = 0; d < vs.size(); ++d) table.set_buyer(q, vs[d], pay[d], t.buyer_quantity(q, vs[d]));

    // Sellers: index k <-> cost hi - k, so expected quantity rises with k.
    const std::size_t nc = cs.size();
    std::vector<std::vector<double>> us(nc, std::vector<double>(nc));
    for (std::size_t ti = 0; ti < nc; ++ti)
      for (std::size_t di = 0; di < nc; ++di)
        us[ti][di] = t.seller_utility(q, cs[nc - 1 - ti], q, cs[nc - 1 - di]);
    const auto spay = adjacent_ic_payments(us);
    for (std::size_t d = 0; d < nc; ++d)
      table.set_seller(q, cs[nc - 1 - d], spay[d], t.seller_quantity(q, cs[nc - 1 - d]));
  }
  return table;
}

std::vector<IcViolation> check_incentive_compatibility(const ExpectedTables& t, const CorrectionTable& corr,
                                                       IcScope scope, double tolerance) {
  std::vector<IcViolation> out;
  const auto& qs = t.quantities();
  const auto values = t.values();
  const auto costs = t.costs();

  auto consider = [&](Role role, int q, int p, int qh, int ph, double truthful, double deviation) {
    const double gain = deviation - truthful;
    if (gain > tolerance) out.push_back({role, q, p, qh, ph, gain});
  };

  for (int a : qs) {
    for (int v = values.lo; v <= values.hi; ++v) {
      const double truthful = t.buyer_utility(a, v, a, v) + corr.buyer(a, v).total;
      for (int ah : qs) {
        if (scope == IcScope::AdjacentOnly && ah != a) continue;
        for (int vh = values.lo; vh <= values.hi; ++vh) {
          if (ah == a && vh == v) continue;
          if (scope == IcScope::AdjacentOnly && std::abs(vh - v) != 1) continue;
          consider(Role::Buyer, a, v, ah, vh, truthful, t.buyer_utility(a, v, ah, vh) + corr.buyer(ah, vh).total);
        }
      }
    }
  }
  for (int b : qs) {
    for (int c = costs.lo; c <= costs.hi; ++c) {
      const double truthful = t.seller_utility(b, c, b, c) + corr.seller(b, c).total;
      for (int bh : qs) {
        if (bh > b) continue;
        if (scope == IcScope::AdjacentOnly && bh != b) continue;
        for (int ch = costs.lo; ch <= costs.hi; ++ch) {
          if (bh == b && ch == c) continue;
          if (scope == IcScope::AdjacentOnly && std::abs(ch - c) != 1) continue;
          consider(Role::Seller, b, c, bh, ch, truthful, t.seller_utility(b, c, bh, ch) + corr.seller(bh, ch).total);
        }
      }
    }
  }
  return out;
}

double corrected_truthful_utility(const ExpectedTables& t, const CorrectionTable& corr, Role role, int quantity,
                                  int price) {
  if (role == Role::Buyer) return t.buyer_utility(quantity, price, quantity, price) + corr.buyer(quantity, price).total;
  return t.seller_utility(quantity, price, quantity, price) + corr.seller(quantity, price).total;
}

}  // namespace d2d
