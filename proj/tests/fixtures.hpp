#pragma once

// Shared test fixtures: small hand-checkable choice and attention rules, and
// a randomized generator over the built-in attention families.

#include <map>
#include <stdexcept>
#include <vector>

#include "ram/attention.hpp"
#include "ram/core.hpp"
#include "ram/rng.hpp"

namespace ram::testing {

inline Menu M(std::initializer_list<int> members) {
  Menu m = 0;
  for (int alt : members) m = menu_with(m, alt);
  return m;
}

inline void set_pi(ChoiceRule& pi, const MenuIndex& index, Menu menu, int alt, double value) {
  pi.values[index.choice_index(index.menu_pos(menu), alt)] = value;
}

inline void set_mu(AttentionRule& mu, const MenuIndex& index, Menu menu, Menu subset,
                   double value) {
  mu.values[index.attention_index(index.menu_pos(menu), subset)] = value;
}

inline ChoiceRule empty_choice_rule(const MenuIndex& index) {
  ChoiceRule pi;
  pi.mode = index.mode();
  pi.values.assign(index.choice_dim(), 0.0);
  return pi;
}

inline AttentionRule empty_attention_rule(const MenuIndex& index) {
  AttentionRule mu;
  mu.values.assign(index.attention_dim(), 0.0);
  return mu;
}

// Regularity-violation example: a > b > c with attention drawn to {b,c} and
// {c} in the full menu. pi(a|{a,b,c}) = 2/3 > 1/2 = pi(a|{a,b}).
inline AttentionRule example1_attention(const MenuIndex& index) {
  AttentionRule mu = empty_attention_rule(index);
  set_mu(mu, index, M({0, 1, 2}), M({0, 1, 2}), 2.0 / 3.0);
  set_mu(mu, index, M({0, 1, 2}), M({1, 2}), 1.0 / 6.0);
  set_mu(mu, index, M({0, 1, 2}), M({2}), 1.0 / 6.0);
  set_mu(mu, index, M({0, 1}), M({0, 1}), 0.5);
  set_mu(mu, index, M({0, 1}), M({1}), 0.5);
  set_mu(mu, index, M({0, 2}), M({0, 2}), 0.5);
  set_mu(mu, index, M({0, 2}), M({2}), 0.5);
  set_mu(mu, index, M({1, 2}), M({1, 2}), 0.5);
  set_mu(mu, index, M({1, 2}), M({2}), 0.5);
  return mu;
}

inline ChoiceRule example1_choice(const MenuIndex& index) {
  ChoiceRule pi = empty_choice_rule(index);
  set_pi(pi, index, M({0, 1, 2}), 0, 2.0 / 3.0);
  set_pi(pi, index, M({0, 1, 2}), 1, 1.0 / 6.0);
  set_pi(pi, index, M({0, 1, 2}), 2, 1.0 / 6.0);
  for (Menu pair : {M({0, 1}), M({0, 2}), M({1, 2})})
    for (int alt : menu_members(pair)) set_pi(pi, index, pair, alt, 0.5);
  return pi;
}

// Deterministic cyclic binaries with interior full-menu probabilities; not a
// RAM whenever all lambdas are positive.
inline ChoiceRule example2_choice(const MenuIndex& index, double la = 1.0 / 3.0,
                                  double lb = 1.0 / 3.0, double lc = 1.0 / 3.0) {
  ChoiceRule pi = empty_choice_rule(index);
  set_pi(pi, index, M({0, 1, 2}), 0, la);
  set_pi(pi, index, M({0, 1, 2}), 1, lb);
  set_pi(pi, index, M({0, 1, 2}), 2, lc);
  set_pi(pi, index, M({0, 1}), 0, 1.0);
  set_pi(pi, index, M({0, 2}), 2, 1.0);
  set_pi(pi, index, M({1, 2}), 1, 1.0);
  return pi;
}

// Full-revelation example: with 1 - lb > l > la, lc the relation P pins down
// a > b > c uniquely.
inline ChoiceRule example4_choice(const MenuIndex& index, double l = 0.5, double la = 0.3,
                                  double lb = 0.4, double lc = 0.2) {
  ChoiceRule pi = empty_choice_rule(index);
  set_pi(pi, index, M({0, 1, 2}), 0, l);
  set_pi(pi, index, M({0, 1, 2}), 1, 1.0 - l);
  set_pi(pi, index, M({0, 1, 2}), 2, 0.0);
  set_pi(pi, index, M({0, 1}), 0, 1.0 - lb);
  set_pi(pi, index, M({0, 1}), 1, lb);
  set_pi(pi, index, M({0, 2}), 0, la);
  set_pi(pi, index, M({0, 2}), 2, 1.0 - la);
  set_pi(pi, index, M({1, 2}), 1, 1.0 - lc);
  set_pi(pi, index, M({1, 2}), 2, lc);
  return pi;
}

// Regularity holds everywhere, yet binary choices are lopsided: revelation
// comes only from the attentive-at-binaries relation.
inline ChoiceRule example5_choice(const MenuIndex& index) {
  ChoiceRule pi = empty_choice_rule(index);
  for (int alt : {0, 1, 2}) set_pi(pi, index, M({0, 1, 2}), alt, 1.0 / 3.0);
  set_pi(pi, index, M({0, 1}), 0, 2.0 / 3.0);
  set_pi(pi, index, M({0, 1}), 1, 1.0 / 3.0);
  set_pi(pi, index, M({0, 2}), 0, 0.5);
  set_pi(pi, index, M({0, 2}), 2, 0.5);
  set_pi(pi, index, M({1, 2}), 1, 2.0 / 3.0);
  set_pi(pi, index, M({1, 2}), 2, 1.0 / 3.0);
  return pi;
}

// Monotone rule splitting mass between the two highest-id singletons of each
// menu; monotone but not a mixture of attention filters, and not triangular.
inline AttentionRule example6_attention(const MenuIndex& index) {
  AttentionRule mu = empty_attention_rule(index);
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const auto members = menu_members(index.menu(pos));
    const int top = members[members.size() - 1];
    const int second = members[members.size() - 2];
    set_mu(mu, index, index.menu(pos), singleton_menu(top), 0.5);
    set_mu(mu, index, index.menu(pos), singleton_menu(second), 0.5);
  }
  return mu;
}

// Observed collection {abcd, bcd, ac}; acyclic P on the observed menus but
// no RAM extension exists.
inline std::pair<MenuIndex, ChoiceRule> sa_example1() {
  MenuIndex index = MenuIndex::limited(4, {M({0, 1, 2, 3}), M({1, 2, 3}), M({0, 2})});
  ChoiceRule pi = empty_choice_rule(index);
  for (int alt : {0, 1, 2, 3}) set_pi(pi, index, M({0, 1, 2, 3}), alt, 0.25);
  set_pi(pi, index, M({1, 2, 3}), 1, 0.2);
  set_pi(pi, index, M({1, 2, 3}), 2, 0.6);
  set_pi(pi, index, M({1, 2, 3}), 3, 0.2);
  set_pi(pi, index, M({0, 2}), 0, 0.2);
  set_pi(pi, index, M({0, 2}), 2, 0.8);
  return {index, pi};
}

// Five observed menus on K=5; fails the collection condition even though
// pairwise relations stay acyclic.
inline std::pair<MenuIndex, ChoiceRule> sa_example2() {
  MenuIndex index = MenuIndex::limited(
      5, {M({0, 1, 2, 3}), M({0, 1, 2, 4}), M({0, 1, 3}), M({0, 2, 3}), M({1, 2, 4})});
  ChoiceRule pi = empty_choice_rule(index);
  for (int alt : {0, 1, 2, 3}) set_pi(pi, index, M({0, 1, 2, 3}), alt, 0.25);
  set_pi(pi, index, M({0, 1, 2, 4}), 0, 2.0 / 3.0);
  set_pi(pi, index, M({0, 1, 2, 4}), 1, 1.0 / 6.0);
  set_pi(pi, index, M({0, 1, 2, 4}), 2, 0.0);
  set_pi(pi, index, M({0, 1, 2, 4}), 4, 1.0 / 6.0);
  set_pi(pi, index, M({0, 1, 3}), 0, 0.5);
  set_pi(pi, index, M({0, 1, 3}), 1, 0.5);
  set_pi(pi, index, M({0, 1, 3}), 3, 0.0);
  set_pi(pi, index, M({0, 2, 3}), 0, 0.5);
  set_pi(pi, index, M({0, 2, 3}), 2, 0.5);
  set_pi(pi, index, M({0, 2, 3}), 3, 0.0);
  set_pi(pi, index, M({1, 2, 4}), 1, 5.0 / 6.0);
  set_pi(pi, index, M({1, 2, 4}), 2, 1.0 / 12.0);
  set_pi(pi, index, M({1, 2, 4}), 4, 1.0 / 12.0);
  return {index, pi};
}

// Random triangular attention filter: backtracking assignment in menu order,
// with shuffled cutoff choices at the free menus. Supersets can force
// conflicting values down the line, so dead branches are abandoned.
inline ExplicitFilter random_triangular_filter(const Preference& pref, const MenuIndex& index,
                                               Rng& rng) {
  std::vector<Menu> assignment(index.n_menus(), 0);
  auto dfs = [&](auto&& self, int pos) -> bool {
    if (pos == index.n_menus()) return true;
    const Menu s = index.menu(pos);
    Menu forced = 0;
    bool has_forced = false;
    for (int extra = 0; extra < index.n_alternatives(); ++extra) {
      if (menu_contains(s, extra)) continue;
      const int super_pos = index.menu_pos(menu_with(s, extra));
      if (super_pos < 0) continue;
      const Menu super_choice = assignment[super_pos];
      if (menu_contains(super_choice, extra)) continue;
      if (has_forced && super_choice != forced) return false;
      forced = super_choice;
      has_forced = true;
    }
    std::vector<Menu> choices;
    if (has_forced) {
      choices.push_back(forced);
    } else {
      for (int rank = 0; rank < pref.size(); ++rank)
        if (menu_contains(s, pref.alternative_at_rank(rank)))
          choices.push_back(pref.lower_contour(rank) & s);
      for (std::size_t i = choices.size(); i > 1; --i)
        std::swap(choices[i - 1], choices[rng.next_u64() % i]);
    }
    for (Menu choice : choices) {
      assignment[pos] = choice;
      if (self(self, pos + 1)) return true;
    }
    return false;
  };
  if (!dfs(dfs, 0)) throw std::logic_error("no triangular filter completion");
  ExplicitFilter filter;
  for (int pos = 0; pos < index.n_menus(); ++pos) filter.gamma[index.menu(pos)] = assignment[pos];
  return filter;
}

inline Preference random_preference(int k, Rng& rng) {
  std::vector<int> ranking(k);
  for (int i = 0; i < k; ++i) ranking[i] = i;
  for (int i = k - 1; i > 0; --i) std::swap(ranking[i], ranking[rng.next_u64() % (i + 1)]);
  return Preference(std::move(ranking));
}

// A random spec from the built-in families, all of which are monotone.
inline AttentionModelSpec random_monotone_spec(int k, const MenuIndex& index, Rng& rng,
                                               bool allow_mixture = true) {
  const int n_kinds = allow_mixture ? 10 : 9;
  switch (rng.next_u64() % n_kinds) {
    case 0: return {FullAttention{}};
    case 1: {
      std::vector<int> order(k);
      for (int i = 0; i < k; ++i) order[i] = i;
      for (int i = k - 1; i > 0; --i) std::swap(order[i], order[rng.next_u64() % (i + 1)]);
      return {TopN{order, 1 + static_cast<int>(rng.next_u64() % k)}};
    }
    case 2: return {AtMostK{1 + static_cast<int>(rng.next_u64() % k)}};
    case 3: return {UniformConsideration{}};
    case 4: return {LogitAttention{SubsetWeights::power(-2.0 + 4.0 * rng.uniform01())}};
    case 5: {
      std::vector<double> gamma(k);
      for (double& g : gamma) g = 0.05 + 0.9 * rng.uniform01();
      return {IndependentConsideration{std::move(gamma)}};
    }
    case 6: {
      std::map<Menu, double> weights;
      std::map<Menu, double> captivity;
      const Menu full = (Menu{1} << k) - 1;
      for (Menu t = 1; t <= full; ++t) {
        weights[t] = 0.1 + rng.uniform01();
        if (rng.uniform01() < 0.3) captivity[t] = rng.uniform01();
      }
      return {DogitAttention{SubsetWeights::explicit_table(std::move(weights)),
                             std::move(captivity)}};
    }
    case 7: {
      std::vector<std::pair<Menu, double>> aspects;
      const Menu full = (Menu{1} << k) - 1;
      Menu covered = 0;
      while (covered != full || aspects.size() < 2) {
        const Menu aspect = 1 + static_cast<Menu>(rng.next_u64() % full);
        aspects.emplace_back(aspect, 0.1 + rng.uniform01());
        covered |= aspect;
      }
      return {EliminationByAspects{std::move(aspects)}};
    }
    case 8: return {random_triangular_filter(random_preference(k, rng), index, rng)};
    default: {
      Mixture mixture;
      const int parts = 2 + static_cast<int>(rng.next_u64() % 2);
      std::vector<double> weights(parts);
      double total = 0.0;
      for (double& w : weights) {
        w = 0.1 + rng.uniform01();
        total += w;
      }
      for (int i = 0; i < parts; ++i)
        mixture.components.push_back(
            {random_monotone_spec(k, index, rng, false), weights[i] / total});
      // exact unit sum after normalization drift
      double sum = 0.0;
      for (const auto& comp : mixture.components) sum += comp.weight;
      mixture.components.back().weight += 1.0 - sum;
      return {std::move(mixture)};
    }
  }
}

}  // namespace ram::testing
