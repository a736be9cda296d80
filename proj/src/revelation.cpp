#include "ram/revelation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ram/constraints.hpp"
#include "ram/simplex.hpp"

namespace ram {

BinaryRelation reveal_P(const ChoiceRule& pi, const MenuIndex& index, double tol) {
  BinaryRelation relation(index.n_alternatives());
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    for (int removed : menu_members(s)) {
      const Menu smaller = menu_without(s, removed);
      const int smaller_pos = index.menu_pos(smaller);
      if (smaller_pos < 0) continue;
      for (int alt : menu_members(smaller)) {
        const double at_menu = pi.values[index.choice_index(pos, alt)];
        const double at_smaller = pi.values[index.choice_index(smaller_pos, alt)];
        if (at_menu > at_smaller + tol) relation.set(alt, removed);
      }
    }
  }
  return relation;
}

BinaryRelation reveal_P_phi(const ChoiceRule& pi, const MenuIndex& index, double phi, double tol) {
  if (!(phi >= 0.5 && phi <= 1.0)) throw std::invalid_argument("phi must lie in [1/2, 1]");
  BinaryRelation relation(index.n_alternatives());
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    if (menu_size(s) != 2) continue;
    const auto members = menu_members(s);
    for (int i = 0; i < 2; ++i) {
      const int a = members[i];
      const int b = members[1 - i];
      if (pi.values[index.choice_index(pos, a)] > phi + tol) relation.set(a, b);
    }
  }
  return relation;
}

BinaryRelation relation_union(const BinaryRelation& a, const BinaryRelation& b) {
  if (a.size() != b.size()) throw std::invalid_argument("relation size mismatch");
  BinaryRelation out = a;
  for (int i = 0; i < b.size(); ++i)
    for (int j = 0; j < b.size(); ++j)
      if (i != j && b.at(i, j)) out.set(i, j);
  return out;
}

bool is_ram(const ChoiceRule& pi, const MenuIndex& index, std::optional<double> phi, double tol) {
  if (index.mode() != IndexMode::Complete)
    throw std::invalid_argument("is_ram needs a complete index; use limited_consistency");
  BinaryRelation relation = reveal_P(pi, index, tol);
  if (phi) relation = relation_union(relation, reveal_P_phi(pi, index, *phi, tol));
  return !has_cycle(relation);
}

bool IdentifiedSet::contains(const Preference& pref) const {
  return std::find(preferences.begin(), preferences.end(), pref) != preferences.end();
}

IdentifiedSet identified_set(const ChoiceRule& pi, const MenuIndex& index,
                             std::optional<double> phi, double tol) {
  const int k = index.n_alternatives();
  if (k > 8) throw std::invalid_argument("identified_set enumerates K! preferences; K <= 8 only");
  IdentifiedSet set;
  set.phi = phi;
  for (const Preference& pref : all_preferences(k)) {
    ConstraintMatrix matrix = index.mode() == IndexMode::Complete ? build_R(pref, index)
                                                                  : build_R_limited(pref, index);
    if (phi) matrix = augment_R_binary(std::move(matrix), pref, *phi, index);
    if (matrix.max_violation(pi.values) <= tol) set.preferences.push_back(pref);
  }
  return set;
}

AttentionRule extract_triangular(const Preference& pref, const ChoiceRule& pi,
                                 const MenuIndex& index) {
  AttentionRule mu;
  mu.values.assign(index.attention_dim(), 0.0);
  mu.triangular_for = pref;
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    for (int rank = 0; rank < pref.size(); ++rank) {
      const int alt = pref.alternative_at_rank(rank);
      if (!menu_contains(s, alt)) continue;
      const Menu cutoff = pref.lower_contour(rank) & s;
      mu.values[index.attention_index(pos, cutoff)] = pi.values[index.choice_index(pos, alt)];
    }
  }
  return mu;
}

bool is_attention_filter(const TriangularFilter& filter, const MenuIndex& index) {
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    const Menu considered = filter.considered[pos];
    if (considered == 0 || (considered & ~s) != 0) return false;
    for (int alt : menu_members(s)) {
      if (menu_contains(considered, alt)) continue;
      const int smaller_pos = index.menu_pos(menu_without(s, alt));
      if (smaller_pos < 0) continue;
      if (filter.considered[smaller_pos] != considered) return false;
    }
  }
  return true;
}

bool is_triangular(const TriangularFilter& filter, const Preference& pref,
                   const MenuIndex& index) {
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    const Menu considered = filter.considered[pos];
    if (considered == 0 || (considered & ~s) != 0) return false;
    const int cutoff_rank = pref.rank_of(pref.best_in(considered));
    if ((pref.lower_contour(cutoff_rank) & s) != considered) return false;
  }
  return true;
}

std::vector<TriangularFilter> enumerate_triangular_filters(const Preference& pref,
                                                           const MenuIndex& index) {
  if (index.n_alternatives() > 5)
    throw std::invalid_argument("triangular filter enumeration is guarded at K <= 5");

  // Menus are in decreasing-size order, so every one-bigger superset of a
  // menu is assigned before the menu itself; the filter property then either
  // forces the menu's value or leaves all cutoffs free.
  std::vector<TriangularFilter> out;
  std::vector<Menu> assignment(index.n_menus(), 0);

  auto dfs = [&](auto&& self, int pos) -> void {
    if (pos == index.n_menus()) {
      out.push_back({assignment});
      return;
    }
    const Menu s = index.menu(pos);
    Menu forced = 0;
    bool has_forced = false;
    for (int extra = 0; extra < index.n_alternatives(); ++extra) {
      if (menu_contains(s, extra)) continue;
      const int super_pos = index.menu_pos(menu_with(s, extra));
      if (super_pos < 0) continue;
      const Menu super_choice = assignment[super_pos];
      if (menu_contains(super_choice, extra)) continue;  // extra was considered, no constraint
      if (has_forced && super_choice != forced) return;  // two supersets disagree
      forced = super_choice;
      has_forced = true;
    }

    std::vector<Menu> choices;
    if (has_forced) {
      choices.push_back(forced);
    } else {
      for (int rank = 0; rank < pref.size(); ++rank) {
        if (!menu_contains(s, pref.alternative_at_rank(rank))) continue;
        choices.push_back(pref.lower_contour(rank) & s);
      }
    }
    for (Menu choice : choices) {
      assignment[pos] = choice;
      self(self, pos + 1);
    }
  };
  dfs(dfs, 0);
  return out;
}

FilterMixture decompose_random_filter(const AttentionRule& mu, const MenuIndex& index,
                                      int max_k) {
  if (index.n_alternatives() > max_k)
    throw std::invalid_argument("decompose_random_filter is guarded at K <= " +
                                std::to_string(max_k));
  if (!mu.triangular_for)
    throw std::invalid_argument("not triangular: attention rule carries no preference tag");
  const Preference& pref = *mu.triangular_for;

  // Support must sit on lower contour cutoffs of the tagged preference.
  constexpr double support_tol = 1e-12;
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    const std::uint32_t n_subsets = (1u << menu_size(s)) - 1;
    for (std::uint32_t c = 1; c <= n_subsets; ++c) {
      const Menu t = expand_subset(s, c);
      if (std::abs(mu.values[index.attention_index(pos, t)]) <= support_tol) continue;
      const int cutoff_rank = pref.rank_of(pref.best_in(t));
      if ((pref.lower_contour(cutoff_rank) & s) != t)
        throw std::invalid_argument("not triangular: weight off the lower contour sets");
    }
  }
  if (!check_monotonicity(mu, index).empty())
    throw std::invalid_argument("decompose_random_filter: attention rule is not monotone");

  const std::vector<TriangularFilter> filters = enumerate_triangular_filters(pref, index);
  const int n_filters = static_cast<int>(filters.size());

  // One equation per (menu, cutoff) cell, plus the total mass anchor.
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    for (int rank = 0; rank < pref.size(); ++rank) {
      const int alt = pref.alternative_at_rank(rank);
      if (!menu_contains(s, alt)) continue;
      const Menu cutoff = pref.lower_contour(rank) & s;
      std::vector<double> row(n_filters, 0.0);
      for (int f = 0; f < n_filters; ++f)
        if (filters[f].considered[pos] == cutoff) row[f] = 1.0;
      a.push_back(std::move(row));
      b.push_back(mu.values[index.attention_index(pos, cutoff)]);
    }
  }
  a.emplace_back(n_filters, 1.0);
  b.push_back(1.0);

  const auto solution = solve_feasibility(a, b);
  if (!solution)
    throw std::runtime_error(
        "decompose_random_filter: no filter mixture found for a monotone triangular rule "
        "(internal defect)");

  FilterMixture mixture;
  for (int f = 0; f < n_filters; ++f)
    if ((*solution)[f] > 0.0) mixture.components.emplace_back(filters[f], (*solution)[f]);

  // Re-mix and record the worst cell error.
  std::vector<double> rebuilt(index.attention_dim(), 0.0);
  for (const auto& [filter, weight] : mixture.components)
    for (int pos = 0; pos < index.n_menus(); ++pos)
      rebuilt[index.attention_index(pos, filter.considered[pos])] += weight;
  double worst = 0.0;
  for (int i = 0; i < index.attention_dim(); ++i)
    worst = std::max(worst, std::abs(rebuilt[i] - mu.values[i]));
  mixture.max_reconstruction_error = worst;
  return mixture;
}

LimitedConsistency limited_consistency(const ChoiceRule& pi_obs, const MenuIndex& index) {
  if (index.mode() != IndexMode::Limited)
    throw std::invalid_argument("limited_consistency needs a limited index");
  const int k = index.n_alternatives();
  if (k > 6) throw std::invalid_argument("limited_consistency is guarded at K <= 6");
  const auto report = validate_choice_rule(pi_obs, index);
  if (!report.ok()) throw std::invalid_argument("limited_consistency: invalid observed rule");

  MenuIndex extension = MenuIndex::complete(k);

  // Extension positions of the observed supersets of every unobserved menu.
  std::vector<std::vector<int>> observed_supersets(extension.n_menus());
  for (int pos = 0; pos < extension.n_menus(); ++pos) {
    const Menu s = extension.menu(pos);
    if (index.has_menu(s)) continue;
    for (int obs_pos = 0; obs_pos < index.n_menus(); ++obs_pos) {
      const Menu big = index.menu(obs_pos);
      if ((s & ~big) == 0 && big != s) observed_supersets[pos].push_back(extension.menu_pos(big));
    }
  }

  LimitedConsistency result{false, std::nullopt, std::nullopt, extension};
  for (const Preference& pref : all_preferences(k)) {
    AttentionRule mu;
    mu.values.assign(extension.attention_dim(), 0.0);
    mu.triangular_for = pref;
    bool valid = true;
    for (int pos = 0; pos < extension.n_menus() && valid; ++pos) {
      const Menu s = extension.menu(pos);
      const int obs_pos = index.menu_pos(s);
      if (obs_pos >= 0) {
        for (int rank = 0; rank < k; ++rank) {
          const int alt = pref.alternative_at_rank(rank);
          if (!menu_contains(s, alt)) continue;
          const Menu cutoff = pref.lower_contour(rank) & s;
          mu.values[extension.attention_index(pos, cutoff)] =
              pi_obs.values[index.choice_index(obs_pos, alt)];
        }
        continue;
      }
      // Unobserved menu: each proper cutoff takes the maximum over observed
      // supersets, the menu itself absorbs the residual.
      double residual = 1.0;
      for (int rank = 0; rank < k; ++rank) {
        const int alt = pref.alternative_at_rank(rank);
        if (!menu_contains(s, alt)) continue;
        const Menu cutoff = pref.lower_contour(rank) & s;
        if (cutoff == s) continue;
        double weight = 0.0;
        for (int sup : observed_supersets[pos])
          weight = std::max(weight, mu.values[extension.attention_index(sup, cutoff)]);
        mu.values[extension.attention_index(pos, cutoff)] = weight;
        residual -= weight;
      }
      if (residual < -kValidationTol) {
        valid = false;
        break;
      }
      mu.values[extension.attention_index(pos, s)] = std::max(residual, 0.0);
    }
    if (!valid) continue;
    if (!check_monotonicity(mu, extension).empty()) continue;

    result.consistent = true;
    result.witness_pref = pref;
    result.witness_mu = std::move(mu);
    return result;
  }
  return result;
}

}  // namespace ram
