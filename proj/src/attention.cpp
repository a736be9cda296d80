#include "ram/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ram {

double SubsetWeights::operator()(Menu subset) const {
  if (size_power) return std::pow(static_cast<double>(menu_size(subset)), *size_power);
  auto it = table.find(subset);
  if (it == table.end()) throw std::invalid_argument("subset weight table is missing an entry");
  return it->second;
}

namespace {

void validate_weights(const SubsetWeights& w, int k) {
  if (w.size_power) return;
  if (w.table.empty()) throw std::invalid_argument("empty subset weight table");
  const Menu full = (Menu{1} << k) - 1;
  for (const auto& [subset, weight] : w.table) {
    if (subset == 0 || (subset & ~full) != 0)
      throw std::invalid_argument("weight table key is not a non-empty subset of the grand set");
    if (!(weight > 0.0)) throw std::invalid_argument("subset weights must be positive");
  }
  // Every non-empty subset needs a weight; menus are normalized over all of
  // their subsets.
  if (w.table.size() != (std::size_t{1} << k) - 1)
    throw std::invalid_argument("weight table must cover every non-empty subset");
}

struct SpecValidator {
  int k;

  void operator()(const FullAttention&) const {}

  void operator()(const TopN& m) const {
    if (m.cutoff < 1) throw std::invalid_argument("top-N cutoff must be >= 1");
    Preference check(m.order);  // permutation check
    if (check.size() != k) throw std::invalid_argument("top-N order must rank all alternatives");
  }

  void operator()(const AtMostK& m) const {
    if (m.cap < 1) throw std::invalid_argument("at-most-k cap must be >= 1");
  }

  void operator()(const UniformConsideration&) const {}

  void operator()(const LogitAttention& m) const { validate_weights(m.weights, k); }

  void operator()(const IndependentConsideration& m) const {
    if (static_cast<int>(m.gamma.size()) != k)
      throw std::invalid_argument("independent consideration needs one gamma per alternative");
    for (double g : m.gamma)
      if (!(g > 0.0) || !(g < 1.0))
        throw std::invalid_argument("consideration probabilities must lie in (0,1)");
  }

  void operator()(const DogitAttention& m) const {
    validate_weights(m.weights, k);
    const Menu full = (Menu{1} << k) - 1;
    for (const auto& [subset, theta] : m.captivity) {
      if (subset == 0 || (subset & ~full) != 0)
        throw std::invalid_argument("captivity key is not a non-empty subset of the grand set");
      if (theta < 0.0) throw std::invalid_argument("captivity must be nonnegative");
    }
  }

  void operator()(const EliminationByAspects& m) const {
    if (m.aspects.empty()) throw std::invalid_argument("elimination by aspects needs aspects");
    Menu covered = 0;
    const Menu full = (Menu{1} << k) - 1;
    for (const auto& [aspect, weight] : m.aspects) {
      if (aspect == 0 || (aspect & ~full) != 0)
        throw std::invalid_argument("aspect is not a non-empty subset of the grand set");
      if (!(weight > 0.0)) throw std::invalid_argument("aspect weights must be positive");
      covered |= aspect;
    }
    if (covered != full)
      throw std::invalid_argument("every alternative must carry at least one aspect");
  }

  void operator()(const ExplicitFilter& m) const {
    for (const auto& [menu, considered] : m.gamma) {
      if (considered == 0 || (considered & ~menu) != 0)
        throw std::invalid_argument("filter image must be a non-empty subset of its menu");
    }
  }

  void operator()(const Mixture& m) const {
    if (m.components.empty()) throw std::invalid_argument("mixture needs components");
    double total = 0.0;
    for (const auto& comp : m.components) {
      if (comp.weight < 0.0) throw std::invalid_argument("mixture weights must be nonnegative");
      total += comp.weight;
      validate_spec(comp.spec, k);
    }
    if (std::abs(total - 1.0) > kValidationTol)
      throw std::invalid_argument("mixture weights must sum to 1");
  }
};

// Fills one menu block of mu. `put` targets are indexed by subset mask.
struct MenuBlock {
  const MenuIndex& index;
  int pos;
  std::vector<double>& values;

  Menu menu() const { return index.menu(pos); }
  void put(Menu subset, double mass) { values[index.attention_index(pos, subset)] += mass; }
};

struct RuleBuilder {
  const MenuIndex& index;
  std::vector<double>& values;

  void fill(const FullAttention&) {
    for_each_menu([&](MenuBlock block) { block.put(block.menu(), 1.0); });
  }

  void fill(const TopN& m) {
    const Preference order(m.order);
    for_each_menu([&](MenuBlock block) {
      const Menu s = block.menu();
      const int take = std::min<int>(m.cutoff, menu_size(s));
      Menu considered = 0;
      int count = 0;
      for (int rank = 0; rank < order.size() && count < take; ++rank) {
        const int alt = order.alternative_at_rank(rank);
        if (menu_contains(s, alt)) {
          considered = menu_with(considered, alt);
          ++count;
        }
      }
      block.put(considered, 1.0);
    });
  }

  void fill(const AtMostK& m) {
    for_each_menu([&](MenuBlock block) {
      const Menu s = block.menu();
      const int size = menu_size(s);
      if (size <= m.cap) {
        block.put(s, 1.0);
        return;
      }
      long n_subsets = 0;
      for_each_subset(s, [&](Menu t) { n_subsets += menu_size(t) == m.cap; });
      const double mass = 1.0 / static_cast<double>(n_subsets);
      for_each_subset(s, [&](Menu t) {
        if (menu_size(t) == m.cap) block.put(t, mass);
      });
    });
  }

  void fill(const UniformConsideration&) {
    for_each_menu([&](MenuBlock block) {
      const double mass = 1.0 / static_cast<double>((1 << menu_size(block.menu())) - 1);
      for_each_subset(block.menu(), [&](Menu t) { block.put(t, mass); });
    });
  }

  void fill(const LogitAttention& m) {
    for_each_menu([&](MenuBlock block) {
      double total = 0.0;
      for_each_subset(block.menu(), [&](Menu t) { total += m.weights(t); });
      for_each_subset(block.menu(), [&](Menu t) { block.put(t, m.weights(t) / total); });
    });
  }

  void fill(const IndependentConsideration& m) {
    for_each_menu([&](MenuBlock block) {
      const Menu s = block.menu();
      double none = 1.0;
      for (int alt : menu_members(s)) none *= 1.0 - m.gamma[alt];
      const double beta = 1.0 - none;
      for_each_subset(s, [&](Menu t) {
        double mass = 1.0;
        for (int alt : menu_members(s))
          mass *= menu_contains(t, alt) ? m.gamma[alt] : 1.0 - m.gamma[alt];
        block.put(t, mass / beta);
      });
    });
  }

  void fill(const DogitAttention& m) {
    auto theta = [&](Menu t) {
      auto it = m.captivity.find(t);
      return it == m.captivity.end() ? 0.0 : it->second;
    };
    for_each_menu([&](MenuBlock block) {
      double weight_total = 0.0;
      double theta_total = 0.0;
      for_each_subset(block.menu(), [&](Menu t) {
        weight_total += m.weights(t);
        theta_total += theta(t);
      });
      const double scale = 1.0 / (1.0 + theta_total);
      for_each_subset(block.menu(), [&](Menu t) {
        block.put(t, scale * (m.weights(t) / weight_total + theta(t)));
      });
    });
  }

  void fill(const EliminationByAspects& m) {
    for_each_menu([&](MenuBlock block) {
      const Menu s = block.menu();
      double relevant = 0.0;
      for (const auto& [aspect, weight] : m.aspects)
        if (aspect & s) relevant += weight;
      for (const auto& [aspect, weight] : m.aspects) {
        const Menu t = aspect & s;
        if (t) block.put(t, weight / relevant);
      }
    });
  }

  void fill(const ExplicitFilter& m) {
    for_each_menu([&](MenuBlock block) {
      auto it = m.gamma.find(block.menu());
      if (it == m.gamma.end())
        throw std::invalid_argument("explicit filter is not defined on an indexed menu");
      block.put(it->second, 1.0);
    });
  }

  void fill(const Mixture& m) {
    for (const auto& comp : m.components) {
      if (comp.weight == 0.0) continue;
      const AttentionRule part = build_attention(comp.spec, index);
      for (std::size_t i = 0; i < values.size(); ++i) values[i] += comp.weight * part.values[i];
    }
  }

  template <typename Fn>
  void for_each_menu(Fn fn) {
    for (int pos = 0; pos < index.n_menus(); ++pos) fn(MenuBlock{index, pos, values});
  }

  template <typename Fn>
  static void for_each_subset(Menu s, Fn fn) {
    const std::uint32_t count = (1u << menu_size(s)) - 1;
    for (std::uint32_t c = 1; c <= count; ++c) fn(expand_subset(s, c));
  }
};

}  // namespace

void validate_spec(const AttentionModelSpec& spec, int n_alternatives) {
  std::visit(SpecValidator{n_alternatives}, spec.model);
}

AttentionRule build_attention(const AttentionModelSpec& spec, const MenuIndex& index) {
  validate_spec(spec, index.n_alternatives());
  AttentionRule rule;
  rule.values.assign(index.attention_dim(), 0.0);
  RuleBuilder builder{index, rule.values};
  std::visit([&](const auto& model) { builder.fill(model); }, spec.model);
  return rule;
}

std::vector<MonotonicityViolation> check_monotonicity(const AttentionRule& mu,
                                                      const MenuIndex& index, double tol) {
  std::vector<MonotonicityViolation> violations;
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    if (index.mode() == IndexMode::Complete) {
      // Assumption is stated for single removals; with a complete index the
      // chained version is implied.
      for (int alt : menu_members(s)) {
        const Menu smaller = menu_without(s, alt);
        const int smaller_pos = index.menu_pos(smaller);
        if (smaller_pos < 0) continue;
        RuleBuilder::for_each_subset(smaller, [&](Menu t) {
          const double at_menu = mu.values[index.attention_index(pos, t)];
          const double at_smaller = mu.values[index.attention_index(smaller_pos, t)];
          if (at_menu > at_smaller + tol)
            violations.push_back({s, t, singleton_menu(alt), at_menu, at_smaller});
        });
      }
    } else {
      // Limited data: removing any subset of unconsidered alternatives may
      // not lower the consideration probability, whenever both menus are
      // observed.
      for (int smaller_pos = 0; smaller_pos < index.n_menus(); ++smaller_pos) {
        const Menu smaller = index.menu(smaller_pos);
        if (smaller == s || (smaller & ~s) != 0) continue;
        RuleBuilder::for_each_subset(smaller, [&](Menu t) {
          const double at_menu = mu.values[index.attention_index(pos, t)];
          const double at_smaller = mu.values[index.attention_index(smaller_pos, t)];
          if (at_menu > at_smaller + tol)
            violations.push_back({s, t, s & ~smaller, at_menu, at_smaller});
        });
      }
    }
  }
  return violations;
}

ChoiceRule synthesize_choice_rule(const Preference& pref, const AttentionRule& mu,
                                  const MenuIndex& index) {
  ChoiceRule pi;
  pi.mode = index.mode();
  pi.values.assign(index.choice_dim(), 0.0);
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    RuleBuilder::for_each_subset(s, [&](Menu t) {
      const double mass = mu.values[index.attention_index(pos, t)];
      if (mass == 0.0) return;
      pi.values[index.choice_index(pos, pref.best_in(t))] += mass;
    });
  }
  return pi;
}

SampleDesign SampleDesign::fixed(long n_per_menu) {
  if (n_per_menu <= 0) throw std::invalid_argument("per-menu sample size must be positive");
  SampleDesign design;
  design.kind = Kind::FixedPerMenu;
  design.n_per_menu = n_per_menu;
  return design;
}

SampleDesign SampleDesign::weighted(std::vector<double> menu_weights, long n_total) {
  if (n_total <= 0) throw std::invalid_argument("sample size must be positive");
  for (double w : menu_weights)
    if (!(w > 0.0)) throw std::invalid_argument("menu weights must be strictly positive");
  SampleDesign design;
  design.kind = Kind::Weighted;
  design.menu_weights = std::move(menu_weights);
  design.n_total = n_total;
  return design;
}

ChoiceDataset sample_dataset(const ChoiceRule& pi, const MenuIndex& index,
                             const SampleDesign& design, std::uint64_t seed) {
  const auto report = validate_choice_rule(pi, index);
  if (!report.ok()) throw std::invalid_argument("sample_dataset: invalid choice rule");

  ChoiceDataset data;
  Rng rng(seed);
  auto draw_choice = [&](int pos) {
    const std::span<const double> probs(pi.values.data() + index.choice_offset(pos),
                                        static_cast<std::size_t>(menu_size(index.menu(pos))));
    const int member = rng.categorical(probs);
    return menu_members(index.menu(pos))[member];
  };

  if (design.kind == SampleDesign::Kind::FixedPerMenu) {
    for (int pos = 0; pos < index.n_menus(); ++pos)
      for (long i = 0; i < design.n_per_menu; ++i) data.add(index.menu(pos), draw_choice(pos));
  } else {
    if (static_cast<int>(design.menu_weights.size()) != index.n_menus())
      throw std::invalid_argument("one menu weight per indexed menu required");
    std::vector<double> probs = design.menu_weights;
    double total = 0.0;
    for (double w : probs) total += w;
    for (double& w : probs) w /= total;
    for (long i = 0; i < design.n_total; ++i) {
      const int pos = rng.categorical(probs);
      data.add(index.menu(pos), draw_choice(pos));
    }
  }
  return data;
}

}  // namespace ram
