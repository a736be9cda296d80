#pragma once

#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "ram/core.hpp"
#include "ram/rng.hpp"

namespace ram {

// Subset weight table used by the logit and dogit families: either an
// explicit map over non-empty subsets of X or the size-power shorthand
// w_T = |T|^power.
struct SubsetWeights {
  std::optional<double> size_power;
  std::map<Menu, double> table;

  static SubsetWeights power(double p) { return {p, {}}; }
  static SubsetWeights explicit_table(std::map<Menu, double> t) { return {std::nullopt, std::move(t)}; }

  double operator()(Menu subset) const;
};

struct FullAttention {};

// Considers the first `cutoff` elements of the menu under a fixed list order
// (best-first permutation of ids), or the whole menu when it is shorter.
struct TopN {
  std::vector<int> order;
  int cutoff = 1;
};

// Uniform over the size-k subsets when the menu is larger than k, full
// attention otherwise.
struct AtMostK {
  int cap = 1;
};

struct UniformConsideration {};

struct LogitAttention {
  SubsetWeights weights;
};

// Each alternative enters the consideration set independently with
// probability gamma[alt], conditioned on the set being non-empty.
struct IndependentConsideration {
  std::vector<double> gamma;
};

struct DogitAttention {
  SubsetWeights weights;
  std::map<Menu, double> captivity;  // theta_T, zero when absent
};

// Aspects (B_j, omega_j); the consideration set is B_j restricted to the
// menu, for a salient aspect drawn among those that intersect the menu.
struct EliminationByAspects {
  std::vector<std::pair<Menu, double>> aspects;
};

// Deterministic consideration map; gamma[S] must be a non-empty subset of S
// for every indexed menu.
struct ExplicitFilter {
  std::map<Menu, Menu> gamma;
};

struct MixtureComponent;

struct Mixture {
  std::vector<MixtureComponent> components;
};

struct AttentionModelSpec {
  std::variant<FullAttention, TopN, AtMostK, UniformConsideration, LogitAttention,
               IndependentConsideration, DogitAttention, EliminationByAspects, ExplicitFilter,
               Mixture>
      model;
};

struct MixtureComponent {
  AttentionModelSpec spec;
  double weight = 0.0;
};

// Parameter-domain checks; throws std::invalid_argument on the first problem.
void validate_spec(const AttentionModelSpec& spec, int n_alternatives);

AttentionRule build_attention(const AttentionModelSpec& spec, const MenuIndex& index);

// Exact-arithmetic tolerance for attention monotonicity.
constexpr double kMonotonicityTol = 1e-12;

struct MonotonicityViolation {
  Menu menu;        // S
  Menu subset;      // T
  Menu removed;     // the removed set A (a single alternative in complete mode)
  double mu_menu;   // mu(T|S)
  double mu_smaller;  // mu(T|S-A)
};

// Complete mode checks single-alternative removals; limited mode checks
// every pair of nested indexed menus (removal sets A of any size).
std::vector<MonotonicityViolation> check_monotonicity(const AttentionRule& mu,
                                                      const MenuIndex& index,
                                                      double tol = kMonotonicityTol);

// pi(a|S) = sum over T <= S of 1(a is best in T) * mu(T|S).
ChoiceRule synthesize_choice_rule(const Preference& pref, const AttentionRule& mu,
                                  const MenuIndex& index);

// Sampling design: either a fixed number of observations per menu (the
// simulation default) or menu draws from positive weights.
struct SampleDesign {
  enum class Kind { FixedPerMenu, Weighted };
  Kind kind = Kind::FixedPerMenu;
  long n_per_menu = 0;
  std::vector<double> menu_weights;
  long n_total = 0;

  static SampleDesign fixed(long n_per_menu);
  static SampleDesign weighted(std::vector<double> menu_weights, long n_total);
};

ChoiceDataset sample_dataset(const ChoiceRule& pi, const MenuIndex& index,
                             const SampleDesign& design, std::uint64_t seed);

}  // namespace ram
