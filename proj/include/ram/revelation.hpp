#pragma once

#include <optional>
#include <vector>

#include "ram/attention.hpp"
#include "ram/core.hpp"

namespace ram {

// Strict-inequality tolerance for population comparisons. Estimated rules go
// through the inference module, never here.
constexpr double kRevealTol = 1e-10;

// a P b when removing b strictly raises a's choice probability in some menu.
// Limited mode uses only single-alternative removals with both menus indexed.
BinaryRelation reveal_P(const ChoiceRule& pi, const MenuIndex& index, double tol = kRevealTol);

// a P^phi b when pi(a|{a,b}) > phi, over indexed binary menus.
BinaryRelation reveal_P_phi(const ChoiceRule& pi, const MenuIndex& index, double phi,
                            double tol = kRevealTol);

BinaryRelation relation_union(const BinaryRelation& a, const BinaryRelation& b);

// Acyclicity of P (or of P^phi united with P when phi is given). Complete
// mode only; limited data goes through limited_consistency.
bool is_ram(const ChoiceRule& pi, const MenuIndex& index,
            std::optional<double> phi = std::nullopt, double tol = kRevealTol);

struct IdentifiedSet {
  std::vector<Preference> preferences;  // lexicographic order
  std::optional<double> phi;

  bool contains(const Preference& pref) const;
  int size() const { return static_cast<int>(preferences.size()); }
};

// All preferences whose constraint system holds at the given slack; the
// K! enumeration is guarded at K <= 8.
IdentifiedSet identified_set(const ChoiceRule& pi, const MenuIndex& index,
                             std::optional<double> phi = std::nullopt, double tol = kRevealTol);

// The unique triangular attention rule carrying pi under pref:
// mu(L_k n S | S) = pi(a_k | S) for members a_k of S. Always a valid
// attention rule; monotone exactly when pref is compatible with pi.
AttentionRule extract_triangular(const Preference& pref, const ChoiceRule& pi,
                                 const MenuIndex& index);

// Deterministic triangular consideration map, one subset per indexed menu.
struct TriangularFilter {
  std::vector<Menu> considered;  // aligned with index.menus()

  bool operator==(const TriangularFilter&) const = default;
};

// Filter property: dropping an unconsidered alternative leaves the
// consideration set unchanged (checked over indexed menu pairs).
bool is_attention_filter(const TriangularFilter& filter, const MenuIndex& index);
// Every image is a lower contour set of pref restricted to the menu.
bool is_triangular(const TriangularFilter& filter, const Preference& pref, const MenuIndex& index);

// All triangular attention filters for pref, in lexicographic order of their
// per-menu cutoff choices. Guarded at K <= 5.
std::vector<TriangularFilter> enumerate_triangular_filters(const Preference& pref,
                                                           const MenuIndex& index);

struct FilterMixture {
  std::vector<std::pair<TriangularFilter, double>> components;
  double max_reconstruction_error = 0.0;
};

// Writes a monotone triangular rule as a mixture of triangular attention
// filters (filter enumeration plus a phase-one feasibility solve). Rejects
// rules that are not triangular or not monotone; K <= 4 by default.
FilterMixture decompose_random_filter(const AttentionRule& mu, const MenuIndex& index,
                                      int max_k = 4);

struct LimitedConsistency {
  bool consistent = false;
  std::optional<Preference> witness_pref;
  std::optional<AttentionRule> witness_mu;  // on the complete extension index
  MenuIndex extension_index;
};

// Whether an observed rule on a menu subcollection extends to a full RAM.
// Candidate preferences are tried in lexicographic order; for each one the
// triangular rule on the observed menus is extended to unobserved menus by
// the superset maximum, with the residual on full attention. Guarded at
// K <= 6.
LimitedConsistency limited_consistency(const ChoiceRule& pi_obs, const MenuIndex& index);

}  // namespace ram
