#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "ram/core.hpp"

namespace ram {

enum class RowKind {
  Monotonicity,     // pi(b|S) - pi(b|S-a) <= 0
  UnitBound,        // binary-menu monotonicity, folded to -pi(a|{a,b}) <= 0
  BinaryAttentive,  // (1-phi)/phi * pi(b|{a,b}) - pi(a|{a,b}) <= 0
};

// A signed sparse row of the constraint system R * pi <= 0, with the
// (menu, better, worse) triple kept for readable violation reports.
struct ConstraintRow {
  RowKind kind = RowKind::Monotonicity;
  Menu menu = 0;      // S
  int better = -1;    // a, the removed / dominating alternative
  int worse = -1;     // b, the affected / dominated alternative
  Menu sub_menu = 0;  // comparison menu (S - a, or T in limited mode)
  int n_coeffs = 0;
  std::array<std::pair<int, double>, 2> coeffs{};

  void add(int column, double value) { coeffs[n_coeffs++] = {column, value}; }
  double dot(std::span<const double> x) const {
    double acc = 0.0;
    for (int i = 0; i < n_coeffs; ++i) acc += coeffs[i].second * x[coeffs[i].first];
    return acc;
  }
};

struct ConstraintMatrix {
  int n_cols = 0;
  std::vector<ConstraintRow> rows;
  std::optional<Preference> pref;  // preference the matrix was built for
  IndexMode mode = IndexMode::Complete;
  bool augmented = false;  // binary-attentive rows appended

  int n_rows() const { return static_cast<int>(rows.size()); }
  void multiply(std::span<const double> x, std::span<double> out) const;
  double max_violation(std::span<const double> x) const;
};

// Algorithm 1: one row per (S, dominating a, dominated b) triple, in index
// order of S, then b, then a (ascending ids). When S is binary the removal
// leaves a singleton, which the layout omits; the weakly-held constraint
// pi(b|S) <= 1 is folded through the menu's unit sum into -pi(a|S) <= 0 and
// tagged UnitBound so the row count matches the closed form.
ConstraintMatrix build_R(const Preference& pref, const MenuIndex& index);

// Algorithm 1' for an observed collection: rows pi(a|S) - pi(a|T) <= 0 over
// nested indexed pairs T in S and every a in T ranked below all of S - T.
ConstraintMatrix build_R_limited(const Preference& pref, const MenuIndex& index);

// Algorithm 2: appends one row per indexed binary menu.
ConstraintMatrix augment_R_binary(ConstraintMatrix matrix, const Preference& pref, double phi,
                                  const MenuIndex& index);

// Relabels a complete-mode, monotonicity-only matrix to another preference
// via the permutation target o pref^-1 and restores canonical row order, so
// the result equals build_R(target) row for row.
ConstraintMatrix permute_R(const ConstraintMatrix& matrix, const Preference& target,
                           const MenuIndex& index);

// sum_{k=2}^{K} C(K,k) * C(k,2)
long constraint_count(int n_alternatives);

// (row, col, coeff) triples for external verification.
void write_csv(const ConstraintMatrix& matrix, std::ostream& out);

}  // namespace ram
