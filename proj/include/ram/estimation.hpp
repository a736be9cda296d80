#pragma once

#include <vector>

#include "ram/constraints.hpp"
#include "ram/core.hpp"

namespace ram {

// Frequency estimate of the choice rule plus the plug-in covariance of
// sqrt(N)(pi_hat - pi). The covariance is block diagonal over menus with
// blocks (N/N_S) * (diag(pi_S) - pi_S pi_S'); blocks are never materialized,
// entries are computed from pi_hat and the counts on demand.
struct EstimatedChoice {
  ChoiceRule pi_hat;
  std::vector<long> n_per_menu;
  long n_total = 0;

  // Entry (i, j) of the covariance block for menu `menu_pos`; i and j are
  // member positions within the block.
  double omega_entry(const MenuIndex& index, int menu_pos, int i, int j) const;

  // Treats a known rule as data observed with the given per-menu counts;
  // used for population-side checks.
  static EstimatedChoice from_probabilities(const ChoiceRule& pi, const MenuIndex& index,
                                            std::vector<long> n_per_menu);
  static EstimatedChoice from_probabilities(const ChoiceRule& pi, const MenuIndex& index,
                                            long n_per_menu);
};

// Exact count ratios per menu. Every indexed menu needs at least one
// observation; observations on unindexed menus are an error.
EstimatedChoice estimate_choice_rule(const ChoiceDataset& data, const MenuIndex& index);

// Menus observed at least `min_count` times, for building a limited index
// from raw data. `dropped` (when given) receives the menus below the floor.
std::vector<Menu> observed_menus(const ChoiceDataset& data, long min_count = 1,
                                 std::vector<Menu>* dropped = nullptr);

// Per-row standard deviation of R * pi_hat: sqrt(diag(R Omega R')). Rows
// have at most two nonzero coefficients, so each entry is a closed form in
// at most four covariance entries; cross-menu covariances vanish.
std::vector<double> studentize_sd(const ConstraintMatrix& matrix, const EstimatedChoice& est,
                                  const MenuIndex& index);

}  // namespace ram
