#include "ram/estimation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ram {

double EstimatedChoice::omega_entry(const MenuIndex& index, int menu_pos, int i, int j) const {
  const int offset = index.choice_offset(menu_pos);
  const double pi = pi_hat.values[offset + i];
  const double pj = pi_hat.values[offset + j];
  const double base = (i == j ? pi * (1.0 - pi) : -pi * pj);
  return base * static_cast<double>(n_total) / static_cast<double>(n_per_menu[menu_pos]);
}

EstimatedChoice EstimatedChoice::from_probabilities(const ChoiceRule& pi, const MenuIndex& index,
                                                    std::vector<long> n_per_menu) {
  if (static_cast<int>(n_per_menu.size()) != index.n_menus())
    throw std::invalid_argument("one count per indexed menu required");
  EstimatedChoice est;
  est.pi_hat = pi;
  est.n_per_menu = std::move(n_per_menu);
  est.n_total = 0;
  for (long n : est.n_per_menu) {
    if (n <= 0) throw std::invalid_argument("per-menu counts must be positive");
    est.n_total += n;
  }
  return est;
}

EstimatedChoice EstimatedChoice::from_probabilities(const ChoiceRule& pi, const MenuIndex& index,
                                                    long n_per_menu) {
  return from_probabilities(pi, index,
                            std::vector<long>(static_cast<std::size_t>(index.n_menus()), n_per_menu));
}

EstimatedChoice estimate_choice_rule(const ChoiceDataset& data, const MenuIndex& index) {
  EstimatedChoice est;
  est.pi_hat.mode = index.mode();
  est.pi_hat.values.assign(index.choice_dim(), 0.0);
  est.n_per_menu.assign(index.n_menus(), 0);
  for (const auto& obs : data.observations) {
    const int pos = index.menu_pos(obs.menu);
    if (pos < 0) throw std::invalid_argument("observation on a menu outside the index");
    est.pi_hat.values[index.choice_index(pos, obs.choice)] += 1.0;
    est.n_per_menu[pos] += 1;
    est.n_total += 1;
  }
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    if (est.n_per_menu[pos] == 0) {
      if (index.mode() == IndexMode::Complete)
        throw std::invalid_argument(
            "menu with zero observations in complete mode; switch to limited mode or supply data");
      throw std::invalid_argument("limited index contains an unobserved menu");
    }
    const int offset = index.choice_offset(pos);
    for (int i = 0; i < menu_size(index.menu(pos)); ++i)
      est.pi_hat.values[offset + i] /= static_cast<double>(est.n_per_menu[pos]);
  }
  return est;
}

std::vector<Menu> observed_menus(const ChoiceDataset& data, long min_count,
                                 std::vector<Menu>* dropped) {
  std::map<Menu, long> counts;
  for (const auto& obs : data.observations) counts[obs.menu] += 1;
  std::vector<Menu> kept;
  for (const auto& [menu, count] : counts) {
    if (count >= min_count)
      kept.push_back(menu);
    else if (dropped)
      dropped->push_back(menu);
  }
  return kept;
}

std::vector<double> studentize_sd(const ConstraintMatrix& matrix, const EstimatedChoice& est,
                                  const MenuIndex& index) {
  if (matrix.n_cols != index.choice_dim() ||
      static_cast<int>(est.pi_hat.values.size()) != index.choice_dim())
    throw std::invalid_argument("studentize_sd: dimension mismatch");

  // Column -> (menu, position-in-block) lookup.
  std::vector<int> col_menu(index.choice_dim());
  std::vector<int> col_entry(index.choice_dim());
  for (int pos = 0; pos < index.n_menus(); ++pos)
    for (int i = 0; i < menu_size(index.menu(pos)); ++i) {
      col_menu[index.choice_offset(pos) + i] = pos;
      col_entry[index.choice_offset(pos) + i] = i;
    }

  std::vector<double> sd(matrix.rows.size(), 0.0);
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    const auto& row = matrix.rows[r];
    double var = 0.0;
    for (int i = 0; i < row.n_coeffs; ++i) {
      const auto [ci, vi] = row.coeffs[i];
      var += vi * vi * est.omega_entry(index, col_menu[ci], col_entry[ci], col_entry[ci]);
      for (int j = i + 1; j < row.n_coeffs; ++j) {
        const auto [cj, vj] = row.coeffs[j];
        if (col_menu[ci] != col_menu[cj]) continue;  // blocks are independent
        var += 2.0 * vi * vj * est.omega_entry(index, col_menu[ci], col_entry[ci], col_entry[cj]);
      }
    }
    if (var < -1e-12) throw std::runtime_error("studentize_sd: negative variance");
    sd[r] = std::sqrt(std::max(var, 0.0));
  }
  return sd;
}

}  // namespace ram
