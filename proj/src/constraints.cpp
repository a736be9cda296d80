#include "ram/constraints.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ram {

void ConstraintMatrix::multiply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = rows[r].dot(x);
}

double ConstraintMatrix::max_violation(std::span<const double> x) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows) worst = std::max(worst, row.dot(x));
  return worst;
}

ConstraintMatrix build_R(const Preference& pref, const MenuIndex& index) {
  if (index.mode() != IndexMode::Complete)
    throw std::invalid_argument("build_R needs a complete index; use build_R_limited");
  ConstraintMatrix matrix;
  matrix.n_cols = index.choice_dim();
  matrix.pref = pref;
  matrix.mode = IndexMode::Complete;
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    const auto members = menu_members(s);
    for (int worse : members) {
      for (int better : members) {
        if (!pref.prefers(better, worse)) continue;
        ConstraintRow row;
        row.menu = s;
        row.better = better;
        row.worse = worse;
        if (menu_size(s) == 2) {
          // pi(worse|S) <= pi(worse|{worse}) = 1, folded through the unit
          // block sum: -pi(better|S) <= 0.
          row.kind = RowKind::UnitBound;
          row.sub_menu = singleton_menu(worse);
          row.add(index.choice_index(pos, better), -1.0);
        } else {
          const Menu smaller = menu_without(s, better);
          row.kind = RowKind::Monotonicity;
          row.sub_menu = smaller;
          row.add(index.choice_index(pos, worse), 1.0);
          row.add(index.choice_index(index.menu_pos(smaller), worse), -1.0);
        }
        matrix.rows.push_back(row);
      }
    }
  }
  return matrix;
}

ConstraintMatrix build_R_limited(const Preference& pref, const MenuIndex& index) {
  if (index.mode() != IndexMode::Limited)
    throw std::invalid_argument("build_R_limited needs a limited index");
  ConstraintMatrix matrix;
  matrix.n_cols = index.choice_dim();
  matrix.pref = pref;
  matrix.mode = IndexMode::Limited;
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    for (int sub_pos = 0; sub_pos < index.n_menus(); ++sub_pos) {
      const Menu t = index.menu(sub_pos);
      if (t == s || (t & ~s) != 0) continue;
      const Menu removed = s & ~t;
      for (int alt : menu_members(t)) {
        // a must be ranked below everything that was removed
        bool below_all = true;
        for (int gone : menu_members(removed))
          if (!pref.prefers(gone, alt)) {
            below_all = false;
            break;
          }
        if (!below_all) continue;
        ConstraintRow row;
        row.kind = RowKind::Monotonicity;
        row.menu = s;
        row.sub_menu = t;
        row.worse = alt;
        row.better = pref.best_in(removed);
        row.add(index.choice_index(pos, alt), 1.0);
        row.add(index.choice_index(sub_pos, alt), -1.0);
        matrix.rows.push_back(row);
      }
    }
  }
  return matrix;
}

ConstraintMatrix augment_R_binary(ConstraintMatrix matrix, const Preference& pref, double phi,
                                  const MenuIndex& index) {
  if (!(phi >= 0.5 && phi <= 1.0)) throw std::invalid_argument("phi must lie in [1/2, 1]");
  const double ratio = (1.0 - phi) / phi;
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const Menu s = index.menu(pos);
    if (menu_size(s) != 2) continue;
    const auto members = menu_members(s);
    const int better = pref.prefers(members[0], members[1]) ? members[0] : members[1];
    const int worse = better == members[0] ? members[1] : members[0];
    ConstraintRow row;
    row.kind = RowKind::BinaryAttentive;
    row.menu = s;
    row.better = better;
    row.worse = worse;
    row.add(index.choice_index(pos, worse), ratio);
    row.add(index.choice_index(pos, better), -1.0);
    matrix.rows.push_back(row);
  }
  matrix.augmented = true;
  return matrix;
}

ConstraintMatrix permute_R(const ConstraintMatrix& matrix, const Preference& target,
                           const MenuIndex& index) {
  if (!matrix.pref) throw std::invalid_argument("permute_R needs the source preference");
  if (matrix.augmented || matrix.mode != IndexMode::Complete)
    throw std::invalid_argument("permute_R is defined for complete monotonicity matrices only");
  const Preference& source = *matrix.pref;
  const int k = source.size();
  std::vector<int> relabel(k);
  for (int rank = 0; rank < k; ++rank)
    relabel[source.alternative_at_rank(rank)] = target.alternative_at_rank(rank);
  auto relabel_menu = [&](Menu m) {
    Menu out = 0;
    for (int alt : menu_members(m)) out = menu_with(out, relabel[alt]);
    return out;
  };

  ConstraintMatrix out;
  out.n_cols = matrix.n_cols;
  out.pref = target;
  out.mode = IndexMode::Complete;
  out.rows.reserve(matrix.rows.size());
  for (const auto& row : matrix.rows) {
    ConstraintRow mapped;
    mapped.kind = row.kind;
    mapped.menu = relabel_menu(row.menu);
    mapped.better = relabel[row.better];
    mapped.worse = relabel[row.worse];
    mapped.sub_menu = relabel_menu(row.sub_menu);
    const int pos = index.menu_pos(mapped.menu);
    if (mapped.kind == RowKind::UnitBound) {
      mapped.add(index.choice_index(pos, mapped.better), -1.0);
    } else {
      mapped.add(index.choice_index(pos, mapped.worse), 1.0);
      mapped.add(index.choice_index(index.menu_pos(mapped.sub_menu), mapped.worse), -1.0);
    }
    out.rows.push_back(mapped);
  }
  // Restore the canonical (menu, worse, better) order used by build_R.
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [&](const ConstraintRow& a, const ConstraintRow& b) {
                     const int pa = index.menu_pos(a.menu);
                     const int pb = index.menu_pos(b.menu);
                     if (pa != pb) return pa < pb;
                     if (a.worse != b.worse) return a.worse < b.worse;
                     return a.better < b.better;
                   });
  return out;
}

long constraint_count(int n_alternatives) {
  if (n_alternatives < 2) throw std::invalid_argument("constraint_count needs K >= 2");
  long total = 0;
  for (int k = 2; k <= n_alternatives; ++k) {
    long choose_menu = 1;  // C(K, k)
    for (int i = 0; i < k; ++i) choose_menu = choose_menu * (n_alternatives - i) / (i + 1);
    total += choose_menu * (static_cast<long>(k) * (k - 1) / 2);
  }
  return total;
}

void write_csv(const ConstraintMatrix& matrix, std::ostream& out) {
  out << "row,col,coeff\n";
  for (int r = 0; r < matrix.n_rows(); ++r)
    for (int i = 0; i < matrix.rows[r].n_coeffs; ++i)
      out << r << "," << matrix.rows[r].coeffs[i].first << "," << matrix.rows[r].coeffs[i].second
          << "\n";
}

}  // namespace ram
