#include "ram/core.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ram {

std::vector<int> menu_members(Menu m) {
  std::vector<int> members;
  members.reserve(menu_size(m));
  for (Menu rest = m; rest; rest &= rest - 1) members.push_back(std::countr_zero(rest));
  return members;
}

Menu menu_from_members(const std::vector<int>& members) {
  Menu m = 0;
  for (int alt : members) {
    if (alt < 0 || alt >= kMaxAlternatives) throw std::invalid_argument("alternative id out of range");
    m |= singleton_menu(alt);
  }
  return m;
}

std::uint32_t compress_subset(Menu sup, Menu sub) {
  std::uint32_t compressed = 0;
  int bit = 0;
  for (Menu rest = sup; rest; rest &= rest - 1, ++bit) {
    const Menu low = rest & (~rest + 1);
    if (sub & low) compressed |= 1u << bit;
  }
  return compressed;
}

Menu expand_subset(Menu sup, std::uint32_t compressed) {
  Menu sub = 0;
  int bit = 0;
  for (Menu rest = sup; rest; rest &= rest - 1, ++bit) {
    if (compressed & (1u << bit)) sub |= rest & (~rest + 1);
  }
  return sub;
}

bool menu_canonical_less(Menu a, Menu b) {
  const int ca = menu_size(a);
  const int cb = menu_size(b);
  if (ca != cb) return ca > cb;
  Menu x = a;
  Menu y = b;
  while (x && y) {
    const int lx = std::countr_zero(x);
    const int ly = std::countr_zero(y);
    if (lx != ly) return lx < ly;
    x &= x - 1;
    y &= y - 1;
  }
  return false;
}

GrandSet::GrandSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  const int k = static_cast<int>(labels_.size());
  if (k < 2) throw std::invalid_argument("grand set needs at least 2 alternatives");
  if (k > kMaxAlternatives) throw std::invalid_argument("grand set capped at 16 alternatives");
  for (int i = 0; i < k; ++i) {
    if (labels_[i].empty()) throw std::invalid_argument("empty alternative label");
    if (!ids_.emplace(labels_[i], i).second)
      throw std::invalid_argument("duplicate alternative label: " + labels_[i]);
  }
}

GrandSet GrandSet::with_default_labels(int k) {
  std::vector<std::string> labels;
  labels.reserve(k);
  for (int i = 1; i <= k; ++i) {
    std::string label = "a";
    if (k > 9 && i < 10) label += "0";
    label += std::to_string(i);
    labels.push_back(std::move(label));
  }
  return GrandSet(std::move(labels));
}

std::optional<int> GrandSet::id_of(const std::string& label) const {
  auto it = ids_.find(label);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

MenuIndex::MenuIndex(int n_alternatives, IndexMode mode, std::vector<Menu> menus)
    : n_alternatives_(n_alternatives), mode_(mode), menus_(std::move(menus)) {
  choice_offsets_.reserve(menus_.size());
  attention_offsets_.reserve(menus_.size());
  for (std::size_t pos = 0; pos < menus_.size(); ++pos) {
    const Menu m = menus_[pos];
    choice_offsets_.push_back(choice_dim_);
    attention_offsets_.push_back(attention_dim_);
    choice_dim_ += menu_size(m);
    attention_dim_ += (1 << menu_size(m)) - 1;
    positions_.emplace(m, static_cast<int>(pos));
  }
}

MenuIndex MenuIndex::complete(int n_alternatives) {
  if (n_alternatives < 2 || n_alternatives > kMaxAlternatives)
    throw std::invalid_argument("complete index needs 2 <= K <= 16");
  std::vector<Menu> menus;
  const Menu full = (Menu{1} << n_alternatives) - 1;
  for (Menu m = 1; m <= full; ++m)
    if (menu_size(m) >= 2) menus.push_back(m);
  std::sort(menus.begin(), menus.end(), menu_canonical_less);
  return MenuIndex(n_alternatives, IndexMode::Complete, std::move(menus));
}

MenuIndex MenuIndex::limited(int n_alternatives, std::vector<Menu> menus) {
  if (n_alternatives < 2 || n_alternatives > kMaxAlternatives)
    throw std::invalid_argument("limited index needs 2 <= K <= 16");
  if (menus.empty()) throw std::invalid_argument("limited index needs at least one menu");
  const Menu full = (Menu{1} << n_alternatives) - 1;
  for (Menu m : menus) {
    if (m == 0 || (m & ~full) != 0) throw std::invalid_argument("menu outside the grand set");
    if (menu_size(m) < 2) throw std::invalid_argument("singleton menus are not indexed");
  }
  std::sort(menus.begin(), menus.end(), menu_canonical_less);
  if (std::adjacent_find(menus.begin(), menus.end()) != menus.end())
    throw std::invalid_argument("duplicate menu in limited index");
  return MenuIndex(n_alternatives, IndexMode::Limited, std::move(menus));
}

int MenuIndex::menu_pos(Menu m) const {
  auto it = positions_.find(m);
  return it == positions_.end() ? -1 : it->second;
}

int MenuIndex::choice_index(int menu_pos, int alt) const {
  const Menu m = menus_.at(menu_pos);
  if (!menu_contains(m, alt)) throw std::invalid_argument("alternative not in menu");
  const Menu below = m & ((Menu{1} << alt) - 1);
  return choice_offsets_[menu_pos] + std::popcount(below);
}

int MenuIndex::attention_index(int menu_pos, Menu subset) const {
  const Menu m = menus_.at(menu_pos);
  if (subset == 0 || (subset & ~m) != 0) throw std::invalid_argument("subset not in menu");
  return attention_offsets_[menu_pos] + static_cast<int>(compress_subset(m, subset)) - 1;
}

Preference::Preference(std::vector<int> ranking) : ranking_(std::move(ranking)) {
  const int k = static_cast<int>(ranking_.size());
  if (k < 1 || k > kMaxAlternatives) throw std::invalid_argument("preference size out of range");
  ranks_.assign(k, -1);
  for (int rank = 0; rank < k; ++rank) {
    const int alt = ranking_[rank];
    if (alt < 0 || alt >= k || ranks_[alt] != -1)
      throw std::invalid_argument("ranking is not a permutation of 0..K-1");
    ranks_[alt] = rank;
  }
}

Preference Preference::identity(int k) {
  std::vector<int> ranking(k);
  for (int i = 0; i < k; ++i) ranking[i] = i;
  return Preference(std::move(ranking));
}

Preference Preference::from_string(const std::string& text, const GrandSet& grand) {
  std::vector<int> ranking;
  std::string token;
  auto flush = [&]() {
    const std::size_t begin = token.find_first_not_of(" \t");
    if (begin == std::string::npos) throw std::invalid_argument("empty label in preference string");
    const std::size_t end = token.find_last_not_of(" \t");
    const std::string label = token.substr(begin, end - begin + 1);
    const auto id = grand.id_of(label);
    if (!id) throw std::invalid_argument("unknown alternative '" + label + "' in preference string");
    ranking.push_back(*id);
    token.clear();
  };
  for (char c : text) {
    if (c == '>') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  if (static_cast<int>(ranking.size()) != grand.size())
    throw std::invalid_argument("preference string must rank every alternative exactly once");
  return Preference(std::move(ranking));
}

int Preference::best_in(Menu m) const {
  for (int rank = 0; rank < size(); ++rank)
    if (menu_contains(m, ranking_[rank])) return ranking_[rank];
  throw std::invalid_argument("best_in: empty menu");
}

Menu Preference::lower_contour(int rank) const {
  Menu m = 0;
  for (int r = rank; r < size(); ++r) m |= singleton_menu(ranking_[r]);
  return m;
}

std::string Preference::to_string(const GrandSet& grand) const {
  std::string out;
  for (int rank = 0; rank < size(); ++rank) {
    if (rank > 0) out += ">";
    out += grand.label(ranking_[rank]);
  }
  return out;
}

std::vector<Preference> all_preferences(int k) {
  std::vector<int> ranking(k);
  for (int i = 0; i < k; ++i) ranking[i] = i;
  std::vector<Preference> out;
  do {
    out.emplace_back(ranking);
  } while (std::next_permutation(ranking.begin(), ranking.end()));
  return out;
}

void ChoiceDataset::add(Menu menu, int choice) {
  if (menu_size(menu) < 2) throw std::invalid_argument("singleton menus are rejected at ingestion");
  if (!menu_contains(menu, choice)) throw std::invalid_argument("choice not in menu");
  observations.push_back({menu, choice});
}

void BinaryRelation::set(int a, int b, bool value) {
  if (a == b) throw std::invalid_argument("binary relation is irreflexive");
  edges_[static_cast<std::size_t>(a) * k_ + b] = value ? 1 : 0;
}

int BinaryRelation::edge_count() const {
  int count = 0;
  for (auto e : edges_) count += e != 0;
  return count;
}

BinaryRelation transitive_closure(const BinaryRelation& rel) {
  const int k = rel.size();
  BinaryRelation closure = rel;
  // Floyd-Warshall reachability; the a != b guard keeps the result
  // irreflexive (simple paths never need a reflexive intermediate).
  for (int via = 0; via < k; ++via)
    for (int a = 0; a < k; ++a) {
      if (!closure.at(a, via)) continue;
      for (int b = 0; b < k; ++b)
        if (a != b && closure.at(via, b)) closure.set(a, b);
    }
  return closure;
}

bool has_cycle(const BinaryRelation& rel) {
  const int k = rel.size();
  std::vector<int> color(k, 0);  // 0 fresh, 1 on stack, 2 done
  std::vector<int> stack;
  for (int root = 0; root < k; ++root) {
    if (color[root] != 0) continue;
    stack.push_back(root);
    while (!stack.empty()) {
      const int node = stack.back();
      if (color[node] == 0) {
        color[node] = 1;
        for (int next = 0; next < k; ++next) {
          if (!rel.at(node, next)) continue;
          if (color[next] == 1) return true;
          if (color[next] == 0) stack.push_back(next);
        }
      } else {
        if (color[node] == 1) color[node] = 2;
        stack.pop_back();
      }
    }
  }
  return false;
}

namespace {

template <typename BlockLen>
ValidationReport validate_blocks(const std::vector<double>& values, const MenuIndex& index,
                                 int expected_dim, BlockLen block_len, int (MenuIndex::*offset)(int) const) {
  ValidationReport report;
  if (static_cast<int>(values.size()) != expected_dim)
    throw std::invalid_argument("rule vector length does not match index layout");
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const int begin = (index.*offset)(pos);
    const int len = block_len(pos);
    double sum = 0.0;
    for (int i = 0; i < len; ++i) {
      const double v = values[begin + i];
      if (v < 0.0)
        report.violations.push_back({pos, i, v, "negative entry"});
      sum += v;
    }
    if (std::abs(sum - 1.0) > kValidationTol)
      report.violations.push_back({pos, -1, sum, "menu block does not sum to 1"});
  }
  return report;
}

}  // namespace

ValidationReport validate_choice_rule(const ChoiceRule& rule, const MenuIndex& index) {
  return validate_blocks(
      rule.values, index, index.choice_dim(),
      [&](int pos) { return menu_size(index.menu(pos)); }, &MenuIndex::choice_offset);
}

ValidationReport validate_attention_rule(const AttentionRule& rule, const MenuIndex& index) {
  return validate_blocks(
      rule.values, index, index.attention_dim(),
      [&](int pos) { return (1 << menu_size(index.menu(pos))) - 1; }, &MenuIndex::attention_offset);
}

std::string ValidationReport::to_string(const MenuIndex& index, const GrandSet& grand) const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << v.message;
    if (v.menu_pos >= 0) {
      out << " in menu {";
      bool first = true;
      for (int alt : menu_members(index.menu(v.menu_pos))) {
        if (!first) out << ",";
        out << grand.label(alt);
        first = false;
      }
      out << "}";
    }
    out << " (value " << v.value << ")\n";
  }
  return out.str();
}

}  // namespace ram
