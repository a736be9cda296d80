#pragma once

#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ram {

// A menu is a set of alternative ids encoded as a bitmask. The grand set is
// capped at 16 alternatives, so 32 bits are plenty.
using Menu = std::uint32_t;

constexpr int kMaxAlternatives = 16;

inline int menu_size(Menu m) { return std::popcount(m); }
inline bool menu_contains(Menu m, int alt) { return (m >> alt) & 1u; }
inline Menu menu_without(Menu m, int alt) { return m & ~(Menu{1} << alt); }
inline Menu menu_with(Menu m, int alt) { return m | (Menu{1} << alt); }
inline Menu singleton_menu(int alt) { return Menu{1} << alt; }
inline int lowest_member(Menu m) { return std::countr_zero(m); }

std::vector<int> menu_members(Menu m);
Menu menu_from_members(const std::vector<int>& members);

// Position of T in the list of subsets of S ordered by ascending bitmask:
// the bits of T are compacted onto the members of S.
std::uint32_t compress_subset(Menu sup, Menu sub);
Menu expand_subset(Menu sup, std::uint32_t compressed);

// Canonical menu order: decreasing cardinality, then ascending lexicographic
// order of the sorted member ids.
bool menu_canonical_less(Menu a, Menu b);

// The grand set X: alternative labels mapped to dense ids 0..K-1.
class GrandSet {
 public:
  explicit GrandSet(std::vector<std::string> labels);

  // "a1".."aK" (zero-padded once K exceeds 9 so labels sort numerically).
  static GrandSet with_default_labels(int k);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int id) const { return labels_.at(id); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<int> id_of(const std::string& label) const;
  Menu full_menu() const { return (Menu{1} << size()) - 1; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> ids_;
};

enum class IndexMode { Complete, Limited };

// Vector layouts for choice and attention rules. Menus are held in canonical
// order; within a menu, choice entries run over members by ascending id and
// attention entries over non-empty subsets by ascending bitmask.
class MenuIndex {
 public:
  static MenuIndex complete(int n_alternatives);
  static MenuIndex limited(int n_alternatives, std::vector<Menu> menus);
  static MenuIndex complete(const GrandSet& grand) { return complete(grand.size()); }
  static MenuIndex limited(const GrandSet& grand, std::vector<Menu> menus) {
    return limited(grand.size(), std::move(menus));
  }

  int n_alternatives() const { return n_alternatives_; }
  IndexMode mode() const { return mode_; }
  const std::vector<Menu>& menus() const { return menus_; }
  int n_menus() const { return static_cast<int>(menus_.size()); }
  Menu menu(int pos) const { return menus_.at(pos); }

  int choice_dim() const { return choice_dim_; }
  int attention_dim() const { return attention_dim_; }
  int choice_offset(int pos) const { return choice_offsets_.at(pos); }
  int attention_offset(int pos) const { return attention_offsets_.at(pos); }

  // -1 when the menu is not in the index.
  int menu_pos(Menu m) const;
  bool has_menu(Menu m) const { return menu_pos(m) >= 0; }

  int choice_index(int menu_pos, int alt) const;
  int attention_index(int menu_pos, Menu subset) const;

  bool operator==(const MenuIndex& other) const {
    return n_alternatives_ == other.n_alternatives_ && mode_ == other.mode_ &&
           menus_ == other.menus_;
  }

 private:
  MenuIndex(int n_alternatives, IndexMode mode, std::vector<Menu> menus);

  int n_alternatives_ = 0;
  IndexMode mode_ = IndexMode::Complete;
  std::vector<Menu> menus_;
  std::vector<int> choice_offsets_;
  std::vector<int> attention_offsets_;
  int choice_dim_ = 0;
  int attention_dim_ = 0;
  std::unordered_map<Menu, int> positions_;
};

// A strict total order over alternatives, best first.
class Preference {
 public:
  explicit Preference(std::vector<int> ranking);

  static Preference identity(int k);
  // Parses "b>a>c" against the grand set's labels.
  static Preference from_string(const std::string& text, const GrandSet& grand);

  int size() const { return static_cast<int>(ranking_.size()); }
  const std::vector<int>& ranking() const { return ranking_; }
  int alternative_at_rank(int rank) const { return ranking_.at(rank); }
  int rank_of(int alt) const { return ranks_.at(alt); }
  bool prefers(int a, int b) const { return rank_of(a) < rank_of(b); }

  // Best-ranked member of a non-empty menu.
  int best_in(Menu m) const;

  // L_k = everything weakly below the rank-k alternative (0-based rank).
  Menu lower_contour(int rank) const;

  std::string to_string(const GrandSet& grand) const;

  bool operator==(const Preference& other) const { return ranking_ == other.ranking_; }
  bool operator<(const Preference& other) const { return ranking_ < other.ranking_; }

 private:
  std::vector<int> ranking_;  // ranking_[0] is the best alternative
  std::vector<int> ranks_;    // ranks_[alt] = rank of alt
};

// All K! preferences in lexicographic order of their ranking permutations.
std::vector<Preference> all_preferences(int k);

// Stacked choice-probability vector over the index's choice layout.
struct ChoiceRule {
  std::vector<double> values;
  IndexMode mode = IndexMode::Complete;

  double operator()(const MenuIndex& index, int menu_pos, int alt) const {
    return values[index.choice_index(menu_pos, alt)];
  }
};

// Stacked consideration-set probability vector over the attention layout.
// `triangular_for` marks rules supported on lower contour sets of that
// preference (as produced by extract_triangular).
struct AttentionRule {
  std::vector<double> values;
  std::optional<Preference> triangular_for;

  double operator()(const MenuIndex& index, int menu_pos, Menu subset) const {
    return values[index.attention_index(menu_pos, subset)];
  }
};

struct Observation {
  Menu menu = 0;
  int choice = -1;

  bool operator==(const Observation&) const = default;
};

// Raw choice data: (menu, chosen alternative) pairs. Singleton menus are
// rejected; they carry no information here.
struct ChoiceDataset {
  std::vector<Observation> observations;

  long size() const { return static_cast<long>(observations.size()); }
  void add(Menu menu, int choice);

  bool operator==(const ChoiceDataset&) const = default;
};

// Irreflexive binary relation on alternatives as a dense boolean matrix.
class BinaryRelation {
 public:
  explicit BinaryRelation(int k) : k_(k), edges_(static_cast<std::size_t>(k) * k, 0) {}

  int size() const { return k_; }
  bool at(int a, int b) const { return edges_[static_cast<std::size_t>(a) * k_ + b] != 0; }
  void set(int a, int b, bool value = true);
  int edge_count() const;

  bool operator==(const BinaryRelation& other) const {
    return k_ == other.k_ && edges_ == other.edges_;
  }

 private:
  int k_;
  std::vector<std::uint8_t> edges_;
};

// Smallest transitive superset; the diagonal is dropped to keep the result
// irreflexive (cycles are reported by has_cycle instead).
BinaryRelation transitive_closure(const BinaryRelation& rel);
bool has_cycle(const BinaryRelation& rel);

// Probability-sum tolerance for rule validation.
constexpr double kValidationTol = 1e-9;

struct RuleViolation {
  int menu_pos;        // -1 for whole-vector problems
  int entry;           // offending entry within the block, -1 for sums
  double value;
  std::string message;
};

struct ValidationReport {
  std::vector<RuleViolation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string(const MenuIndex& index, const GrandSet& grand) const;
};

ValidationReport validate_choice_rule(const ChoiceRule& rule, const MenuIndex& index);
ValidationReport validate_attention_rule(const AttentionRule& rule, const MenuIndex& index);

}  // namespace ram
