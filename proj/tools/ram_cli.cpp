// Command-line front end: dataset synthesis and ingestion, preference tests,
// confidence sets, specification tests, Monte Carlo grids and a timing
// benchmark. See README.md for the formats.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "ram/attention.hpp"
#include "ram/constraints.hpp"
#include "ram/core.hpp"
#include "ram/estimation.hpp"
#include "ram/inference.hpp"
#include "ram/parallel.hpp"
#include "ram/revelation.hpp"

using nlohmann::json;
using namespace ram;

namespace {

constexpr const char* kSchema = "ram-report/1";

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitError = 2;

// ---------------------------------------------------------------------------
// dataset CSV: header "menu,choice"; menu is the '|'-joined sorted labels

std::string menu_string(Menu menu, const GrandSet& grand) {
  std::vector<std::string> labels;
  for (int alt : menu_members(menu)) labels.push_back(grand.label(alt));
  std::sort(labels.begin(), labels.end());
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += "|";
    out += labels[i];
  }
  return out;
}

void write_dataset_csv(const std::string& path, const ChoiceDataset& data,
                       const GrandSet& grand) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "menu,choice\n";
  for (const auto& obs : data.observations)
    out << menu_string(obs.menu, grand) << "," << grand.label(obs.choice) << "\n";
  if (!out) throw std::runtime_error("failed while writing " + path);
}

struct IngestedData {
  GrandSet grand;
  MenuIndex index;
  ChoiceDataset data;
  std::vector<Menu> dropped_menus;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, sep)) parts.push_back(token);
  if (!text.empty() && text.back() == sep) parts.push_back("");
  return parts;
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

IngestedData ingest_csv(const std::string& path, long min_menu_count = 1) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  struct RawRow {
    std::vector<std::string> menu_labels;
    std::string choice;
    long line;
  };
  std::vector<RawRow> rows;
  std::set<std::string> label_set;

  std::string line;
  long line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (!saw_header) {
      saw_header = true;
      if (stripped == "menu,choice") continue;  // header optional but expected
    }
    const auto fields = split(stripped, ',');
    if (fields.size() != 2)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    RawRow row;
    row.choice = trim(fields[1]);
    row.line = line_no;
    for (const std::string& label : split(fields[0], '|')) {
      const std::string clean = trim(label);
      if (clean.empty())
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed menu");
      row.menu_labels.push_back(clean);
      label_set.insert(clean);
    }
    if (row.choice.empty())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": malformed row");
    if (row.menu_labels.size() < 2)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": singleton menus are rejected");
    label_set.insert(row.choice);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no observations");

  GrandSet grand(std::vector<std::string>(label_set.begin(), label_set.end()));
  ChoiceDataset data;
  for (const auto& row : rows) {
    Menu menu = 0;
    for (const auto& label : row.menu_labels) menu = menu_with(menu, *grand.id_of(label));
    if (static_cast<std::size_t>(menu_size(menu)) != row.menu_labels.size())
      throw std::runtime_error(path + ":" + std::to_string(row.line) +
                               ": duplicate alternative in menu");
    const auto choice = grand.id_of(row.choice);
    if (!choice || !menu_contains(menu, *choice))
      throw std::runtime_error(path + ":" + std::to_string(row.line) + ": choice not in menu");
    data.add(menu, *choice);
  }

  std::vector<Menu> dropped;
  const std::vector<Menu> kept = observed_menus(data, min_menu_count, &dropped);
  if (!dropped.empty()) {
    ChoiceDataset filtered;
    std::set<Menu> keep(kept.begin(), kept.end());
    for (const auto& obs : data.observations)
      if (keep.count(obs.menu)) filtered.observations.push_back(obs);
    data = std::move(filtered);
    for (Menu menu : dropped)
      std::cerr << "warning: dropping menu {" << menu_string(menu, grand)
                << "} with fewer than " << min_menu_count << " observations\n";
  }
  MenuIndex index = MenuIndex::limited(grand.size(), kept);
  return {std::move(grand), std::move(index), std::move(data), std::move(dropped)};
}

// With --mode complete the observed menus must cover every non-singleton
// subset of the inferred grand set.
MenuIndex index_for_mode(const IngestedData& ingested, const std::string& mode) {
  if (mode == "limited") return ingested.index;
  const MenuIndex complete = MenuIndex::complete(ingested.grand.size());
  for (int pos = 0; pos < complete.n_menus(); ++pos)
    if (!ingested.index.has_menu(complete.menu(pos)))
      throw std::runtime_error("complete mode: menu {" +
                               menu_string(complete.menu(pos), ingested.grand) +
                               "} has no observations; switch to limited mode or supply data");
  return complete;
}

// ---------------------------------------------------------------------------
// shared option blocks

struct InferenceFlags {
  double alpha = 0.05;
  std::string method = "gms";
  int draws = 2000;
  std::optional<double> beta;
  std::optional<double> kappa;
  double sigma_floor = 1e-6;
  std::uint64_t seed = 0;

  InferenceOptions options() const {
    InferenceOptions opts;
    const auto parsed = method_from_name(method);
    if (!parsed) throw std::runtime_error("unknown method '" + method + "'");
    opts.method = *parsed;
    opts.alpha = alpha;
    opts.draws = draws;
    opts.beta = beta;
    opts.kappa = kappa;
    opts.sigma_floor = sigma_floor;
    opts.seed = seed;
    opts.validate();
    return opts;
  }
};

void add_inference_flags(CLI::App* cmd, InferenceFlags& flags) {
  cmd->add_option("--alpha", flags.alpha, "test level")->check(CLI::Range(0.0, 0.9999));
  cmd->add_option("--method", flags.method, "critical value method")
      ->check(CLI::IsMember({"gms", "pi", "lf", "ms2", "ub2"}));
  cmd->add_option("--draws", flags.draws, "simulation draws M")->check(CLI::PositiveNumber);
  cmd->add_option("--beta", flags.beta, "first-stage level for two-step methods");
  cmd->add_option("--kappa", flags.kappa, "GMS shrinkage, default sqrt(ln N)");
  cmd->add_option("--sigma-floor", flags.sigma_floor, "lower bound for studentization");
  cmd->add_option("--seed", flags.seed, "rng seed");
}

struct AttentionFlags {
  std::string family = "logit";
  double sigma = 2.0;
  int cap = 1;
  int cutoff = 1;
  std::string order;
  std::string gamma = "0.5";

  AttentionModelSpec spec(const GrandSet& grand) const {
    if (family == "full") return {FullAttention{}};
    if (family == "uniform") return {UniformConsideration{}};
    if (family == "logit") return {LogitAttention{SubsetWeights::power(sigma)}};
    if (family == "atmostk") return {AtMostK{cap}};
    if (family == "topn") {
      std::vector<int> ranking;
      if (order.empty()) {
        for (int i = 0; i < grand.size(); ++i) ranking.push_back(i);
      } else {
        ranking = Preference::from_string(order, grand).ranking();
      }
      return {TopN{std::move(ranking), cutoff}};
    }
    if (family == "independent") {
      std::vector<double> gammas;
      for (const std::string& part : split(gamma, ','))
        gammas.push_back(std::stod(trim(part)));
      if (gammas.size() == 1) gammas.assign(grand.size(), gammas[0]);
      return {IndependentConsideration{std::move(gammas)}};
    }
    throw std::runtime_error("unknown attention family '" + family + "'");
  }
};

void add_attention_flags(CLI::App* cmd, AttentionFlags& flags) {
  cmd->add_option("--attention", flags.family, "attention family")
      ->check(CLI::IsMember({"full", "uniform", "logit", "atmostk", "topn", "independent"}));
  cmd->add_option("--sigma", flags.sigma, "logit size power");
  cmd->add_option("--cap", flags.cap, "at-most-k cap");
  cmd->add_option("--cutoff", flags.cutoff, "top-n cutoff");
  cmd->add_option("--order", flags.order, "top-n list order, e.g. a2>a1>a3");
  cmd->add_option("--gamma", flags.gamma, "independent consideration probabilities");
}

void emit_report(const json& report, const std::string& out_path) {
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    out << report.dump(2) << "\n";
  }
  std::cout << report.dump(2) << "\n";
}

json result_json(const TestResult& result) {
  json j{{"statistic", result.statistic},
         {"critical_value", result.critical_value},
         {"p_value", result.p_value},
         {"reject", result.reject}};
  if (result.c_beta_lf) j["c_beta_lf"] = *result.c_beta_lf;
  return j;
}

// worst Studentized rows for human inspection
json worst_rows(const TestResult& result, const ConstraintMatrix& matrix, const GrandSet& grand,
                std::size_t top = 3) {
  std::vector<std::size_t> order(result.studentized.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.studentized[a] > result.studentized[b];
  });
  json rows = json::array();
  for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
    const auto& row = matrix.rows[order[i]];
    rows.push_back({{"moment", result.studentized[order[i]]},
                    {"menu", menu_string(row.menu, grand)},
                    {"better", grand.label(row.better)},
                    {"worse", grand.label(row.worse)},
                    {"kind", row.kind == RowKind::Monotonicity    ? "monotonicity"
                             : row.kind == RowKind::UnitBound     ? "unit-bound"
                                                                  : "binary-attentive"}});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// subcommand payloads

int cmd_simulate(const std::string& pref_text, int k, const AttentionFlags& attention,
                 long n_per_menu, const std::string& menu_probs, long n_total,
                 std::uint64_t seed, const std::string& out_path, std::optional<double> phi,
                 bool print_idset, const std::string& pi_csv) {
  const GrandSet grand = GrandSet::with_default_labels(k);
  const MenuIndex index = MenuIndex::complete(grand);
  const Preference pref = pref_text.empty() ? Preference::identity(k)
                                            : Preference::from_string(pref_text, grand);

  ChoiceRule pi;
  if (!pi_csv.empty()) {
    // explicit choice-rule table: menu,alternative,prob
    pi.mode = IndexMode::Complete;
    pi.values.assign(index.choice_dim(), 0.0);
    std::ifstream in(pi_csv);
    if (!in) throw std::runtime_error("cannot open " + pi_csv);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string stripped = trim(line);
      if (stripped.empty() || stripped == "menu,alternative,prob") continue;
      const auto fields = split(stripped, ',');
      if (fields.size() != 3)
        throw std::runtime_error(pi_csv + ":" + std::to_string(line_no) + ": malformed row");
      Menu menu = 0;
      for (const std::string& label : split(fields[0], '|')) {
        const auto id = grand.id_of(trim(label));
        if (!id) throw std::runtime_error(pi_csv + ":" + std::to_string(line_no) + ": unknown label");
        menu = menu_with(menu, *id);
      }
      const auto alt = grand.id_of(trim(fields[1]));
      if (!alt || !menu_contains(menu, *alt))
        throw std::runtime_error(pi_csv + ":" + std::to_string(line_no) + ": choice not in menu");
      pi.values[index.choice_index(index.menu_pos(menu), *alt)] = std::stod(trim(fields[2]));
    }
    const auto report = validate_choice_rule(pi, index);
    if (!report.ok())
      throw std::runtime_error("choice rule table is invalid:\n" + report.to_string(index, grand));
  } else {
    pi = synthesize_choice_rule(pref, build_attention(attention.spec(grand), index), index);
  }

  SampleDesign design = SampleDesign::fixed(n_per_menu);
  if (!menu_probs.empty()) {
    std::vector<double> weights;
    for (const std::string& part : split(menu_probs, ',')) weights.push_back(std::stod(trim(part)));
    design = SampleDesign::weighted(std::move(weights), n_total);
  }
  const ChoiceDataset data = sample_dataset(pi, index, design, seed);
  write_dataset_csv(out_path, data, grand);
  std::cerr << "wrote " << data.size() << " observations to " << out_path << "\n";

  if (print_idset && k <= 8) {
    const IdentifiedSet set = identified_set(pi, index, phi);
    std::cout << "population identified set (" << set.size() << " preferences";
    if (phi) std::cout << ", phi=" << *phi;
    std::cout << "):\n";
    for (const Preference& member : set.preferences)
      std::cout << "  " << member.to_string(grand) << "\n";
  }
  return kExitOk;
}

int cmd_test(const std::string& data_path, const std::string& pref_text,
             std::optional<double> phi, const std::string& mode, const InferenceFlags& flags,
             long min_menu_count, const std::string& out_path) {
  const IngestedData ingested = ingest_csv(data_path, min_menu_count);
  const MenuIndex index = index_for_mode(ingested, mode);
  const EstimatedChoice est = estimate_choice_rule(ingested.data, index);
  const Preference pref = Preference::from_string(pref_text, ingested.grand);
  const InferenceOptions opts = flags.options();
  const TestResult result = test_preference(est, pref, index, phi, opts);

  ConstraintMatrix matrix = index.mode() == IndexMode::Complete ? build_R(pref, index)
                                                                : build_R_limited(pref, index);
  if (phi) matrix = augment_R_binary(std::move(matrix), pref, *phi, index);

  json report{{"schema", kSchema},
              {"command", "test"},
              {"preference", pref.to_string(ingested.grand)},
              {"mode", mode},
              {"method", method_name(opts.method)},
              {"alpha", opts.alpha},
              {"draws", opts.draws},
              {"seed", opts.seed},
              {"n", est.n_total},
              {"result", result_json(result)},
              {"worst_moments", worst_rows(result, matrix, ingested.grand)}};
  if (phi) report["phi"] = *phi;
  emit_report(report, out_path);
  return result.reject ? kExitRejected : kExitOk;
}

json confset_json(const ConfidenceSet& set, const GrandSet& grand) {
  json prefs = json::array();
  for (const auto& [pref, result] : set.results)
    prefs.push_back({{"preference", pref.to_string(grand)},
                     {"statistic", result.statistic},
                     {"critical_value", result.critical_value},
                     {"p_value", result.p_value},
                     {"in_set", !result.reject}});
  return prefs;
}

int cmd_confset(const std::string& data_path, std::optional<double> phi, const std::string& mode,
                const InferenceFlags& flags, long min_menu_count, const std::string& out_path,
                int threads) {
  const IngestedData ingested = ingest_csv(data_path, min_menu_count);
  const MenuIndex index = index_for_mode(ingested, mode);
  const EstimatedChoice est = estimate_choice_rule(ingested.data, index);
  const InferenceOptions opts = flags.options();
  const ConfidenceSet set = confidence_set(est, index, phi, opts, threads);

  json report{{"schema", kSchema},
              {"command", "confset"},
              {"mode", mode},
              {"method", method_name(opts.method)},
              {"alpha", opts.alpha},
              {"draws", opts.draws},
              {"seed", opts.seed},
              {"n", est.n_total},
              {"set_size", set.members.size()},
              {"preferences", confset_json(set, ingested.grand)}};
  if (phi) report["phi"] = *phi;
  emit_report(report, out_path);
  return kExitOk;
}

int cmd_spectest(const std::string& data_path, std::optional<double> phi, const std::string& mode,
                 const InferenceFlags& flags, long min_menu_count, const std::string& out_path,
                 int threads) {
  const IngestedData ingested = ingest_csv(data_path, min_menu_count);
  const MenuIndex index = index_for_mode(ingested, mode);
  const EstimatedChoice est = estimate_choice_rule(ingested.data, index);
  const InferenceOptions opts = flags.options();
  const ConfidenceSet set = confidence_set(est, index, phi, opts, threads);
  const bool reject = set.members.preferences.empty();

  json report{{"schema", kSchema},
              {"command", "spectest"},
              {"mode", mode},
              {"method", method_name(opts.method)},
              {"alpha", opts.alpha},
              {"seed", opts.seed},
              {"n", est.n_total},
              {"reject", reject},
              {"set_size", set.members.size()}};
  if (phi) report["phi"] = *phi;
  emit_report(report, out_path);
  return reject ? kExitRejected : kExitOk;
}

int cmd_colltest(const std::string& data_path, const std::string& require,
                 const std::string& prefs_text, std::optional<double> phi,
                 const std::string& mode, const InferenceFlags& flags, long min_menu_count,
                 const std::string& out_path, int threads) {
  const IngestedData ingested = ingest_csv(data_path, min_menu_count);
  const MenuIndex index = index_for_mode(ingested, mode);
  const EstimatedChoice est = estimate_choice_rule(ingested.data, index);
  const InferenceOptions opts = flags.options();

  std::vector<Preference> collection;
  if (!prefs_text.empty()) {
    for (const std::string& part : split(prefs_text, ';'))
      collection.push_back(Preference::from_string(trim(part), ingested.grand));
  } else if (!require.empty()) {
    // conjunction of pairwise requirements "a>b,c>d"
    std::vector<std::pair<int, int>> pairs;
    for (const std::string& part : split(require, ',')) {
      const auto sides = split(trim(part), '>');
      if (sides.size() != 2) throw std::runtime_error("bad requirement '" + part + "'");
      const auto a = ingested.grand.id_of(trim(sides[0]));
      const auto b = ingested.grand.id_of(trim(sides[1]));
      if (!a || !b) throw std::runtime_error("unknown label in requirement '" + part + "'");
      pairs.emplace_back(*a, *b);
    }
    for (const Preference& pref : all_preferences(ingested.grand.size())) {
      bool match = true;
      for (const auto& [a, b] : pairs) match = match && pref.prefers(a, b);
      if (match) collection.push_back(pref);
    }
  } else {
    throw std::runtime_error("colltest needs --require or --prefs");
  }

  const ConfidenceSet set = confidence_set(est, index, phi, opts, threads);
  bool intersects = false;
  for (const Preference& pref : set.members.preferences)
    intersects =
        intersects || std::find(collection.begin(), collection.end(), pref) != collection.end();
  const bool reject = !intersects;

  json report{{"schema", kSchema},
              {"command", "colltest"},
              {"mode", mode},
              {"method", method_name(opts.method)},
              {"alpha", opts.alpha},
              {"seed", opts.seed},
              {"n", est.n_total},
              {"collection_size", collection.size()},
              {"reject", reject}};
  if (phi) report["phi"] = *phi;
  emit_report(report, out_path);
  return reject ? kExitRejected : kExitOk;
}

int cmd_mc(int k, const std::string& pref_text, const AttentionFlags& attention,
           const std::string& phis_text, const std::string& ns_text,
           const std::string& hypotheses_text, int replications, const InferenceFlags& flags,
           const std::string& out_path, int threads) {
  const GrandSet grand = GrandSet::with_default_labels(k);
  const MenuIndex index = MenuIndex::complete(grand);
  const Preference dgp_pref = pref_text.empty() ? Preference::identity(k)
                                                : Preference::from_string(pref_text, grand);
  const ChoiceRule pi =
      synthesize_choice_rule(dgp_pref, build_attention(attention.spec(grand), index), index);

  std::vector<double> phis;
  for (const std::string& part : split(phis_text, ',')) phis.push_back(std::stod(trim(part)));
  std::vector<long> ns;
  for (const std::string& part : split(ns_text, ',')) ns.push_back(std::stol(trim(part)));
  std::vector<Preference> hypotheses;
  for (const std::string& part : split(hypotheses_text, ';'))
    hypotheses.push_back(Preference::from_string(trim(part), grand));
  if (phis.empty() || ns.empty() || hypotheses.empty() || replications < 1)
    throw std::runtime_error("mc grid needs hypotheses, phis, ns and replications >= 1");

  const InferenceOptions base_opts = flags.options();

  struct Cell {
    std::size_t hyp;
    double phi;
    long n;
  };
  std::vector<Cell> cells;
  for (std::size_t h = 0; h < hypotheses.size(); ++h)
    for (double phi : phis)
      for (long n : ns) cells.push_back({h, phi, n});

  const long tasks = static_cast<long>(cells.size()) * replications;
  std::vector<char> rejected(tasks, 0);
  std::vector<double> p_values(tasks, 0.0);
  const auto started = std::chrono::steady_clock::now();
  parallel_for(
      tasks,
      [&](long task) {
        const long cell_id = task / replications;
        const long rep = task % replications;
        const Cell& cell = cells[cell_id];
        // dataset seed depends on the (n, replication) pair, so cells at the
        // same sample size see the same data; the test stream is separate
        const std::uint64_t data_stream =
            derive_seed(base_opts.seed, 0x10000000ULL + static_cast<std::uint64_t>(cell.n) * 100000ULL + rep);
        const ChoiceDataset data = sample_dataset(pi, index, SampleDesign::fixed(cell.n), data_stream);
        InferenceOptions opts = base_opts;
        opts.seed = derive_seed(base_opts.seed, 0x20000000ULL + static_cast<std::uint64_t>(task));
        std::optional<double> phi;
        if (cell.phi < 1.0) phi = cell.phi;
        const TestResult result = test_preference(estimate_choice_rule(data, index),
                                                  hypotheses[cell.hyp], index, phi, opts);
        rejected[task] = result.reject ? 1 : 0;
        p_values[task] = result.p_value;
      },
      threads);
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  std::ostringstream csv;
  csv << "hypothesis,phi,n,rejection_rate,mc_se,replications\n";
  for (std::size_t c = 0; c < cells.size(); ++c) {
    long rejections = 0;
    for (int rep = 0; rep < replications; ++rep)
      rejections += rejected[static_cast<long>(c) * replications + rep];
    const double rate = static_cast<double>(rejections) / replications;
    const double se = std::sqrt(rate * (1.0 - rate) / replications);
    csv << hypotheses[cells[c].hyp].to_string(grand) << "," << cells[c].phi << "," << cells[c].n
        << "," << rate << "," << se << "," << replications << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open " + out_path + " for writing");
    out << csv.str();
  }
  std::cout << csv.str();
  std::cerr << "grid of " << cells.size() << " cells x " << replications << " replications in "
            << wall_s << " s\n";
  return kExitOk;
}

int cmd_bench(int k, int draws, const std::string& counts_text, long n_per_menu,
              std::uint64_t seed, int threads) {
  const GrandSet grand = GrandSet::with_default_labels(k);
  const MenuIndex index = MenuIndex::complete(grand);
  const ChoiceRule pi = synthesize_choice_rule(
      Preference::identity(k), build_attention({LogitAttention{SubsetWeights::power(2.0)}}, index),
      index);
  const EstimatedChoice est = estimate_choice_rule(
      sample_dataset(pi, index, SampleDesign::fixed(n_per_menu), seed), index);

  std::vector<int> counts;
  for (const std::string& part : split(counts_text, ',')) counts.push_back(std::stoi(trim(part)));
  const std::vector<Preference> prefs = all_preferences(k);

  InferenceOptions opts;
  opts.method = CriticalValueMethod::GMS;
  opts.draws = draws;
  opts.seed = seed;

  std::cout << "preferences,seconds\n";
  for (int count : counts) {
    if (count < 1 || count > static_cast<int>(prefs.size()))
      throw std::runtime_error("preference count out of range");
    const auto started = std::chrono::steady_clock::now();
    const ConstraintMatrix base = build_R(prefs.front(), index);
    std::vector<char> rejected(count, 0);
    parallel_for(
        count,
        [&](long i) {
          const ConstraintMatrix matrix = permute_R(base, prefs[i], index);
          const auto [stat, sigma] = test_statistic(matrix, est, index, opts.sigma_floor);
          (void)sigma;
          const CriticalValue cv = simulate_critical_value(matrix, est, index, opts);
          rejected[i] = stat > cv.value ? 1 : 0;
        },
        threads);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << count << "," << elapsed << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"random attention choice analysis"};
  app.require_subcommand(1);

  // simulate ---------------------------------------------------------------
  auto* simulate = app.add_subcommand("simulate", "synthesize a dataset from an attention model");
  int sim_k = 5;
  std::string sim_pref;
  AttentionFlags sim_attention;
  long sim_n_per_menu = 400;
  std::string sim_menu_probs;
  long sim_n_total = 0;
  std::uint64_t sim_seed = 0;
  std::string sim_out = "data.csv";
  double sim_phi = 1.0;
  bool sim_no_idset = false;
  std::string sim_pi_csv;
  simulate->add_option("--k", sim_k, "number of alternatives")->check(CLI::Range(2, 16));
  simulate->add_option("--pref", sim_pref, "true preference, e.g. a1>a2>a3");
  add_attention_flags(simulate, sim_attention);
  simulate->add_option("--n-per-menu", sim_n_per_menu, "fixed-design observations per menu");
  simulate->add_option("--menu-probs", sim_menu_probs, "random-design menu weights");
  simulate->add_option("--n", sim_n_total, "total observations for random design");
  simulate->add_option("--seed", sim_seed, "rng seed");
  simulate->add_option("--out", sim_out, "output CSV path");
  simulate->add_option("--phi", sim_phi, "phi for the printed identified set");
  simulate->add_flag("--no-idset", sim_no_idset, "skip printing the identified set");
  simulate->add_option("--pi-csv", sim_pi_csv,
                       "sample from an explicit choice-rule table (menu,alternative,prob)");

  // test ---------------------------------------------------------------
  auto* test = app.add_subcommand("test", "test one preference against a dataset");
  std::string test_data;
  std::string test_pref;
  double test_phi = -1.0;
  std::string test_mode = "limited";
  InferenceFlags test_flags;
  long test_floor = 1;
  std::string test_out;
  test->add_option("--data", test_data, "dataset CSV")->required();
  test->add_option("--pref", test_pref, "null preference, e.g. b>a>c")->required();
  test->add_option("--phi", test_phi, "attentive-at-binaries phi in [0.5,1]");
  test->add_option("--mode", test_mode, "index mode")->check(CLI::IsMember({"complete", "limited"}));
  add_inference_flags(test, test_flags);
  test->add_option("--min-menu-count", test_floor, "drop menus observed fewer times");
  test->add_option("--out", test_out, "write the JSON report here");

  // confset / spectest / colltest ----------------------------------------
  auto* confset = app.add_subcommand("confset", "test-inversion confidence set");
  auto* spectest = app.add_subcommand("spectest", "model specification test");
  auto* colltest = app.add_subcommand("colltest", "test a collection of preferences");
  std::string cs_data, cs_mode = "limited", cs_out;
  double cs_phi = -1.0;
  InferenceFlags cs_flags;
  long cs_floor = 1;
  int cs_threads = 0;
  std::string coll_require, coll_prefs;
  for (CLI::App* cmd : {confset, spectest, colltest}) {
    cmd->add_option("--data", cs_data, "dataset CSV")->required();
    cmd->add_option("--phi", cs_phi, "attentive-at-binaries phi in [0.5,1]");
    cmd->add_option("--mode", cs_mode, "index mode")
        ->check(CLI::IsMember({"complete", "limited"}));
    add_inference_flags(cmd, cs_flags);
    cmd->add_option("--min-menu-count", cs_floor, "drop menus observed fewer times");
    cmd->add_option("--out", cs_out, "write the JSON report here");
    cmd->add_option("--threads", cs_threads, "worker threads (0 = all cores)");
  }
  colltest->add_option("--require", coll_require, "pairwise requirements, e.g. a1>a2,a3>a1");
  colltest->add_option("--prefs", coll_prefs, "explicit ;-separated preference list");

  // mc ---------------------------------------------------------------
  auto* mc = app.add_subcommand("mc", "Monte Carlo rejection-rate grid");
  int mc_k = 5;
  std::string mc_pref;
  AttentionFlags mc_attention;
  std::string mc_phis = "1";
  std::string mc_ns = "50,100,200,300,400";
  std::string mc_hypotheses;
  int mc_replications = 500;
  InferenceFlags mc_flags;
  std::string mc_out;
  int mc_threads = 0;
  mc->add_option("--k", mc_k, "number of alternatives")->check(CLI::Range(2, 8));
  mc->add_option("--pref", mc_pref, "DGP preference");
  add_attention_flags(mc, mc_attention);
  mc->add_option("--phis", mc_phis, "comma-separated phi grid (1 disables augmentation)");
  mc->add_option("--ns", mc_ns, "comma-separated per-menu sample sizes");
  mc->add_option("--hypotheses", mc_hypotheses, ";-separated null preferences")->required();
  mc->add_option("--replications", mc_replications, "replications per cell")
      ->check(CLI::PositiveNumber);
  add_inference_flags(mc, mc_flags);
  mc->add_option("--out", mc_out, "write the long-format CSV here");
  mc->add_option("--threads", mc_threads, "worker threads (0 = all cores)");

  // bench ---------------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "constraint + critical value timing table");
  int bench_k = 6;
  int bench_draws = 2000;
  std::string bench_counts = "1,5,10,20,50,100,400,720";
  long bench_n = 200;
  std::uint64_t bench_seed = 0;
  int bench_threads = 0;
  bench->add_option("--k", bench_k, "number of alternatives")->check(CLI::Range(2, 8));
  bench->add_option("--draws", bench_draws, "simulation draws M");
  bench->add_option("--pref-counts", bench_counts, "comma-separated preference counts");
  bench->add_option("--n-per-menu", bench_n, "synthetic observations per menu");
  bench->add_option("--seed", bench_seed, "rng seed");
  bench->add_option("--threads", bench_threads, "worker threads (0 = all cores)");

  // --config FILE holds key=value lines that expand to --key=value tokens
  // ahead of the explicit flags; later occurrences win, so flags override.
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string path;
      std::size_t erase_count = 0;
      if (args[i] == "--config" && i + 1 < args.size()) {
        path = args[i + 1];
        erase_count = 2;
      } else if (args[i].rfind("--config=", 0) == 0) {
        path = args[i].substr(9);
        erase_count = 1;
      }
      if (erase_count == 0) continue;
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open config file " + path);
      std::vector<std::string> expanded;
      std::string line;
      while (std::getline(in, line)) {
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("config line is not key=value: " + stripped);
        expanded.push_back("--" + trim(stripped.substr(0, eq)) + "=" +
                           trim(stripped.substr(eq + 1)));
      }
      args.erase(args.begin() + i, args.begin() + i + erase_count);
      args.insert(args.begin() + 1, expanded.begin(), expanded.end());
      break;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  }
  for (CLI::App* cmd : app.get_subcommands(nullptr))
    for (CLI::Option* opt : cmd->get_options())
      opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  std::vector<const char*> argv_expanded;
  argv_expanded.push_back(argv[0]);
  for (const std::string& arg : args) argv_expanded.push_back(arg.c_str());
  CLI11_PARSE(app, static_cast<int>(argv_expanded.size()), argv_expanded.data());

  try {
    if (simulate->parsed())
      return cmd_simulate(sim_pref, sim_k, sim_attention, sim_n_per_menu, sim_menu_probs,
                          sim_n_total, sim_seed, sim_out,
                          sim_phi < 1.0 ? std::optional<double>(sim_phi) : std::nullopt,
                          !sim_no_idset, sim_pi_csv);
    if (test->parsed())
      return cmd_test(test_data, test_pref,
                      test_phi >= 0.0 ? std::optional<double>(test_phi) : std::nullopt, test_mode,
                      test_flags, test_floor, test_out);
    const std::optional<double> cs_phi_opt =
        cs_phi >= 0.0 ? std::optional<double>(cs_phi) : std::nullopt;
    if (confset->parsed())
      return cmd_confset(cs_data, cs_phi_opt, cs_mode, cs_flags, cs_floor, cs_out, cs_threads);
    if (spectest->parsed())
      return cmd_spectest(cs_data, cs_phi_opt, cs_mode, cs_flags, cs_floor, cs_out, cs_threads);
    if (colltest->parsed())
      return cmd_colltest(cs_data, coll_require, coll_prefs, cs_phi_opt, cs_mode, cs_flags,
                          cs_floor, cs_out, cs_threads);
    if (mc->parsed())
      return cmd_mc(mc_k, mc_pref, mc_attention, mc_phis, mc_ns, mc_hypotheses, mc_replications,
                    mc_flags, mc_out, mc_threads);
    if (bench->parsed())
      return cmd_bench(bench_k, bench_draws, bench_counts, bench_n, bench_seed, bench_threads);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
