#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "ram/inference.hpp"

using namespace ram;
using namespace ram::testing;

namespace {

InferenceOptions quick_opts(CriticalValueMethod method = CriticalValueMethod::GMS,
                            std::uint64_t seed = 42, int draws = 500) {
  InferenceOptions opts;
  opts.method = method;
  opts.draws = draws;
  opts.seed = seed;
  return opts;
}

EstimatedChoice logit_sample(int k, double sigma, long n_per_menu, std::uint64_t seed,
                             const MenuIndex& index) {
  const AttentionRule mu = build_attention({LogitAttention{SubsetWeights::power(sigma)}}, index);
  const ChoiceRule pi = synthesize_choice_rule(Preference::identity(k), mu, index);
  return estimate_choice_rule(sample_dataset(pi, index, SampleDesign::fixed(n_per_menu), seed),
                              index);
}

}  // namespace

TEST_CASE("statistic is zero when no moment is violated") {
  const MenuIndex index = MenuIndex::complete(3);
  const ChoiceRule pi = example1_choice(index);  // RAM with a>b>c
  const EstimatedChoice est = EstimatedChoice::from_probabilities(pi, index, 400);
  const auto [stat, sigma] = test_statistic(build_R(Preference::identity(3), index), est, index, 1e-6);
  CHECK(stat == 0.0);
  CHECK(sigma.size() == 6);
}

TEST_CASE("single-row statistic arithmetic") {
  // One binary menu, pi_hat = (0.51, 0.49), row pi(b) - pi(a) <= 0 has value
  // -0.02; flip the preference so the violation is +0.02 with sigma scaled
  // by hand below.
  const MenuIndex index = MenuIndex::limited(2, {M({0, 1})});
  ChoiceRule pi = empty_choice_rule(index);
  pi.mode = IndexMode::Limited;
  set_pi(pi, index, M({0, 1}), 0, 0.51);
  set_pi(pi, index, M({0, 1}), 1, 0.49);
  const EstimatedChoice est = EstimatedChoice::from_probabilities(pi, index, 400);

  ConstraintMatrix manual;
  manual.n_cols = 2;
  ConstraintRow row;
  row.kind = RowKind::Monotonicity;
  row.menu = M({0, 1});
  row.add(0, 1.0);
  row.add(1, -1.0);
  manual.rows.push_back(row);

  const auto [stat, sigma] = test_statistic(manual, est, index, 0.0);
  // numerator 0.02; sigma^2 = var(pi_a - pi_b) = 4 * 0.51 * 0.49
  const double expected_sigma = std::sqrt(4.0 * 0.51 * 0.49);
  CHECK(sigma[0] == doctest::Approx(expected_sigma));
  CHECK(stat == doctest::Approx(20.0 * 0.02 / expected_sigma));
}

TEST_CASE("statistic with a 0.02 moment over sigma 0.1 at N=400 is 4.0") {
  // degenerate entry pinned at one has zero variance; the floor supplies
  // the 0.1 denominator and the coefficient supplies the 0.02 numerator
  const MenuIndex index = MenuIndex::limited(2, {M({0, 1})});
  ChoiceRule point = empty_choice_rule(index);
  point.mode = IndexMode::Limited;
  set_pi(point, index, M({0, 1}), 0, 1.0);
  const EstimatedChoice est = EstimatedChoice::from_probabilities(point, index, 400);
  ConstraintMatrix manual;
  manual.n_cols = 2;
  ConstraintRow row;
  row.add(0, 0.02);
  manual.rows.push_back(row);
  const auto [stat, sigma] = test_statistic(manual, est, index, 0.1);
  CHECK(sigma[0] == 0.0);
  CHECK(stat == doctest::Approx(4.0));

  // zero variance, violated moment, no floor: signalled as an error
  ConstraintMatrix degenerate;
  degenerate.n_cols = 2;
  ConstraintRow only_violated;
  only_violated.add(0, 1.0);
  degenerate.rows.push_back(only_violated);
  CHECK_THROWS_AS(test_statistic(degenerate, est, index, 0.0), std::runtime_error);
}

TEST_CASE("population rules give a zero statistic against their own preference") {
  const MenuIndex index = MenuIndex::complete(4);
  Rng rng(5001);
  for (int round = 0; round < 5; ++round) {
    const Preference pref = random_preference(4, rng);
    const ChoiceRule pi = synthesize_choice_rule(
        pref, build_attention(random_monotone_spec(4, index, rng), index), index);
    const EstimatedChoice est = EstimatedChoice::from_probabilities(pi, index, 200);
    const auto [stat, sigma] = test_statistic(build_R(pref, index), est, index, 1e-6);
    (void)sigma;
    CHECK(stat == 0.0);
  }
}

TEST_CASE("least favorable critical value matches the normal quantile") {
  const MenuIndex index = MenuIndex::limited(2, {M({0, 1})});
  ChoiceRule pi = empty_choice_rule(index);
  pi.mode = IndexMode::Limited;
  set_pi(pi, index, M({0, 1}), 0, 0.5);
  set_pi(pi, index, M({0, 1}), 1, 0.5);
  const EstimatedChoice est = EstimatedChoice::from_probabilities(pi, index, 400);

  // sqrt(N) r'z* / sigma is exactly standard normal for this row
  ConstraintMatrix manual;
  manual.n_cols = 2;
  ConstraintRow row;
  row.add(0, 1.0);
  row.add(1, -1.0);
  manual.rows.push_back(row);

  InferenceOptions opts = quick_opts(CriticalValueMethod::LeastFavorable, 7, 100000);
  const CriticalValue cv = simulate_critical_value(manual, est, index, opts);
  CHECK(std::abs(cv.value - 1.6449) <= 0.03);
}

TEST_CASE("empirical quantile conventions") {
  std::vector<double> draws{3.0, 1.0, 2.0, 4.0};
  CHECK(empirical_quantile(draws, 1.0) == 4.0);    // alpha = 0: the max draw
  CHECK(empirical_quantile(draws, 0.5) == 2.0);
  CHECK(empirical_quantile(draws, 0.75) == 3.0);
  CHECK(empirical_quantile(draws, 0.26) == 2.0);   // ceil(1.04) = 2nd order stat
}

TEST_CASE("GMS with kappa=1 equals plug-in draw for draw") {
  const MenuIndex index = MenuIndex::complete(3);
  const EstimatedChoice est = logit_sample(3, 2.0, 150, 99, index);
  const ConstraintMatrix matrix = build_R(Preference::identity(3), index);

  InferenceOptions gms = quick_opts(CriticalValueMethod::GMS, 11, 400);
  gms.kappa = 1.0;
  InferenceOptions plug = quick_opts(CriticalValueMethod::PlugIn, 11, 400);
  const CriticalValue a = simulate_critical_value(matrix, est, index, gms);
  const CriticalValue b = simulate_critical_value(matrix, est, index, plug);
  REQUIRE(a.draws.size() == b.draws.size());
  for (std::size_t m = 0; m < a.draws.size(); ++m) CHECK(a.draws[m] == b.draws[m]);
  CHECK(a.value == b.value);
}

TEST_CASE("shared draws order the methods: plug-in <= GMS <= least favorable") {
  const MenuIndex index = MenuIndex::complete(3);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const EstimatedChoice est = logit_sample(3, 1.0, 120, seed, index);
    const ConstraintMatrix matrix = build_R(Preference::identity(3), index);
    const CriticalValue pi_cv =
        simulate_critical_value(matrix, est, index, quick_opts(CriticalValueMethod::PlugIn, 5));
    const CriticalValue gms_cv =
        simulate_critical_value(matrix, est, index, quick_opts(CriticalValueMethod::GMS, 5));
    const CriticalValue lf_cv = simulate_critical_value(
        matrix, est, index, quick_opts(CriticalValueMethod::LeastFavorable, 5));
    for (std::size_t m = 0; m < pi_cv.draws.size(); ++m) {
      CHECK(pi_cv.draws[m] <= gms_cv.draws[m] + 1e-12);
      CHECK(gms_cv.draws[m] <= lf_cv.draws[m] + 1e-12);
    }
    CHECK(pi_cv.value <= gms_cv.value + 1e-12);
    CHECK(gms_cv.value <= lf_cv.value + 1e-12);
  }
}

TEST_CASE("deeply slack moments pull GMS below least favorable") {
  // All constraints hold with big margins under full attention data.
  const MenuIndex index = MenuIndex::complete(3);
  const ChoiceRule pi = synthesize_choice_rule(
      Preference::identity(3), build_attention({LogitAttention{SubsetWeights::power(3.0)}}, index),
      index);
  const EstimatedChoice est = EstimatedChoice::from_probabilities(pi, index, 10000);
  const ConstraintMatrix matrix = build_R(Preference::identity(3), index);
  const CriticalValue gms =
      simulate_critical_value(matrix, est, index, quick_opts(CriticalValueMethod::GMS, 3, 2000));
  const CriticalValue lf = simulate_critical_value(
      matrix, est, index, quick_opts(CriticalValueMethod::LeastFavorable, 3, 2000));
  CHECK(gms.value < lf.value);
  CHECK(gms.value >= 0.0);
}

TEST_CASE("two-step parameter domains are validated") {
  InferenceOptions ms = quick_opts(CriticalValueMethod::TwoStepMS);
  ms.beta = 0.02;  // not < alpha/3 = 0.0167
  CHECK_THROWS_AS(ms.validate(), std::invalid_argument);
  ms.beta = 0.005;
  CHECK_NOTHROW(ms.validate());

  InferenceOptions ub = quick_opts(CriticalValueMethod::TwoStepUB);
  ub.beta = 0.05;  // not < alpha
  CHECK_THROWS_AS(ub.validate(), std::invalid_argument);
  ub.beta = 0.005;
  CHECK_NOTHROW(ub.validate());

  InferenceOptions bad = quick_opts();
  bad.draws = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = quick_opts();
  bad.alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("p-values are monotone in the observed statistic") {
  const MenuIndex index = MenuIndex::complete(3);
  const EstimatedChoice est = logit_sample(3, 2.0, 200, 17, index);
  const InferenceOptions opts = quick_opts(CriticalValueMethod::GMS, 23, 1000);
  const ConstraintMatrix matrix = build_R(Preference::identity(3), index);
  const CriticalValue cv = simulate_critical_value(matrix, est, index, opts);
  auto p_at = [&](double t) {
    long count = 0;
    for (double d : cv.draws) count += d > t;
    return static_cast<double>(count) / static_cast<double>(cv.draws.size());
  };
  CHECK(p_at(0.1) >= p_at(0.5));
  CHECK(p_at(0.5) >= p_at(2.0));
}

TEST_CASE("test_preference at phi=1 matches the no-phi test") {
  const MenuIndex index = MenuIndex::complete(3);
  const EstimatedChoice est = logit_sample(3, 1.0, 100, 555, index);
  const InferenceOptions opts = quick_opts(CriticalValueMethod::GMS, 1, 800);
  const Preference pref({2, 1, 0});
  const TestResult with_phi = test_preference(est, pref, index, 1.0, opts);
  const TestResult without = test_preference(est, pref, index, std::nullopt, opts);
  CHECK(with_phi.statistic == doctest::Approx(without.statistic).epsilon(1e-12));
  CHECK(with_phi.reject == without.reject);
}

TEST_CASE("true preference is retained, reversed preference is rejected at n=400") {
  const MenuIndex index = MenuIndex::complete(5);
  const EstimatedChoice est = logit_sample(5, 2.0, 400, 31, index);
  const InferenceOptions opts = quick_opts(CriticalValueMethod::GMS, 77, 1500);
  const TestResult truth = test_preference(est, Preference::identity(5), index, std::nullopt, opts);
  CHECK_FALSE(truth.reject);
  const TestResult reversed =
      test_preference(est, Preference({4, 3, 2, 1, 0}), index, std::nullopt, opts);
  CHECK(reversed.reject);
  CHECK(reversed.statistic > truth.statistic);
}

TEST_CASE("results are deterministic at a fixed seed") {
  const MenuIndex index = MenuIndex::complete(3);
  const EstimatedChoice est = logit_sample(3, 0.0, 80, 4, index);
  const InferenceOptions opts = quick_opts(CriticalValueMethod::TwoStepUB, 909, 600);
  const Preference pref({1, 2, 0});
  const TestResult a = test_preference(est, pref, index, 0.8, opts);
  const TestResult b = test_preference(est, pref, index, 0.8, opts);
  CHECK(a.statistic == b.statistic);
  CHECK(a.critical_value == b.critical_value);
  CHECK(a.p_value == b.p_value);
}

TEST_CASE("confidence set covers the truth and matches per-preference tests") {
  const MenuIndex index = MenuIndex::complete(4);
  const EstimatedChoice est = logit_sample(4, 2.0, 300, 1001, index);
  const InferenceOptions opts = quick_opts(CriticalValueMethod::GMS, 13, 600);
  const ConfidenceSet set = confidence_set(est, index, std::nullopt, opts);
  CHECK(set.members.contains(Preference::identity(4)));
  REQUIRE(set.results.size() == 24);
  // spot-check agreement with standalone tests (shared draw stream)
  for (int i : {0, 7, 23}) {
    const auto& [pref, result] = set.results[i];
    const TestResult solo = test_preference(est, pref, index, std::nullopt, opts);
    CHECK(solo.statistic == doctest::Approx(result.statistic).epsilon(1e-12));
    CHECK(solo.critical_value == doctest::Approx(result.critical_value).epsilon(1e-12));
  }
  // single-threaded equals multi-threaded
  const ConfidenceSet parallel = confidence_set(est, index, std::nullopt, opts, 2);
  REQUIRE(parallel.results.size() == set.results.size());
  for (std::size_t i = 0; i < set.results.size(); ++i) {
    CHECK(parallel.results[i].second.statistic == set.results[i].second.statistic);
    CHECK(parallel.results[i].second.critical_value == set.results[i].second.critical_value);
  }
}

TEST_CASE("specification test flags incompatible data at scale") {
  const MenuIndex index = MenuIndex::complete(3);
  const InferenceOptions opts = quick_opts(CriticalValueMethod::GMS, 3, 800);

  const ChoiceDataset bad =
      sample_dataset(example2_choice(index), index, SampleDesign::fixed(3000), 5);
  CHECK(specification_test(estimate_choice_rule(bad, index), index, std::nullopt, opts));

  const ChoiceDataset good =
      sample_dataset(example1_choice(index), index, SampleDesign::fixed(300), 5);
  CHECK_FALSE(specification_test(estimate_choice_rule(good, index), index, std::nullopt, opts));
}

TEST_CASE("collection tests reduce to the confidence set intersection") {
  // K=4 with logit power 2 carries only small regularity violations, so the
  // sample must be large before reversals are separated cleanly.
  const MenuIndex index = MenuIndex::complete(4);
  const EstimatedChoice est = logit_sample(4, 2.0, 6000, 2002, index);
  const InferenceOptions opts = quick_opts(CriticalValueMethod::GMS, 29, 600);

  // the whole space: equivalent to the specification test
  const bool spec_reject = specification_test(est, index, std::nullopt, opts);
  CHECK(collection_test(est, index, all_preferences(4), std::nullopt, opts) == spec_reject);

  // a collection containing the truth is kept
  CHECK_FALSE(collection_test(est, index, {Preference::identity(4)}, std::nullopt, opts));

  // predicate form: a4 above a3 contradicts the population identified set
  // (every compatible preference ranks a2 > a3 > a4), so the test rejects
  const bool reject_reversal = collection_test(
      est, index, [](const Preference& p) { return p.prefers(3, 2); }, std::nullopt, opts);
  CHECK(reject_reversal);

  CHECK_THROWS_AS(collection_test(est, index, std::vector<Preference>{}, std::nullopt, opts),
                  std::invalid_argument);
}

TEST_CASE("two-step methods agree with least favorable on clear-cut data") {
  const MenuIndex index = MenuIndex::complete(3);
  // deeply compatible: everything slack
  const EstimatedChoice compatible = logit_sample(3, 2.0, 2000, 8, index);
  // deeply incompatible: reversal of strong data
  const Preference reversed({2, 1, 0});
  for (auto method : {CriticalValueMethod::LeastFavorable, CriticalValueMethod::TwoStepMS,
                      CriticalValueMethod::TwoStepUB}) {
    const InferenceOptions opts = quick_opts(method, 44, 800);
    CHECK_FALSE(test_preference(compatible, Preference::identity(3), index, std::nullopt, opts).reject);
    CHECK(test_preference(compatible, reversed, index, std::nullopt, opts).reject);
  }
}

TEST_CASE("moment selection drops deeply slack rows") {
  const MenuIndex index = MenuIndex::complete(3);
  const EstimatedChoice est = logit_sample(3, 2.0, 2000, 60, index);
  InferenceOptions opts = quick_opts(CriticalValueMethod::TwoStepMS, 91, 700);
  const TestResult result = test_preference(est, Preference::identity(3), index, std::nullopt, opts);
  CHECK(result.c_beta_lf.has_value());
  CHECK(result.active_rows.size() < 6);  // the far-from-binding rows are gone
}
