#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ram/constraints.hpp"
#include "ram/core.hpp"
#include "ram/estimation.hpp"
#include "ram/revelation.hpp"

namespace ram {

enum class CriticalValueMethod { GMS, PlugIn, LeastFavorable, TwoStepMS, TwoStepUB };

const char* method_name(CriticalValueMethod method);
std::optional<CriticalValueMethod> method_from_name(const std::string& name);

struct InferenceOptions {
  CriticalValueMethod method = CriticalValueMethod::GMS;
  double alpha = 0.05;
  int draws = 2000;                  // M
  std::optional<double> kappa;       // default sqrt(ln N)
  std::optional<double> beta;        // default alpha/10 for the two-step methods
  double sigma_floor = 1e-6;
  std::uint64_t seed = 0;

  double effective_kappa(long n_total) const;
  double effective_beta() const;
  void validate() const;  // throws on bad parameters
};

struct TestResult {
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::vector<double> studentized;  // sqrt(N) * (R pi_hat) / sigma per row
  std::vector<int> active_rows;     // two-step moment selection survivors
  std::optional<double> c_beta_lf;  // first-stage critical value, two-step methods
};

// sqrt(N) * max((R pi_hat) / max(sigma_hat, floor), 0) together with the raw
// sigma_hat vector. A zero sigma with positive numerator and no floor is an
// error.
std::pair<double, std::vector<double>> test_statistic(const ConstraintMatrix& matrix,
                                                      const EstimatedChoice& est,
                                                      const MenuIndex& index, double sigma_floor);

// Draws z* ~ N(0, Omega_hat / N) blockwise: each menu block gets a symmetric
// PSD square root of its covariance (eigenvalues clipped at zero; blocks are
// singular by construction).
class GaussianChoiceSampler {
 public:
  GaussianChoiceSampler(const EstimatedChoice& est, const MenuIndex& index);
  void draw(Rng& rng, std::vector<double>& out) const;
  int dim() const { return dim_; }

 private:
  int dim_;
  std::vector<int> block_offsets_;
  std::vector<int> block_sizes_;
  std::vector<std::vector<double>> factors_;  // row-major per block
};

struct CriticalValue {
  double value = 0.0;
  std::vector<double> draws;  // simulated statistics, in draw order
};

// Smallest draw t with fraction(draws <= t) >= level.
double empirical_quantile(std::vector<double> draws, double level);

CriticalValue simulate_critical_value(const ConstraintMatrix& matrix, const EstimatedChoice& est,
                                      const MenuIndex& index, const InferenceOptions& opts);

// Tests H0: pref is compatible with the sampled choice rule. The matrix is
// built to match the index mode and augmented when phi is given.
TestResult test_preference(const EstimatedChoice& est, const Preference& pref,
                           const MenuIndex& index, std::optional<double> phi,
                           const InferenceOptions& opts);
TestResult test_preference(const ChoiceDataset& data, const Preference& pref,
                           const MenuIndex& index, std::optional<double> phi,
                           const InferenceOptions& opts);

struct ConfidenceSet {
  IdentifiedSet members;
  std::vector<std::pair<Preference, TestResult>> results;  // all K! preferences
};

// Test inversion over all preferences; the Gaussian draw stream is shared
// across preferences (per-draw seeds depend only on the draw's index).
ConfidenceSet confidence_set(const EstimatedChoice& est, const MenuIndex& index,
                             std::optional<double> phi, const InferenceOptions& opts,
                             int n_threads = 0);

// Rejects the model when the confidence set is empty.
bool specification_test(const EstimatedChoice& est, const MenuIndex& index,
                        std::optional<double> phi, const InferenceOptions& opts,
                        ConfidenceSet* detail = nullptr);

// Rejects H0: the collection intersects the identified set, i.e. the
// confidence set misses the whole collection.
bool collection_test(const EstimatedChoice& est, const MenuIndex& index,
                     const std::vector<Preference>& collection, std::optional<double> phi,
                     const InferenceOptions& opts, ConfidenceSet* detail = nullptr);
bool collection_test(const EstimatedChoice& est, const MenuIndex& index,
                     const std::function<bool(const Preference&)>& predicate,
                     std::optional<double> phi, const InferenceOptions& opts,
                     ConfidenceSet* detail = nullptr);

}  // namespace ram
