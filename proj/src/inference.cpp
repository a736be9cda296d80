#include "ram/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ram/parallel.hpp"
#include "ram/rng.hpp"

namespace ram {

const char* method_name(CriticalValueMethod method) {
  switch (method) {
    case CriticalValueMethod::GMS: return "gms";
    case CriticalValueMethod::PlugIn: return "pi";
    case CriticalValueMethod::LeastFavorable: return "lf";
    case CriticalValueMethod::TwoStepMS: return "ms2";
    case CriticalValueMethod::TwoStepUB: return "ub2";
  }
  return "?";
}

std::optional<CriticalValueMethod> method_from_name(const std::string& name) {
  if (name == "gms") return CriticalValueMethod::GMS;
  if (name == "pi") return CriticalValueMethod::PlugIn;
  if (name == "lf") return CriticalValueMethod::LeastFavorable;
  if (name == "ms2") return CriticalValueMethod::TwoStepMS;
  if (name == "ub2") return CriticalValueMethod::TwoStepUB;
  return std::nullopt;
}

double InferenceOptions::effective_kappa(long n_total) const {
  if (kappa) return *kappa;
  return std::sqrt(std::log(static_cast<double>(n_total)));
}

double InferenceOptions::effective_beta() const { return beta ? *beta : alpha / 10.0; }

void InferenceOptions::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in [0, 1)");
  if (draws < 1) throw std::invalid_argument("at least one simulation draw required");
  if (sigma_floor < 0.0) throw std::invalid_argument("sigma floor must be nonnegative");
  if (kappa && !(*kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  if (method == CriticalValueMethod::TwoStepMS) {
    const double b = effective_beta();
    if (!(b > 0.0 && b < alpha / 3.0))
      throw std::invalid_argument("two-step moment selection needs 0 < beta < alpha/3");
  }
  if (method == CriticalValueMethod::TwoStepUB) {
    const double b = effective_beta();
    if (!(b > 0.0 && b < alpha))
      throw std::invalid_argument("two-step upper bounding needs 0 < beta < alpha");
  }
}

std::pair<double, std::vector<double>> test_statistic(const ConstraintMatrix& matrix,
                                                      const EstimatedChoice& est,
                                                      const MenuIndex& index, double sigma_floor) {
  std::vector<double> sigma = studentize_sd(matrix, est, index);
  double best = 0.0;
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    const double numer = matrix.rows[r].dot(est.pi_hat.values);
    const double denom = std::max(sigma[r], sigma_floor);
    if (denom == 0.0) {
      if (numer > 0.0)
        throw std::runtime_error(
            "test_statistic: zero variance with a violated moment and no sigma floor");
      continue;  // 0/0 convention: a degenerate satisfied moment contributes nothing
    }
    best = std::max(best, numer / denom);
  }
  return {std::sqrt(static_cast<double>(est.n_total)) * best, std::move(sigma)};
}

GaussianChoiceSampler::GaussianChoiceSampler(const EstimatedChoice& est, const MenuIndex& index)
    : dim_(index.choice_dim()) {
  factors_.reserve(index.n_menus());
  for (int pos = 0; pos < index.n_menus(); ++pos) {
    const int size = menu_size(index.menu(pos));
    block_offsets_.push_back(index.choice_offset(pos));
    block_sizes_.push_back(size);
    // Covariance of the z* block: Omega_hat_S / N = Omega_{pi_hat,S} / N_S.
    Eigen::MatrixXd cov(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        cov(i, j) = est.omega_entry(index, pos, i, j) / static_cast<double>(est.n_total);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(cov);
    if (eigen.info() != Eigen::Success)
      throw std::runtime_error("covariance eigendecomposition failed");
    const double max_eig = eigen.eigenvalues().cwiseAbs().maxCoeff();
    const double tol = 1e-8 * std::max(1.0, max_eig);
    Eigen::VectorXd roots(size);
    for (int i = 0; i < size; ++i) {
      const double lambda = eigen.eigenvalues()(i);
      if (lambda < -tol) throw std::runtime_error("covariance block is not PSD");
      roots(i) = std::sqrt(std::max(lambda, 0.0));
    }
    const Eigen::MatrixXd factor = eigen.eigenvectors() * roots.asDiagonal();
    std::vector<double> flat(static_cast<std::size_t>(size) * size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) flat[static_cast<std::size_t>(i) * size + j] = factor(i, j);
    factors_.push_back(std::move(flat));
  }
}

void GaussianChoiceSampler::draw(Rng& rng, std::vector<double>& out) const {
  out.assign(dim_, 0.0);
  std::vector<double> normals;
  for (std::size_t block = 0; block < factors_.size(); ++block) {
    const int size = block_sizes_[block];
    normals.resize(size);
    for (int j = 0; j < size; ++j) normals[j] = rng.normal();
    const auto& factor = factors_[block];
    double* target = out.data() + block_offsets_[block];
    for (int i = 0; i < size; ++i) {
      double acc = 0.0;
      for (int j = 0; j < size; ++j) acc += factor[static_cast<std::size_t>(i) * size + j] * normals[j];
      target[i] = acc;
    }
  }
}

double empirical_quantile(std::vector<double> draws, double level) {
  if (draws.empty()) throw std::invalid_argument("empirical_quantile: no draws");
  std::sort(draws.begin(), draws.end());
  const long m = static_cast<long>(draws.size());
  long order = static_cast<long>(std::ceil(level * static_cast<double>(m)));
  order = std::clamp(order, 1L, m);
  return draws[order - 1];
}

namespace {

struct MomentScale {
  std::vector<double> sigma_tilde;      // max(sigma_hat, floor)
  std::vector<double> studentized_raw;  // (R pi_hat) / sigma_tilde, no sqrt(N)
};

MomentScale moment_scale(const ConstraintMatrix& matrix, const EstimatedChoice& est,
                         const std::vector<double>& sigma, double sigma_floor) {
  MomentScale out;
  out.sigma_tilde.resize(matrix.rows.size());
  out.studentized_raw.resize(matrix.rows.size());
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    out.sigma_tilde[r] = std::max(sigma[r], sigma_floor);
    const double numer = matrix.rows[r].dot(est.pi_hat.values);
    out.studentized_raw[r] = out.sigma_tilde[r] > 0.0 ? numer / out.sigma_tilde[r] : 0.0;
  }
  return out;
}

// One pass of simulated max statistics: per draw m, the generator is seeded
// from (seed, m) only, so any two passes (or any two callers) see identical
// z* vectors draw for draw.
std::vector<double> simulate_max(const ConstraintMatrix& matrix,
                                 const GaussianChoiceSampler& sampler, const MomentScale& scale,
                                 const std::vector<double>& centering,
                                 const std::vector<char>& keep, double sqrt_n, int m_draws,
                                 std::uint64_t seed) {
  std::vector<double> stats(m_draws, 0.0);
  std::vector<double> z;
  for (int m = 0; m < m_draws; ++m) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
    sampler.draw(rng, z);
    double best = 0.0;
    for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
      if (!keep.empty() && !keep[r]) continue;
      if (scale.sigma_tilde[r] == 0.0) continue;
      const double value = matrix.rows[r].dot(z) / scale.sigma_tilde[r] +
                           (centering.empty() ? 0.0 : centering[r]);
      best = std::max(best, value);
    }
    stats[m] = sqrt_n * best;
  }
  return stats;
}

CriticalValue critical_value_impl(const ConstraintMatrix& matrix, const EstimatedChoice& est,
                                  const MenuIndex& index, const InferenceOptions& opts,
                                  const std::vector<double>& sigma, TestResult* diag) {
  opts.validate();
  const GaussianChoiceSampler sampler(est, index);
  const MomentScale scale = moment_scale(matrix, est, sigma, opts.sigma_floor);
  const double sqrt_n = std::sqrt(static_cast<double>(est.n_total));
  const std::vector<char> keep_all;
  const std::vector<double> no_centering;

  auto lf_stage = [&](double beta) {
    std::vector<double> lf_draws = simulate_max(matrix, sampler, scale, no_centering, keep_all,
                                                sqrt_n, opts.draws, opts.seed);
    return empirical_quantile(std::move(lf_draws), 1.0 - beta);
  };

  CriticalValue result;
  switch (opts.method) {
    case CriticalValueMethod::GMS:
    case CriticalValueMethod::PlugIn: {
      const double shrink = opts.method == CriticalValueMethod::GMS
                                ? 1.0 / opts.effective_kappa(est.n_total)
                                : 1.0;
      std::vector<double> centering(matrix.rows.size());
      for (std::size_t r = 0; r < centering.size(); ++r)
        centering[r] = shrink * std::min(scale.studentized_raw[r], 0.0);
      result.draws = simulate_max(matrix, sampler, scale, centering, keep_all, sqrt_n, opts.draws,
                                  opts.seed);
      result.value = empirical_quantile(result.draws, 1.0 - opts.alpha);
      break;
    }
    case CriticalValueMethod::LeastFavorable: {
      result.draws = simulate_max(matrix, sampler, scale, no_centering, keep_all, sqrt_n,
                                  opts.draws, opts.seed);
      result.value = empirical_quantile(result.draws, 1.0 - opts.alpha);
      break;
    }
    case CriticalValueMethod::TwoStepMS: {
      const double beta = opts.effective_beta();
      const double c_beta = lf_stage(beta);
      std::vector<char> keep(matrix.rows.size(), 0);
      std::vector<int> active;
      for (std::size_t r = 0; r < matrix.rows.size(); ++r)
        if (sqrt_n * scale.studentized_raw[r] >= -2.0 * c_beta) {
          keep[r] = 1;
          active.push_back(static_cast<int>(r));
        }
      result.draws = simulate_max(matrix, sampler, scale, no_centering, keep, sqrt_n, opts.draws,
                                  opts.seed);
      result.value = empirical_quantile(result.draws, 1.0 - opts.alpha + 2.0 * beta);
      if (diag) {
        diag->active_rows = std::move(active);
        diag->c_beta_lf = c_beta;
      }
      break;
    }
    case CriticalValueMethod::TwoStepUB: {
      const double beta = opts.effective_beta();
      const double c_beta = lf_stage(beta);
      std::vector<double> centering(matrix.rows.size());
      for (std::size_t r = 0; r < centering.size(); ++r) {
        const double upper = scale.studentized_raw[r] + c_beta / sqrt_n;
        centering[r] = std::min(upper, 0.0);
      }
      result.draws = simulate_max(matrix, sampler, scale, centering, keep_all, sqrt_n, opts.draws,
                                  opts.seed);
      result.value = empirical_quantile(result.draws, 1.0 - opts.alpha + beta);
      if (diag) diag->c_beta_lf = c_beta;
      break;
    }
  }
  return result;
}

ConstraintMatrix build_for_test(const Preference& pref, const MenuIndex& index,
                                std::optional<double> phi) {
  ConstraintMatrix matrix = index.mode() == IndexMode::Complete ? build_R(pref, index)
                                                                : build_R_limited(pref, index);
  if (phi) matrix = augment_R_binary(std::move(matrix), pref, *phi, index);
  return matrix;
}

TestResult run_test(const ConstraintMatrix& matrix, const EstimatedChoice& est,
                    const MenuIndex& index, const InferenceOptions& opts) {
  TestResult result;
  auto [stat, sigma] = test_statistic(matrix, est, index, opts.sigma_floor);
  result.statistic = stat;
  const double sqrt_n = std::sqrt(static_cast<double>(est.n_total));
  result.studentized.resize(matrix.rows.size());
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    const double denom = std::max(sigma[r], opts.sigma_floor);
    result.studentized[r] =
        denom > 0.0 ? sqrt_n * matrix.rows[r].dot(est.pi_hat.values) / denom : 0.0;
  }
  const CriticalValue cv = critical_value_impl(matrix, est, index, opts, sigma, &result);
  result.critical_value = cv.value;
  long exceed = 0;
  for (double draw : cv.draws) exceed += draw > result.statistic;
  result.p_value = static_cast<double>(exceed) / static_cast<double>(cv.draws.size());
  result.reject = result.statistic > result.critical_value;
  return result;
}

}  // namespace

CriticalValue simulate_critical_value(const ConstraintMatrix& matrix, const EstimatedChoice& est,
                                      const MenuIndex& index, const InferenceOptions& opts) {
  const std::vector<double> sigma = studentize_sd(matrix, est, index);
  return critical_value_impl(matrix, est, index, opts, sigma, nullptr);
}

TestResult test_preference(const EstimatedChoice& est, const Preference& pref,
                           const MenuIndex& index, std::optional<double> phi,
                           const InferenceOptions& opts) {
  opts.validate();
  return run_test(build_for_test(pref, index, phi), est, index, opts);
}

TestResult test_preference(const ChoiceDataset& data, const Preference& pref,
                           const MenuIndex& index, std::optional<double> phi,
                           const InferenceOptions& opts) {
  return test_preference(estimate_choice_rule(data, index), pref, index, phi, opts);
}

ConfidenceSet confidence_set(const EstimatedChoice& est, const MenuIndex& index,
                             std::optional<double> phi, const InferenceOptions& opts,
                             int n_threads) {
  opts.validate();
  const int k = index.n_alternatives();
  if (k > 8) throw std::invalid_argument("confidence_set enumerates K! preferences; K <= 8 only");
  const std::vector<Preference> prefs = all_preferences(k);

  // Base matrix once, column permutations per preference. The z* stream is
  // seeded per draw index, so every preference sees the same draws.
  const ConstraintMatrix base =
      index.mode() == IndexMode::Complete ? build_R(prefs.front(), index) : ConstraintMatrix{};

  ConfidenceSet out;
  out.members.phi = phi;
  out.results.resize(prefs.size(), {Preference::identity(k), TestResult{}});
  parallel_for(
      static_cast<long>(prefs.size()),
      [&](long i) {
        const Preference& pref = prefs[i];
        ConstraintMatrix matrix = index.mode() == IndexMode::Complete
                                      ? permute_R(base, pref, index)
                                      : build_R_limited(pref, index);
        if (phi) matrix = augment_R_binary(std::move(matrix), pref, *phi, index);
        out.results[i] = {pref, run_test(matrix, est, index, opts)};
      },
      n_threads);
  for (const auto& [pref, result] : out.results)
    if (!result.reject) out.members.preferences.push_back(pref);
  return out;
}

bool specification_test(const EstimatedChoice& est, const MenuIndex& index,
                        std::optional<double> phi, const InferenceOptions& opts,
                        ConfidenceSet* detail) {
  const ConfidenceSet set = confidence_set(est, index, phi, opts);
  if (detail) *detail = set;
  return set.members.preferences.empty();
}

bool collection_test(const EstimatedChoice& est, const MenuIndex& index,
                     const std::vector<Preference>& collection, std::optional<double> phi,
                     const InferenceOptions& opts, ConfidenceSet* detail) {
  if (collection.empty()) throw std::invalid_argument("collection_test: empty collection");
  const ConfidenceSet set = confidence_set(est, index, phi, opts);
  if (detail) *detail = set;
  for (const Preference& pref : set.members.preferences)
    if (std::find(collection.begin(), collection.end(), pref) != collection.end()) return false;
  return true;
}

bool collection_test(const EstimatedChoice& est, const MenuIndex& index,
                     const std::function<bool(const Preference&)>& predicate,
                     std::optional<double> phi, const InferenceOptions& opts,
                     ConfidenceSet* detail) {
  std::vector<Preference> collection;
  for (const Preference& pref : all_preferences(index.n_alternatives()))
    if (predicate(pref)) collection.push_back(pref);
  return collection_test(est, index, collection, phi, opts, detail);
}

}  // namespace ram
