#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "discfdr/estimator.hpp"
#include "discfdr/exact_tests.hpp"

namespace discfdr {

// How the column totals c_i = x1_i + x2_i are treated across replicates.
//   fixed:         margins drawn once (or supplied), held for every replicate;
//                  cell counts are redrawn conditionally on the margin.
//   unconditional: both binomial cells are redrawn every replicate, so the
//                  margins (and hence the supports) vary.
enum class MarginMode { fixed, unconditional };

enum class Procedure { bh, abh_h, abh_storey, bhh, abhh_h };

Procedure procedure_from_string(const std::string& name);
std::string to_string(Procedure p);
std::string to_string(MarginMode mode);

struct SimScenario {
  std::size_t m = 0;       // number of tests per replicate
  double pi0 = 1.0;        // P(test is null)
  int n1 = 0;              // group sizes, shared by all tests
  int n2 = 0;
  double psi = 1.0;        // odds ratio under the alternative
  // Explicit per-group success probabilities under the alternative; when
  // absent, group 1's probability is q_base shifted to odds ratio psi.
  std::optional<std::pair<double, double>> effect_probs;
  double q_base = 0.5;     // null success probability, both groups
  double alpha = 0.05;
  std::vector<double> taus;     // empty => default grid from nu
  std::size_t reps = 0;
  std::uint64_t seed = 1;
  MarginMode margin_mode = MarginMode::fixed;
  std::vector<int> margins;     // optional designed margins (fixed mode only)
  double storey_tau = 0.5;      // threshold for the single-tau competitor

  void validate() const;  // throws config_error
};

// One simulated dataset. In unconditional mode, tests whose margin admits at
// most one attainable p-value class (c <= 1, or a single support point) are
// dropped, the same cleaning applied to real data; dropped counts how many.
struct Dataset {
  std::vector<CountPair> counts;
  std::vector<bool> is_null;    // true = null hypothesis holds
  std::vector<double> pvalues;
  std::vector<PValueSupport> supports;
  std::size_t dropped = 0;
};

// Sampling engine for a scenario. Margins (fixed mode) and the reference
// label assignment are drawn once at construction from a setup stream;
// replicate i then uses its own counter-based stream, so datasets are
// reproducible and independent of generation order. Not thread-safe: the
// unconditional support cache mutates on use.
class SimEngine {
 public:
  explicit SimEngine(SimScenario scenario);

  // Labels freshly Bernoulli(pi0) within the replicate's stream.
  Dataset generate(std::size_t replicate) const;
  // Labels held at the engine's reference assignment (conditional studies).
  Dataset generate_fixed_labels(std::size_t replicate) const;

  const SimScenario& scenario() const { return scenario_; }
  const std::vector<int>& fixed_margins() const { return margins_; }
  const std::vector<PValueSupport>& fixed_supports() const { return supports_; }
  const std::vector<bool>& reference_labels() const { return labels_; }
  // Odds ratio the alternative cells are actually drawn under (psi, or the
  // ratio implied by explicit effect probabilities).
  double effect_odds() const { return psi_eff_; }
  // Tuning grid over the fixed supports: scenario taus clamped up to nu,
  // or the default grid when none were given.
  const TuningGrid& fixed_grid() const;

 private:
  Dataset generate_impl(std::size_t replicate, bool fresh_labels) const;
  const PValueSupport& support_for_margin(int c) const;

  SimScenario scenario_;
  double q1_alt_ = 0.5, q2_alt_ = 0.5, psi_eff_ = 1.0;
  std::vector<int> margins_;                 // fixed mode
  std::vector<PValueSupport> supports_;      // fixed mode
  std::vector<std::vector<double>> null_pmf_;  // per test, fixed mode
  std::vector<std::vector<double>> alt_pmf_;
  // Unconditional mode: cell pmf tables Bin(n_g, q) per group and label.
  std::vector<double> cell_null1_, cell_null2_, cell_alt1_, cell_alt2_;
  std::vector<bool> labels_;                 // reference assignment
  TuningGrid grid_;                          // fixed mode
  mutable std::unordered_map<int, PValueSupport> margin_cache_;
};

// Convenience wrapper: one dataset without keeping an engine around.
Dataset gen_dataset(const SimScenario& scenario, std::size_t replicate);

struct SimResult {
  std::string procedure;
  std::size_t reps = 0;
  double fdr_mean = 0, fdr_se = 0;      // mean of V / max(R, 1)
  double power_mean = 0, power_se = 0;  // mean of |true rejections| / m1, over
                                        // replicates with m1 >= 1
  std::size_t power_reps = 0;
  double pi0_hat_mean = 0, pi0_hat_se = 0;  // plug-in estimate (1 for the
                                            // non-adaptive procedures)
  double pi0_true_mean = 0;                 // mean realized m0 / m
  double pi0_hat_bias = 0;                  // pi0_hat_mean - pi0_true_mean
  std::vector<std::uint32_t> m0s, Vs, Rs;   // per replicate
};

// Full FDR/power study for one procedure. pi0_override forces the plug-in
// null-proportion estimate (testing hook; leave empty for the real run).
SimResult run_fdr_experiment(const SimScenario& scenario, Procedure procedure,
                             std::optional<double> pi0_override = {});

// Conditional bias study: margins and labels fixed, so the per-tau oracle
// expectations are exact targets. Raw (uncapped) estimators are compared,
// since capping at 1 changes the mean. Requires fixed margin mode.
struct BiasReport {
  std::size_t reps = 0;
  double pi0 = 1;                     // realized m0 / m under the fixed labels
  std::vector<double> taus, etas;
  // Trial estimator at each tau vs. its expectation. Columns with eta = 1
  // have infinite raw values and are skipped (mean/se reported as infinity).
  std::vector<double> beta_mean, beta_se, beta_expected;
  // Empirical bias of the raw single-tau estimator with the +1 numerator,
  // mean - pi0, against its exact oracle b2 and the uniform-null floor b1.
  std::vector<double> storey_s_bias, storey_s_se;
  std::vector<double> b1, b2;
  // Capped estimators, for the conservativeness ordering (same datasets).
  double pi0_h_mean = 0, pi0_h_se = 0;
  double comparator_mean = 0, comparator_se = 0;  // tau-substituted normalizer
};

BiasReport bias_experiment(const SimScenario& scenario);

// Conditional check of the leave-one-out reciprocal-moment bound
// E[1 / pi0_hat_(k)] <= 1 / pi0 for null k. Margins and labels fixed;
// enumeration cost grows fast, so m is capped at 10. The per-tau entries
// additionally track the uncapped trial estimator's reciprocal moment,
// whose bound is what the supporting argument actually controls.
struct ConditionTwoReport {
  std::size_t reps = 0;
  double pi0 = 1;
  double bound = 1;                        // 1 / pi0
  std::vector<std::size_t> null_indices;   // the k checked
  std::vector<double> inv_mean, inv_se;    // E[1 / pi0_hat_(k)], capped
  std::vector<std::vector<double>> inv_beta_mean, inv_beta_se;  // [k][tau], raw
  bool capped_ok = true;   // every k: inv_mean <= bound + 3 se
  bool per_tau_ok = true;  // every (k, tau): inv_beta_mean <= bound + 3 se
};

ConditionTwoReport check_condition_two(const SimScenario& scenario);

// E[1 / (1 + B)] for B ~ Binomial(m0 - 1, 1 - eta): closed form
// (1 - eta^m0) / (m0 (1 - eta)), the same by direct pmf summation, and the
// ceiling 1 / (m0 (1 - eta)) it never exceeds.
struct Lemma1Check {
  double closed_form = 0;
  double direct_sum = 0;
  double bound = 0;
};

Lemma1Check lemma1_bound_check(std::size_t m0, double eta);

}  // namespace discfdr
