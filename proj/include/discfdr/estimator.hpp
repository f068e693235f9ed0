#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "discfdr/exact_tests.hpp"

namespace discfdr {

// Per-test thresholds induced by a tuning grid on heterogeneous supports.
//
// For tuning value tau_j and test i, lambda(i,j) is the smallest support
// value of test i that is >= tau_j (it exists: supports end at 1), and
// eta_j = max_i lambda(i,j). nu = max_i min(S_i) is the smallest usable
// tuning value: below it some test has no support point in [tau, 1] other
// than values below tau.
struct TuningGrid {
  std::vector<double> taus;                  // non-decreasing, in [nu, 1)
  std::vector<std::vector<double>> lambdas;  // [test][tau]
  std::vector<double> etas;                  // per tau
  double nu = 0.0;

  std::size_t num_tests() const { return lambdas.size(); }
  std::size_t num_taus() const { return taus.size(); }
};

// Throws config_error if taus is empty, decreasing, or any tau is outside
// [nu, 1).
TuningGrid build_grid(const std::vector<PValueSupport>& supports,
                      std::vector<double> taus);

// Default tuning values: max(nu, 0.05*j) for j = 1..19, deduplicated.
// Requires nu < 1.
std::vector<double> default_taus(double nu);

struct Pi0Estimate {
  std::vector<double> betas;  // per tuning value (empty for single-tau forms)
  double pi0_hat = 1.0;
  std::string method;         // "H", "storey", "storey_s", "tau_subst"
};

// Trial estimator at grid column j, truncated to 1. When eta_j = 1 the
// normalizing factor degenerates and the value is defined as 1.
double beta_trial(const std::vector<double>& pvalues, const TuningGrid& grid,
                  std::size_t j);
// Untruncated variant used by bias diagnostics; +infinity when eta_j = 1.
double beta_trial_raw(const std::vector<double>& pvalues, const TuningGrid& grid,
                      std::size_t j);

// Mean of the trial estimators over the grid.
Pi0Estimate pi0_hat_H(const std::vector<double>& pvalues, const TuningGrid& grid);

// Tail-count estimators at a single threshold, truncated to 1.
// storey_pi0:   #{p > tau} / (m (1 - tau))
// storey_pi0_s: (1 + #{p > tau}) / (m (1 - tau))
double storey_pi0(const std::vector<double>& pvalues, double tau);
double storey_pi0_s(const std::vector<double>& pvalues, double tau);
double storey_pi0_raw(const std::vector<double>& pvalues, double tau);
double storey_pi0_s_raw(const std::vector<double>& pvalues, double tau);

// Comparison estimator for the dominance property: the trial-estimator
// formula with the per-test normalizers 1/(1-lambda(i,j)) and 1/(1-eta_j)
// both replaced by 1/(1-tau_j), indicator events unchanged. Since
// lambda(i,j) >= tau_j and eta_j >= tau_j, beta_trial dominates this
// term by term. When every lambda(i,j) equals tau_j it coincides with
// storey_pi0_s(tau_j).
double beta_tau_substituted(const std::vector<double>& pvalues,
                            const TuningGrid& grid, std::size_t j);
Pi0Estimate pi0_tau_substituted(const std::vector<double>& pvalues,
                                const TuningGrid& grid);

// Closed-form expectations for fixed supports and truth labels.
// For each grid column j (conditional on margins; pi0 = m0/m):
//   b1[j]: bias of the untruncated storey_pi0_s if every null p-value were
//          exactly uniform: 1/(m(1-tau)) + sum_F (1 - G_i(tau)) / (m(1-tau)).
//   b2[j]: its bias under the actual discrete nulls:
//          b1[j] + sum_T (tau - F_i(tau)) / (m(1-tau)).
//   e_beta[j]: expectation of the untruncated trial estimator,
//          1/(m(1-eta)) + (1-tau)/(m(1-eta)) *
//            [ sum_T (1-F_i(lambda_ij))/(1-lambda_ij)
//            + sum_F (1-G_i(lambda_ij))/(1-lambda_ij) ]
//          (+infinity when eta_j = 1).
//   bias_beta[j]: e_beta[j] - m0/m.
// F_i is the null CDF of test i; G_i the odds-ratio-psi_i CDF. alt_odds is
// consulted only at false-null indices.
struct BiasOracles {
  std::vector<double> b1;
  std::vector<double> b2;
  std::vector<double> e_beta;
  std::vector<double> bias_beta;
  double pi0 = 1.0;  // m0/m implied by the labels
};

BiasOracles bias_oracles(const std::vector<PValueSupport>& supports,
                         const std::vector<double>& alt_odds,
                         const std::vector<bool>& is_null,
                         const TuningGrid& grid);

}  // namespace discfdr
