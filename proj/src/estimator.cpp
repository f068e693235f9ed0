#include "discfdr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "discfdr/errors.hpp"

namespace discfdr {

TuningGrid build_grid(const std::vector<PValueSupport>& supports,
                      std::vector<double> taus) {
  if (supports.empty()) throw config_error("build_grid: no supports");
  if (taus.empty()) throw config_error("build_grid: empty tuning grid");

  double nu = 0.0;
  for (const auto& s : supports) nu = std::max(nu, s.min_value());
  if (nu >= 1.0)
    throw config_error(
        "build_grid: some support contains only the value 1, so no tuning "
        "value in [nu, 1) exists");

  double prev = 0.0;
  for (double t : taus) {
    if (t < prev) throw config_error("build_grid: tuning values must be non-decreasing");
    if (t < nu || t >= 1.0) {
      std::ostringstream os;
      os << "build_grid: tau = " << t << " outside [nu, 1) with nu = " << nu;
      throw config_error(os.str());
    }
    prev = t;
  }

  TuningGrid g;
  g.nu = nu;
  g.taus = std::move(taus);
  const std::size_t m = supports.size();
  const std::size_t n = g.taus.size();
  g.lambdas.assign(m, std::vector<double>(n));
  g.etas.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& v = supports[i].values();
    for (std::size_t j = 0; j < n; ++j) {
      // Smallest support value >= tau_j; exists because v.back() == 1 > tau.
      auto it = std::lower_bound(v.begin(), v.end(), g.taus[j]);
      g.lambdas[i][j] = *it;
      g.etas[j] = std::max(g.etas[j], *it);
    }
  }
  return g;
}

std::vector<double> default_taus(double nu) {
  if (!(nu < 1.0)) throw config_error("default_taus: nu must be < 1");
  std::vector<double> taus;
  for (int j = 1; j <= 19; ++j) {
    double t = std::max(nu, j / 20.0);
    if (taus.empty() || t != taus.back()) taus.push_back(t);
  }
  return taus;
}

namespace {

// Shared core: numerator 1 + sum_i I(p_i > lambda_ij) * (1-tau)/(1-lambda_ij),
// denominator m * (1 - eta_j). Computing the per-test weight as the quotient
// (1-tau)/(1-lambda) makes the weight exactly 1.0 whenever lambda == tau, so
// the reduction to the single-threshold estimator is bit-exact.
double beta_core(const std::vector<double>& pvalues, const TuningGrid& grid,
                 std::size_t j, bool substitute_tau) {
  const std::size_t m = grid.num_tests();
  if (pvalues.size() != m)
    throw config_error("trial estimator: p-value count does not match grid");
  const double tau = grid.taus[j];
  const double eta = substitute_tau ? tau : grid.etas[j];
  double acc = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lambda = grid.lambdas[i][j];
    if (pvalues[i] > lambda)
      acc += substitute_tau ? 1.0 : (1.0 - tau) / (1.0 - lambda);
  }
  return acc / (static_cast<double>(m) * (1.0 - eta));
}

}  // namespace

double beta_trial_raw(const std::vector<double>& pvalues, const TuningGrid& grid,
                      std::size_t j) {
  if (grid.etas[j] == 1.0) return std::numeric_limits<double>::infinity();
  return beta_core(pvalues, grid, j, false);
}

double beta_trial(const std::vector<double>& pvalues, const TuningGrid& grid,
                  std::size_t j) {
  if (grid.etas[j] == 1.0) return 1.0;
  return std::min(1.0, beta_core(pvalues, grid, j, false));
}

Pi0Estimate pi0_hat_H(const std::vector<double>& pvalues, const TuningGrid& grid) {
  if (grid.num_taus() == 0) throw config_error("pi0_hat_H: empty tuning grid");
  Pi0Estimate est;
  est.method = "H";
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.num_taus(); ++j) {
    est.betas.push_back(beta_trial(pvalues, grid, j));
    sum += est.betas.back();
  }
  est.pi0_hat = sum / static_cast<double>(grid.num_taus());
  return est;
}

namespace {

void check_tau(double tau) {
  if (!(tau >= 0.0 && tau < 1.0))
    throw config_error("tail-count estimator: tau must lie in [0, 1)");
}

double tail_count(const std::vector<double>& pvalues, double tau) {
  if (pvalues.empty()) throw config_error("tail-count estimator: no p-values");
  double k = 0.0;
  for (double p : pvalues)
    if (p > tau) k += 1.0;
  return k;
}

}  // namespace

double storey_pi0_raw(const std::vector<double>& pvalues, double tau) {
  check_tau(tau);
  return tail_count(pvalues, tau) /
         (static_cast<double>(pvalues.size()) * (1.0 - tau));
}

double storey_pi0_s_raw(const std::vector<double>& pvalues, double tau) {
  check_tau(tau);
  return (1.0 + tail_count(pvalues, tau)) /
         (static_cast<double>(pvalues.size()) * (1.0 - tau));
}

double storey_pi0(const std::vector<double>& pvalues, double tau) {
  return std::min(1.0, storey_pi0_raw(pvalues, tau));
}

double storey_pi0_s(const std::vector<double>& pvalues, double tau) {
  return std::min(1.0, storey_pi0_s_raw(pvalues, tau));
}

double beta_tau_substituted(const std::vector<double>& pvalues,
                            const TuningGrid& grid, std::size_t j) {
  return std::min(1.0, beta_core(pvalues, grid, j, true));
}

Pi0Estimate pi0_tau_substituted(const std::vector<double>& pvalues,
                                const TuningGrid& grid) {
  if (grid.num_taus() == 0)
    throw config_error("pi0_tau_substituted: empty tuning grid");
  Pi0Estimate est;
  est.method = "tau_subst";
  double sum = 0.0;
  for (std::size_t j = 0; j < grid.num_taus(); ++j) {
    est.betas.push_back(beta_tau_substituted(pvalues, grid, j));
    sum += est.betas.back();
  }
  est.pi0_hat = sum / static_cast<double>(grid.num_taus());
  return est;
}

BiasOracles bias_oracles(const std::vector<PValueSupport>& supports,
                         const std::vector<double>& alt_odds,
                         const std::vector<bool>& is_null,
                         const TuningGrid& grid) {
  const std::size_t m = supports.size();
  if (is_null.size() != m)
    throw config_error("bias_oracles: truth labels do not match supports");
  if (alt_odds.size() != m) {
    bool any_false = std::find(is_null.begin(), is_null.end(), false) != is_null.end();
    if (any_false || !alt_odds.empty())
      throw config_error("bias_oracles: alternative odds do not match supports");
  }
  if (grid.num_tests() != m)
    throw config_error("bias_oracles: grid does not match supports");
  for (std::size_t i = 0; i < m; ++i)
    if (!is_null[i] && !(alt_odds[i] > 0.0))
      throw config_error("bias_oracles: false-null test " + std::to_string(i) +
                         " has no valid alternative odds ratio");

  std::size_t m0 = 0;
  for (bool b : is_null) m0 += b ? 1 : 0;

  BiasOracles out;
  out.pi0 = static_cast<double>(m0) / static_cast<double>(m);
  const std::size_t n = grid.num_taus();
  out.b1.resize(n);
  out.b2.resize(n);
  out.e_beta.resize(n);
  out.bias_beta.resize(n);

  for (std::size_t j = 0; j < n; ++j) {
    const double tau = grid.taus[j];
    const double md = static_cast<double>(m);
    double b1 = 1.0 / (md * (1.0 - tau));
    double b2_extra = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (is_null[i]) {
        b2_extra += (tau - supports[i].null_cdf(tau)) / (md * (1.0 - tau));
      } else {
        b1 += (1.0 - supports[i].alt_cdf(alt_odds[i], tau)) / (md * (1.0 - tau));
      }
    }
    out.b1[j] = b1;
    out.b2[j] = b1 + b2_extra;

    const double eta = grid.etas[j];
    if (eta == 1.0) {
      out.e_beta[j] = std::numeric_limits<double>::infinity();
      out.bias_beta[j] = std::numeric_limits<double>::infinity();
      continue;
    }
    double tail = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double lambda = grid.lambdas[i][j];
      const double cdf = is_null[i] ? supports[i].null_cdf(lambda)
                                    : supports[i].alt_cdf(alt_odds[i], lambda);
      tail += (1.0 - cdf) / (1.0 - lambda);
    }
    out.e_beta[j] = (1.0 + (1.0 - tau) * tail) / (md * (1.0 - eta));
    out.bias_beta[j] = out.e_beta[j] - out.pi0;
  }
  return out;
}

}  // namespace discfdr
