// Acceptance battery for the exact-test multiple-testing toolkit.
//
// Each numbered check prints exactly one PASS/FAIL line with its elapsed
// time and a short detail; the process exits 0 only if every check passes.
// Tolerances are pinned: exact equality where the algebra guarantees it,
// absolute 1e-9/1e-12 bands for numeric identities, and 3 standard errors
// for Monte Carlo quantities. Each check also carries a wall-clock budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "discfdr/estimator.hpp"
#include "discfdr/exact_tests.hpp"
#include "discfdr/procedures.hpp"
#include "discfdr/rng.hpp"
#include "discfdr/simulate.hpp"

using namespace discfdr;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

// Draws one p-value from a support's null distribution.
double sample_pvalue(const PValueSupport& s, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double cum = 0.0;
  const auto& vals = s.values();
  const auto& mass = s.masses();
  for (std::size_t k = 0; k < vals.size(); ++k) {
    cum += mass[k];
    if (u <= cum) return vals[k];
  }
  return vals.back();
}

// A random usable support (at least two attainable p-value classes).
PValueSupport random_support(std::mt19937_64& rng, int max_n) {
  for (;;) {
    const int n1 = 2 + static_cast<int>(rng() % (max_n - 1));
    const int n2 = 2 + static_cast<int>(rng() % (max_n - 1));
    const int c = 1 + static_cast<int>(rng() % (n1 + n2 - 1));
    PValueSupport s = fet_support(n1, n2, c);
    if (s.values().size() >= 2) return s;
  }
}

// ---------------------------------------------------------------------------
// 1. The 5-vs-5 margins reproduce the hand-computed supports to 4 decimals.
Outcome check_worked_supports() {
  const std::vector<std::pair<int, std::vector<double>>> expected = {
      {1, {1.0}},
      {2, {0.4444, 1.0}},
      {3, {0.1667, 1.0}},
      {4, {0.0476, 0.5238, 1.0}},
  };
  for (const auto& [c, want] : expected) {
    const auto got = fet_support(5, 5, c).values();
    if (got.size() != want.size())
      return {false, "margin c=" + std::to_string(c) + ": wrong size"};
    for (std::size_t k = 0; k < want.size(); ++k)
      if (std::abs(got[k] - want[k]) > 5e-5)
        return {false, "margin c=" + std::to_string(c) + ": value " +
                           fmt(got[k]) + " != " + fmt(want[k])};
  }
  return {true, "4 margins, 4-decimal match"};
}

// ---------------------------------------------------------------------------
// 2. For every margin with group sizes up to 30: the null CDF equals each
//    support point exactly (1e-9), masses form a probability vector, and
//    F(t) <= t on a 1000-point grid.
Outcome check_cdf_identity() {
  long margins = 0;
  double worst_point = 0.0, worst_grid = 0.0;
  for (int n1 = 1; n1 <= 30; ++n1) {
    for (int n2 = 1; n2 <= 30; ++n2) {
      for (int c = 0; c <= n1 + n2; ++c) {
        const PValueSupport s = fet_support(n1, n2, c);
        ++margins;
        const auto& vals = s.values();
        const auto& mass = s.masses();
        double cum = 0.0;
        for (std::size_t k = 0; k < vals.size(); ++k) {
          if (mass[k] <= 0.0)
            return {false, "non-positive mass at (" + std::to_string(n1) +
                               "," + std::to_string(n2) + "," +
                               std::to_string(c) + ")"};
          cum += mass[k];
          worst_point = std::max(worst_point, std::abs(cum - vals[k]));
        }
        if (std::abs(cum - 1.0) > 1e-12)
          return {false, "masses sum to " + fmt(cum)};
        for (int j = 1; j <= 1000; ++j) {
          const double t = j / 1000.0;
          worst_grid = std::max(worst_grid, s.null_cdf(t) - t);
        }
      }
    }
  }
  const bool ok = worst_point <= 1e-9 && worst_grid <= 1e-12;
  return {ok, std::to_string(margins) + " margins; max |F(s)-s| = " +
                  fmt(worst_point) + ", max F(t)-t = " + fmt(worst_grid)};
}

// ---------------------------------------------------------------------------
// 3. When every tuning value lies in the common support of all tests, the
//    trial estimator collapses to the +1 tail-count estimator, exactly.
Outcome check_common_support_reduction() {
  long compared = 0;
  for (int inst = 0; inst < 100; ++inst) {
    auto rng = replicate_rng(1001, static_cast<std::uint64_t>(inst));
    const PValueSupport s = random_support(rng, 10);
    const std::size_t m = 3 + rng() % 28;
    const std::vector<PValueSupport> supports(m, s);
    std::vector<double> pvalues(m);
    for (auto& p : pvalues) p = sample_pvalue(s, rng);
    std::vector<double> taus;
    for (double v : s.values())
      if (v < 1.0 && (rng() & 1)) taus.push_back(v);
    if (taus.empty()) taus.push_back(s.values().front());
    const TuningGrid grid = build_grid(supports, taus);
    for (std::size_t j = 0; j < grid.num_taus(); ++j) {
      ++compared;
      if (beta_trial(pvalues, grid, j) != storey_pi0_s(pvalues, taus[j]))
        return {false, "capped mismatch at instance " + std::to_string(inst)};
      if (beta_trial_raw(pvalues, grid, j) !=
          storey_pi0_s_raw(pvalues, taus[j]))
        return {false, "raw mismatch at instance " + std::to_string(inst)};
    }
  }
  return {true, "100 instances, " + std::to_string(compared) +
                    " exact equalities"};
}

// ---------------------------------------------------------------------------
// 4. The estimator never falls below its tau-substituted-normalizer variant.
Outcome check_dominance() {
  long failures = 0;
  for (int inst = 0; inst < 10000; ++inst) {
    auto rng = replicate_rng(2001, static_cast<std::uint64_t>(inst));
    const std::size_t m = 2 + rng() % 24;
    std::vector<PValueSupport> supports;
    std::vector<double> pvalues;
    double nu = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      supports.push_back(random_support(rng, 8));
      pvalues.push_back(sample_pvalue(supports.back(), rng));
      nu = std::max(nu, supports.back().min_value());
    }
    const TuningGrid grid = build_grid(supports, default_taus(nu));
    if (pi0_hat_H(pvalues, grid).pi0_hat <
        pi0_tau_substituted(pvalues, grid).pi0_hat)
      ++failures;
  }
  return {failures == 0,
          "10000 instances, " + std::to_string(failures) + " violations"};
}

// ---------------------------------------------------------------------------
// 5. Raising any single p-value to its next attainable class never lowers
//    the estimate (the grid is margin-driven, so it stays fixed).
Outcome check_monotonicity() {
  long mutations = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    auto rng = replicate_rng(3001, static_cast<std::uint64_t>(inst));
    const std::size_t m = 2 + rng() % 14;
    std::vector<PValueSupport> supports;
    std::vector<double> pvalues;
    double nu = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      supports.push_back(random_support(rng, 8));
      pvalues.push_back(sample_pvalue(supports.back(), rng));
      nu = std::max(nu, supports.back().min_value());
    }
    const TuningGrid grid = build_grid(supports, default_taus(nu));
    const double base = pi0_hat_H(pvalues, grid).pi0_hat;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& vals = supports[i].values();
      const auto it =
          std::upper_bound(vals.begin(), vals.end(), pvalues[i]);
      if (it == vals.end()) continue;  // already at the top class
      std::vector<double> bumped = pvalues;
      bumped[i] = *it;
      ++mutations;
      if (pi0_hat_H(bumped, grid).pi0_hat < base)
        return {false, "decrease at instance " + std::to_string(inst) +
                           ", test " + std::to_string(i)};
    }
  }
  return {true, "1000 instances, " + std::to_string(mutations) +
                    " single-p bumps"};
}

// ---------------------------------------------------------------------------
// 6. All-null sampling: the reciprocal of every leave-one-out estimate stays
//    within 1/pi0 + 3 SE, and the per-tau raw reciprocals do as well.
Outcome check_reciprocal_bound() {
  std::string detail;
  for (std::size_t m : {2u, 4u, 6u}) {
    SimScenario sc;
    sc.m = m;
    sc.pi0 = 1.0;
    sc.n1 = 5;
    sc.n2 = 5;
    sc.reps = 100000;
    sc.seed = 600 + m;
    const int cycle[3] = {2, 3, 4};
    for (std::size_t i = 0; i < m; ++i) sc.margins.push_back(cycle[i % 3]);
    const ConditionTwoReport rep = check_condition_two(sc);
    if (!rep.capped_ok)
      return {false, "capped bound violated at m=" + std::to_string(m)};
    if (!rep.per_tau_ok)
      return {false, "raw per-tau bound violated at m=" + std::to_string(m)};
    double worst = 0.0;
    for (double v : rep.inv_mean) worst = std::max(worst, v);
    detail += "m=" + std::to_string(m) + " max " + fmt(worst) + "; ";
  }
  // Informative margins exercise the raw per-tau bound away from equality.
  SimScenario sc;
  sc.m = 4;
  sc.pi0 = 1.0;
  sc.n1 = 5;
  sc.n2 = 5;
  sc.reps = 100000;
  sc.seed = 611;
  sc.margins = {4, 4, 4, 4};
  sc.taus = {0.1, 0.46};
  const ConditionTwoReport rep = check_condition_two(sc);
  if (!rep.per_tau_ok)
    return {false, "raw per-tau bound violated on informative margins"};
  double worst = 0.0;
  for (const auto& row : rep.inv_beta_mean)
    for (double v : row) worst = std::max(worst, v);
  detail += "informative raw max " + fmt(worst) + " vs 1";
  return {true, detail};
}

// ---------------------------------------------------------------------------
// 7. E[1/(1+B)], B ~ Binomial(m0-1, 1-eta): closed form vs direct summation
//    to 1e-12, never above 1/(m0(1-eta)).
Outcome check_reciprocal_moment() {
  double worst_gap = 0.0, worst_slack = 0.0;
  for (std::size_t m0 = 1; m0 <= 50; ++m0) {
    for (int j = 1; j <= 99; ++j) {
      const double eta = j / 100.0;
      const Lemma1Check chk = lemma1_bound_check(m0, eta);
      const double gap = std::abs(chk.closed_form - chk.direct_sum) /
                         std::max(1.0, std::abs(chk.closed_form));
      worst_gap = std::max(worst_gap, gap);
      worst_slack = std::max(worst_slack, chk.closed_form - chk.bound);
    }
  }
  const bool ok = worst_gap <= 1e-12 && worst_slack <= 1e-15;
  return {ok, "4950 cells; max relative gap " + fmt(worst_gap) +
                  ", max bound excess " + fmt(worst_slack)};
}

// ---------------------------------------------------------------------------
// 8. FDR battery: the adaptive procedure with the plug-in estimate keeps
//    FDR <= alpha + 3 SE; plain step-up keeps FDR <= pi0 * alpha + 3 SE.
Outcome check_fdr_battery() {
  std::string detail;
  int cell = 0;
  for (double pi0 : {0.5, 0.8, 1.0}) {
    SimScenario sc;
    sc.m = 200;
    sc.pi0 = pi0;
    sc.n1 = 20;
    sc.n2 = 20;
    sc.psi = 4.0;
    sc.alpha = 0.05;
    sc.reps = 2000;
    sc.seed = 801 + cell++;
    const SimResult adaptive = run_fdr_experiment(sc, Procedure::abh_h);
    const double adaptive_bound = sc.alpha + 3.0 * adaptive.fdr_se;
    if (adaptive.fdr_mean > adaptive_bound)
      return {false, "adaptive fdr " + fmt(adaptive.fdr_mean) + " > " +
                         fmt(adaptive_bound) + " at pi0=" + fmt(pi0)};
    const SimResult plain = run_fdr_experiment(sc, Procedure::bh);
    const double plain_bound = pi0 * sc.alpha + 3.0 * plain.fdr_se;
    if (plain.fdr_mean > plain_bound)
      return {false, "plain fdr " + fmt(plain.fdr_mean) + " > " +
                         fmt(plain_bound) + " at pi0=" + fmt(pi0)};
    detail += "pi0=" + fmt(pi0) + ": " + fmt(adaptive.fdr_mean) + "/" +
              fmt(plain.fdr_mean) + "; ";
  }
  return {true, detail + "(adaptive/plain means)"};
}

// ---------------------------------------------------------------------------
// 9. Bias oracles: the raw trial-estimator mean matches its closed-form
//    expectation within 3 SE on finite columns, and the tail-count
//    estimator's empirical bias never drops 3 SE below the uniform floor.
Outcome check_bias_oracles() {
  struct Case {
    SimScenario sc;
    const char* tag;
  };
  std::vector<Case> cases(2);
  cases[0].sc.m = 4;
  cases[0].sc.pi0 = 1.0;
  cases[0].sc.n1 = 5;
  cases[0].sc.n2 = 5;
  cases[0].sc.margins = {4, 4, 4, 4};
  cases[0].sc.taus = {0.1, 0.46};
  cases[0].sc.seed = 901;
  cases[0].tag = "all-null";
  cases[1].sc.m = 6;
  cases[1].sc.pi0 = 0.6;
  cases[1].sc.n1 = 8;
  cases[1].sc.n2 = 8;
  cases[1].sc.psi = 6.0;
  cases[1].sc.margins = {6, 7, 8, 6, 7, 8};
  cases[1].sc.taus = {0.1, 0.2};
  cases[1].sc.seed = 902;
  cases[1].tag = "mixed";

  std::string detail;
  for (auto& [sc, tag] : cases) {
    sc.reps = 10000;
    const BiasReport rep = bias_experiment(sc);
    int finite = 0;
    for (std::size_t j = 0; j < rep.taus.size(); ++j) {
      if (!std::isfinite(rep.beta_expected[j])) continue;
      ++finite;
      const double gap = std::abs(rep.beta_mean[j] - rep.beta_expected[j]);
      if (gap > 3.0 * rep.beta_se[j])
        return {false, std::string(tag) + ": |mean - expectation| = " +
                           fmt(gap) + " > 3 SE at tau " + fmt(rep.taus[j])};
      if (rep.storey_s_bias[j] - rep.b1[j] < -3.0 * rep.storey_s_se[j])
        return {false, std::string(tag) +
                           ": tail-count bias below uniform floor at tau " +
                           fmt(rep.taus[j])};
      if (rep.b2[j] < rep.b1[j] - 1e-15)
        return {false, std::string(tag) + ": oracle ordering b2 < b1"};
    }
    detail += std::string(tag) + ": " + std::to_string(finite) +
              " finite columns ok; ";
  }
  return {true, detail};
}

// ---------------------------------------------------------------------------
// 10. Step-up procedures against an exhaustive linear-scan oracle; the
//     unit plug-in reproduces the base procedure bit-for-bit; the summed-CDF
//     variant rejects a superset.
Outcome check_procedure_oracles() {
  const double alphas[4] = {0.01, 0.05, 0.1, 0.2};
  for (int inst = 0; inst < 10000; ++inst) {
    auto rng = replicate_rng(4001, static_cast<std::uint64_t>(inst));
    const std::size_t m = 1 + rng() % 12;
    const double alpha = alphas[inst % 4];
    std::vector<PValueSupport> supports;
    std::vector<double> pvalues;
    for (std::size_t i = 0; i < m; ++i) {
      supports.push_back(random_support(rng, 6));
      pvalues.push_back(sample_pvalue(supports.back(), rng));
    }

    const RejectionReport base = bh(pvalues, alpha);

    // Exhaustive oracle: sort, take the largest rank whose decision
    // statistic min(1, m p_(k) / k) sits at or below alpha, reject that many
    // smallest p-values. The statistic is spelled the way the contract
    // defines rejection (adjusted <= alpha); the algebraically equal
    // p_(k) <= k alpha / m rounds differently and flips exact ties by 1 ulp.
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return pvalues[a] != pvalues[b] ? pvalues[a] < pvalues[b] : a < b;
    });
    std::size_t k_oracle = 0;
    for (std::size_t k = m; k >= 1; --k) {
      const double statistic = std::min(
          1.0, static_cast<double>(m) * pvalues[idx[k - 1]] /
                   static_cast<double>(k));
      if (statistic <= alpha) {
        k_oracle = k;
        break;
      }
    }
    std::vector<std::size_t> rej_oracle(idx.begin(), idx.begin() + k_oracle);
    std::sort(rej_oracle.begin(), rej_oracle.end());
    if (base.k_hat != k_oracle || base.rejected != rej_oracle)
      return {false, "linear-scan mismatch at instance " +
                         std::to_string(inst)};

    // Plug-in estimate of exactly 1 must not perturb a single bit.
    const RejectionReport unit = adaptive_bh(pvalues, 1.0, alpha);
    if (unit.adjusted != base.adjusted || unit.k_hat != base.k_hat ||
        unit.rejected != base.rejected)
      return {false, "unit plug-in differs at instance " +
                         std::to_string(inst)};

    // Summed-CDF cutoffs are never smaller, so rejections are a superset.
    const RejectionReport summed = bhh(pvalues, supports, alpha);
    if (!std::includes(summed.rejected.begin(), summed.rejected.end(),
                       base.rejected.begin(), base.rejected.end()))
      return {false, "summed-CDF variant missed a rejection at instance " +
                         std::to_string(inst)};
  }
  return {true, "10000 instances, three procedure checks each"};
}

}  // namespace

int main() {
  struct Row {
    const char* name;
    Outcome (*fn)();
    double budget_s;
  };
  const Row rows[] = {
      {"worked-example supports", check_worked_supports, 120},
      {"null-CDF identity and super-uniformity", check_cdf_identity, 60},
      {"common-support reduction", check_common_support_reduction, 120},
      {"dominance over substituted normalizer", check_dominance, 120},
      {"monotone in each p-value", check_monotonicity, 120},
      {"reciprocal-estimate bound, all-null", check_reciprocal_bound, 300},
      {"reciprocal-moment closed form", check_reciprocal_moment, 120},
      {"FDR control battery", check_fdr_battery, 600},
      {"bias oracle agreement", check_bias_oracles, 300},
      {"step-up procedure oracles", check_procedure_oracles, 120},
  };

  int failed = 0;
  int number = 0;
  for (const Row& row : rows) {
    ++number;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = row.fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > row.budget_s) {
      out.ok = false;
      out.detail += " [over budget " + fmt(row.budget_s) + "s]";
    }
    if (!out.ok) ++failed;
    std::printf("%2d. %-42s %s  (%.1fs)  %s\n", number, row.name,
                out.ok ? "PASS" : "FAIL", elapsed, out.detail.c_str());
    std::fflush(stdout);
  }
  if (failed == 0) {
    std::printf("all %d checks passed\n",
                static_cast<int>(std::size(rows)));
    return 0;
  }
  std::printf("%d check(s) failed\n", failed);
  return 1;
}
