#include "discfdr/simulate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <utility>

#include "discfdr/errors.hpp"
#include "discfdr/procedures.hpp"
#include "discfdr/rng.hpp"

namespace discfdr {

namespace {

constexpr std::uint64_t kSetupStream = ~std::uint64_t{0};

double lchoose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Binomial(n, q) pmf, log-space then renormalized.
std::vector<double> binom_pmf(int n, double q) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  const double lq = std::log(q), l1q = std::log1p(-q);
  double total = 0.0;
  for (int k = 0; k <= n; ++k) {
    pmf[k] = std::exp(lchoose(n, k) + k * lq + (n - k) * l1q);
    total += pmf[k];
  }
  for (double& v : pmf) v /= total;
  return pmf;
}

// Inverse-CDF draw from a pmf table; u in [0, 1).
int sample_index(const std::vector<double>& pmf, double u) {
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < pmf.size(); ++k) {
    cum += pmf[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(pmf.size()) - 1;
}

// Streaming mean / standard error of the mean.
struct Accum {
  double sum = 0.0, sumsq = 0.0;
  std::size_t n = 0;

  void add(double x) {
    sum += x;
    sumsq += x * x;
    ++n;
  }
  double mean() const { return n == 0 ? 0.0 : sum / static_cast<double>(n); }
  double se() const {
    if (n < 2) return 0.0;
    const double mu = mean();
    const double var =
        std::max(0.0, (sumsq - static_cast<double>(n) * mu * mu) /
                          static_cast<double>(n - 1));
    return std::sqrt(var / static_cast<double>(n));
  }
};

// A margin is usable when it survives the c <= 1 cleaning rule and its
// support has a tuning value below 1 (at least two p-value classes).
bool margin_usable(const PValueSupport& s, int c) {
  return c >= 2 && s.values().size() >= 2;
}

// Grid for one dataset: scenario tuning values clamped up to nu (the
// smallest usable value for these supports), or the default grid.
TuningGrid scenario_grid(const std::vector<PValueSupport>& supports,
                         const SimScenario& sc) {
  double nu = 0.0;
  for (const auto& s : supports) nu = std::max(nu, s.min_value());
  std::vector<double> taus = sc.taus;
  if (taus.empty()) {
    taus = default_taus(nu);
  } else {
    for (double& t : taus) t = std::max(t, nu);
  }
  return build_grid(supports, std::move(taus));
}

}  // namespace

Procedure procedure_from_string(const std::string& name) {
  std::string tag = name;
  std::transform(tag.begin(), tag.end(), tag.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (tag == "bh") return Procedure::bh;
  if (tag == "abh_h") return Procedure::abh_h;
  if (tag == "abh_storey") return Procedure::abh_storey;
  if (tag == "bhh") return Procedure::bhh;
  if (tag == "abhh_h") return Procedure::abhh_h;
  throw config_error("unknown procedure '" + name +
                     "' (expected bh, abh_h, abh_storey, bhh, or abhh_h)");
}

std::string to_string(Procedure p) {
  switch (p) {
    case Procedure::bh: return "bh";
    case Procedure::abh_h: return "abh_h";
    case Procedure::abh_storey: return "abh_storey";
    case Procedure::bhh: return "bhh";
    case Procedure::abhh_h: return "abhh_h";
  }
  return "bh";
}

std::string to_string(MarginMode mode) {
  return mode == MarginMode::fixed ? "fixed" : "unconditional";
}

void SimScenario::validate() const {
  if (m < 1) throw config_error("m must be at least 1");
  if (reps < 1) throw config_error("reps must be at least 1");
  if (!(pi0 > 0.0 && pi0 <= 1.0)) throw config_error("pi0 must lie in (0, 1]");
  if (n1 < 1 || n2 < 1) throw config_error("group sizes must be at least 1");
  if (!(psi > 0.0)) throw config_error("psi must be positive");
  if (effect_probs) {
    const auto [q1, q2] = *effect_probs;
    if (!(q1 > 0.0 && q1 < 1.0 && q2 > 0.0 && q2 < 1.0))
      throw config_error("effect probabilities must lie in (0, 1)");
  }
  if (!(q_base > 0.0 && q_base < 1.0))
    throw config_error("q_base must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("alpha must lie in (0, 1)");
  if (!(storey_tau > 0.0 && storey_tau < 1.0))
    throw config_error("storey_tau must lie in (0, 1)");
  for (std::size_t j = 0; j < taus.size(); ++j) {
    if (!(taus[j] > 0.0 && taus[j] < 1.0))
      throw config_error("tuning values must lie in (0, 1)");
    if (j > 0 && taus[j] < taus[j - 1])
      throw config_error("tuning values must be non-decreasing");
  }
  if (!margins.empty()) {
    if (margin_mode != MarginMode::fixed)
      throw config_error("designed margins require fixed margin mode");
    if (margins.size() != m)
      throw config_error("margins must list one total per test");
    for (int c : margins)
      if (c < 0 || c > n1 + n2)
        throw config_error("margin outside [0, n1 + n2]");
  }
}

SimEngine::SimEngine(SimScenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
  const auto& sc = scenario_;

  if (sc.effect_probs) {
    q1_alt_ = sc.effect_probs->first;
    q2_alt_ = sc.effect_probs->second;
    psi_eff_ = (q1_alt_ / (1.0 - q1_alt_)) / (q2_alt_ / (1.0 - q2_alt_));
  } else {
    const double odds = sc.psi * sc.q_base / (1.0 - sc.q_base);
    q1_alt_ = odds / (1.0 + odds);
    q2_alt_ = sc.q_base;
    psi_eff_ = sc.psi;
  }

  auto setup = replicate_rng(sc.seed, kSetupStream);

  if (sc.margin_mode == MarginMode::fixed) {
    if (!sc.margins.empty()) {
      margins_ = sc.margins;
      for (std::size_t i = 0; i < margins_.size(); ++i) {
        if (!margin_usable(support_for_margin(margins_[i]), margins_[i]))
          throw config_error(
              "margin " + std::to_string(margins_[i]) + " for test " +
              std::to_string(i) +
              " admits at most one p-value class and would be removed");
      }
    } else {
      const auto margin_pmf = binom_pmf(sc.n1 + sc.n2, sc.q_base);
      margins_.reserve(sc.m);
      for (std::size_t i = 0; i < sc.m; ++i) {
        int c;
        do {
          c = sample_index(margin_pmf, uniform01(setup));
        } while (!margin_usable(support_for_margin(c), c));
        margins_.push_back(c);
      }
    }
    supports_.reserve(sc.m);
    null_pmf_.reserve(sc.m);
    alt_pmf_.reserve(sc.m);
    for (int c : margins_) {
      const PValueSupport& s = support_for_margin(c);
      supports_.push_back(s);
      null_pmf_.push_back(s.outcome_pmf(1.0));
      alt_pmf_.push_back(s.outcome_pmf(psi_eff_));
    }
    grid_ = scenario_grid(supports_, sc);
  } else {
    cell_null1_ = binom_pmf(sc.n1, sc.q_base);
    cell_null2_ = binom_pmf(sc.n2, sc.q_base);
    cell_alt1_ = binom_pmf(sc.n1, q1_alt_);
    cell_alt2_ = binom_pmf(sc.n2, q2_alt_);
  }

  labels_.reserve(sc.m);
  for (std::size_t i = 0; i < sc.m; ++i)
    labels_.push_back(uniform01(setup) < sc.pi0);
}

const TuningGrid& SimEngine::fixed_grid() const {
  if (scenario_.margin_mode != MarginMode::fixed)
    throw config_error(
        "the tuning grid varies per replicate in unconditional margin mode");
  return grid_;
}

const PValueSupport& SimEngine::support_for_margin(int c) const {
  auto it = margin_cache_.find(c);
  if (it == margin_cache_.end())
    it = margin_cache_.emplace(c, fet_support(scenario_.n1, scenario_.n2, c))
             .first;
  return it->second;
}

Dataset SimEngine::generate_impl(std::size_t replicate,
                                 bool fresh_labels) const {
  const auto& sc = scenario_;
  auto rng = replicate_rng(sc.seed, replicate);
  Dataset ds;
  ds.counts.reserve(sc.m);
  ds.is_null.reserve(sc.m);
  ds.pvalues.reserve(sc.m);
  ds.supports.reserve(sc.m);

  for (std::size_t i = 0; i < sc.m; ++i) {
    const bool null_i =
        fresh_labels ? uniform01(rng) < sc.pi0 : bool(labels_[i]);
    if (sc.margin_mode == MarginMode::fixed) {
      const auto& pmf = null_i ? null_pmf_[i] : alt_pmf_[i];
      const int y =
          supports_[i].outcome_min() + sample_index(pmf, uniform01(rng));
      ds.counts.push_back({y, margins_[i] - y, sc.n1, sc.n2});
      ds.is_null.push_back(null_i);
      ds.pvalues.push_back(supports_[i].pvalue_of_outcome(y));
      ds.supports.push_back(supports_[i]);
    } else {
      // Both cells are drawn even for rows about to be dropped, so the
      // stream position of test i never depends on earlier margins.
      const int x1 =
          sample_index(null_i ? cell_null1_ : cell_alt1_, uniform01(rng));
      const int x2 =
          sample_index(null_i ? cell_null2_ : cell_alt2_, uniform01(rng));
      const int c = x1 + x2;
      const PValueSupport* sup = c >= 2 ? &support_for_margin(c) : nullptr;
      if (sup == nullptr || !margin_usable(*sup, c)) {
        ++ds.dropped;
        continue;
      }
      ds.counts.push_back({x1, x2, sc.n1, sc.n2});
      ds.is_null.push_back(null_i);
      ds.pvalues.push_back(sup->pvalue_of_outcome(x1));
      ds.supports.push_back(*sup);
    }
  }
  if (ds.counts.empty())
    throw config_error("replicate " + std::to_string(replicate) +
                       " lost every test to margin cleaning; increase the "
                       "group sizes or q_base");
  return ds;
}

Dataset SimEngine::generate(std::size_t replicate) const {
  return generate_impl(replicate, true);
}

Dataset SimEngine::generate_fixed_labels(std::size_t replicate) const {
  return generate_impl(replicate, false);
}

Dataset gen_dataset(const SimScenario& scenario, std::size_t replicate) {
  return SimEngine(scenario).generate(replicate);
}

SimResult run_fdr_experiment(const SimScenario& scenario, Procedure procedure,
                             std::optional<double> pi0_override) {
  SimEngine engine(scenario);
  const auto& sc = engine.scenario();
  const bool adaptive = procedure == Procedure::abh_h ||
                        procedure == Procedure::abh_storey ||
                        procedure == Procedure::abhh_h;

  SimResult res;
  res.procedure = to_string(procedure);
  res.reps = sc.reps;
  res.m0s.reserve(sc.reps);
  res.Vs.reserve(sc.reps);
  res.Rs.reserve(sc.reps);
  Accum fdp, power, pi0_acc, pi0_true;

  for (std::size_t r = 0; r < sc.reps; ++r) {
    const Dataset ds = engine.generate(r);

    double pi0_hat = 1.0;
    if (adaptive) {
      if (pi0_override) {
        pi0_hat = *pi0_override;
      } else if (procedure == Procedure::abh_storey) {
        pi0_hat = storey_pi0_s(ds.pvalues, sc.storey_tau);
      } else {
        const TuningGrid grid = scenario_grid(ds.supports, sc);
        pi0_hat = pi0_hat_H(ds.pvalues, grid).pi0_hat;
      }
    }

    RejectionReport report;
    switch (procedure) {
      case Procedure::bh:
        report = bh(ds.pvalues, sc.alpha);
        break;
      case Procedure::abh_h:
      case Procedure::abh_storey:
        report = adaptive_bh(ds.pvalues, pi0_hat, sc.alpha);
        break;
      case Procedure::bhh:
        report = bhh(ds.pvalues, ds.supports, sc.alpha);
        break;
      case Procedure::abhh_h:
        report = adaptive_bhh(ds.pvalues, ds.supports, pi0_hat, sc.alpha);
        break;
    }

    std::size_t v = 0;
    for (std::size_t k : report.rejected) v += ds.is_null[k] ? 1 : 0;
    const std::size_t rn = report.rejected.size();
    std::size_t m0 = 0;
    for (bool h : ds.is_null) m0 += h ? 1 : 0;
    const std::size_t m1 = ds.is_null.size() - m0;

    fdp.add(static_cast<double>(v) /
            static_cast<double>(std::max<std::size_t>(rn, 1)));
    if (m1 >= 1)
      power.add(static_cast<double>(rn - v) / static_cast<double>(m1));
    pi0_acc.add(pi0_hat);
    pi0_true.add(static_cast<double>(m0) /
                 static_cast<double>(ds.is_null.size()));

    res.m0s.push_back(static_cast<std::uint32_t>(m0));
    res.Vs.push_back(static_cast<std::uint32_t>(v));
    res.Rs.push_back(static_cast<std::uint32_t>(rn));
  }

  res.fdr_mean = fdp.mean();
  res.fdr_se = fdp.se();
  res.power_mean = power.mean();
  res.power_se = power.se();
  res.power_reps = power.n;
  res.pi0_hat_mean = pi0_acc.mean();
  res.pi0_hat_se = pi0_acc.se();
  res.pi0_true_mean = pi0_true.mean();
  res.pi0_hat_bias = res.pi0_hat_mean - res.pi0_true_mean;
  return res;
}

BiasReport bias_experiment(const SimScenario& scenario) {
  if (scenario.margin_mode != MarginMode::fixed)
    throw config_error("the bias study conditions on margins; use fixed mode");
  SimEngine engine(scenario);
  const auto& sc = engine.scenario();
  const TuningGrid& grid = engine.fixed_grid();
  const std::vector<bool>& labels = engine.reference_labels();

  const std::vector<double> odds(sc.m, engine.effect_odds());
  const BiasOracles oracle =
      bias_oracles(engine.fixed_supports(), odds, labels, grid);

  const std::size_t nj = grid.num_taus();
  std::vector<Accum> beta(nj), storey_s(nj);
  Accum h_acc, comp_acc;

  for (std::size_t r = 0; r < sc.reps; ++r) {
    const Dataset ds = engine.generate_fixed_labels(r);
    for (std::size_t j = 0; j < nj; ++j) {
      const double b = beta_trial_raw(ds.pvalues, grid, j);
      if (std::isfinite(b)) beta[j].add(b);
      storey_s[j].add(storey_pi0_s_raw(ds.pvalues, grid.taus[j]));
    }
    h_acc.add(pi0_hat_H(ds.pvalues, grid).pi0_hat);
    comp_acc.add(pi0_tau_substituted(ds.pvalues, grid).pi0_hat);
  }

  BiasReport rep;
  rep.reps = sc.reps;
  rep.pi0 = oracle.pi0;
  rep.taus = grid.taus;
  rep.etas = grid.etas;
  rep.beta_expected = oracle.e_beta;
  rep.b1 = oracle.b1;
  rep.b2 = oracle.b2;
  rep.beta_mean.resize(nj);
  rep.beta_se.resize(nj);
  rep.storey_s_bias.resize(nj);
  rep.storey_s_se.resize(nj);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nj; ++j) {
    const bool degenerate = grid.etas[j] == 1.0;
    rep.beta_mean[j] = degenerate ? inf : beta[j].mean();
    rep.beta_se[j] = degenerate ? 0.0 : beta[j].se();
    rep.storey_s_bias[j] = storey_s[j].mean() - oracle.pi0;
    rep.storey_s_se[j] = storey_s[j].se();
  }
  rep.pi0_h_mean = h_acc.mean();
  rep.pi0_h_se = h_acc.se();
  rep.comparator_mean = comp_acc.mean();
  rep.comparator_se = comp_acc.se();
  return rep;
}

ConditionTwoReport check_condition_two(const SimScenario& scenario) {
  if (scenario.margin_mode != MarginMode::fixed)
    throw config_error(
        "the leave-one-out study conditions on margins; use fixed mode");
  if (scenario.m > 10)
    throw config_error("the leave-one-out study is limited to m <= 10");
  SimEngine engine(scenario);
  const auto& sc = engine.scenario();
  const TuningGrid& grid = engine.fixed_grid();
  const std::vector<bool>& labels = engine.reference_labels();

  ConditionTwoReport rep;
  rep.reps = sc.reps;
  for (std::size_t k = 0; k < sc.m; ++k)
    if (labels[k]) rep.null_indices.push_back(k);
  if (rep.null_indices.empty())
    throw config_error(
        "no null hypotheses under the drawn labels; raise pi0 or reseed");
  const std::size_t m0 = rep.null_indices.size();
  rep.pi0 = static_cast<double>(m0) / static_cast<double>(sc.m);
  rep.bound = static_cast<double>(sc.m) / static_cast<double>(m0);

  const std::size_t nj = grid.num_taus();
  std::vector<Accum> inv(m0);
  std::vector<std::vector<Accum>> inv_beta(m0, std::vector<Accum>(nj));

  for (std::size_t r = 0; r < sc.reps; ++r) {
    const Dataset ds = engine.generate_fixed_labels(r);
    const std::vector<double> loo =
        leave_one_out_estimates(ds.pvalues, grid);
    std::vector<double> pv = ds.pvalues;
    for (std::size_t ki = 0; ki < m0; ++ki) {
      const std::size_t k = rep.null_indices[ki];
      inv[ki].add(1.0 / loo[k]);
      const double saved = pv[k];
      pv[k] = 0.0;
      for (std::size_t j = 0; j < nj; ++j) {
        const double b = beta_trial_raw(pv, grid, j);
        inv_beta[ki][j].add(std::isfinite(b) ? 1.0 / b : 0.0);
      }
      pv[k] = saved;
    }
  }

  rep.inv_mean.resize(m0);
  rep.inv_se.resize(m0);
  rep.inv_beta_mean.assign(m0, std::vector<double>(nj));
  rep.inv_beta_se.assign(m0, std::vector<double>(nj));
  for (std::size_t ki = 0; ki < m0; ++ki) {
    rep.inv_mean[ki] = inv[ki].mean();
    rep.inv_se[ki] = inv[ki].se();
    if (rep.inv_mean[ki] > rep.bound + 3.0 * rep.inv_se[ki])
      rep.capped_ok = false;
    for (std::size_t j = 0; j < nj; ++j) {
      rep.inv_beta_mean[ki][j] = inv_beta[ki][j].mean();
      rep.inv_beta_se[ki][j] = inv_beta[ki][j].se();
      if (rep.inv_beta_mean[ki][j] > rep.bound + 3.0 * rep.inv_beta_se[ki][j])
        rep.per_tau_ok = false;
    }
  }
  return rep;
}

Lemma1Check lemma1_bound_check(std::size_t m0, double eta) {
  if (m0 < 1) throw config_error("m0 must be at least 1");
  if (!(eta >= 0.0 && eta < 1.0))
    throw config_error("eta must lie in [0, 1)");
  const int n = static_cast<int>(m0) - 1;
  const double p = 1.0 - eta;

  Lemma1Check out;
  out.closed_form =
      (1.0 - std::pow(eta, static_cast<double>(m0))) /
      (static_cast<double>(m0) * p);
  out.bound = 1.0 / (static_cast<double>(m0) * p);
  if (eta == 0.0) {
    out.direct_sum = 1.0 / static_cast<double>(m0);  // all mass at B = n
  } else {
    double acc = 0.0;
    const double lp = std::log(p), le = std::log(eta);
    for (int b = 0; b <= n; ++b)
      acc += std::exp(lchoose(n, b) + b * lp + (n - b) * le) / (1.0 + b);
    out.direct_sum = acc;
  }
  return out;
}

}  // namespace discfdr
