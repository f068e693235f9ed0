#include "discfdr/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "discfdr/errors.hpp"

namespace discfdr {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw config_error("procedure: alpha must lie in (0, 1)");
}

void check_pvalues(const std::vector<double>& pvalues) {
  if (pvalues.empty()) throw config_error("procedure: no p-values");
  for (double p : pvalues)
    if (!(p >= 0.0 && p <= 1.0))
      throw input_error("procedure: p-value outside [0, 1]");
}

std::vector<std::size_t> sort_order(const std::vector<double>& pvalues) {
  std::vector<std::size_t> order(pvalues.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
  return order;
}

// Generic step-up: given per-rank scores s_r (r = 1..m), the adjusted value
// of rank r is min over k >= r of min(1, s_k / k); rejections are adjusted
// <= alpha and k_hat is their count.
RejectionReport step_up(const std::vector<double>& pvalues,
                        const std::vector<double>& rank_scores, double alpha) {
  const std::size_t m = pvalues.size();
  RejectionReport rep;
  rep.alpha = alpha;
  rep.order = sort_order(pvalues);

  std::vector<double> adj_by_rank(m);
  double running = 1.0;
  for (std::size_t r = m; r-- > 0;) {
    const double ratio = rank_scores[r] / static_cast<double>(r + 1);
    running = std::min(running, std::min(1.0, ratio));
    adj_by_rank[r] = running;
  }

  rep.adjusted.resize(m);
  for (std::size_t r = 0; r < m; ++r) rep.adjusted[rep.order[r]] = adj_by_rank[r];

  rep.k_hat = 0;
  for (std::size_t r = 0; r < m; ++r)
    if (adj_by_rank[r] <= alpha) rep.k_hat = r + 1;
  for (std::size_t i = 0; i < m; ++i)
    if (rep.adjusted[i] <= alpha) rep.rejected.push_back(i);
  return rep;
}

}  // namespace

RejectionReport bh(const std::vector<double>& pvalues, double alpha) {
  return adaptive_bh(pvalues, 1.0, alpha);
}

RejectionReport adaptive_bh(const std::vector<double>& pvalues, double pi0_hat,
                            double alpha) {
  check_pvalues(pvalues);
  check_alpha(alpha);
  if (!(pi0_hat > 0.0 && pi0_hat <= 1.0))
    throw config_error("adaptive_bh: pi0_hat must lie in (0, 1]");
  const std::size_t m = pvalues.size();
  auto order = sort_order(pvalues);
  std::vector<double> scores(m);
  for (std::size_t r = 0; r < m; ++r)
    scores[r] = pi0_hat * static_cast<double>(m) * pvalues[order[r]];
  return step_up(pvalues, scores, alpha);
}

RejectionReport bhh(const std::vector<double>& pvalues,
                    const std::vector<PValueSupport>& supports, double alpha) {
  return adaptive_bhh(pvalues, supports, 1.0, alpha);
}

RejectionReport adaptive_bhh(const std::vector<double>& pvalues,
                             const std::vector<PValueSupport>& supports,
                             double pi0_hat, double alpha) {
  check_pvalues(pvalues);
  check_alpha(alpha);
  if (!(pi0_hat > 0.0 && pi0_hat <= 1.0))
    throw config_error("adaptive_bhh: pi0_hat must lie in (0, 1]");
  if (supports.size() != pvalues.size())
    throw config_error("adaptive_bhh: supports do not match p-values");
  const std::size_t m = pvalues.size();
  auto order = sort_order(pvalues);
  std::vector<double> scores(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double p = pvalues[order[r]];
    double s = 0.0;
    for (const auto& sup : supports) s += sup.null_cdf(p);
    scores[r] = pi0_hat * s;
  }
  return step_up(pvalues, scores, alpha);
}

std::vector<double> leave_one_out_estimates(const std::vector<double>& pvalues,
                                            const TuningGrid& grid) {
  // Literal definition: re-estimate with p_k replaced by 0. The workloads
  // that use this are desk-scale, so clarity beats the O(m) trick.
  std::vector<double> out(pvalues.size());
  std::vector<double> work = pvalues;
  for (std::size_t k = 0; k < pvalues.size(); ++k) {
    const double saved = work[k];
    work[k] = 0.0;
    out[k] = pi0_hat_H(work, grid).pi0_hat;
    work[k] = saved;
  }
  return out;
}

}  // namespace discfdr
