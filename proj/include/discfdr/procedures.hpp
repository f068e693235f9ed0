#pragma once

#include <cstddef>
#include <vector>

#include "discfdr/estimator.hpp"
#include "discfdr/exact_tests.hpp"

namespace discfdr {

// Outcome of a step-up procedure at level alpha.
//
// order[r] is the original index of the rank-r p-value (ascending, ties by
// original index). adjusted is per-hypothesis in original index order and,
// viewed through `order`, non-decreasing. A hypothesis is rejected iff its
// adjusted value is <= alpha; k_hat is the rejection count, equal to the
// largest rank whose step-up criterion holds (0 when none does).
struct RejectionReport {
  double alpha = 0.0;
  std::vector<std::size_t> order;
  std::vector<double> adjusted;
  std::size_t k_hat = 0;
  std::vector<std::size_t> rejected;  // original indices, ascending
};

// Step-up procedure with linear cutoffs i*alpha/m:
// adjusted_(i) = min_{k >= i} min(1, m p_(k) / k).
RejectionReport bh(const std::vector<double>& pvalues, double alpha);

// bh with cutoffs inflated by a plug-in estimate: pi0_hat * m * p_(k) / k,
// still truncated at 1. pi0_hat = 1 reproduces bh exactly. Requires
// pi0_hat in (0, 1].
RejectionReport adaptive_bh(const std::vector<double>& pvalues, double pi0_hat,
                            double alpha);

// Step-up procedure on the summed null CDFs: with
// s_(i) = sum_j F_j(p_(i)) over all m tests,
// adjusted_(i) = min_{k >= i} min(1, s_(k) / k). Since F_j(t) <= t, this
// rejects everything bh rejects.
RejectionReport bhh(const std::vector<double>& pvalues,
                    const std::vector<PValueSupport>& supports, double alpha);

// bhh with s_(k)/k scaled by pi0_hat.
RejectionReport adaptive_bhh(const std::vector<double>& pvalues,
                             const std::vector<PValueSupport>& supports,
                             double pi0_hat, double alpha);

// Leave-one-out estimates: element k is pi0_hat_H evaluated with p_k set
// to 0. Never exceeds pi0_hat_H of the unmodified vector.
std::vector<double> leave_one_out_estimates(const std::vector<double>& pvalues,
                                            const TuningGrid& grid);

}  // namespace discfdr
