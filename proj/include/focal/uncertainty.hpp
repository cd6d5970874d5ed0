#pragma once

#include <vector>

#include "focal/tensor.hpp"

namespace focal::bnn {

// Monte-Carlo predictive summary. ep/al are the diagonals of the epistemic
// and aleatoric covariance matrices; the full matrices are retained because
// the identity (epistemic + aleatoric == total) is checked in tests.
struct PredictiveSummary {
    std::vector<double> p_hat;   // mean predictive distribution, length C
    std::vector<double> ep_var;  // per-class epistemic variances
    std::vector<double> al_var;  // per-class aleatoric variances
    nd::Tensor ep_mat;           // {C, C}
    nd::Tensor al_mat;           // {C, C}
};

// draws: {T, C}, each row a probability vector. Computes
//   epistemic = (1/T) sum_t (p_t - p_hat)(p_t - p_hat)^T
//   aleatoric = (1/T) sum_t (diag(p_t) - p_t p_t^T)
PredictiveSummary decompose_draws(const nd::Tensor& draws);

} // namespace focal::bnn
