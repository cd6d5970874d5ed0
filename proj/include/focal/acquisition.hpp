#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "focal/rng.hpp"
#include "focal/uncertainty.hpp"

namespace focal::acq {

enum class Method { FocAL, RA, EN, BALD, MS, EP };

Method method_from_name(const std::string& name); // throws ParamError on unknown
const char* method_name(Method m);

// w_c = N_train / (max(N_c, 1) * C), recomputed every acquisition step
std::vector<double> class_weights(const std::vector<std::size_t>& label_counts);

// a(x) = w . ep_var  -  lambda_al * mean(al_var)  -  lambda_ood * s
double focal_score(const bnn::PredictiveSummary& summary, double ood_score,
                   const std::vector<double>& w, double lambda_al, double lambda_ood);

double entropy_score(const std::vector<double>& p_hat);

// draws: {T, C} probability rows
double bald_score(const nd::Tensor& draws);
double meanstd_score(const nd::Tensor& draws);

double epistemic_score(const bnn::PredictiveSummary& summary);

// ids of the B highest-scoring items, ties broken by lowest id.
// RA ignores scores entirely and samples uniformly without replacement.
std::vector<std::uint64_t> select_batch(const std::vector<std::uint64_t>& ids,
                                        const std::vector<double>& scores, std::size_t batch);
std::vector<std::uint64_t> select_random(const std::vector<std::uint64_t>& ids,
                                         std::size_t batch, Rng& rng);

} // namespace focal::acq
