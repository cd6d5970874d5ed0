#include "focal/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "focal/errors.hpp"

namespace focal::acq {

namespace {
constexpr double kEntropyEps = 1e-12;

double entropy(const double* p, std::size_t c) {
    double h = 0.0;
    for (std::size_t i = 0; i < c; ++i)
        h -= p[i] * std::log(std::max(p[i], kEntropyEps));
    return h;
}
} // namespace

Method method_from_name(const std::string& name) {
    if (name == "focal") return Method::FocAL;
    if (name == "ra") return Method::RA;
    if (name == "en") return Method::EN;
    if (name == "bald") return Method::BALD;
    if (name == "ms") return Method::MS;
    if (name == "ep") return Method::EP;
    throw ParamError("unknown acquisition method: " + name);
}

const char* method_name(Method m) {
    switch (m) {
        case Method::FocAL: return "focal";
        case Method::RA: return "ra";
        case Method::EN: return "en";
        case Method::BALD: return "bald";
        case Method::MS: return "ms";
        case Method::EP: return "ep";
    }
    return "?";
}

std::vector<double> class_weights(const std::vector<std::size_t>& label_counts) {
    const std::size_t C = label_counts.size();
    const std::size_t total = std::accumulate(label_counts.begin(), label_counts.end(),
                                              static_cast<std::size_t>(0));
    if (total == 0) throw ParamError("class_weights: no labeled items");
    std::vector<double> w(C);
    for (std::size_t c = 0; c < C; ++c)
        w[c] = static_cast<double>(total) /
               (static_cast<double>(std::max<std::size_t>(label_counts[c], 1)) *
                static_cast<double>(C));
    return w;
}

double focal_score(const bnn::PredictiveSummary& summary, double ood_score,
                   const std::vector<double>& w, double lambda_al, double lambda_ood) {
    const std::size_t C = summary.ep_var.size();
    if (w.size() != C || summary.al_var.size() != C)
        throw ParamError("focal_score: weight/variance dimensions disagree");
    double ep = 0.0, al = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        ep += w[c] * summary.ep_var[c];
        al += summary.al_var[c];
    }
    return ep - lambda_al * al / static_cast<double>(C) - lambda_ood * ood_score;
}

double entropy_score(const std::vector<double>& p_hat) {
    return entropy(p_hat.data(), p_hat.size());
}

double bald_score(const nd::Tensor& draws) {
    if (draws.ndim() != 2) throw ShapeError("bald_score expects a {T, C} matrix");
    const std::size_t T = draws.shape[0], C = draws.shape[1];
    std::vector<double> p_hat(C, 0.0);
    double mean_h = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const double* p = &draws.data[t * C];
        mean_h += entropy(p, C);
        for (std::size_t c = 0; c < C; ++c) p_hat[c] += p[c];
    }
    mean_h /= static_cast<double>(T);
    for (double& v : p_hat) v /= static_cast<double>(T);
    return entropy(p_hat.data(), C) - mean_h;
}

double meanstd_score(const nd::Tensor& draws) {
    if (draws.ndim() != 2) throw ShapeError("meanstd_score expects a {T, C} matrix");
    const std::size_t T = draws.shape[0], C = draws.shape[1];
    std::vector<double> p_hat(C, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c) p_hat[c] += draws.at(t, c);
    for (double& v : p_hat) v /= static_cast<double>(T);
    double acc = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
        double var = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double d = draws.at(t, c) - p_hat[c];
            var += d * d;
        }
        acc += std::sqrt(var / static_cast<double>(T));
    }
    return acc / static_cast<double>(C);
}

double epistemic_score(const bnn::PredictiveSummary& summary) {
    double acc = 0.0;
    for (double v : summary.ep_var) acc += v;
    return acc;
}

std::vector<std::uint64_t> select_batch(const std::vector<std::uint64_t>& ids,
                                        const std::vector<double>& scores, std::size_t batch) {
    if (ids.size() != scores.size())
        throw ParamError("select_batch: id/score lengths disagree");
    if (batch > ids.size()) throw ParamError("select_batch: batch larger than pool");
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return ids[a] < ids[b];
    });
    std::vector<std::uint64_t> out(batch);
    for (std::size_t i = 0; i < batch; ++i) out[i] = ids[order[i]];
    return out;
}

std::vector<std::uint64_t> select_random(const std::vector<std::uint64_t>& ids,
                                         std::size_t batch, Rng& rng) {
    if (batch > ids.size()) throw ParamError("select_random: batch larger than pool");
    std::vector<std::uint64_t> out;
    out.reserve(batch);
    for (std::size_t i : rng.sample_without_replacement(ids.size(), batch))
        out.push_back(ids[i]);
    return out;
}

} // namespace focal::acq
