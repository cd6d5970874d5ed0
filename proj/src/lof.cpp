#include "focal/lof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "focal/errors.hpp"

namespace focal::ood {

namespace {
constexpr double kLrdEps = 1e-12;
constexpr std::size_t kNoSelf = std::numeric_limits<std::size_t>::max();
} // namespace

OoDIndex::OoDIndex(const nd::Tensor& reference, std::size_t k) {
    if (reference.ndim() != 2) throw ParamError("OoD index expects a {n, d} matrix");
    n_ = reference.shape[0];
    d_ = reference.shape[1];
    k_ = k;
    if (k_ < 1) throw ParamError("OoD index needs k >= 1");
    if (n_ < k_ + 1) throw ParamError("OoD index needs at least k+1 reference points");
    ref_ = reference.data;

    kdist_.resize(n_);
    lrd_.resize(n_);
    std::vector<std::vector<std::size_t>> neigh(n_);
    for (std::size_t i = 0; i < n_; ++i)
        neighbors_of_point(&ref_[i * d_], i, neigh[i], kdist_[i]);
    // lrd needs every neighbor's k-distance, hence the second pass
    for (std::size_t i = 0; i < n_; ++i) lrd_[i] = lrd_of(neigh[i], &ref_[i * d_]);
}

void OoDIndex::neighbors_of_point(const double* z, std::size_t self,
                                  std::vector<std::size_t>& out, double& kdist) const {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        if (j == self) continue;
        double s = 0.0;
        const double* r = &ref_[j * d_];
        for (std::size_t c = 0; c < d_; ++c) {
            const double diff = z[c] - r[c];
            s += diff * diff;
        }
        dist.emplace_back(std::sqrt(s), j);
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<long>(k_ - 1), dist.end());
    kdist = dist[k_ - 1].first;
    // all points tied at the k-distance belong to the neighborhood
    out.clear();
    for (const auto& [d, j] : dist)
        if (d <= kdist) out.push_back(j);
}

double OoDIndex::lrd_of(const std::vector<std::size_t>& neigh, const double* z) const {
    double reach_sum = 0.0;
    for (std::size_t j : neigh) {
        double s = 0.0;
        const double* r = &ref_[j * d_];
        for (std::size_t c = 0; c < d_; ++c) {
            const double diff = z[c] - r[c];
            s += diff * diff;
        }
        reach_sum += std::max(kdist_[j], std::sqrt(s));
    }
    // flooring the mean (not the sum) makes lrd independent of |N| when all
    // reach distances vanish, so a query identical to an all-identical
    // reference set scores exactly 1
    const double mean_reach = reach_sum / static_cast<double>(neigh.size());
    return 1.0 / std::max(mean_reach, kLrdEps);
}

double OoDIndex::lof(const double* z) const {
    std::vector<std::size_t> neigh;
    double kd;
    neighbors_of_point(z, kNoSelf, neigh, kd);
    const double own = lrd_of(neigh, z);
    double acc = 0.0;
    for (std::size_t j : neigh) acc += lrd_[j] / own;
    return acc / static_cast<double>(neigh.size());
}

double OoDIndex::lof(const nd::Tensor& z) const {
    if (z.numel() != d_) throw ParamError("LOF query dimension mismatch");
    return lof(z.data.data());
}

std::vector<double> OoDIndex::score_rows(const nd::Tensor& rows) const {
    if (rows.ndim() != 2 || rows.shape[1] != d_)
        throw ParamError("score_rows expects a {m, d} matrix matching the index");
    std::vector<double> out(rows.shape[0]);
    for (std::size_t i = 0; i < rows.shape[0]; ++i)
        out[i] = score(&rows.data[i * d_]);
    return out;
}

} // namespace focal::ood
