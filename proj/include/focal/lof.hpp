#pragma once

#include <cstddef>
#include <vector>

#include "focal/tensor.hpp"

namespace focal::ood {

// Local Outlier Factor in novelty mode: a fixed reference set is indexed
// once, queries are scored against it and are never their own neighbor.
// Neighborhoods include every reference point tied at the k-distance, so
// |N_k| >= k. Distances are Euclidean; k-NN search is exact brute force.
class OoDIndex {
public:
    // reference: {n, d} feature matrix with n >= k+1 rows
    OoDIndex(const nd::Tensor& reference, std::size_t k);

    std::size_t k() const { return k_; }
    std::size_t size() const { return n_; }
    std::size_t dim() const { return d_; }

    // LOF_k(z) = mean over neighbors z' of lrd(z') / lrd(z), with
    // reach-dist_k(z, z') = max(k-distance(z'), d(z, z')) and
    // lrd_k(z) = 1 / max(mean reach-dist, 1e-12); the floor sits on the
    // mean so degenerate all-coincident references score exactly 1.
    double lof(const double* z) const;
    double lof(const nd::Tensor& z) const;

    // ood score: fixed 0.1 * LOF
    double score(const double* z) const { return 0.1 * lof(z); }
    double score(const nd::Tensor& z) const { return 0.1 * lof(z); }

    // Scores one row of a {m, d} matrix per call site; convenience for pools.
    std::vector<double> score_rows(const nd::Tensor& rows) const;

private:
    // neighbor list of an external query point (never the point itself
    // because reference members are compared by index, queries have none)
    void neighbors_of_point(const double* z, std::size_t self,
                            std::vector<std::size_t>& out, double& kdist) const;

    double lrd_of(const std::vector<std::size_t>& neigh, const double* z) const;

    std::size_t n_, d_, k_;
    std::vector<double> ref_;    // row-major {n, d}
    std::vector<double> kdist_;  // per-reference k-distance
    std::vector<double> lrd_;    // per-reference local reachability density
};

} // namespace focal::ood
