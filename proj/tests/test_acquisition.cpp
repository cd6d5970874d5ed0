#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "focal/acquisition.hpp"
#include "focal/errors.hpp"
#include "focal/rng.hpp"
#include "focal/uncertainty.hpp"
#include "support/testutil.hpp"

using namespace focal;
using namespace focal::acq;
using focal::bnn::PredictiveSummary;
using focal::nd::Tensor;

namespace {

PredictiveSummary summary_of(std::vector<double> ep, std::vector<double> al) {
    PredictiveSummary s;
    s.ep_var = std::move(ep);
    s.al_var = std::move(al);
    s.p_hat.assign(s.ep_var.size(), 1.0 / static_cast<double>(s.ep_var.size()));
    return s;
}

double entropy_oracle(const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p) h -= v * std::log(std::max(v, 1e-12));
    return h;
}

} // namespace

TEST_CASE("method names round-trip and reject strangers") {
    for (const char* n : {"focal", "ra", "en", "bald", "ms", "ep"}) {
        Method m = method_from_name(n);
        CHECK(std::string(method_name(m)) == n);
    }
    CHECK(method_from_name("focal") == Method::FocAL);
    CHECK(method_from_name("ra") == Method::RA);
    CHECK_THROWS_AS(method_from_name("gradient"), ParamError);
    CHECK_THROWS_AS(method_from_name(""), ParamError);
}

TEST_CASE("class weights follow the inverse-frequency rule") {
    auto balanced = class_weights({25, 25, 25, 25});
    for (double w : balanced) CHECK(w == doctest::Approx(1.0).epsilon(1e-15));

    auto skewed = class_weights({20, 20, 160});
    CHECK(skewed[0] == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(skewed[1] == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
    CHECK(skewed[2] == doctest::Approx(5.0 / 12.0).epsilon(1e-15));

    // empty classes are clamped to one member
    auto clamped = class_weights({0, 10, 10});
    CHECK(clamped[0] == doctest::Approx(20.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(class_weights({0, 0, 0}), ParamError);
}

TEST_CASE("weighted counts sum back to the labeled total") {
    Rng rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = 2 + rng.uniform_int(6);
        std::vector<std::size_t> counts(c);
        std::size_t total = 0;
        for (auto& v : counts) {
            v = 1 + rng.uniform_int(200);
            total += v;
        }
        auto w = class_weights(counts);
        double acc = 0.0;
        for (std::size_t i = 0; i < c; ++i) acc += w[i] * static_cast<double>(counts[i]);
        CHECK(acc == doctest::Approx(static_cast<double>(total)).epsilon(1e-12));
    }
}

TEST_CASE("acquisition score arithmetic") {
    auto s = summary_of({0.1, 0.2}, {0.04, 0.06});
    CHECK(focal_score(s, 0.3, {1.0, 1.0}, 0.5, 2.0) == doctest::Approx(-0.325).epsilon(1e-15));

    // a factor of 10 becomes a score of 1.0, so the whole term is -1.0
    auto quiet = summary_of({0.0, 0.0}, {0.0, 0.0});
    CHECK(focal_score(quiet, 0.1 * 10.0, {1.0, 1.0}, 0.5, 1.0) ==
          doctest::Approx(-1.0).epsilon(1e-15));

    // with zero lambdas and unit weights the score reduces to the epistemic sum
    auto r = summary_of({0.07, 0.02, 0.05}, {0.2, 0.1, 0.3});
    CHECK(focal_score(r, 5.0, {1.0, 1.0, 1.0}, 0.0, 0.0) ==
          doctest::Approx(epistemic_score(r)).epsilon(1e-15));

    CHECK_THROWS_AS(focal_score(s, 0.0, {1.0, 1.0, 1.0}, 0.5, 2.0), ParamError);
}

TEST_CASE("acquisition score is linear in each ingredient") {
    Rng rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t c = 2 + rng.uniform_int(4);
        std::vector<double> ep(c), al(c), w(c);
        for (auto& v : ep) v = rng.uniform(0.0, 0.3);
        for (auto& v : al) v = rng.uniform(0.0, 0.3);
        for (auto& v : w) v = rng.uniform(0.1, 3.0);
        const double ood = rng.uniform(0.0, 5.0);
        const double la = rng.uniform(0.0, 2.0), lo = rng.uniform(0.0, 3.0);

        double dot = 0.0, almean = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            dot += w[i] * ep[i];
            almean += al[i] / static_cast<double>(c);
        }
        const double want = dot - la * almean - lo * ood;
        CHECK(focal_score(summary_of(ep, al), ood, w, la, lo) ==
              doctest::Approx(want).epsilon(1e-12));

        // doubling one epistemic entry moves the score by exactly w_i * ep_i
        std::vector<double> ep2 = ep;
        ep2[0] += ep[0];
        const double shift = focal_score(summary_of(ep2, al), ood, w, la, lo) -
                             focal_score(summary_of(ep, al), ood, w, la, lo);
        CHECK(shift == doctest::Approx(w[0] * ep[0]).epsilon(1e-9));
    }
}

TEST_CASE("entropy score hand values") {
    CHECK(entropy_score({1.0 / 3, 1.0 / 3, 1.0 / 3}) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(entropy_score({1.0, 0.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(entropy_score({0.5, 0.5}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mutual-information score hand values") {
    Tensor same = Tensor::row_matrix(3, 2, {0.7, 0.3, 0.7, 0.3, 0.7, 0.3});
    CHECK(bald_score(same) == doctest::Approx(0.0).epsilon(1e-12));

    Tensor flip = Tensor::row_matrix(2, 2, {1.0, 0.0, 0.0, 1.0});
    CHECK(bald_score(flip) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    Tensor pair = Tensor::row_matrix(2, 2, {0.8, 0.2, 0.6, 0.4});
    const double want = entropy_oracle({0.7, 0.3}) -
                        0.5 * (entropy_oracle({0.8, 0.2}) + entropy_oracle({0.6, 0.4}));
    CHECK(bald_score(pair) == doctest::Approx(want).epsilon(1e-12));
    CHECK(bald_score(pair) == doctest::Approx(0.0242).epsilon(2e-3));
}

TEST_CASE("mutual information is nonnegative and vanishes only on agreement") {
    Rng rng(88);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t t = 1 + rng.uniform_int(12);
        const std::size_t c = 2 + rng.uniform_int(5);
        Tensor draws = testutil::random_prob_rows(rng, t, c);
        const double v = bald_score(draws);
        CHECK(v >= -1e-12);

        Tensor copies({t, c});
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = 0; j < c; ++j) copies.at(i, j) = draws.at(0, j);
        CHECK(bald_score(copies) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("mean-standard-deviation score hand values") {
    Tensor same = Tensor::row_matrix(2, 3, {0.2, 0.3, 0.5, 0.2, 0.3, 0.5});
    CHECK(meanstd_score(same) == doctest::Approx(0.0).epsilon(1e-12));

    Tensor flip = Tensor::row_matrix(2, 2, {1.0, 0.0, 0.0, 1.0});
    CHECK(meanstd_score(flip) == doctest::Approx(0.5).epsilon(1e-12));

    Tensor pair = Tensor::row_matrix(2, 2, {0.8, 0.2, 0.6, 0.4});
    CHECK(meanstd_score(pair) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("epistemic score sums the per-class variances") {
    CHECK(epistemic_score(summary_of({0.01, 0.01}, {0.5, 0.5})) ==
          doctest::Approx(0.02).epsilon(1e-15));
    CHECK(epistemic_score(summary_of({0.0, 0.0, 0.0}, {0.1, 0.1, 0.1})) == 0.0);
}

TEST_CASE("batch selection keeps the top scores with stable ties") {
    std::vector<std::uint64_t> ids{7, 8, 9};
    std::vector<double> scores{0.1, 0.9, 0.5};
    auto got = select_batch(ids, scores, 2);
    CHECK(got == std::vector<std::uint64_t>({8, 9}));

    std::vector<double> flat{0.4, 0.4, 0.4};
    CHECK(select_batch(ids, flat, 2) == std::vector<std::uint64_t>({7, 8}));

    std::vector<std::uint64_t> shuffled{9, 7, 8};
    CHECK(select_batch(shuffled, flat, 2) == std::vector<std::uint64_t>({7, 8}));

    CHECK_THROWS_AS(select_batch(ids, scores, 4), ParamError);
    CHECK_THROWS_AS(select_batch(ids, {0.1, 0.2}, 1), ParamError);
}

TEST_CASE("batch selection ignores positive affine rescaling") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.uniform_int(30);
        std::vector<std::uint64_t> ids(n);
        std::vector<double> scores(n), scaled(n);
        for (std::size_t i = 0; i < n; ++i) {
            ids[i] = 100 + i;
            scores[i] = rng.uniform(-2.0, 2.0);
            scaled[i] = 3.7 * scores[i] + 11.0;
        }
        const std::size_t b = 1 + rng.uniform_int(n);
        CHECK(select_batch(ids, scores, b) == select_batch(ids, scaled, b));
    }
}

TEST_CASE("random selection is reproducible and well-formed") {
    std::vector<std::uint64_t> ids;
    for (std::uint64_t i = 0; i < 40; ++i) ids.push_back(i * 3);

    Rng a(Rng::derive(9, "ra", 2));
    Rng b(Rng::derive(9, "ra", 2));
    auto ga = select_random(ids, 12, a);
    auto gb = select_random(ids, 12, b);
    CHECK(ga == gb);
    CHECK(ga.size() == 12);
    auto sorted = ga;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    for (auto id : ga) CHECK(std::find(ids.begin(), ids.end(), id) != ids.end());

    Rng c(Rng::derive(9, "ra", 3));
    CHECK(select_random(ids, 12, c) != ga);

    CHECK_THROWS_AS(select_random(ids, 41, a), ParamError);
}

TEST_CASE("with zero lambdas and balanced counts the weighted and unweighted ranks agree") {
    Rng rng(14);
    auto w = class_weights({30, 30, 30});
    std::vector<std::uint64_t> ids;
    std::vector<double> weighted, unweighted;
    for (std::uint64_t i = 0; i < 25; ++i) {
        std::vector<double> ep(3), al(3);
        for (auto& v : ep) v = rng.uniform(0.0, 0.2);
        for (auto& v : al) v = rng.uniform(0.0, 0.2);
        auto s = summary_of(ep, al);
        ids.push_back(i);
        weighted.push_back(focal_score(s, rng.uniform(0.0, 3.0), w, 0.0, 0.0));
        unweighted.push_back(epistemic_score(s));
    }
    CHECK(select_batch(ids, weighted, 25) == select_batch(ids, unweighted, 25));
}
