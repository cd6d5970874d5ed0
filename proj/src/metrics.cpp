#include "focal/metrics.hpp"

#include <cmath>

#include "focal/errors.hpp"

namespace focal::metrics {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.size() != labels.size() || preds.empty())
        throw ParamError("accuracy: prediction/label lengths must match and be nonzero");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(preds.size());
}

F1Report macro_f1(const std::vector<int>& preds, const std::vector<int>& labels,
                  int class_count) {
    if (preds.size() != labels.size())
        throw ParamError("macro_f1: prediction/label lengths must match");
    const std::size_t C = static_cast<std::size_t>(class_count);
    std::vector<double> tp(C, 0), fp(C, 0), fn(C, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int p = preds[i], y = labels[i];
        if (y < 0 || y >= class_count) throw ParamError("macro_f1: label outside [0, C)");
        if (p < 0 || p >= class_count) throw ParamError("macro_f1: prediction outside [0, C)");
        if (p == y) {
            tp[static_cast<std::size_t>(y)] += 1;
        } else {
            fp[static_cast<std::size_t>(p)] += 1;
            fn[static_cast<std::size_t>(y)] += 1;
        }
    }
    F1Report rep;
    rep.per_class.resize(C, 0.0);
    for (std::size_t c = 0; c < C; ++c) {
        const double denom_p = tp[c] + fp[c];
        const double denom_r = tp[c] + fn[c];
        if (denom_p == 0 && denom_r == 0) rep.absent_classes.push_back(static_cast<int>(c));
        const double precision = denom_p > 0 ? tp[c] / denom_p : 0.0;
        const double recall = denom_r > 0 ? tp[c] / denom_r : 0.0;
        rep.per_class[c] =
            precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        rep.macro += rep.per_class[c];
    }
    rep.macro /= static_cast<double>(C);
    return rep;
}

KappaResult quadratic_kappa_from_confusion(const std::vector<std::vector<double>>& confusion) {
    const std::size_t C = confusion.size();
    if (C < 2) throw ParamError("quadratic_kappa: needs at least 2 classes");
    for (const auto& row : confusion)
        if (row.size() != C) throw ParamError("quadratic_kappa: confusion matrix not square");

    double n = 0.0;
    std::vector<double> row_sum(C, 0.0), col_sum(C, 0.0);
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < C; ++j) {
            row_sum[i] += confusion[i][j];
            col_sum[j] += confusion[i][j];
            n += confusion[i][j];
        }
    if (n <= 0.0) throw ParamError("quadratic_kappa: empty confusion matrix");

    const double norm = static_cast<double>((C - 1) * (C - 1));
    double observed = 0.0, expected = 0.0;
    for (std::size_t i = 0; i < C; ++i)
        for (std::size_t j = 0; j < C; ++j) {
            const double di = static_cast<double>(i) - static_cast<double>(j);
            const double w = di * di / norm;
            observed += w * confusion[i][j];
            expected += w * row_sum[i] * col_sum[j] / n;
        }
    KappaResult r;
    if (expected == 0.0) {
        r.value = 0.0;
        r.degenerate = true;
    } else {
        r.value = 1.0 - observed / expected;
    }
    return r;
}

KappaResult quadratic_kappa(const std::vector<int>& preds, const std::vector<int>& labels,
                            int class_count) {
    if (preds.size() != labels.size() || preds.empty())
        throw ParamError("quadratic_kappa: prediction/label lengths must match and be nonzero");
    if (class_count < 2) throw ParamError("quadratic_kappa: needs at least 2 classes");
    const std::size_t C = static_cast<std::size_t>(class_count);
    std::vector<std::vector<double>> confusion(C, std::vector<double>(C, 0.0));
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int p = preds[i], y = labels[i];
        if (y < 0 || y >= class_count || p < 0 || p >= class_count)
            throw ParamError("quadratic_kappa: entry outside [0, C)");
        confusion[static_cast<std::size_t>(y)][static_cast<std::size_t>(p)] += 1.0;
    }
    return quadratic_kappa_from_confusion(confusion);
}

MeanStderr mean_stderr(const std::vector<double>& values) {
    if (values.empty()) throw ParamError("mean_stderr: empty input");
    MeanStderr r;
    for (double v : values) r.mean += v;
    r.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        const double var = ss / static_cast<double>(values.size() - 1);
        r.stderr_ = std::sqrt(var / static_cast<double>(values.size()));
    }
    return r;
}

} // namespace focal::metrics
