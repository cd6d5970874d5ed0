#pragma once

#include <cstddef>
#include <vector>

namespace focal::metrics {

double accuracy(const std::vector<int>& preds, const std::vector<int>& labels);

struct F1Report {
    std::vector<double> per_class;
    double macro = 0.0;
    // classes missing from both preds and labels; their F1 is 0 by convention
    std::vector<int> absent_classes;
};

F1Report macro_f1(const std::vector<int>& preds, const std::vector<int>& labels, int class_count);

struct KappaResult {
    double value = 0.0;
    bool degenerate = false; // zero expected-disagreement denominator
};

// Cohen's kappa with quadratic weights w_ij = (i-j)^2/(C-1)^2.
KappaResult quadratic_kappa(const std::vector<int>& preds, const std::vector<int>& labels,
                            int class_count);

// confusion[actual][predicted], any nonnegative counts
KappaResult quadratic_kappa_from_confusion(const std::vector<std::vector<double>>& confusion);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0; // sample std (ddof=1) / sqrt(n); 0 when n < 2
};

MeanStderr mean_stderr(const std::vector<double>& values);

} // namespace focal::metrics
