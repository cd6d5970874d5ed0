#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "focal/config.hpp"
#include "focal/dataset.hpp"

namespace focal::loop {

struct StepRow {
    int step = 0;
    std::size_t n_labeled = 0;
    double accuracy = 0.0;
    double kappa = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> f1_class;
    // cumulative acquisition provenance before this step's acquisition
    std::size_t acq_blackdots = 0, acq_blur = 0, acq_merged = 0, acq_clean = 0;
    double seconds = 0.0;
};

struct RunRecord {
    std::string method;
    std::uint64_t seed = 0;
    int class_count = 0;
    std::string config_echo;
    std::vector<StepRow> rows;
    bool aborted = false;
    std::string abort_reason;
};

// One acquisition experiment: train / evaluate / score / acquire, steps+1
// evaluation rows. Mutates the pool's Train/Pool membership. A module error
// aborts the run and returns the rows completed so far.
RunRecord run(data::LabeledPool& pool, const cfg::RunConfig& config);

// Train once on the given split and report test metrics; no acquisition.
// Used for the clean-vs-perturbed supervised comparison.
StepRow evaluate_supervised(data::LabeledPool& pool, const cfg::RunConfig& config);

std::string steps_csv(const RunRecord& rec);
std::string manifest_json(const RunRecord& rec);
void write_run_outputs(const RunRecord& rec, const std::string& dir);
RunRecord read_steps_csv(const std::string& path); // metrics-only reload for aggregation

// per-step cumulative counts {blackdots, blur, merged, clean}
std::vector<std::array<std::size_t, 4>> perturbed_acquired(const RunRecord& rec);

struct ComparisonRow {
    std::string method;
    int step = 0;
    std::string metric;
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Aggregates per-method over seeds; GridError on mismatched step grids.
std::vector<ComparisonRow> compare(const std::vector<RunRecord>& records);
std::string comparison_csv(const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> parse_comparison_csv(const std::string& text); // FormatError

// Per-metric tables: rows = steps, columns = methods, cell = mean +/- stderr.
// metric_filter empty = all metrics. ParamError on unknown metric names.
std::string report_text(const std::vector<ComparisonRow>& rows, const std::string& metric_filter);
std::string report_json(const std::vector<ComparisonRow>& rows, const std::string& metric_filter);

} // namespace focal::loop
