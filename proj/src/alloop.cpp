#include "focal/alloop.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "focal/acquisition.hpp"
#include "focal/bnn.hpp"
#include "focal/errors.hpp"
#include "focal/lof.hpp"
#include "focal/metrics.hpp"

namespace focal::loop {

namespace {

struct SplitView {
    nd::Tensor X;
    std::vector<int> y;
    std::vector<std::uint64_t> ids;
};

SplitView gather(const data::LabeledPool& pool, data::Split split) {
    SplitView v;
    const auto idx = pool.indices_of(split);
    if (idx.empty()) {
        v.X = nd::Tensor({0});
        return v;
    }
    const auto& first = pool.item(idx[0]).values;
    std::vector<std::size_t> shape = {idx.size()};
    shape.insert(shape.end(), first.shape.begin(), first.shape.end());
    v.X = nd::Tensor(shape);
    const std::size_t item = first.numel();
    v.y.reserve(idx.size());
    v.ids.reserve(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const data::Item& it = pool.item(idx[i]);
        if (it.values.numel() != item)
            throw DataError("run: items in one split have mismatched shapes");
        std::copy_n(it.values.data.begin(), item,
                    v.X.data.begin() + static_cast<long>(i * item));
        v.y.push_back(it.label);
        v.ids.push_back(it.id);
    }
    return v;
}

bnn::ModelConfig model_config(const cfg::RunConfig& c, const data::LabeledPool& pool) {
    bnn::ModelConfig m;
    if (c.extractor == "conv") m.conv = true;
    else if (c.extractor == "dense") m.conv = false;
    else throw ParamError("config key model.extractor: expected conv or dense, got '" +
                          c.extractor + "'");
    if (pool.size() == 0) throw DataError("run: empty pool");
    m.input_shape = pool.item(0).values.shape;
    if (m.conv && m.input_shape.size() != 2)
        throw ParamError("run: conv extractor needs {H, W} items");
    if (!m.conv && m.input_shape.size() != 1)
        throw ParamError("run: dense extractor needs flat items");
    m.conv_filters = c.conv_filters;
    m.extractor_hidden = c.extractor_hidden;
    m.feature_dim = c.feature_dim;
    m.head_hidden = c.hidden_width;
    m.class_count = pool.class_count();
    return m;
}

bnn::TrainSchedule schedule_of(const cfg::RunConfig& c) {
    bnn::TrainSchedule s;
    s.epochs = c.epochs;
    s.lr = c.lr;
    s.plateau_patience = c.plateau_patience;
    s.lr_factor = c.lr_factor;
    s.batch_size = c.batch_size;
    s.sigma_max = c.sigma_max;
    return s;
}

std::vector<int> predict_split(const bnn::VariationalClassifier& model, const SplitView& view,
                               std::uint64_t seed, const char* tag, std::size_t step,
                               std::size_t T) {
    const nd::Tensor z = model.extract(view.X);
    const std::size_t F = z.shape[1];
    const std::size_t C = static_cast<std::size_t>(model.config().class_count);
    std::vector<int> preds(view.y.size());
    for (std::size_t i = 0; i < view.y.size(); ++i) {
        Rng stream = Rng::derive(seed, tag, step, view.ids[i]);
        const nd::Tensor draws = model.head_draws(&z.data[i * F], T, stream);
        std::vector<double> p(C, 0.0);
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t c = 0; c < C; ++c) p[c] += draws.at(t, c);
        preds[i] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    }
    return preds;
}

void fill_metrics(StepRow& row, const std::vector<int>& preds, const std::vector<int>& labels,
                  int class_count) {
    row.accuracy = metrics::accuracy(preds, labels);
    row.kappa = metrics::quadratic_kappa(preds, labels, class_count).value;
    const auto f1 = metrics::macro_f1(preds, labels, class_count);
    row.macro_f1 = f1.macro;
    row.f1_class = f1.per_class;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

RunRecord run(data::LabeledPool& pool, const cfg::RunConfig& config) {
    RunRecord rec;
    rec.method = config.method;
    rec.seed = config.seed;
    rec.class_count = pool.class_count();
    rec.config_echo = cfg::serialize_config(config);
    try {
        const acq::Method method = acq::method_from_name(config.method);
        if (config.batch * config.steps > pool.split_size(data::Split::Pool))
            throw StateError("run: acquisition schedule exceeds the pool size");
        const SplitView test = gather(pool, data::Split::Test);
        const SplitView val = gather(pool, data::Split::Val);
        if (test.y.empty()) throw StateError("run: empty test split");
        const bnn::ModelConfig mcfg = model_config(config, pool);
        const bnn::TrainSchedule sched = schedule_of(config);
        const std::size_t T = std::max<std::size_t>(config.mc_samples, 1);

        std::array<std::size_t, 4> acquired{}; // by Perturbation enum value
        for (std::size_t s = 0; s <= config.steps; ++s) {
            const auto t0 = std::chrono::steady_clock::now();
            const SplitView train_view = gather(pool, data::Split::Train);

            Rng init_rng = Rng::derive(config.seed, "init", s);
            bnn::VariationalClassifier model(mcfg, init_rng);
            Rng train_rng = Rng::derive(config.seed, "train", s);
            bnn::train(model, train_view.X, train_view.y, val.X, val.y, sched, train_rng);

            StepRow row;
            row.step = static_cast<int>(s);
            row.n_labeled = pool.split_size(data::Split::Train);
            fill_metrics(row, predict_split(model, test, config.seed, "eval", s, T), test.y,
                         rec.class_count);
            row.acq_clean = acquired[static_cast<std::size_t>(data::Perturbation::None)];
            row.acq_blackdots = acquired[static_cast<std::size_t>(data::Perturbation::BlackDots)];
            row.acq_blur = acquired[static_cast<std::size_t>(data::Perturbation::GaussianBlur)];
            row.acq_merged = acquired[static_cast<std::size_t>(data::Perturbation::Merged)];

            if (s < config.steps) {
                const SplitView pool_view = gather(pool, data::Split::Pool);
                std::vector<std::uint64_t> batch_ids;
                if (method == acq::Method::RA) {
                    Rng ra = Rng::derive(config.seed, "ra", s);
                    batch_ids = acq::select_random(pool_view.ids, config.batch, ra);
                } else {
                    const nd::Tensor z_train = model.extract(train_view.X);
                    const nd::Tensor z_pool = model.extract(pool_view.X);
                    const std::size_t F = z_pool.shape[1];
                    std::optional<ood::OoDIndex> index;
                    std::vector<double> weights;
                    if (method == acq::Method::FocAL) {
                        index.emplace(z_train, config.k);
                        weights = acq::class_weights(pool.label_counts(data::Split::Train));
                    }
                    std::vector<double> scores(pool_view.ids.size());
                    for (std::size_t i = 0; i < pool_view.ids.size(); ++i) {
                        Rng stream = Rng::derive(config.seed, "score", s, pool_view.ids[i]);
                        const nd::Tensor draws = model.head_draws(&z_pool.data[i * F], T, stream);
                        switch (method) {
                            case acq::Method::FocAL: {
                                const auto summary = bnn::decompose_draws(draws);
                                const double sc = index->score(&z_pool.data[i * F]);
                                scores[i] = acq::focal_score(summary, sc, weights,
                                                             config.lambda_al, config.lambda_ood);
                                break;
                            }
                            case acq::Method::EN: {
                                const auto summary = bnn::decompose_draws(draws);
                                scores[i] = acq::entropy_score(summary.p_hat);
                                break;
                            }
                            case acq::Method::BALD:
                                scores[i] = acq::bald_score(draws);
                                break;
                            case acq::Method::MS:
                                scores[i] = acq::meanstd_score(draws);
                                break;
                            case acq::Method::EP:
                                scores[i] = acq::epistemic_score(bnn::decompose_draws(draws));
                                break;
                            case acq::Method::RA:
                                break;
                        }
                    }
                    batch_ids = acq::select_batch(pool_view.ids, scores, config.batch);
                }
                pool.oracle_label(batch_ids);
                for (std::uint64_t id : batch_ids)
                    ++acquired[static_cast<std::size_t>(pool.by_id(id).perturbation)];
            }
            row.seconds = seconds_since(t0);
            rec.rows.push_back(row);
        }
    } catch (const std::exception& e) {
        rec.aborted = true;
        rec.abort_reason = e.what();
    }
    return rec;
}

StepRow evaluate_supervised(data::LabeledPool& pool, const cfg::RunConfig& config) {
    const SplitView train_view = gather(pool, data::Split::Train);
    const SplitView val = gather(pool, data::Split::Val);
    const SplitView test = gather(pool, data::Split::Test);
    if (test.y.empty()) throw StateError("evaluate_supervised: empty test split");
    const bnn::ModelConfig mcfg = model_config(config, pool);

    Rng init_rng = Rng::derive(config.seed, "init", 0);
    bnn::VariationalClassifier model(mcfg, init_rng);
    Rng train_rng = Rng::derive(config.seed, "train", 0);
    bnn::train(model, train_view.X, train_view.y, val.X, val.y, schedule_of(config), train_rng);

    StepRow row;
    row.step = 0;
    row.n_labeled = train_view.y.size();
    const std::size_t T = std::max<std::size_t>(config.mc_samples, 1);
    fill_metrics(row, predict_split(model, test, config.seed, "eval", 0, T), test.y,
                 pool.class_count());
    return row;
}

std::string steps_csv(const RunRecord& rec) {
    std::ostringstream o;
    o << "step,n_labeled,accuracy,kappa,macro_f1";
    for (int c = 0; c < rec.class_count; ++c) o << ",f1_class_" << c;
    o << ",acq_blackdots,acq_blur,acq_merged,acq_clean,seconds\n";
    char buf[64];
    for (const StepRow& r : rec.rows) {
        o << r.step << ',' << r.n_labeled;
        for (double v : {r.accuracy, r.kappa, r.macro_f1}) {
            std::snprintf(buf, sizeof(buf), ",%.9f", v);
            o << buf;
        }
        for (double v : r.f1_class) {
            std::snprintf(buf, sizeof(buf), ",%.9f", v);
            o << buf;
        }
        o << ',' << r.acq_blackdots << ',' << r.acq_blur << ',' << r.acq_merged << ','
          << r.acq_clean;
        std::snprintf(buf, sizeof(buf), ",%.3f", r.seconds);
        o << buf << '\n';
    }
    return o.str();
}

std::string manifest_json(const RunRecord& rec) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["method"] = rec.method;
    j["seed"] = rec.seed;
    j["class_count"] = rec.class_count;
    j["steps_recorded"] = rec.rows.size();
    j["aborted"] = rec.aborted;
    if (rec.aborted) j["abort_reason"] = rec.abort_reason;
    j["config"] = rec.config_echo;
    return j.dump(2);
}

void write_run_outputs(const RunRecord& rec, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir + "/steps.csv", std::ios::binary);
        if (!os) throw DataError("cannot write " + dir + "/steps.csv");
        os << steps_csv(rec);
    }
    std::ofstream os(dir + "/run_manifest.json", std::ios::binary);
    if (!os) throw DataError("cannot write " + dir + "/run_manifest.json");
    os << manifest_json(rec) << '\n';
}

RunRecord read_steps_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty steps file: " + path);
    int class_count = 0;
    {
        std::istringstream hs(line);
        std::string col;
        while (std::getline(hs, col, ','))
            if (col.rfind("f1_class_", 0) == 0) ++class_count;
    }
    RunRecord rec;
    rec.class_count = class_count;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != static_cast<std::size_t>(10 + class_count))
            throw FormatError("malformed steps row: " + line);
        StepRow r;
        std::size_t f = 0;
        r.step = std::stoi(fields[f++]);
        r.n_labeled = static_cast<std::size_t>(std::stoull(fields[f++]));
        r.accuracy = std::stod(fields[f++]);
        r.kappa = std::stod(fields[f++]);
        r.macro_f1 = std::stod(fields[f++]);
        for (int c = 0; c < class_count; ++c) r.f1_class.push_back(std::stod(fields[f++]));
        r.acq_blackdots = static_cast<std::size_t>(std::stoull(fields[f++]));
        r.acq_blur = static_cast<std::size_t>(std::stoull(fields[f++]));
        r.acq_merged = static_cast<std::size_t>(std::stoull(fields[f++]));
        r.acq_clean = static_cast<std::size_t>(std::stoull(fields[f++]));
        r.seconds = std::stod(fields[f++]);
        rec.rows.push_back(std::move(r));
    }
    return rec;
}

std::vector<std::array<std::size_t, 4>> perturbed_acquired(const RunRecord& rec) {
    std::vector<std::array<std::size_t, 4>> out;
    out.reserve(rec.rows.size());
    for (const StepRow& r : rec.rows)
        out.push_back({r.acq_blackdots, r.acq_blur, r.acq_merged, r.acq_clean});
    return out;
}

namespace {

const std::vector<std::string>& comparison_metrics() {
    static const std::vector<std::string> m = {
        "accuracy",  "kappa",      "macro_f1",  "acq_blackdots",
        "acq_blur",  "acq_merged", "acq_clean", "acq_perturbed"};
    return m;
}

double metric_of(const StepRow& r, const std::string& name) {
    if (name == "accuracy") return r.accuracy;
    if (name == "kappa") return r.kappa;
    if (name == "macro_f1") return r.macro_f1;
    if (name == "acq_blackdots") return static_cast<double>(r.acq_blackdots);
    if (name == "acq_blur") return static_cast<double>(r.acq_blur);
    if (name == "acq_merged") return static_cast<double>(r.acq_merged);
    if (name == "acq_clean") return static_cast<double>(r.acq_clean);
    if (name == "acq_perturbed")
        return static_cast<double>(r.acq_blackdots + r.acq_blur + r.acq_merged);
    throw ParamError("unknown metric: " + name);
}

} // namespace

std::vector<ComparisonRow> compare(const std::vector<RunRecord>& records) {
    if (records.empty()) throw ParamError("compare: no records");
    const RunRecord& ref = records.front();
    for (const RunRecord& r : records) {
        if (r.rows.size() != ref.rows.size())
            throw GridError("compare: records disagree on step count");
        for (std::size_t i = 0; i < r.rows.size(); ++i)
            if (r.rows[i].step != ref.rows[i].step ||
                r.rows[i].n_labeled != ref.rows[i].n_labeled)
                throw GridError("compare: records disagree on the step grid");
    }
    std::map<std::string, std::vector<const RunRecord*>> by_method;
    for (const RunRecord& r : records) by_method[r.method].push_back(&r);

    std::vector<ComparisonRow> out;
    for (const auto& [method, recs] : by_method) {
        for (std::size_t i = 0; i < ref.rows.size(); ++i) {
            for (const std::string& metric : comparison_metrics()) {
                std::vector<double> vals;
                vals.reserve(recs.size());
                for (const RunRecord* r : recs) vals.push_back(metric_of(r->rows[i], metric));
                const auto ms = metrics::mean_stderr(vals);
                out.push_back({method, ref.rows[i].step, metric, ms.mean, ms.stderr_});
            }
        }
    }
    return out;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
    std::ostringstream o;
    o << "method,step,metric,mean,stderr\n";
    char buf[80];
    for (const ComparisonRow& r : rows) {
        std::snprintf(buf, sizeof(buf), ",%.9f,%.9f", r.mean, r.stderr_);
        o << r.method << ',' << r.step << ',' << r.metric << buf << '\n';
    }
    return o.str();
}

std::vector<ComparisonRow> parse_comparison_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "method,step,metric,mean,stderr")
        throw FormatError("comparison file: bad or missing header");
    std::vector<ComparisonRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 5) throw FormatError("comparison file: malformed row: " + line);
        ComparisonRow r;
        r.method = fields[0];
        try {
            r.step = std::stoi(fields[1]);
            r.metric = fields[2];
            r.mean = std::stod(fields[3]);
            r.stderr_ = std::stod(fields[4]);
        } catch (...) {
            throw FormatError("comparison file: malformed row: " + line);
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

namespace {

struct ReportShape {
    std::vector<std::string> metrics; // filtered, in canonical order
    std::vector<std::string> methods;
    std::vector<int> steps;
};

ReportShape report_shape(const std::vector<ComparisonRow>& rows,
                         const std::string& metric_filter) {
    ReportShape s;
    for (const ComparisonRow& r : rows) {
        if (std::find(s.methods.begin(), s.methods.end(), r.method) == s.methods.end())
            s.methods.push_back(r.method);
        if (std::find(s.steps.begin(), s.steps.end(), r.step) == s.steps.end())
            s.steps.push_back(r.step);
        if (std::find(s.metrics.begin(), s.metrics.end(), r.metric) == s.metrics.end())
            s.metrics.push_back(r.metric);
    }
    std::sort(s.methods.begin(), s.methods.end());
    std::sort(s.steps.begin(), s.steps.end());
    if (!metric_filter.empty()) {
        if (std::find(s.metrics.begin(), s.metrics.end(), metric_filter) == s.metrics.end())
            throw ParamError("unknown metric: " + metric_filter);
        s.metrics = {metric_filter};
    }
    return s;
}

const ComparisonRow* find_row(const std::vector<ComparisonRow>& rows, const std::string& method,
                              int step, const std::string& metric) {
    for (const ComparisonRow& r : rows)
        if (r.method == method && r.step == step && r.metric == metric) return &r;
    return nullptr;
}

} // namespace

std::string report_text(const std::vector<ComparisonRow>& rows,
                        const std::string& metric_filter) {
    const ReportShape shape = report_shape(rows, metric_filter);
    std::ostringstream o;
    char buf[64];
    for (const std::string& metric : shape.metrics) {
        o << "== " << metric << " ==\n";
        std::snprintf(buf, sizeof(buf), "%6s", "step");
        o << buf;
        for (const std::string& m : shape.methods) {
            std::snprintf(buf, sizeof(buf), " %18s", m.c_str());
            o << buf;
        }
        o << '\n';
        for (int step : shape.steps) {
            std::snprintf(buf, sizeof(buf), "%6d", step);
            o << buf;
            for (const std::string& m : shape.methods) {
                const ComparisonRow* r = find_row(rows, m, step, metric);
                if (r) {
                    char cell[48];
                    std::snprintf(cell, sizeof(cell), "%.4f(%.4f)", r->mean, r->stderr_);
                    std::snprintf(buf, sizeof(buf), " %18s", cell);
                } else {
                    std::snprintf(buf, sizeof(buf), " %18s", "-");
                }
                o << buf;
            }
            o << '\n';
        }
        o << '\n';
    }
    return o.str();
}

std::string report_json(const std::vector<ComparisonRow>& rows,
                        const std::string& metric_filter) {
    const ReportShape shape = report_shape(rows, metric_filter);
    nlohmann::json j;
    for (const std::string& metric : shape.metrics) {
        nlohmann::json mj;
        mj["steps"] = shape.steps;
        for (const std::string& m : shape.methods) {
            nlohmann::json series = nlohmann::json::array();
            for (int step : shape.steps) {
                const ComparisonRow* r = find_row(rows, m, step, metric);
                if (r)
                    series.push_back({{"mean", r->mean}, {"stderr", r->stderr_}});
                else
                    series.push_back(nullptr);
            }
            mj["methods"][m] = series;
        }
        j[metric] = mj;
    }
    return j.dump(2);
}

} // namespace focal::loop
