#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <glob.h>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "focal/alloop.hpp"
#include "focal/config.hpp"
#include "focal/errors.hpp"
#include "focal/genpool.hpp"

namespace fs = std::filesystem;
using namespace focal;

namespace {

// exit-code contract: 0 ok, 2 input error, 3 run abort, 4 aggregation
// mismatch, 5 refuse-overwrite
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitAbort = 3;
constexpr int kExitGrid = 4;
constexpr int kExitOverwrite = 5;

cfg::RunConfig load_config_with_env(const std::string& path) {
    cfg::RunConfig c = cfg::load_config(path);
    if (const char* env = std::getenv("FOCAL_OUT"); env && *env) c.out_dir = env;
    return c;
}

int cmd_gen_data(const std::string& config_path) {
    const cfg::RunConfig c = load_config_with_env(config_path);
    const std::string pool_path = c.resolved_pool_path();
    if (fs::exists(pool_path)) {
        std::cerr << "refusing to overwrite existing pool: " << pool_path << "\n";
        return kExitOverwrite;
    }
    const data::LabeledPool pool = data::build_pool(c);
    fs::create_directories(fs::path(pool_path).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(pool_path).parent_path());
    fs::create_directories(c.out_dir);
    pool.save(pool_path);
    const std::string census = data::pool_census_json(pool, c.seed, cfg::serialize_config(c));
    std::ofstream manifest(c.out_dir + "/pool_manifest.json", std::ios::binary);
    manifest << census << '\n';
    std::cout << census << '\n';
    return kExitOk;
}

int run_one(const cfg::RunConfig& c, const std::string& out_dir, loop::RunRecord* out) {
    data::LabeledPool pool = data::LabeledPool::load(c.resolved_pool_path());
    loop::RunRecord rec = loop::run(pool, c);
    loop::write_run_outputs(rec, out_dir);
    if (out) *out = rec;
    return rec.aborted ? kExitAbort : kExitOk;
}

int cmd_run(const std::string& config_path) {
    const cfg::RunConfig c = load_config_with_env(config_path);
    if (!fs::exists(c.resolved_pool_path())) {
        std::cerr << "pool container not found: " << c.resolved_pool_path()
                  << " (generate it with gen-data)\n";
        return kExitInput;
    }
    if (fs::exists(c.out_dir + "/steps.csv")) {
        std::cerr << "refusing to overwrite existing run outputs in " << c.out_dir << "\n";
        return kExitOverwrite;
    }
    loop::RunRecord rec;
    const int code = run_one(c, c.out_dir, &rec);
    for (const loop::StepRow& r : rec.rows)
        std::printf("step %2d  n_labeled %4zu  accuracy %.4f  kappa %.4f  macro_f1 %.4f\n",
                    r.step, r.n_labeled, r.accuracy, r.kappa, r.macro_f1);
    if (rec.aborted)
        std::cerr << "run aborted: " << rec.abort_reason << " (partial outputs in " << c.out_dir
                  << ")\n";
    else
        std::cout << "run complete: " << c.out_dir << "/steps.csv\n";
    return code;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::string> paths;
    if (rc == 0)
        for (std::size_t i = 0; i < g.gl_pathc; ++i) paths.emplace_back(g.gl_pathv[i]);
    globfree(&g);
    if (rc != 0 && rc != GLOB_NOMATCH) throw DataError("glob failed on pattern: " + pattern);
    return paths;
}

std::vector<std::uint64_t> parse_seeds(const std::string& list) {
    std::vector<std::uint64_t> seeds;
    std::istringstream is(list);
    std::string part;
    while (std::getline(is, part, ',')) {
        if (part.empty()) continue;
        try {
            std::size_t pos = 0;
            seeds.push_back(std::stoull(part, &pos));
            if (pos != part.size()) throw std::invalid_argument("");
        } catch (...) {
            throw ParamError("--seeds: expected a comma-separated integer list, got '" + part +
                             "'");
        }
    }
    if (seeds.empty()) throw ParamError("--seeds: empty seed list");
    return seeds;
}

int cmd_compare(const std::string& configs_glob, const std::string& seeds_list, bool parallel) {
    const std::vector<std::string> config_paths = expand_glob(configs_glob);
    if (config_paths.empty()) {
        std::cerr << "no config files match: " << configs_glob << "\n";
        return kExitInput;
    }
    const std::vector<std::uint64_t> seeds = parse_seeds(seeds_list);

    struct Job {
        cfg::RunConfig config;
        std::string out_dir;
    };
    std::vector<Job> jobs;
    std::string comparison_dir;
    for (const std::string& path : config_paths) {
        cfg::RunConfig base = load_config_with_env(path);
        if (comparison_dir.empty()) comparison_dir = base.out_dir;
        if (!fs::exists(base.resolved_pool_path())) {
            std::cerr << "pool container not found: " << base.resolved_pool_path() << "\n";
            return kExitInput;
        }
        for (std::uint64_t seed : seeds) {
            Job j;
            j.config = base;
            j.config.seed = seed;
            j.out_dir = base.out_dir + "/" + base.method + "_s" + std::to_string(seed);
            jobs.push_back(std::move(j));
        }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i)
        for (std::size_t k = i + 1; k < jobs.size(); ++k)
            if (jobs[i].out_dir == jobs[k].out_dir) {
                std::cerr << "two runs share the out_dir " << jobs[i].out_dir << "\n";
                return kExitOverwrite;
            }
    for (const Job& j : jobs)
        if (fs::exists(j.out_dir + "/steps.csv")) {
            std::cerr << "refusing to overwrite existing run outputs in " << j.out_dir << "\n";
            return kExitOverwrite;
        }

    std::vector<loop::RunRecord> records(jobs.size());
    std::vector<std::string> failures(jobs.size());
    auto work = [&](std::size_t i) {
        try {
            run_one(jobs[i].config, jobs[i].out_dir, &records[i]);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    };
    if (parallel) {
        const std::size_t n_threads =
            std::min<std::size_t>(jobs.size(), std::max(1u, std::thread::hardware_concurrency()));
        std::vector<std::thread> threads;
        std::atomic<std::size_t> next{0};
        for (std::size_t t = 0; t < n_threads; ++t)
            threads.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) work(i);
            });
        for (auto& th : threads) th.join();
    } else {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            std::printf("[%zu/%zu] %s seed %llu\n", i + 1, jobs.size(),
                        jobs[i].config.method.c_str(),
                        static_cast<unsigned long long>(jobs[i].config.seed));
            std::fflush(stdout);
            work(i);
        }
    }
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (!failures[i].empty()) {
            std::cerr << "run failed (" << jobs[i].out_dir << "): " << failures[i] << "\n";
            return kExitAbort;
        }
        if (records[i].aborted) {
            std::cerr << "run aborted (" << jobs[i].out_dir << "): " << records[i].abort_reason
                      << "\n";
            return kExitAbort;
        }
    }

    const auto rows = loop::compare(records);
    fs::create_directories(comparison_dir);
    const std::string out_path = comparison_dir + "/comparison.csv";
    std::ofstream os(out_path, std::ios::binary);
    os << loop::comparison_csv(rows);
    std::cout << "comparison written: " << out_path << "\n";
    return kExitOk;
}

int cmd_report(const std::string& input, const std::string& metric) {
    std::ifstream is(input);
    if (!is) {
        std::cerr << "cannot open comparison file: " << input << "\n";
        return kExitInput;
    }
    std::ostringstream buf;
    buf << is.rdbuf();
    const auto rows = loop::parse_comparison_csv(buf.str());
    const std::string text = loop::report_text(rows, metric);
    const std::string json = loop::report_json(rows, metric);
    std::cout << text;
    const fs::path dir = fs::path(input).parent_path();
    const fs::path json_path = (dir.empty() ? fs::path(".") : dir) / "report.json";
    std::ofstream os(json_path, std::ios::binary);
    os << json << '\n';
    std::cout << "json report written: " << json_path.string() << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"pool-based active-learning experiment engine"};
    app.require_subcommand(1);

    std::string config_path, configs_glob, seeds_list = "1", report_input, report_metric;
    bool parallel = false;

    CLI::App* gen = app.add_subcommand("gen-data", "generate an experiment pool");
    gen->add_option("--config", config_path, "config file")->required();

    CLI::App* run = app.add_subcommand("run", "run one acquisition experiment");
    run->add_option("--config", config_path, "config file")->required();

    CLI::App* cmp = app.add_subcommand("compare", "run a method comparison over seeds");
    cmp->add_option("--configs", configs_glob, "config file glob, one config per method")
        ->required();
    cmp->add_option("--seeds", seeds_list, "comma-separated seed list");
    cmp->add_flag("--parallel", parallel, "run independent runs concurrently");

    CLI::App* rep = app.add_subcommand("report", "render tables from a comparison file");
    rep->add_option("--input", report_input, "comparison.csv path")->required();
    rep->add_option("--metric", report_metric, "only this metric (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInput;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(config_path);
        if (run->parsed()) return cmd_run(config_path);
        if (cmp->parsed()) return cmd_compare(configs_glob, seeds_list, parallel);
        if (rep->parsed()) return cmd_report(report_input, report_metric);
    } catch (const GridError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitGrid;
    } catch (const StateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAbort;
    } catch (const TrainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAbort;
    } catch (const EvalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitOk;
}
