#include "focal/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "focal/errors.hpp"

namespace focal::cfg {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long n = std::stoll(v, &pos);
        if (pos != v.size() || n < 0) throw std::invalid_argument("");
        return static_cast<std::size_t>(n);
    } catch (...) {
        throw ParamError("config key " + key + ": expected a nonnegative integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long n = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return n;
    } catch (...) {
        throw ParamError("config key " + key + ": expected an unsigned integer, got '" + v + "'");
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int n = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return n;
    } catch (...) {
        throw ParamError("config key " + key + ": expected an integer, got '" + v + "'");
    }
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ParamError("config key " + key + ": expected a number, got '" + v + "'");
    }
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParamError("config line without '=': " + t);
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));

        if (key == "dataset.source") c.source = val;
        else if (key == "dataset.images") c.images = val;
        else if (key == "dataset.labels") c.labels = val;
        else if (key == "dataset.test_images") c.test_images = val;
        else if (key == "dataset.test_labels") c.test_labels = val;
        else if (key == "dataset.collapse") c.collapse = val;
        else if (key == "dataset.pool") c.pool_path = val;
        else if (key == "dataset.train_pool_size") c.train_pool_size = parse_size(key, val);
        else if (key == "dataset.val_size") c.val_size = parse_size(key, val);
        else if (key == "dataset.test_size") c.test_size = parse_size(key, val);
        else if (key == "dataset.perturb_per_type") c.perturb_per_type = parse_size(key, val);
        else if (key == "dataset.sensor_noise") c.sensor_noise = parse_double(key, val);
        else if (key == "dataset.black_fraction") c.black_fraction = parse_double(key, val);
        else if (key == "dataset.blur_sigma") c.blur_sigma = parse_double(key, val);
        else if (key == "dataset.merge_alpha_lo") c.merge_alpha_lo = parse_double(key, val);
        else if (key == "dataset.merge_alpha_hi") c.merge_alpha_hi = parse_double(key, val);
        else if (key == "dataset.cluster_classes") c.cluster_classes = parse_int(key, val);
        else if (key == "dataset.cluster_means") c.cluster_means = val;
        else if (key == "dataset.cluster_covs") c.cluster_covs = val;
        else if (key == "dataset.cluster_sizes") c.cluster_sizes = val;
        else if (key == "dataset.cluster_outliers") c.cluster_outliers = parse_size(key, val);
        else if (key == "dataset.cluster_blends") c.cluster_blends = parse_size(key, val);
        else if (key == "dataset.cluster_far_radius") c.cluster_far_radius = parse_double(key, val);
        else if (key == "model.extractor") c.extractor = val;
        else if (key == "model.feature_dim") c.feature_dim = parse_size(key, val);
        else if (key == "model.hidden_width") c.hidden_width = parse_size(key, val);
        else if (key == "model.extractor_hidden") c.extractor_hidden = parse_size(key, val);
        else if (key == "model.conv_filters") c.conv_filters = parse_size(key, val);
        else if (key == "model.T") c.mc_samples = parse_size(key, val);
        else if (key == "train.epochs") c.epochs = parse_size(key, val);
        else if (key == "train.lr") c.lr = parse_double(key, val);
        else if (key == "train.plateau_patience") c.plateau_patience = parse_size(key, val);
        else if (key == "train.lr_factor") c.lr_factor = parse_double(key, val);
        else if (key == "train.batch_size") c.batch_size = parse_size(key, val);
        else if (key == "train.sigma_max") c.sigma_max = parse_double(key, val);
        else if (key == "acquisition.method") c.method = val;
        else if (key == "acquisition.lambda_al") c.lambda_al = parse_double(key, val);
        else if (key == "acquisition.lambda_ood") c.lambda_ood = parse_double(key, val);
        else if (key == "acquisition.k") c.k = parse_size(key, val);
        else if (key == "acquisition.batch") c.batch = parse_size(key, val);
        else if (key == "acquisition.steps") c.steps = parse_size(key, val);
        else if (key == "acquisition.initial_labeled") c.initial_labeled = parse_size(key, val);
        else if (key == "seed") c.seed = parse_u64(key, val);
        else if (key == "out_dir") c.out_dir = val;
        else throw ParamError("unknown config key: " + key);
    }
    if (c.lambda_al < 0.0 || c.lambda_ood < 0.0)
        throw ParamError("config: lambda_al and lambda_ood must be nonnegative");
    if (c.batch < 1) throw ParamError("config key acquisition.batch: must be >= 1");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream o;
    o << "dataset.source=" << c.source << '\n';
    o << "dataset.images=" << c.images << '\n';
    o << "dataset.labels=" << c.labels << '\n';
    o << "dataset.test_images=" << c.test_images << '\n';
    o << "dataset.test_labels=" << c.test_labels << '\n';
    o << "dataset.collapse=" << c.collapse << '\n';
    o << "dataset.pool=" << c.pool_path << '\n';
    o << "dataset.train_pool_size=" << c.train_pool_size << '\n';
    o << "dataset.val_size=" << c.val_size << '\n';
    o << "dataset.test_size=" << c.test_size << '\n';
    o << "dataset.perturb_per_type=" << c.perturb_per_type << '\n';
    o << "dataset.sensor_noise=" << fmt_double(c.sensor_noise) << '\n';
    o << "dataset.black_fraction=" << fmt_double(c.black_fraction) << '\n';
    o << "dataset.blur_sigma=" << fmt_double(c.blur_sigma) << '\n';
    o << "dataset.merge_alpha_lo=" << fmt_double(c.merge_alpha_lo) << '\n';
    o << "dataset.merge_alpha_hi=" << fmt_double(c.merge_alpha_hi) << '\n';
    o << "dataset.cluster_classes=" << c.cluster_classes << '\n';
    o << "dataset.cluster_means=" << c.cluster_means << '\n';
    o << "dataset.cluster_covs=" << c.cluster_covs << '\n';
    o << "dataset.cluster_sizes=" << c.cluster_sizes << '\n';
    o << "dataset.cluster_outliers=" << c.cluster_outliers << '\n';
    o << "dataset.cluster_blends=" << c.cluster_blends << '\n';
    o << "dataset.cluster_far_radius=" << fmt_double(c.cluster_far_radius) << '\n';
    o << "model.extractor=" << c.extractor << '\n';
    o << "model.feature_dim=" << c.feature_dim << '\n';
    o << "model.hidden_width=" << c.hidden_width << '\n';
    o << "model.extractor_hidden=" << c.extractor_hidden << '\n';
    o << "model.conv_filters=" << c.conv_filters << '\n';
    o << "model.T=" << c.mc_samples << '\n';
    o << "train.epochs=" << c.epochs << '\n';
    o << "train.lr=" << fmt_double(c.lr) << '\n';
    o << "train.plateau_patience=" << c.plateau_patience << '\n';
    o << "train.lr_factor=" << fmt_double(c.lr_factor) << '\n';
    o << "train.batch_size=" << c.batch_size << '\n';
    o << "train.sigma_max=" << fmt_double(c.sigma_max) << '\n';
    o << "acquisition.method=" << c.method << '\n';
    o << "acquisition.lambda_al=" << fmt_double(c.lambda_al) << '\n';
    o << "acquisition.lambda_ood=" << fmt_double(c.lambda_ood) << '\n';
    o << "acquisition.k=" << c.k << '\n';
    o << "acquisition.batch=" << c.batch << '\n';
    o << "acquisition.steps=" << c.steps << '\n';
    o << "acquisition.initial_labeled=" << c.initial_labeled << '\n';
    o << "seed=" << c.seed << '\n';
    o << "out_dir=" << c.out_dir << '\n';
    return o.str();
}

} // namespace focal::cfg
