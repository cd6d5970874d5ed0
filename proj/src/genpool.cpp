#include "focal/genpool.hpp"

#include <algorithm>
#include <sstream>

#include "focal/errors.hpp"

namespace focal::data {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string part;
    while (std::getline(is, part, sep)) out.push_back(part);
    return out;
}

double num(const std::string& what, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ParamError(what + ": expected a number, got '" + v + "'");
    }
}

} // namespace

CollapseRule parse_collapse(const std::string& text) {
    CollapseRule rule;
    for (const std::string& entry : split(text, ',')) {
        if (entry.empty()) continue;
        const auto kv = split(entry, ':');
        if (kv.size() != 2)
            throw ParamError("dataset.collapse: expected from:to entries, got '" + entry + "'");
        const int to = static_cast<int>(num("dataset.collapse", kv[1]));
        if (kv[0] == "default") {
            rule.fallback = to;
            rule.has_fallback = true;
        } else {
            rule.explicit_map[static_cast<int>(num("dataset.collapse", kv[0]))] = to;
        }
    }
    if (rule.explicit_map.empty() && !rule.has_fallback)
        throw ParamError("dataset.collapse: empty mapping");
    return rule;
}

int apply_collapse(std::vector<Item>& items, const CollapseRule& rule) {
    std::unordered_map<int, int> mapping = rule.explicit_map;
    if (rule.has_fallback)
        for (const Item& it : items)
            if (!mapping.count(it.label)) mapping[it.label] = rule.fallback;
    return collapse_classes(items, mapping);
}

ClusterSpec cluster_spec_from(const cfg::RunConfig& c) {
    ClusterSpec spec;
    spec.class_count = c.cluster_classes;
    if (spec.class_count < 2) throw ParamError("dataset.cluster_classes: needs >= 2 classes");
    const auto means = split(c.cluster_means, ';');
    const auto covs = split(c.cluster_covs, ';');
    const auto sizes = split(c.cluster_sizes, ';');
    const std::size_t C = static_cast<std::size_t>(spec.class_count);
    if (means.size() != C || covs.size() != C || sizes.size() != C)
        throw ParamError("dataset.cluster_*: need one ';'-separated entry per class");
    for (std::size_t i = 0; i < C; ++i) {
        const auto xy = split(means[i], ':');
        if (xy.size() != 2) throw ParamError("dataset.cluster_means: expected x:y pairs");
        spec.means.push_back({num("dataset.cluster_means", xy[0]),
                              num("dataset.cluster_means", xy[1])});
        const auto v = split(covs[i], ',');
        if (v.size() != 3) throw ParamError("dataset.cluster_covs: expected xx,xy,yy triples");
        spec.covs.push_back({num("dataset.cluster_covs", v[0]), num("dataset.cluster_covs", v[1]),
                             num("dataset.cluster_covs", v[2])});
        spec.per_class.push_back(
            static_cast<std::size_t>(num("dataset.cluster_sizes", sizes[i])));
    }
    spec.n_initial = c.initial_labeled;
    spec.n_val = c.val_size;
    spec.n_test = c.test_size;
    spec.n_far_outliers = c.cluster_outliers;
    spec.n_blend = c.cluster_blends;
    spec.far_radius = c.cluster_far_radius;
    return spec;
}

LabeledPool build_pool(const cfg::RunConfig& c) {
    Rng rng = Rng::derive(c.seed, "data");
    if (c.source == "synthetic-2d") return make_gaussian_clusters(cluster_spec_from(c), rng);

    std::vector<Item> train_items, test_items;
    if (c.source == "idx") {
        train_items = load_idx(c.images, c.labels);
        test_items = load_idx(c.test_images, c.test_labels);
    } else if (c.source == "synthetic-digits") {
        const std::size_t n_source = c.train_pool_size + c.val_size;
        train_items = make_digit_items(n_source, rng);
        test_items = make_digit_items(c.test_size, rng, n_source);
    } else {
        throw ParamError("dataset.source: expected idx, synthetic-digits or synthetic-2d, got '" +
                         c.source + "'");
    }

    const CollapseRule rule = parse_collapse(c.collapse);
    const int c_train = apply_collapse(train_items, rule);
    const int c_test = apply_collapse(test_items, rule);
    const int class_count = std::max(c_train, c_test);

    ExperimentSpec spec;
    spec.n_train_pool = c.train_pool_size;
    spec.n_initial = c.initial_labeled;
    spec.n_val = c.val_size;
    spec.sensor_noise = c.sensor_noise;
    spec.perturb.per_type = c.perturb_per_type;
    spec.perturb.black_fraction = c.black_fraction;
    spec.perturb.blur_sigma = c.blur_sigma;
    spec.perturb.alpha_lo = c.merge_alpha_lo;
    spec.perturb.alpha_hi = c.merge_alpha_hi;
    return build_experiment(train_items, test_items, class_count, spec, rng);
}

} // namespace focal::data
