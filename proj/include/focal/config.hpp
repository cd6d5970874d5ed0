#pragma once

#include <cstdint>
#include <string>

namespace focal::cfg {

// Flat key=value run configuration with dotted section prefixes.
// Every field has a default; unknown keys are rejected at parse time.
struct RunConfig {
    // dataset
    std::string source = "synthetic-digits"; // idx | synthetic-digits | synthetic-2d
    std::string images, labels, test_images, test_labels; // idx source paths
    std::string collapse = "0:0,1:1,default:2";           // original label -> class
    std::string pool_path;                                // default: <out_dir>/pool.bin
    std::size_t train_pool_size = 2000;
    std::size_t val_size = 200;
    std::size_t test_size = 1000; // synthetic sources only
    std::size_t perturb_per_type = 200;
    double sensor_noise = 0.05;
    double black_fraction = 0.75;
    double blur_sigma = 4.0;
    double merge_alpha_lo = 0.4;
    double merge_alpha_hi = 0.6;
    // synthetic-2d cluster layout
    int cluster_classes = 3;
    std::string cluster_means = "-4:0;4:0;0:6";  // x:y per class
    std::string cluster_covs = "1,0,1;1,0,1;1,0,1"; // xx,xy,yy per class
    std::string cluster_sizes = "660;660;680";   // train-pool points per class
    std::size_t cluster_outliers = 0;            // far-field points (BlackDots analog)
    std::size_t cluster_blends = 0;              // boundary blends (Merged analog)
    double cluster_far_radius = 12.0;

    // model
    std::string extractor = "conv"; // conv | dense
    std::size_t feature_dim = 32;
    std::size_t hidden_width = 32;     // head hidden width
    std::size_t extractor_hidden = 32; // dense extractor only; 0 = single affine layer
    std::size_t conv_filters = 4;
    std::size_t mc_samples = 20; // T

    // train
    std::size_t epochs = 200;
    double lr = 1e-4;
    std::size_t plateau_patience = 50;
    double lr_factor = 0.5;
    std::size_t batch_size = 32;
    double sigma_max = 0.0;

    // acquisition
    std::string method = "focal"; // focal | ra | en | bald | ms | ep
    double lambda_al = 0.5;
    double lambda_ood = 2.0;
    std::size_t k = 10;
    std::size_t batch = 10;
    std::size_t steps = 18;
    std::size_t initial_labeled = 20;

    std::uint64_t seed = 1;
    std::string out_dir = "out";

    bool operator==(const RunConfig&) const = default;

    std::string resolved_pool_path() const {
        return pool_path.empty() ? out_dir + "/pool.bin" : pool_path;
    }
};

// Throws ParamError naming the offending key on unknown keys or bad values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path); // DataError if unreadable

// Canonical echo; parse_config(serialize_config(c)) == c for any c.
std::string serialize_config(const RunConfig& c);

} // namespace focal::cfg
