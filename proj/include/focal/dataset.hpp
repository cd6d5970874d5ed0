#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "focal/rng.hpp"
#include "focal/tensor.hpp"

namespace focal::data {

enum class Perturbation : std::uint8_t { None = 0, BlackDots = 1, GaussianBlur = 2, Merged = 3 };
enum class Split : std::uint8_t { Train = 0, Pool = 1, Val = 2, Test = 3 };

const char* perturbation_name(Perturbation p);
const char* split_name(Split s);

struct Item {
    std::uint64_t id = 0;
    nd::Tensor values;                          // {H,W} grayscale in [0,1] or {2} point
    int label = 0;                              // ground truth; hidden while in Pool
    Perturbation perturbation = Perturbation::None;
    Split split = Split::Pool;
};

// Partitioned dataset. Splits are disjoint by construction; the only
// mutation after construction is oracle_label, which reveals pool labels
// by moving items Pool -> Train.
class LabeledPool {
public:
    LabeledPool() = default;
    LabeledPool(std::vector<Item> items, int class_count);

    int class_count() const { return class_count_; }
    const std::vector<Item>& items() const { return items_; }
    const Item& item(std::size_t index) const { return items_[index]; }
    std::size_t size() const { return items_.size(); }

    const Item& by_id(std::uint64_t id) const;
    std::vector<std::size_t> indices_of(Split s) const;
    std::size_t split_size(Split s) const;
    std::vector<std::size_t> label_counts(Split s) const;          // size C
    std::vector<std::size_t> perturbation_counts(Split s) const;   // size 4

    // Reveals ground-truth labels and moves the items Train <- Pool.
    // Rejects ids not currently in the pool and repeats within one call.
    std::vector<int> oracle_label(const std::vector<std::uint64_t>& ids);

    void save(const std::string& path) const;
    static LabeledPool load(const std::string& path);

private:
    std::vector<Item> items_;
    int class_count_ = 0;
    std::unordered_map<std::uint64_t, std::size_t> index_by_id_;
};

// --- ingestion ---------------------------------------------------------

// IDX (big-endian) readers; image magic 0x00000803, label magic 0x00000801.
std::vector<Item> load_idx(const std::string& images_path, const std::string& labels_path);

// Remaps every label through `mapping` (which must cover all observed
// labels) and returns the new class count.
int collapse_classes(std::vector<Item>& items, const std::unordered_map<int, int>& mapping);

// --- perturbations -------------------------------------------------------

// Zeroes exactly round(fraction * H * W) distinct pixels.
Item perturb_black_dots(const Item& item, double fraction, Rng& rng);

// Separable Gaussian blur, kernel radius ceil(3*sigma), unit-sum taps,
// symmetric reflection at the edges.
Item perturb_gaussian_blur(const Item& item, double sigma);

// alpha * a + (1-alpha) * b with alpha ~ U(alpha_lo, alpha_hi); keeps a's
// label. The two items must have different labels.
Item perturb_merge(const Item& a, const Item& b, double alpha_lo, double alpha_hi, Rng& rng);

// --- experiment construction ----------------------------------------------

struct PerturbSpec {
    std::size_t per_type = 200;      // pool items per perturbation type
    double black_fraction = 0.75;
    double blur_sigma = 4.0;
    double alpha_lo = 0.4;
    double alpha_hi = 0.6;
};

struct ExperimentSpec {
    std::size_t n_train_pool = 2000; // 20 revealed + 1980 pool by default
    std::size_t n_initial = 20;
    std::size_t n_val = 200;
    double sensor_noise = 0.0; // additive pixel noise applied after perturbation
    PerturbSpec perturb;
};

// Samples the train-pool body and validation split from train_source,
// keeps test_items as the Test split, and perturbs pool items only.
// Item ids are renumbered 0..n-1 in (train-pool, val, test) order.
LabeledPool build_experiment(const std::vector<Item>& train_source,
                             const std::vector<Item>& test_items, int class_count,
                             const ExperimentSpec& spec, Rng& rng);

// Procedural 28x28 glyph renderer: ten digit-like classes drawn as jittered
// seven-segment strokes. Stands in for handwritten-digit files when none
// are on disk; ids are assigned sequentially from first_id.
std::vector<Item> make_digit_items(std::size_t n, Rng& rng, std::uint64_t first_id = 0);

// --- 2-D synthetic clusters -------------------------------------------------

struct ClusterSpec {
    int class_count = 2;
    std::vector<std::array<double, 2>> means;
    std::vector<std::array<double, 3>> covs;    // (xx, xy, yy), positive-definite
    std::vector<std::size_t> per_class;         // train-pool counts
    std::size_t n_initial = 10;
    std::size_t n_val = 50;
    std::size_t n_test = 100;
    std::size_t n_far_outliers = 0;             // far-field pool points, BlackDots tag
    std::size_t n_blend = 0;                    // class-boundary blends, Merged tag
    double far_radius = 12.0;
};

LabeledPool make_gaussian_clusters(const ClusterSpec& spec, Rng& rng);

// --- manifest -------------------------------------------------------------

// JSON census of a pool: per-split, per-class and per-perturbation counts.
std::string pool_census_json(const LabeledPool& pool, std::uint64_t seed,
                             const std::string& config_echo);

} // namespace focal::data
