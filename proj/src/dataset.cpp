#include "focal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <json.hpp>

#include "focal/errors.hpp"

namespace focal::data {

const char* perturbation_name(Perturbation p) {
    switch (p) {
        case Perturbation::None: return "none";
        case Perturbation::BlackDots: return "blackdots";
        case Perturbation::GaussianBlur: return "blur";
        case Perturbation::Merged: return "merged";
    }
    return "?";
}

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Pool: return "pool";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

LabeledPool::LabeledPool(std::vector<Item> items, int class_count)
    : items_(std::move(items)), class_count_(class_count) {
    index_by_id_.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        const Item& it = items_[i];
        if (it.label < 0 || it.label >= class_count_)
            throw DataError("item label outside [0, C)");
        if (!index_by_id_.emplace(it.id, i).second)
            throw DataError("duplicate item id in pool");
    }
}

const Item& LabeledPool::by_id(std::uint64_t id) const {
    auto it = index_by_id_.find(id);
    if (it == index_by_id_.end()) throw StateError("unknown item id");
    return items_[it->second];
}

std::vector<std::size_t> LabeledPool::indices_of(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < items_.size(); ++i)
        if (items_[i].split == s) out.push_back(i);
    return out;
}

std::size_t LabeledPool::split_size(Split s) const {
    std::size_t n = 0;
    for (const Item& it : items_)
        if (it.split == s) ++n;
    return n;
}

std::vector<std::size_t> LabeledPool::label_counts(Split s) const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count_), 0);
    for (const Item& it : items_)
        if (it.split == s) ++counts[static_cast<std::size_t>(it.label)];
    return counts;
}

std::vector<std::size_t> LabeledPool::perturbation_counts(Split s) const {
    std::vector<std::size_t> counts(4, 0);
    for (const Item& it : items_)
        if (it.split == s) ++counts[static_cast<std::size_t>(it.perturbation)];
    return counts;
}

std::vector<int> LabeledPool::oracle_label(const std::vector<std::uint64_t>& ids) {
    // validate the whole batch before mutating anything
    std::set<std::uint64_t> seen;
    for (std::uint64_t id : ids) {
        auto it = index_by_id_.find(id);
        if (it == index_by_id_.end()) throw StateError("oracle_label: unknown id");
        if (items_[it->second].split != Split::Pool)
            throw StateError("oracle_label: id not in pool");
        if (!seen.insert(id).second) throw StateError("oracle_label: repeated id");
    }
    std::vector<int> labels;
    labels.reserve(ids.size());
    for (std::uint64_t id : ids) {
        Item& it = items_[index_by_id_[id]];
        it.split = Split::Train;
        labels.push_back(it.label);
    }
    return labels;
}

// --- binary container -------------------------------------------------------
//
// Pool container, little-endian:
//   magic "FPOOLv1\0" | u32 version | u32 C | u64 n
//   per item: u64 id | i32 label | u8 perturbation | u8 split | u8 ndim
//             | u32 extent[ndim] | f64 data[numel]

namespace {

constexpr char kPoolMagic[8] = {'F', 'P', 'O', 'O', 'L', 'v', '1', '\0'};

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError("pool container truncated");
    return v;
}

} // namespace

void LabeledPool::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write pool container: " + path);
    os.write(kPoolMagic, sizeof(kPoolMagic));
    write_raw<std::uint32_t>(os, 1);
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(class_count_));
    write_raw<std::uint64_t>(os, items_.size());
    for (const Item& it : items_) {
        write_raw<std::uint64_t>(os, it.id);
        write_raw<std::int32_t>(os, it.label);
        write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(it.perturbation));
        write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(it.split));
        write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(it.values.ndim()));
        for (std::size_t e : it.values.shape)
            write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(e));
        os.write(reinterpret_cast<const char*>(it.values.data.data()),
                 static_cast<std::streamsize>(it.values.data.size() * sizeof(double)));
    }
    if (!os) throw DataError("short write on pool container: " + path);
}

LabeledPool LabeledPool::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open pool container: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kPoolMagic, sizeof(magic)) != 0)
        throw FormatError("bad pool container magic");
    const auto version = read_raw<std::uint32_t>(is);
    if (version != 1) throw FormatError("unsupported pool container version");
    const auto c = read_raw<std::uint32_t>(is);
    const auto n = read_raw<std::uint64_t>(is);
    std::vector<Item> items;
    items.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        Item it;
        it.id = read_raw<std::uint64_t>(is);
        it.label = read_raw<std::int32_t>(is);
        it.perturbation = static_cast<Perturbation>(read_raw<std::uint8_t>(is));
        it.split = static_cast<Split>(read_raw<std::uint8_t>(is));
        const auto ndim = read_raw<std::uint8_t>(is);
        std::vector<std::size_t> shape(ndim);
        for (auto& e : shape) e = read_raw<std::uint32_t>(is);
        nd::Tensor t(shape);
        is.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(double)));
        if (!is) throw FormatError("pool container truncated");
        it.values = std::move(t);
        items.push_back(std::move(it));
    }
    return LabeledPool(std::move(items), static_cast<int>(c));
}

// --- IDX ---------------------------------------------------------------

namespace {

std::uint32_t read_be32(std::istream& is, const char* what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw FormatError(std::string("IDX truncated reading ") + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

} // namespace

std::vector<Item> load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream im(images_path, std::ios::binary);
    if (!im) throw FormatError("cannot open IDX image file: " + images_path);
    std::ifstream lb(labels_path, std::ios::binary);
    if (!lb) throw FormatError("cannot open IDX label file: " + labels_path);

    if (read_be32(im, "image magic") != 0x00000803u)
        throw FormatError("bad IDX image magic (want 0x00000803)");
    const std::uint32_t n_images = read_be32(im, "image count");
    const std::uint32_t rows = read_be32(im, "rows");
    const std::uint32_t cols = read_be32(im, "cols");

    if (read_be32(lb, "label magic") != 0x00000801u)
        throw FormatError("bad IDX label magic (want 0x00000801)");
    const std::uint32_t n_labels = read_be32(lb, "label count");
    if (n_images != n_labels) throw FormatError("IDX image/label counts disagree");

    std::vector<Item> items;
    items.reserve(n_images);
    std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < n_images; ++i) {
        im.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!im) throw FormatError("IDX image payload truncated");
        int lab = lb.get();
        if (lab == std::ifstream::traits_type::eof())
            throw FormatError("IDX label payload truncated");
        Item it;
        it.id = i;
        it.label = lab;
        nd::Tensor t({rows, cols});
        for (std::size_t p = 0; p < buf.size(); ++p)
            t.data[p] = static_cast<double>(buf[p]) / 255.0;
        it.values = std::move(t);
        items.push_back(std::move(it));
    }
    return items;
}

int collapse_classes(std::vector<Item>& items, const std::unordered_map<int, int>& mapping) {
    int max_class = -1;
    for (Item& it : items) {
        auto found = mapping.find(it.label);
        if (found == mapping.end())
            throw DataError("collapse_classes: unmapped label " + std::to_string(it.label));
        it.label = found->second;
        max_class = std::max(max_class, it.label);
    }
    for (const auto& [from, to] : mapping) max_class = std::max(max_class, to);
    return max_class + 1;
}

// --- perturbations --------------------------------------------------------

Item perturb_black_dots(const Item& item, double fraction, Rng& rng) {
    if (fraction < 0.0 || fraction > 1.0)
        throw ParamError("black dots fraction must be in [0,1]");
    if (item.values.ndim() != 2) throw ParamError("black dots expects a grayscale image");
    Item out = item;
    const std::size_t n = item.values.numel();
    const std::size_t count =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    for (std::size_t pos : rng.sample_without_replacement(n, count))
        out.values.data[pos] = 0.0;
    out.perturbation = Perturbation::BlackDots;
    return out;
}

Item perturb_gaussian_blur(const Item& item, double sigma) {
    if (!(sigma > 0.0)) throw ParamError("blur sigma must be positive");
    if (item.values.ndim() != 2) throw ParamError("blur expects a grayscale image");
    const std::size_t h = item.values.shape[0], w = item.values.shape[1];
    const long r = static_cast<long>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * r + 1));
    double ksum = 0.0;
    for (long t = -r; t <= r; ++t) {
        const double v = std::exp(-(static_cast<double>(t) * t) / (2.0 * sigma * sigma));
        kernel[static_cast<std::size_t>(t + r)] = v;
        ksum += v;
    }
    for (double& v : kernel) v /= ksum;

    // symmetric reflection keeps total mass invariant under a unit-sum kernel
    auto reflect = [](long i, long n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return static_cast<std::size_t>(i);
    };

    const auto& src = item.values.data;
    std::vector<double> tmp(src.size());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            double s = 0.0;
            for (long t = -r; t <= r; ++t)
                s += kernel[static_cast<std::size_t>(t + r)] *
                     src[y * w + reflect(static_cast<long>(x) + t, static_cast<long>(w))];
            tmp[y * w + x] = s;
        }
    Item out = item;
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            double s = 0.0;
            for (long t = -r; t <= r; ++t)
                s += kernel[static_cast<std::size_t>(t + r)] *
                     tmp[reflect(static_cast<long>(y) + t, static_cast<long>(h)) * w + x];
            out.values.data[y * w + x] = s;
        }
    out.perturbation = Perturbation::GaussianBlur;
    return out;
}

Item perturb_merge(const Item& a, const Item& b, double alpha_lo, double alpha_hi, Rng& rng) {
    if (a.label == b.label) throw ParamError("merge requires items of different classes");
    if (!a.values.same_shape(b.values)) throw ParamError("merge requires matching shapes");
    const double alpha = rng.uniform(alpha_lo, alpha_hi);
    Item out = a;
    for (std::size_t i = 0; i < out.values.numel(); ++i)
        out.values.data[i] = alpha * a.values.data[i] + (1.0 - alpha) * b.values.data[i];
    out.perturbation = Perturbation::Merged;
    return out;
}

// --- experiment construction ----------------------------------------------

LabeledPool build_experiment(const std::vector<Item>& train_source,
                             const std::vector<Item>& test_items, int class_count,
                             const ExperimentSpec& spec, Rng& rng) {
    const std::size_t need = spec.n_train_pool + spec.n_val;
    if (train_source.size() < need)
        throw DataError("build_experiment: train source smaller than requested splits");
    if (spec.n_initial > spec.n_train_pool)
        throw DataError("build_experiment: more initial labels than train-pool items");
    const std::size_t n_pool = spec.n_train_pool - spec.n_initial;
    if (3 * spec.perturb.per_type > n_pool)
        throw DataError("build_experiment: not enough pool items to perturb");

    std::vector<Item> items;
    items.reserve(need + test_items.size());
    const auto chosen = rng.sample_without_replacement(train_source.size(), need);
    for (std::size_t i = 0; i < need; ++i) {
        Item it = train_source[chosen[i]];
        it.split = i < spec.n_train_pool ? Split::Pool : Split::Val;
        items.push_back(std::move(it));
    }
    // reveal the initial labeled set
    const auto initial = rng.sample_without_replacement(spec.n_train_pool, spec.n_initial);
    for (std::size_t idx : initial) items[idx].split = Split::Train;

    // perturbation targets, pool items only, disjoint across types
    std::vector<std::size_t> pool_idx;
    for (std::size_t i = 0; i < spec.n_train_pool; ++i)
        if (items[i].split == Split::Pool) pool_idx.push_back(i);
    const auto picks = rng.sample_without_replacement(pool_idx.size(), 3 * spec.perturb.per_type);
    std::vector<bool> is_target(items.size(), false);
    for (std::size_t p : picks) is_target[pool_idx[p]] = true;

    for (std::size_t t = 0; t < picks.size(); ++t) {
        const std::size_t idx = pool_idx[picks[t]];
        const std::size_t type = t / spec.perturb.per_type;
        if (type == 0) {
            items[idx] = perturb_black_dots(items[idx], spec.perturb.black_fraction, rng);
        } else if (type == 1) {
            items[idx] = perturb_gaussian_blur(items[idx], spec.perturb.blur_sigma);
        } else {
            // blend partner: a still-clean train-pool item of a different class
            std::vector<std::size_t> partners;
            for (std::size_t i = 0; i < spec.n_train_pool; ++i)
                if (!is_target[i] && items[i].label != items[idx].label) partners.push_back(i);
            if (partners.empty()) throw DataError("build_experiment: no merge partner found");
            const Item& partner = items[partners[rng.uniform_int(partners.size())]];
            items[idx] = perturb_merge(items[idx], partner, spec.perturb.alpha_lo,
                                       spec.perturb.alpha_hi, rng);
        }
    }

    for (const Item& t : test_items) {
        items.push_back(t);
        items.back().split = Split::Test;
    }
    // capture-stage noise lands after any optics-stage perturbation, so even a
    // heavily blurred image keeps pixel-level texture
    if (spec.sensor_noise > 0.0)
        for (Item& it : items)
            for (double& p : it.values.data)
                p = std::clamp(p + spec.sensor_noise * rng.normal(), 0.0, 1.0);
    for (std::size_t i = 0; i < items.size(); ++i) items[i].id = i;
    return LabeledPool(std::move(items), class_count);
}

// --- seven-segment glyphs ---------------------------------------------------

namespace {

struct Seg {
    double x0, y0, x1, y1;
};

// local frame: x in [-1,1], y in [-1.5,1.5], y up
constexpr Seg kSegments[7] = {
    {-0.8, 1.4, 0.8, 1.4},    // A top
    {0.9, 1.3, 0.9, 0.1},     // B top right
    {0.9, -0.1, 0.9, -1.3},   // C bottom right
    {-0.8, -1.4, 0.8, -1.4},  // D bottom
    {-0.9, -0.1, -0.9, -1.3}, // E bottom left
    {-0.9, 1.3, -0.9, 0.1},   // F top left
    {-0.8, 0.0, 0.8, 0.0},    // G middle
};

constexpr unsigned kDigitSegs[10] = {
    0b0111111, // 0: ABCDEF
    0b0000110, // 1: BC
    0b1011011, // 2: ABDEG
    0b1001111, // 3: ABCDG
    0b1100110, // 4: BCFG
    0b1101101, // 5: ACDFG
    0b1111101, // 6: ACDEFG
    0b0000111, // 7: ABC
    0b1111111, // 8
    0b1101111, // 9: ABCDFG
};

double point_segment_dist(double px, double py, const Seg& s) {
    const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = s.x0 + t * dx, cy = s.y0 + t * dy;
    return std::hypot(px - cx, py - cy);
}

} // namespace

std::vector<Item> make_digit_items(std::size_t n, Rng& rng, std::uint64_t first_id) {
    constexpr std::size_t kSide = 28;
    std::vector<Item> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int digit = static_cast<int>(rng.uniform_int(10));
        const double theta = rng.uniform(-0.25, 0.25);
        const double scale = rng.uniform(4.6, 6.6);
        const double tx = rng.uniform(-2.2, 2.2);
        const double ty = rng.uniform(-2.2, 2.2);
        const double width = rng.uniform(1.2, 2.2);
        const double bright = rng.uniform(0.80, 1.0);
        const double c = std::cos(theta), s = std::sin(theta);

        // per-stroke endpoint jitter and intensity, handwriting-style; the
        // strongest present stroke is normalized to full intensity so every
        // glyph keeps a saturated core
        const unsigned mask = kDigitSegs[digit];
        Seg strokes[7];
        double gain[7];
        double gain_max = 0.0;
        for (int k = 0; k < 7; ++k) {
            strokes[k].x0 = kSegments[k].x0 + rng.uniform(-0.06, 0.06);
            strokes[k].y0 = kSegments[k].y0 + rng.uniform(-0.06, 0.06);
            strokes[k].x1 = kSegments[k].x1 + rng.uniform(-0.06, 0.06);
            strokes[k].y1 = kSegments[k].y1 + rng.uniform(-0.06, 0.06);
            gain[k] = rng.uniform(0.65, 1.0);
            if (mask & (1u << k)) gain_max = std::max(gain_max, gain[k]);
        }
        for (double& g : gain) g /= gain_max;

        Item it;
        it.id = first_id + i;
        it.label = digit;
        nd::Tensor img({kSide, kSide});
        for (std::size_t py = 0; py < kSide; ++py)
            for (std::size_t px = 0; px < kSide; ++px) {
                // map pixel to local glyph frame (inverse rotation + shift)
                const double gx = static_cast<double>(px) - 13.5 - tx;
                const double gy = 13.5 - static_cast<double>(py) - ty; // y up
                const double lx = (c * gx + s * gy) / scale;
                const double ly = (-s * gx + c * gy) / scale;
                double v = 0.0;
                for (int k = 0; k < 7; ++k)
                    if (mask & (1u << k)) {
                        const double d =
                            point_segment_dist(lx, ly, strokes[k]) * scale / width;
                        v = std::max(v, gain[k] * std::exp(-d * d));
                    }
                img.data[py * kSide + px] = std::clamp(bright * v, 0.0, 1.0);
            }
        it.values = std::move(img);
        items.push_back(std::move(it));
    }
    return items;
}

// --- 2-D clusters -----------------------------------------------------------

LabeledPool make_gaussian_clusters(const ClusterSpec& spec, Rng& rng) {
    const std::size_t C = static_cast<std::size_t>(spec.class_count);
    if (spec.means.size() != C || spec.covs.size() != C || spec.per_class.size() != C)
        throw ParamError("cluster spec: per-class arrays must have C entries");
    for (std::size_t c = 0; c < C; ++c) {
        if (spec.per_class[c] == 0) throw ParamError("cluster spec: counts must be positive");
        const auto& v = spec.covs[c];
        if (!(v[0] > 0.0) || !(v[0] * v[2] - v[1] * v[1] > 0.0))
            throw ParamError("cluster spec: covariance not positive-definite");
    }

    // Cholesky factors per class: [[l00,0],[l10,l11]]
    std::vector<std::array<double, 3>> chol(C);
    for (std::size_t c = 0; c < C; ++c) {
        const double l00 = std::sqrt(spec.covs[c][0]);
        const double l10 = spec.covs[c][1] / l00;
        const double l11 = std::sqrt(spec.covs[c][2] - l10 * l10);
        chol[c] = {l00, l10, l11};
    }
    auto sample_point = [&](std::size_t c) {
        const double e0 = rng.normal(), e1 = rng.normal();
        nd::Tensor p({2});
        p.data[0] = spec.means[c][0] + chol[c][0] * e0;
        p.data[1] = spec.means[c][1] + chol[c][1] * e0 + chol[c][2] * e1;
        return p;
    };

    std::size_t total_train = 0;
    for (std::size_t c = 0; c < C; ++c) total_train += spec.per_class[c];

    std::vector<Item> items;
    std::uint64_t next_id = 0;
    auto add = [&](nd::Tensor v, int label, Split split, Perturbation tag) {
        Item it;
        it.id = next_id++;
        it.values = std::move(v);
        it.label = label;
        it.split = split;
        it.perturbation = tag;
        items.push_back(std::move(it));
    };

    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < spec.per_class[c]; ++i)
            add(sample_point(c), static_cast<int>(c), Split::Pool, Perturbation::None);

    // reveal an initial labeled subset of the train-pool body
    const auto initial =
        rng.sample_without_replacement(total_train, std::min(spec.n_initial, total_train));
    for (std::size_t idx : initial) items[idx].split = Split::Train;

    // class mixture follows per_class proportions for val/test
    auto sample_class = [&]() {
        std::size_t r = rng.uniform_int(total_train);
        for (std::size_t c = 0; c < C; ++c) {
            if (r < spec.per_class[c]) return c;
            r -= spec.per_class[c];
        }
        return C - 1;
    };
    for (std::size_t i = 0; i < spec.n_val; ++i) {
        const std::size_t c = sample_class();
        add(sample_point(c), static_cast<int>(c), Split::Val, Perturbation::None);
    }
    for (std::size_t i = 0; i < spec.n_test; ++i) {
        const std::size_t c = sample_class();
        add(sample_point(c), static_cast<int>(c), Split::Test, Perturbation::None);
    }

    double cx = 0.0, cy = 0.0;
    for (const auto& m : spec.means) {
        cx += m[0];
        cy += m[1];
    }
    cx /= static_cast<double>(C);
    cy /= static_cast<double>(C);
    for (std::size_t i = 0; i < spec.n_far_outliers; ++i) {
        const double ang = rng.uniform(0.0, 6.283185307179586);
        const double rad = rng.uniform(spec.far_radius, 1.5 * spec.far_radius);
        nd::Tensor p({2});
        p.data[0] = cx + rad * std::cos(ang);
        p.data[1] = cy + rad * std::sin(ang);
        add(std::move(p), static_cast<int>(rng.uniform_int(C)), Split::Pool,
            Perturbation::BlackDots);
    }
    if (spec.n_blend > 0 && C < 2) throw ParamError("cluster spec: blends need >= 2 classes");
    for (std::size_t i = 0; i < spec.n_blend; ++i) {
        const std::size_t ca = sample_class();
        std::size_t cb = sample_class();
        while (cb == ca) cb = sample_class();
        const nd::Tensor a = sample_point(ca), b = sample_point(cb);
        const double alpha = rng.uniform(0.4, 0.6);
        nd::Tensor p({2});
        p.data[0] = alpha * a.data[0] + (1.0 - alpha) * b.data[0];
        p.data[1] = alpha * a.data[1] + (1.0 - alpha) * b.data[1];
        add(std::move(p), static_cast<int>(ca), Split::Pool, Perturbation::Merged);
    }

    return LabeledPool(std::move(items), spec.class_count);
}

std::string pool_census_json(const LabeledPool& pool, std::uint64_t seed,
                             const std::string& config_echo) {
    nlohmann::json j;
    j["seed"] = seed;
    j["class_count"] = pool.class_count();
    j["config"] = config_echo;
    for (Split s : {Split::Train, Split::Pool, Split::Val, Split::Test}) {
        nlohmann::json sj;
        sj["count"] = pool.split_size(s);
        sj["labels"] = pool.label_counts(s);
        nlohmann::json pj;
        const auto pc = pool.perturbation_counts(s);
        for (std::size_t p = 0; p < pc.size(); ++p)
            pj[perturbation_name(static_cast<Perturbation>(p))] = pc[p];
        sj["perturbations"] = pj;
        j["splits"][split_name(s)] = sj;
    }
    return j.dump(2);
}

} // namespace focal::data
