#include "focal/bnn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "focal/errors.hpp"
#include "focal/tape.hpp"

namespace focal::bnn {

namespace {

constexpr double kCeEps = 1e-12;
constexpr double kInitSigma0 = 1e-3;
constexpr double kInitMuStd = 0.05;

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

// out {n,h} = x {n,d} * W {d,h} + b {h}
void affine(const double* x, std::size_t n, std::size_t d, const double* W, const double* b,
            std::size_t h, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        double* o = out + i * h;
        for (std::size_t j = 0; j < h; ++j) o[j] = b[j];
        const double* xi = x + i * d;
        for (std::size_t k = 0; k < d; ++k) {
            const double xv = xi[k];
            if (xv == 0.0) continue;
            const double* wk = W + k * h;
            for (std::size_t j = 0; j < h; ++j) o[j] += xv * wk[j];
        }
    }
}

void relu_inplace(double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (v[i] < 0.0) v[i] = 0.0;
}

void softmax_inplace(double* v, std::size_t c) {
    double mx = v[0];
    for (std::size_t i = 1; i < c; ++i) mx = std::max(mx, v[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        v[i] = std::exp(v[i] - mx);
        s += v[i];
    }
    for (std::size_t i = 0; i < c; ++i) v[i] /= s;
}

template <typename T>
void write_raw(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw FormatError("container truncated");
    return v;
}

void write_doubles(std::ostream& os, const std::vector<double>& v) {
    write_raw<std::uint64_t>(os, v.size());
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& is) {
    const auto n = read_raw<std::uint64_t>(is);
    std::vector<double> v(n);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw FormatError("container truncated");
    return v;
}

} // namespace

std::size_t ParamStore::add(std::string name, std::vector<std::size_t> shape) {
    std::size_t numel = 1;
    for (std::size_t e : shape) numel *= e;
    segments.push_back({std::move(name), flat.size(), std::move(shape), numel});
    flat.resize(flat.size() + numel, 0.0);
    return segments.size() - 1;
}

nd::Tensor ParamStore::tensor(std::size_t seg) const {
    const Segment& s = segments.at(seg);
    nd::Tensor t(s.shape);
    std::copy_n(flat.begin() + static_cast<long>(s.offset), s.numel, t.data.begin());
    return t;
}

void ParamStore::assign(std::size_t seg, const nd::Tensor& t) {
    const Segment& s = segments.at(seg);
    if (t.numel() != s.numel) throw ShapeError("ParamStore::assign size mismatch");
    std::copy_n(t.data.begin(), s.numel, flat.begin() + static_cast<long>(s.offset));
}

VariationalClassifier::VariationalClassifier(ModelConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
    if (cfg_.feature_dim < 1 || cfg_.head_hidden < 1)
        throw ParamError("model: feature_dim and head_hidden must be >= 1");
    if (cfg_.class_count < 2) throw ParamError("model: needs at least 2 classes");
    if (cfg_.conv) {
        if (cfg_.input_shape.size() != 2)
            throw ParamError("model: conv extractor expects an {H, W} input shape");
        const std::size_t oh = cfg_.input_shape[0] - 2, ow = cfg_.input_shape[1] - 2;
        if (cfg_.input_shape[0] < 4 || cfg_.input_shape[1] < 4 || oh % 2 || ow % 2)
            throw ParamError("model: conv input must give an even post-conv extent");
        if (cfg_.conv_filters < 1) throw ParamError("model: conv_filters must be >= 1");
        alpha_.add("conv_w", {cfg_.conv_filters, 3, 3});
        alpha_.add("conv_b", {cfg_.conv_filters});
        const std::size_t p = cfg_.conv_filters * (oh / 2) * (ow / 2);
        alpha_.add("dense_w", {p, cfg_.feature_dim});
        alpha_.add("dense_b", {cfg_.feature_dim});
    } else {
        if (cfg_.input_shape.size() != 1)
            throw ParamError("model: dense extractor expects a {d} input shape");
        const std::size_t d = cfg_.input_shape[0];
        if (cfg_.extractor_hidden > 0) {
            alpha_.add("fe1_w", {d, cfg_.extractor_hidden});
            alpha_.add("fe1_b", {cfg_.extractor_hidden});
            alpha_.add("fe2_w", {cfg_.extractor_hidden, cfg_.feature_dim});
            alpha_.add("fe2_b", {cfg_.feature_dim});
        } else {
            alpha_.add("fe_w", {d, cfg_.feature_dim});
            alpha_.add("fe_b", {cfg_.feature_dim});
        }
    }
    const std::size_t F = cfg_.feature_dim, H = cfg_.head_hidden;
    const std::size_t C = static_cast<std::size_t>(cfg_.class_count);
    for (ParamStore* store : {&mu_, &rho_}) {
        store->add("h1_w", {F, H});
        store->add("h1_b", {H});
        store->add("h2_w", {H, H});
        store->add("h2_b", {H});
        store->add("h3_w", {H, C});
        store->add("h3_b", {C});
    }

    // init: extractor weights N(0, 1/fan_in) with zero biases, head means
    // N(0, 0.05^2), sigma0 = 1e-3 so early training is near-deterministic
    for (const auto& seg : alpha_.segments) {
        const bool is_bias = seg.shape.size() == 1;
        if (is_bias) continue;
        const std::size_t fan_in =
            seg.shape.size() == 3 ? seg.shape[1] * seg.shape[2] : seg.shape[0];
        const double std_dev = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < seg.numel; ++i)
            alpha_.flat[seg.offset + i] = rng.normal() * std_dev;
    }
    for (double& v : mu_.flat) v = rng.normal() * kInitMuStd;
    const double rho0 = std::log(std::expm1(kInitSigma0));
    for (double& v : rho_.flat) v = rho0;
}

nd::Tensor VariationalClassifier::input_batch_view(const nd::Tensor& x) const {
    const std::size_t item_ndim = cfg_.input_shape.size();
    if (x.ndim() == item_ndim) {
        for (std::size_t i = 0; i < item_ndim; ++i)
            if (x.shape[i] != cfg_.input_shape[i])
                throw ShapeError("model input extents disagree with config");
        nd::Tensor b = x;
        b.shape.insert(b.shape.begin(), 1);
        return b;
    }
    if (x.ndim() == item_ndim + 1) {
        for (std::size_t i = 0; i < item_ndim; ++i)
            if (x.shape[i + 1] != cfg_.input_shape[i])
                throw ShapeError("model input extents disagree with config");
        return x;
    }
    throw ShapeError("model input rank disagrees with config");
}

nd::Tensor VariationalClassifier::extract(const nd::Tensor& x) const {
    const nd::Tensor xb = input_batch_view(x);
    const std::size_t n = xb.shape[0];
    const std::size_t F = cfg_.feature_dim;
    nd::Tensor out({n, F});
    if (cfg_.conv) {
        const std::size_t h = cfg_.input_shape[0], w = cfg_.input_shape[1];
        const std::size_t f = cfg_.conv_filters, oh = h - 2, ow = w - 2;
        const std::size_t ph = oh / 2, pw = ow / 2, p = f * ph * pw;
        const double* cw = &alpha_.flat[alpha_.segments[0].offset];
        const double* cb = &alpha_.flat[alpha_.segments[1].offset];
        const double* dw = &alpha_.flat[alpha_.segments[2].offset];
        const double* db = &alpha_.flat[alpha_.segments[3].offset];
        std::vector<double> conv(f * oh * ow), pooled(p);
        for (std::size_t i = 0; i < n; ++i) {
            const double* img = &xb.data[i * h * w];
            for (std::size_t fi = 0; fi < f; ++fi) {
                const double* k = cw + fi * 9;
                double* co = conv.data() + fi * oh * ow;
                for (std::size_t y = 0; y < oh; ++y)
                    for (std::size_t xq = 0; xq < ow; ++xq) {
                        double acc = cb[fi];
                        for (std::size_t ky = 0; ky < 3; ++ky) {
                            const double* row = img + (y + ky) * w + xq;
                            acc += k[ky * 3] * row[0] + k[ky * 3 + 1] * row[1] +
                                   k[ky * 3 + 2] * row[2];
                        }
                        co[y * ow + xq] = acc > 0.0 ? acc : 0.0;
                    }
            }
            for (std::size_t fi = 0; fi < f; ++fi) {
                const double* co = conv.data() + fi * oh * ow;
                double* po = pooled.data() + fi * ph * pw;
                for (std::size_t y = 0; y < ph; ++y)
                    for (std::size_t xq = 0; xq < pw; ++xq) {
                        const double* r0 = co + (2 * y) * ow + 2 * xq;
                        const double* r1 = r0 + ow;
                        po[y * pw + xq] =
                            std::max(std::max(r0[0], r0[1]), std::max(r1[0], r1[1]));
                    }
            }
            affine(pooled.data(), 1, p, dw, db, F, &out.data[i * F]);
        }
    } else {
        const std::size_t d = cfg_.input_shape[0];
        if (cfg_.extractor_hidden > 0) {
            const std::size_t eh = cfg_.extractor_hidden;
            const double* w1 = &alpha_.flat[alpha_.segments[0].offset];
            const double* b1 = &alpha_.flat[alpha_.segments[1].offset];
            const double* w2 = &alpha_.flat[alpha_.segments[2].offset];
            const double* b2 = &alpha_.flat[alpha_.segments[3].offset];
            std::vector<double> hid(n * eh);
            affine(xb.data.data(), n, d, w1, b1, eh, hid.data());
            relu_inplace(hid.data(), hid.size());
            affine(hid.data(), n, eh, w2, b2, F, out.data.data());
        } else {
            const double* w1 = &alpha_.flat[alpha_.segments[0].offset];
            const double* b1 = &alpha_.flat[alpha_.segments[1].offset];
            affine(xb.data.data(), n, d, w1, b1, F, out.data.data());
        }
    }
    return out;
}

std::vector<double> VariationalClassifier::sample_head_weights(Rng& rng) const {
    std::vector<double> w(mu_.flat.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        w[i] = mu_.flat[i] + softplus(rho_.flat[i]) * rng.normal();
    return w;
}

std::vector<double> VariationalClassifier::head_forward(const double* z,
                                                        const std::vector<double>& w) const {
    const std::size_t F = cfg_.feature_dim, H = cfg_.head_hidden;
    const std::size_t C = static_cast<std::size_t>(cfg_.class_count);
    const double* w1 = w.data() + mu_.segments[0].offset;
    const double* b1 = w.data() + mu_.segments[1].offset;
    const double* w2 = w.data() + mu_.segments[2].offset;
    const double* b2 = w.data() + mu_.segments[3].offset;
    const double* w3 = w.data() + mu_.segments[4].offset;
    const double* b3 = w.data() + mu_.segments[5].offset;
    std::vector<double> h1(H), h2(H), logits(C);
    affine(z, 1, F, w1, b1, H, h1.data());
    relu_inplace(h1.data(), H);
    affine(h1.data(), 1, H, w2, b2, H, h2.data());
    relu_inplace(h2.data(), H);
    affine(h2.data(), 1, H, w3, b3, C, logits.data());
    softmax_inplace(logits.data(), C);
    return logits;
}

nd::Tensor VariationalClassifier::head_draws(const double* z, std::size_t T, Rng& rng) const {
    if (T < 1) throw ParamError("head_draws: T must be >= 1");
    const std::size_t C = static_cast<std::size_t>(cfg_.class_count);
    nd::Tensor draws({T, C});
    for (std::size_t t = 0; t < T; ++t) {
        const auto p = head_forward(z, sample_head_weights(rng));
        std::copy(p.begin(), p.end(), draws.data.begin() + static_cast<long>(t * C));
    }
    return draws;
}

std::vector<double> VariationalClassifier::sample_forward(const nd::Tensor& x, Rng& rng) const {
    const nd::Tensor z = extract(x);
    return head_forward(z.data.data(), sample_head_weights(rng));
}

std::vector<double> VariationalClassifier::mean_forward(const nd::Tensor& x) const {
    const nd::Tensor z = extract(x);
    return head_forward(z.data.data(), mu_.flat);
}

std::vector<double> VariationalClassifier::predict_proba(const nd::Tensor& x, std::size_t T,
                                                         Rng& rng) const {
    const nd::Tensor z = extract(x);
    const nd::Tensor draws = head_draws(z.data.data(), T, rng);
    const std::size_t C = static_cast<std::size_t>(cfg_.class_count);
    std::vector<double> p(C, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c) p[c] += draws.at(t, c);
    for (double& v : p) v /= static_cast<double>(T);
    return p;
}

PredictiveSummary VariationalClassifier::decompose_uncertainty(const nd::Tensor& x, std::size_t T,
                                                               Rng& rng) const {
    const nd::Tensor z = extract(x);
    return decompose_draws(head_draws(z.data.data(), T, rng));
}

double VariationalClassifier::kl() const {
    double acc = 0.0;
    for (std::size_t i = 0; i < mu_.flat.size(); ++i) {
        const double mu = mu_.flat[i];
        const double sigma = softplus(rho_.flat[i]);
        acc += 0.5 * (mu * mu + sigma * sigma - 1.0 - 2.0 * std::log(sigma));
    }
    return acc;
}

void VariationalClassifier::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write checkpoint: " + path);
    const char magic[8] = {'F', 'B', 'N', 'N', 'v', '1', '\0', '\0'};
    os.write(magic, sizeof(magic));
    write_raw<std::uint8_t>(os, cfg_.conv ? 1 : 0);
    write_raw<std::uint8_t>(os, static_cast<std::uint8_t>(cfg_.input_shape.size()));
    for (std::size_t e : cfg_.input_shape)
        write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(e));
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.conv_filters));
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.extractor_hidden));
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.feature_dim));
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.head_hidden));
    write_raw<std::uint32_t>(os, static_cast<std::uint32_t>(cfg_.class_count));
    write_doubles(os, alpha_.flat);
    write_doubles(os, mu_.flat);
    write_doubles(os, rho_.flat);
    if (!os) throw DataError("short write on checkpoint: " + path);
}

VariationalClassifier VariationalClassifier::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    const char want[8] = {'F', 'B', 'N', 'N', 'v', '1', '\0', '\0'};
    if (!is || std::memcmp(magic, want, sizeof(magic)) != 0)
        throw FormatError("bad checkpoint magic");
    ModelConfig cfg;
    cfg.conv = read_raw<std::uint8_t>(is) != 0;
    const auto ndim = read_raw<std::uint8_t>(is);
    cfg.input_shape.resize(ndim);
    for (auto& e : cfg.input_shape) e = read_raw<std::uint32_t>(is);
    cfg.conv_filters = read_raw<std::uint32_t>(is);
    cfg.extractor_hidden = read_raw<std::uint32_t>(is);
    cfg.feature_dim = read_raw<std::uint32_t>(is);
    cfg.head_hidden = read_raw<std::uint32_t>(is);
    cfg.class_count = static_cast<int>(read_raw<std::uint32_t>(is));
    Rng scratch(0);
    VariationalClassifier m(cfg, scratch);
    const auto alpha = read_doubles(is);
    const auto mu = read_doubles(is);
    const auto rho = read_doubles(is);
    if (alpha.size() != m.alpha_.flat.size() || mu.size() != m.mu_.flat.size() ||
        rho.size() != m.rho_.flat.size())
        throw FormatError("checkpoint parameter sizes disagree with layer specs");
    m.alpha_.flat = alpha;
    m.mu_.flat = mu;
    m.rho_.flat = rho;
    return m;
}

double elbo_value(const VariationalClassifier& m, const nd::Tensor& X, const std::vector<int>& y,
                  std::size_t n_train_total, const std::vector<std::vector<double>>& eps) {
    const nd::Tensor z = m.extract(X);
    const std::size_t n = z.shape[0], F = z.shape[1];
    if (y.size() != n || eps.size() != n)
        throw ParamError("elbo: batch, labels and noise must have equal lengths");
    if (n == 0) throw ParamError("elbo: empty batch");
    if (n_train_total < n) throw ParamError("elbo: n_train_total smaller than batch");
    double ce = 0.0;
    std::vector<double> w(m.head_size());
    for (std::size_t i = 0; i < n; ++i) {
        if (eps[i].size() != m.head_size())
            throw ParamError("elbo: noise vector length disagrees with head size");
        for (std::size_t j = 0; j < w.size(); ++j)
            w[j] = m.mu().flat[j] + softplus(m.rho().flat[j]) * eps[i][j];
        const auto p = m.head_forward(&z.data[i * F], w);
        ce -= std::log(std::max(p[static_cast<std::size_t>(y[i])], kCeEps));
    }
    return ce / static_cast<double>(n) + m.kl() / static_cast<double>(n_train_total);
}

double elbo_grads(const VariationalClassifier& m, const nd::Tensor& X, const std::vector<int>& y,
                  std::size_t n_train_total, const std::vector<std::vector<double>>& eps,
                  std::vector<double>* grads) {
    using nd::Tape;
    const ModelConfig& cfg = m.config();
    const std::size_t n = y.size();
    if (n == 0) throw ParamError("elbo: empty batch");
    if (eps.size() != n) throw ParamError("elbo: batch and noise lengths disagree");
    if (n_train_total < n) throw ParamError("elbo: n_train_total smaller than batch");
    const std::size_t C = static_cast<std::size_t>(cfg.class_count);

    Tape tape;
    std::vector<Tape::NodeId> alpha_leaves, mu_leaves, rho_leaves;
    for (std::size_t s = 0; s < m.alpha().segments.size(); ++s)
        alpha_leaves.push_back(tape.leaf(m.alpha().tensor(s)));
    for (std::size_t s = 0; s < m.mu().segments.size(); ++s) {
        mu_leaves.push_back(tape.leaf(m.mu().tensor(s)));
        rho_leaves.push_back(tape.leaf(m.rho().tensor(s)));
    }
    std::vector<Tape::NodeId> sigma(mu_leaves.size());
    for (std::size_t s = 0; s < mu_leaves.size(); ++s) sigma[s] = tape.softplus(rho_leaves[s]);

    // extractor over the whole batch
    nd::Tensor xb = X;
    if (xb.ndim() == cfg.input_shape.size()) xb.shape.insert(xb.shape.begin(), 1);
    Tape::NodeId x_id = tape.leaf(std::move(xb));
    Tape::NodeId features;
    if (cfg.conv) {
        Tape::NodeId conv = tape.conv2d(x_id, alpha_leaves[0], alpha_leaves[1]);
        Tape::NodeId pooled = tape.maxpool2(tape.relu(conv));
        const auto& ps = tape.value(pooled).shape; // {n, f, oh/2, ow/2}
        Tape::NodeId flat = tape.reshape(pooled, {ps[0], ps[1] * ps[2] * ps[3]});
        features = tape.add_rowvec(tape.matmul(flat, alpha_leaves[2]), alpha_leaves[3]);
    } else if (cfg.extractor_hidden > 0) {
        Tape::NodeId h =
            tape.relu(tape.add_rowvec(tape.matmul(x_id, alpha_leaves[0]), alpha_leaves[1]));
        features = tape.add_rowvec(tape.matmul(h, alpha_leaves[2]), alpha_leaves[3]);
    } else {
        features = tape.add_rowvec(tape.matmul(x_id, alpha_leaves[0]), alpha_leaves[1]);
    }

    // per-example sampled head: w_s = mu_s + sigma_s * eps_i
    Tape::NodeId ce_total = -1;
    const auto& segs = m.mu().segments;
    for (std::size_t i = 0; i < n; ++i) {
        if (eps[i].size() != m.head_size())
            throw ParamError("elbo: noise vector length disagrees with head size");
        std::vector<Tape::NodeId> w(segs.size());
        for (std::size_t s = 0; s < segs.size(); ++s) {
            nd::Tensor e(segs[s].shape);
            std::copy_n(eps[i].begin() + static_cast<long>(segs[s].offset), segs[s].numel,
                        e.data.begin());
            w[s] = tape.add(mu_leaves[s], tape.mul(sigma[s], tape.leaf(std::move(e))));
        }
        Tape::NodeId zi = tape.row(features, i);
        Tape::NodeId h1 = tape.relu(tape.add_rowvec(tape.matmul(zi, w[0]), w[1]));
        Tape::NodeId h2 = tape.relu(tape.add_rowvec(tape.matmul(h1, w[2]), w[3]));
        Tape::NodeId p = tape.softmax(tape.add_rowvec(tape.matmul(h2, w[4]), w[5]));
        nd::Tensor onehot = nd::Tensor::zeros({1, C});
        onehot.data[static_cast<std::size_t>(y[i])] = 1.0;
        Tape::NodeId ce = tape.cross_entropy(p, tape.leaf(std::move(onehot)));
        ce_total = i == 0 ? ce : tape.add(ce_total, ce);
    }

    // KL(q || N(0,I)) from the same mu/sigma nodes
    Tape::NodeId kl_total = -1;
    for (std::size_t s = 0; s < segs.size(); ++s) {
        Tape::NodeId mu2 = tape.mul(mu_leaves[s], mu_leaves[s]);
        Tape::NodeId s2 = tape.mul(sigma[s], sigma[s]);
        Tape::NodeId ones = tape.leaf(nd::Tensor::full(segs[s].shape, 1.0));
        Tape::NodeId term = tape.sub(tape.add(mu2, s2), tape.add(ones, tape.log(s2)));
        Tape::NodeId part = tape.scale(tape.sum(term), 0.5);
        kl_total = s == 0 ? part : tape.add(kl_total, part);
    }

    Tape::NodeId loss = tape.add(tape.scale(ce_total, 1.0 / static_cast<double>(n)),
                                 tape.scale(kl_total, 1.0 / static_cast<double>(n_train_total)));
    const double value = tape.value(loss).item();
    if (grads) {
        tape.backward(loss);
        grads->clear();
        grads->reserve(m.alpha().flat.size() + 2 * m.mu().flat.size());
        for (Tape::NodeId id : alpha_leaves) {
            const auto& g = tape.grad(id);
            grads->insert(grads->end(), g.data.begin(), g.data.end());
        }
        for (Tape::NodeId id : mu_leaves) {
            const auto& g = tape.grad(id);
            grads->insert(grads->end(), g.data.begin(), g.data.end());
        }
        for (Tape::NodeId id : rho_leaves) {
            const auto& g = tape.grad(id);
            grads->insert(grads->end(), g.data.begin(), g.data.end());
        }
    }
    return value;
}

TrainHistory train(VariationalClassifier& m, const nd::Tensor& X, const std::vector<int>& y,
                   const nd::Tensor& Xval, const std::vector<int>& yval,
                   const TrainSchedule& sched, Rng& rng) {
    const std::size_t n = y.size();
    if (n == 0) throw TrainError("train: empty training set");
    if (sched.batch_size < 1) throw ParamError("train: batch_size must be >= 1");
    const bool has_val = !yval.empty();

    const std::size_t n_alpha = m.alpha().flat.size();
    const std::size_t n_head = m.mu().flat.size();
    const std::size_t n_params = n_alpha + 2 * n_head;
    std::vector<double> adam_m(n_params, 0.0), adam_v(n_params, 0.0), grads;
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double lr = sched.lr;
    std::size_t adam_t = 0;

    const std::size_t item = X.numel() / X.shape[0];
    const std::size_t item_ndim = m.config().input_shape.size();

    TrainHistory hist;
    double best_val = -1.0;
    std::size_t wait = 0;

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    for (std::size_t epoch = 0; epoch < sched.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n; start += sched.batch_size) {
            const std::size_t b = std::min(sched.batch_size, n - start);
            std::vector<std::size_t> bshape = {b};
            for (std::size_t k = 0; k < item_ndim; ++k)
                bshape.push_back(m.config().input_shape[k]);
            nd::Tensor Xb(bshape);
            std::vector<int> yb(b);
            std::vector<std::vector<double>> eps(b);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t src = order[start + i];
                std::copy_n(X.data.begin() + static_cast<long>(src * item), item,
                            Xb.data.begin() + static_cast<long>(i * item));
                yb[i] = y[src];
                eps[i].resize(n_head);
                rng.fill_normal(eps[i].data(), n_head);
            }
            const double loss = elbo_grads(m, Xb, yb, n, eps, &grads);
            if (!std::isfinite(loss))
                throw TrainError("train: non-finite loss at epoch " + std::to_string(epoch));
            epoch_loss += loss;
            ++n_batches;

            ++adam_t;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
            auto update = [&](double* p, std::size_t off, std::size_t count) {
                for (std::size_t i = 0; i < count; ++i) {
                    const double g = grads[off + i];
                    adam_m[off + i] = beta1 * adam_m[off + i] + (1.0 - beta1) * g;
                    adam_v[off + i] = beta2 * adam_v[off + i] + (1.0 - beta2) * g * g;
                    p[i] -= lr * (adam_m[off + i] / bc1) /
                            (std::sqrt(adam_v[off + i] / bc2) + adam_eps);
                }
            };
            update(m.alpha_mut().flat.data(), 0, n_alpha);
            update(m.mu_mut().flat.data(), n_alpha, n_head);
            update(m.rho_mut().flat.data(), n_alpha + n_head, n_head);
            if (sched.sigma_max > 0.0) {
                const double rho_cap = std::log(std::expm1(sched.sigma_max));
                for (double& r : m.rho_mut().flat) r = std::min(r, rho_cap);
            }
        }
        for (const std::vector<double>* p : {&m.alpha().flat, &m.mu().flat, &m.rho().flat})
            for (double v : *p)
                if (!std::isfinite(v))
                    throw TrainError("train: non-finite parameter at epoch " +
                                     std::to_string(epoch));

        hist.train_loss.push_back(epoch_loss / static_cast<double>(n_batches));
        hist.lr.push_back(lr);
        if (has_val) {
            const nd::Tensor zv = m.extract(Xval);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < yval.size(); ++i) {
                const auto p = m.head_forward(&zv.data[i * zv.shape[1]], m.mu().flat);
                const auto arg = std::max_element(p.begin(), p.end()) - p.begin();
                if (static_cast<int>(arg) == yval[i]) ++hits;
            }
            const double acc = static_cast<double>(hits) / static_cast<double>(yval.size());
            hist.val_accuracy.push_back(acc);
            if (acc > best_val) {
                best_val = acc;
                wait = 0;
            } else if (++wait >= sched.plateau_patience) {
                lr *= sched.lr_factor;
                wait = 0;
            }
        }
    }
    return hist;
}

void save_features(const std::string& path, const std::vector<std::uint64_t>& ids,
                   const nd::Tensor& z) {
    if (z.ndim() != 2 || z.shape[0] != ids.size())
        throw ParamError("save_features: ids must match feature rows");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write feature container: " + path);
    const char magic[8] = {'F', 'M', 'A', 'T', 'v', '1', '\0', '\0'};
    os.write(magic, sizeof(magic));
    write_raw<std::uint64_t>(os, z.shape[0]);
    write_raw<std::uint64_t>(os, z.shape[1]);
    for (std::uint64_t id : ids) write_raw<std::uint64_t>(os, id);
    os.write(reinterpret_cast<const char*>(z.data.data()),
             static_cast<std::streamsize>(z.data.size() * sizeof(double)));
    if (!os) throw DataError("short write on feature container: " + path);
}

std::pair<std::vector<std::uint64_t>, nd::Tensor> load_features(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open feature container: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    const char want[8] = {'F', 'M', 'A', 'T', 'v', '1', '\0', '\0'};
    if (!is || std::memcmp(magic, want, sizeof(magic)) != 0)
        throw FormatError("bad feature container magic");
    const auto rows = read_raw<std::uint64_t>(is);
    const auto cols = read_raw<std::uint64_t>(is);
    std::vector<std::uint64_t> ids(rows);
    for (auto& id : ids) id = read_raw<std::uint64_t>(is);
    nd::Tensor z({rows, cols});
    is.read(reinterpret_cast<char*>(z.data.data()),
            static_cast<std::streamsize>(z.data.size() * sizeof(double)));
    if (!is) throw FormatError("feature container truncated");
    return {std::move(ids), std::move(z)};
}

} // namespace focal::bnn
