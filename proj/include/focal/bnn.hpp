#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "focal/rng.hpp"
#include "focal/tensor.hpp"
#include "focal/uncertainty.hpp"

namespace focal::bnn {

struct ModelConfig {
    bool conv = false;                    // dense extractor otherwise
    std::vector<std::size_t> input_shape; // {d} for dense, {H, W} for conv
    std::size_t conv_filters = 4;
    std::size_t extractor_hidden = 32;    // dense extractor only; 0 = single affine layer
    std::size_t feature_dim = 32;
    std::size_t head_hidden = 32;
    int class_count = 3;
};

// Named, contiguous parameter segments inside one flat array.
struct ParamStore {
    struct Segment {
        std::string name;
        std::size_t offset;
        std::vector<std::size_t> shape;
        std::size_t numel;
    };
    std::vector<double> flat;
    std::vector<Segment> segments;

    std::size_t add(std::string name, std::vector<std::size_t> shape);
    nd::Tensor tensor(std::size_t seg) const;
    void assign(std::size_t seg, const nd::Tensor& t);
};

// Deterministic feature extractor (alpha) plus a mean-field Gaussian
// variational classification head: every head weight carries (mu, rho)
// with sigma = softplus(rho) and a standard-normal prior.
class VariationalClassifier {
public:
    VariationalClassifier(ModelConfig cfg, Rng& rng);

    const ModelConfig& config() const { return cfg_; }

    const ParamStore& alpha() const { return alpha_; }
    const ParamStore& mu() const { return mu_; }
    const ParamStore& rho() const { return rho_; }
    ParamStore& alpha_mut() { return alpha_; }
    ParamStore& mu_mut() { return mu_; }
    ParamStore& rho_mut() { return rho_; }

    std::size_t head_size() const { return mu_.flat.size(); }

    // batch {n, d} or {n, H, W} -> features {n, F}
    nd::Tensor extract(const nd::Tensor& x) const;

    // head weights: one reparametrized draw w = mu + softplus(rho) * eps
    std::vector<double> sample_head_weights(Rng& rng) const;

    // z: feature row of length F; w: flat head weights
    std::vector<double> head_forward(const double* z, const std::vector<double>& w) const;

    // {T, C} probability rows from T independent weight draws at a fixed z
    nd::Tensor head_draws(const double* z, std::size_t T, Rng& rng) const;

    std::vector<double> sample_forward(const nd::Tensor& x, Rng& rng) const;
    std::vector<double> mean_forward(const nd::Tensor& x) const; // weights at mu
    std::vector<double> predict_proba(const nd::Tensor& x, std::size_t T, Rng& rng) const;
    PredictiveSummary decompose_uncertainty(const nd::Tensor& x, std::size_t T, Rng& rng) const;

    // KL(q || N(0, I)) = sum over head weights of 0.5 (mu^2 + sigma^2 - 1 - ln sigma^2)
    double kl() const;

    void save(const std::string& path) const;
    static VariationalClassifier load(const std::string& path);

private:
    nd::Tensor input_batch_view(const nd::Tensor& x) const; // single item -> batch of 1

    ModelConfig cfg_;
    ParamStore alpha_, mu_, rho_;
};

// ELBO for one batch: mean cross-entropy of per-example sampled forwards
// plus KL / n_train_total. eps[i] holds the frozen head noise of example i
// (length head_size). No tape involved; used for value checks.
double elbo_value(const VariationalClassifier& m, const nd::Tensor& X, const std::vector<int>& y,
                  std::size_t n_train_total, const std::vector<std::vector<double>>& eps);

// Same quantity via the autodiff tape. grads, when non-null, receives
// d loss / d [alpha | mu | rho] in that flat order.
double elbo_grads(const VariationalClassifier& m, const nd::Tensor& X, const std::vector<int>& y,
                  std::size_t n_train_total, const std::vector<std::vector<double>>& eps,
                  std::vector<double>* grads);

struct TrainSchedule {
    std::size_t epochs = 200;
    double lr = 1e-4;
    std::size_t plateau_patience = 50; // epochs without val-accuracy gain before lr halving
    double lr_factor = 0.5;
    std::size_t batch_size = 32;
    double sigma_max = 0.0; // >0: ceiling on posterior std during training; the KL
                            // term otherwise drags every sigma toward the prior's 1
                            // once the labeled set is large enough to step often
};

struct TrainHistory {
    std::vector<double> train_loss;   // per epoch
    std::vector<double> val_accuracy; // per epoch; empty when no val set given
    std::vector<double> lr;           // per epoch
};

// Adam over [alpha | mu | rho]; plateau halving driven by validation accuracy
// computed with the head at mu. Pass an empty Xval to skip the schedule.
TrainHistory train(VariationalClassifier& m, const nd::Tensor& X, const std::vector<int>& y,
                   const nd::Tensor& Xval, const std::vector<int>& yval,
                   const TrainSchedule& sched, Rng& rng);

// feature matrix container: row ids + {n, F} values
void save_features(const std::string& path, const std::vector<std::uint64_t>& ids,
                   const nd::Tensor& z);
std::pair<std::vector<std::uint64_t>, nd::Tensor> load_features(const std::string& path);

} // namespace focal::bnn
