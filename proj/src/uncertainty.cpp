#include "focal/uncertainty.hpp"

#include "focal/errors.hpp"

namespace focal::bnn {

PredictiveSummary decompose_draws(const nd::Tensor& draws) {
    if (draws.ndim() != 2) throw ShapeError("decompose_draws expects a {T, C} matrix");
    const std::size_t T = draws.shape[0], C = draws.shape[1];
    if (T < 1) throw ParamError("decompose_draws needs at least one draw");

    PredictiveSummary s;
    s.p_hat.assign(C, 0.0);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = 0; c < C; ++c) s.p_hat[c] += draws.at(t, c);
    for (double& v : s.p_hat) v /= static_cast<double>(T);

    s.ep_mat = nd::Tensor::zeros({C, C});
    s.al_mat = nd::Tensor::zeros({C, C});
    for (std::size_t t = 0; t < T; ++t) {
        const double* p = &draws.data[t * C];
        for (std::size_t i = 0; i < C; ++i)
            for (std::size_t j = 0; j < C; ++j) {
                const double d = (p[i] - s.p_hat[i]) * (p[j] - s.p_hat[j]);
                s.ep_mat.data[i * C + j] += d;
                s.al_mat.data[i * C + j] += (i == j ? p[i] : 0.0) - p[i] * p[j];
            }
    }
    for (double& v : s.ep_mat.data) v /= static_cast<double>(T);
    for (double& v : s.al_mat.data) v /= static_cast<double>(T);

    s.ep_var.resize(C);
    s.al_var.resize(C);
    for (std::size_t c = 0; c < C; ++c) {
        s.ep_var[c] = s.ep_mat.at(c, c);
        s.al_var[c] = s.al_mat.at(c, c);
    }
    return s;
}

} // namespace focal::bnn
