#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "focal/acquisition.hpp"
#include "focal/lof.hpp"
#include "focal/metrics.hpp"
#include "focal/tensor.hpp"
#include "focal/uncertainty.hpp"

namespace py = pybind11;
using namespace focal;

namespace {

nd::Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    std::vector<std::size_t> shape(a.ndim());
    for (py::ssize_t i = 0; i < a.ndim(); ++i) shape[static_cast<std::size_t>(i)] =
        static_cast<std::size_t>(a.shape(i));
    nd::Tensor t(shape);
    std::copy_n(a.data(), t.numel(), t.data.begin());
    return t;
}

py::array_t<double> array_from_tensor(const nd::Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<double> a(shape);
    std::copy_n(t.data.begin(), t.numel(), a.mutable_data());
    return a;
}

} // namespace

PYBIND11_MODULE(focal_py, m) {
    m.doc() = "pool-based active learning core: uncertainty decomposition, LOF "
              "novelty scoring, acquisition scores and evaluation metrics";

    m.def("accuracy", &metrics::accuracy, py::arg("preds"), py::arg("labels"));

    m.def(
        "macro_f1",
        [](const std::vector<int>& preds, const std::vector<int>& labels, int class_count) {
            const auto r = metrics::macro_f1(preds, labels, class_count);
            return py::make_tuple(r.macro, r.per_class);
        },
        py::arg("preds"), py::arg("labels"), py::arg("class_count"),
        "returns (macro, per_class)");

    m.def(
        "quadratic_kappa",
        [](const std::vector<int>& preds, const std::vector<int>& labels, int class_count) {
            return metrics::quadratic_kappa(preds, labels, class_count).value;
        },
        py::arg("preds"), py::arg("labels"), py::arg("class_count"));

    m.def(
        "decompose_draws",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& draws) {
            const auto s = bnn::decompose_draws(tensor_from_array(draws));
            py::dict d;
            d["p_hat"] = s.p_hat;
            d["ep_var"] = s.ep_var;
            d["al_var"] = s.al_var;
            d["ep_mat"] = array_from_tensor(s.ep_mat);
            d["al_mat"] = array_from_tensor(s.al_mat);
            return d;
        },
        py::arg("draws"), "draws: (T, C) rows of probability vectors");

    m.def("class_weights", &acq::class_weights, py::arg("label_counts"));

    m.def(
        "focal_score",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& draws,
           double ood_score, const std::vector<double>& w, double lambda_al, double lambda_ood) {
            const auto s = bnn::decompose_draws(tensor_from_array(draws));
            return acq::focal_score(s, ood_score, w, lambda_al, lambda_ood);
        },
        py::arg("draws"), py::arg("ood_score"), py::arg("w"), py::arg("lambda_al"),
        py::arg("lambda_ood"));

    m.def("entropy_score", &acq::entropy_score, py::arg("p_hat"));

    m.def(
        "bald_score",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& draws) {
            return acq::bald_score(tensor_from_array(draws));
        },
        py::arg("draws"));

    m.def(
        "meanstd_score",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& draws) {
            return acq::meanstd_score(tensor_from_array(draws));
        },
        py::arg("draws"));

    m.def("select_batch", &acq::select_batch, py::arg("ids"), py::arg("scores"),
          py::arg("batch"), "ids of the batch highest scores, ties to the lowest id");

    py::class_<ood::OoDIndex>(m, "OoDIndex",
                              "LOF novelty index over a fixed reference feature matrix")
        .def(py::init([](const py::array_t<double, py::array::c_style | py::array::forcecast>& ref,
                         std::size_t k) { return ood::OoDIndex(tensor_from_array(ref), k); }),
             py::arg("reference"), py::arg("k"))
        .def_property_readonly("k", &ood::OoDIndex::k)
        .def("lof",
             [](const ood::OoDIndex& idx,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& z) {
                 return idx.lof(tensor_from_array(z));
             },
             py::arg("z"))
        .def("score",
             [](const ood::OoDIndex& idx,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& z) {
                 return idx.score(tensor_from_array(z));
             },
             py::arg("z"))
        .def("score_rows",
             [](const ood::OoDIndex& idx,
                const py::array_t<double, py::array::c_style | py::array::forcecast>& rows) {
                 return idx.score_rows(tensor_from_array(rows));
             },
             py::arg("rows"));
}
