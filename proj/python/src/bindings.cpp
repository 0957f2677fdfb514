#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wigcn/cli.hpp"
#include "wigcn/data.hpp"
#include "wigcn/error.hpp"
#include "wigcn/eval.hpp"
#include "wigcn/graph.hpp"
#include "wigcn/io.hpp"
#include "wigcn/model.hpp"
#include "wigcn/training.hpp"

namespace py = pybind11;
using namespace wigcn;

namespace {

using EdgeArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

std::vector<RawInteraction> edges_from_array(const EdgeArray& a) {
    if (a.ndim() != 2 || a.shape(1) != 2) {
        throw usage_error("expected an (N, 2) array of (user, item) ids");
    }
    auto view = a.unchecked<2>();
    std::vector<RawInteraction> out(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t r = 0; r < a.shape(0); ++r) out[r] = {view(r, 0), view(r, 1)};
    return out;
}

EdgeArray edges_to_array(const std::vector<RawInteraction>& edges) {
    EdgeArray a({static_cast<py::ssize_t>(edges.size()), py::ssize_t{2}});
    auto view = a.mutable_unchecked<2>();
    for (std::size_t r = 0; r < edges.size(); ++r) {
        view(r, 0) = edges[r].user;
        view(r, 1) = edges[r].item;
    }
    return a;
}

std::vector<BprTriple> triples_from_array(const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(1) != 3) {
        throw usage_error("expected an (B, 3) array of (user, positive, negative) indices");
    }
    auto view = a.unchecked<2>();
    std::vector<BprTriple> out(static_cast<std::size_t>(a.shape(0)));
    for (py::ssize_t r = 0; r < a.shape(0); ++r) {
        for (int c = 0; c < 3; ++c)
            if (view(r, c) < 0) throw usage_error("triple indices must be non-negative");
        out[r] = {static_cast<index_t>(view(r, 0)), static_cast<index_t>(view(r, 1)), static_cast<index_t>(view(r, 2))};
    }
    return out;
}

py::dict metrics_dict(const RankingMetrics& m) {
    py::dict d;
    d["k"] = m.k;
    d["precision"] = m.precision;
    d["recall"] = m.recall;
    d["f1"] = m.f1;
    d["ndcg"] = m.ndcg;
    d["n_users_evaluated"] = m.n_users_evaluated;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Graph-convolutional collaborative filtering with a weighted co-interaction input";

    py::register_exception<usage_error>(m, "UsageError", PyExc_ValueError);
    py::register_exception<data_error>(m, "DataError", PyExc_ValueError);
    py::register_exception<numerical_error>(m, "NumericalError", PyExc_ArithmeticError);

    py::enum_<Variant>(m, "Variant")
        .value("wigcn", Variant::wigcn)
        .value("ngcf_like", Variant::ngcf_like)
        .value("lightgcn_like", Variant::lightgcn_like);
    m.def("parse_variant", [](const std::string& s) { return parse_variant(s); });

    // data
    m.def(
        "load_interactions",
        [](const std::filesystem::path& path, const std::string& format) {
            return edges_to_array(load_interactions(path, parse_file_format(format)));
        },
        py::arg("path"), py::arg("format") = "edge-list", "Read an interaction file into an (N, 2) int64 array.");
    m.def(
        "k_core_filter", [](const EdgeArray& edges, std::size_t k) { return edges_to_array(k_core_filter(edges_from_array(edges), k)); },
        py::arg("edges"), py::arg("k"));

    py::class_<InteractionDataset>(m, "Dataset")
        .def_readonly("n_users", &InteractionDataset::n_users)
        .def_readonly("n_items", &InteractionDataset::n_items)
        .def_readonly("train_positives", &InteractionDataset::train_positives)
        .def_readonly("test_positives", &InteractionDataset::test_positives)
        .def_property_readonly("n_train", &InteractionDataset::n_train)
        .def_property_readonly("n_test", &InteractionDataset::n_test)
        .def_property_readonly("user_ids",
                               [](const InteractionDataset& d) {
                                   auto e = d.user_ids.externals();
                                   return std::vector<std::int64_t>(e.begin(), e.end());
                               })
        .def_property_readonly("item_ids",
                               [](const InteractionDataset& d) {
                                   auto e = d.item_ids.externals();
                                   return std::vector<std::int64_t>(e.begin(), e.end());
                               })
        .def("stats", [](const InteractionDataset& d) {
            const auto s = dataset_stats(d);
            py::dict out;
            out["n_users"] = s.n_users;
            out["n_items"] = s.n_items;
            out["n_relations"] = s.n_relations;
            out["density"] = s.density;
            return out;
        });
    m.def(
        "train_test_split",
        [](const EdgeArray& edges, double test_fraction, std::uint64_t seed) {
            return train_test_split(edges_from_array(edges), test_fraction, seed);
        },
        py::arg("edges"), py::arg("test_fraction") = 0.2, py::arg("seed") = 0);

    // graph
    py::class_<GraphInputs>(m, "GraphInputs")
        .def_readonly("n_users", &GraphInputs::n_users)
        .def_readonly("n_items", &GraphInputs::n_items)
        .def("gamma", [](const GraphInputs& g) { return g.gamma.to_dense(); })
        .def("delta", [](const GraphInputs& g) { return g.delta.to_dense(); });
    m.def(
        "build_graph_inputs", [](const InteractionDataset& d) { return build_graph_inputs(d.train_matrix()); },
        py::arg("dataset"), "Normalized adjacency and co-interaction matrices of the training interactions.");

    // model
    py::class_<LayerParams>(m, "LayerParams")
        .def_readwrite("w1", &LayerParams::w1)
        .def_readwrite("w2", &LayerParams::w2)
        .def_readwrite("bias", &LayerParams::bias);
    py::class_<ModelParams>(m, "ModelParams")
        .def_readwrite("e0", &ModelParams::e0)
        .def_readwrite("layers", &ModelParams::layers)
        .def_readonly("n_users", &ModelParams::n_users)
        .def_readonly("n_items", &ModelParams::n_items)
        .def_property_readonly("embedding_dim", &ModelParams::embedding_dim)
        .def_property_readonly("n_layers", &ModelParams::n_layers);
    m.def("init_params", &init_params, py::arg("n_users"), py::arg("n_items"), py::arg("d"), py::arg("n_layers"),
          py::arg("seed") = 0);
    m.def(
        "forward",
        [](const ModelParams& p, const GraphInputs& g, Variant v, double slope) {
            return forward(p, g, v, slope).final_embedding;
        },
        py::arg("params"), py::arg("graph"), py::arg("variant") = Variant::wigcn,
        py::arg("leaky_slope") = kDefaultLeakySlope, "Final embedding matrix E*, users stacked above items.");

    // training
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("d", &TrainConfig::d)
        .def_readwrite("n_layers", &TrainConfig::n_layers)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("lambda_reg", &TrainConfig::lambda_reg)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("leaky_slope", &TrainConfig::leaky_slope)
        .def_readwrite("variant", &TrainConfig::variant)
        .def("validate", &TrainConfig::validate);
    m.def(
        "compute_gradients",
        [](const ModelParams& p, const GraphInputs& g, const py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>& triples,
           const TrainConfig& c) {
            auto out = compute_gradients(p, g, triples_from_array(triples), c);
            return py::make_tuple(out.loss, std::move(out.grads));
        },
        py::arg("params"), py::arg("graph"), py::arg("triples"), py::arg("config"),
        "Loss and gradients for a batch of (user, positive, negative) index triples.");
    m.def(
        "train",
        [](const InteractionDataset& d, const GraphInputs& g, const TrainConfig& c) {
            TrainResult result;
            {
                py::gil_scoped_release release;
                result = train(d, g, c);
            }
            py::list history;
            for (const auto& r : result.history) {
                py::dict e;
                e["epoch"] = r.epoch;
                e["mean_loss"] = r.mean_loss;
                e["wall_seconds"] = r.wall_seconds;
                history.append(e);
            }
            return py::make_tuple(std::move(result.params), history);
        },
        py::arg("dataset"), py::arg("graph"), py::arg("config"), "Returns (params, history).");

    // evaluation
    m.def(
        "evaluate",
        [](const ModelParams& p, const GraphInputs& g, const InteractionDataset& d, std::size_t k, Variant v,
           double slope) { return metrics_dict(evaluate_model(forward(p, g, v, slope), d, k)); },
        py::arg("params"), py::arg("graph"), py::arg("dataset"), py::arg("k") = kDefaultEvalK,
        py::arg("variant") = Variant::wigcn, py::arg("leaky_slope") = kDefaultLeakySlope);
    m.def(
        "topk_ranking",
        [](const std::vector<double>& scores, std::vector<index_t> excluded, std::size_t k) {
            std::sort(excluded.begin(), excluded.end());
            return topk_ranking(scores, excluded, k);
        },
        py::arg("scores"), py::arg("excluded"), py::arg("k"));
    m.def(
        "ndcg_at_k",
        [](const std::vector<index_t>& rec, std::vector<index_t> rel, std::size_t k) {
            std::sort(rel.begin(), rel.end());
            return ndcg_at_k(rec, rel, k);
        },
        py::arg("recommended"), py::arg("relevant"), py::arg("k"));

    // persistence and CLI
    m.def(
        "save_checkpoint",
        [](const std::filesystem::path& path, const ModelParams& p, Variant v, double slope) {
            save_checkpoint(path, {p, v, slope});
        },
        py::arg("path"), py::arg("params"), py::arg("variant") = Variant::wigcn,
        py::arg("leaky_slope") = kDefaultLeakySlope);
    m.def(
        "load_checkpoint",
        [](const std::filesystem::path& path) {
            auto c = load_checkpoint(path);
            return py::make_tuple(std::move(c.params), c.variant, c.leaky_slope);
        },
        py::arg("path"), "Returns (params, variant, leaky_slope).");
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run the command-line tool in-process. Returns (exit_code, stdout, stderr).");
}
