#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dtrl/attack.hpp"
#include "dtrl/density_ratio.hpp"
#include "dtrl/info_theory.hpp"
#include "dtrl/pipeline.hpp"
#include "dtrl/text_encoder.hpp"

namespace py = pybind11;
using namespace dtrl;

namespace {

info::DiscreteJoint joint_from_nested(const std::vector<std::vector<double>>& rows) {
    std::vector<double> table;
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    for (const auto& row : rows) {
        if (row.size() != cols) {
            throw DimensionError("joint table rows must have equal length");
        }
        table.insert(table.end(), row.begin(), row.end());
    }
    return info::DiscreteJoint({rows.size(), cols}, std::move(table));
}

double gaussian_mi_estimate(double rho, std::size_t n, std::uint64_t seed, std::size_t steps) {
    auto [a, b] = net::sample_correlated_gaussian(n, rho, seed);
    net::DensityRatioConfig config;
    config.hidden = {32, 32};
    config.steps = steps;
    config.seed = seed;
    net::DensityRatioEstimator estimator(1, 1, config);
    estimator.fit(a, b);
    return estimator.estimate(a, b);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Disentangled text representation learning: info-theory oracles, "
              "text attacks and the training pipeline";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ContractError>(m, "ContractError", PyExc_RuntimeError);

    // exact information-theoretic quantities (nats)
    m.def("entropy", [](const std::vector<double>& probs) {
        return info::entropy(info::DiscreteDistribution{probs});
    }, py::arg("probs"));
    m.def("mutual_information", [](const std::vector<std::vector<double>>& joint) {
        return info::mutual_information(joint_from_nested(joint));
    }, py::arg("joint"));
    m.def("variation_of_information", [](const std::vector<std::vector<double>>& joint) {
        return info::variation_of_information(joint_from_nested(joint));
    }, py::arg("joint"));
    m.def("triangle_gap", [](const std::vector<std::size_t>& dims, const std::vector<double>& table) {
        return info::triangle_gap(info::DiscreteJoint(dims, table));
    }, py::arg("dims"), py::arg("table"));
    m.def("random_joint_triangle_gap", [](const std::vector<std::size_t>& dims, std::uint64_t seed) {
        return info::triangle_gap(info::DiscreteJoint::random(dims, seed));
    }, py::arg("dims"), py::arg("seed"));

    // text featurization
    m.def("featurize", [](const std::string& text, int ngram_min, int ngram_max,
                          std::uint32_t hash_buckets) {
        text::FeaturizerConfig config;
        config.ngram_min = ngram_min;
        config.ngram_max = ngram_max;
        config.hash_buckets = hash_buckets;
        const text::SparseVec vec = text::featurize(config, text);
        std::map<std::uint32_t, double> out;
        for (std::size_t i = 0; i < vec.nnz(); ++i) {
            out[vec.index[i]] = vec.value[i];
        }
        return out;
    }, py::arg("text"), py::arg("ngram_min") = 2, py::arg("ngram_max") = 3,
       py::arg("hash_buckets") = 2048);

    // attack machinery
    m.def("char_candidates", &attack::char_candidates, py::arg("word"));
    m.def("edit_distance", &attack::edit_distance, py::arg("a"), py::arg("b"));

    // density-ratio MI estimation
    m.def("gaussian_mi_estimate", &gaussian_mi_estimate, py::arg("rho"), py::arg("n") = 10000,
          py::arg("seed") = 7, py::arg("steps") = 3000);

    // pipeline entry points (mirror the CLI subcommands)
    m.def("generate", [](const std::string& config_path, const std::string& out_dir, bool force) {
        pipeline::cmd_generate(cfg::ExperimentConfig::load(config_path), out_dir, force);
    }, py::arg("config_path"), py::arg("out_dir"), py::arg("force") = false);
    m.def("train", [](const std::string& config_path, const std::string& mode,
                      const std::string& out_dir) {
        cfg::ExperimentConfig config = cfg::ExperimentConfig::load(config_path);
        if (!mode.empty()) {
            config.mode = cfg::parse_mode(mode);
        }
        pipeline::cmd_train(config, out_dir);
    }, py::arg("config_path"), py::arg("mode"), py::arg("out_dir"));
    m.def("augment", [](const std::string& config_path, const std::string& victim_dir,
                        const std::string& out_dir) {
        pipeline::cmd_augment(cfg::ExperimentConfig::load(config_path), victim_dir, out_dir);
    }, py::arg("config_path"), py::arg("victim_dir"), py::arg("out_dir"));
    m.def("evaluate", [](const std::string& config_path, const std::vector<std::string>& models,
                         const std::vector<std::string>& reports, const std::string& out_dir) {
        pipeline::cmd_eval(cfg::ExperimentConfig::load(config_path), models, reports, out_dir);
    }, py::arg("config_path"), py::arg("models"), py::arg("reports"), py::arg("out_dir"));
    m.def("mi_check", [](std::uint64_t seed) {
        std::vector<std::map<std::string, double>> out;
        for (const auto& check : pipeline::run_mi_check(seed)) {
            out.push_back({{"estimate", check.estimate},
                           {"oracle", check.oracle},
                           {"tolerance", check.tolerance},
                           {"pass", check.pass ? 1.0 : 0.0}});
        }
        return out;
    }, py::arg("seed") = 7);

    m.attr("__version__") = "0.1.0";
}
