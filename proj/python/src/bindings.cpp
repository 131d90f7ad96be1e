#include "commands.hpp"

#include "fdia/attack.hpp"
#include "fdia/autoencoder.hpp"
#include "fdia/data.hpp"
#include "fdia/detection.hpp"
#include "fdia/errors.hpp"
#include "fdia/estimation.hpp"
#include "fdia/grid.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace fdia;

namespace {

GridModel load_grid(const std::string& case_path, const std::optional<std::string>& meas_path,
                    const std::string& placement) {
    const GridTopology topo = load_case(case_path);
    if (meas_path) return build_h_matrix(topo, load_measurement_config(*meas_path, topo));
    if (placement == "buses") return build_h_matrix(topo, full_measurement_config(topo, InjectionPlacement::AllBuses));
    if (placement == "loads-gens")
        return build_h_matrix(topo, full_measurement_config(topo, InjectionPlacement::LoadsAndGenerators));
    throw InputError("unknown placement '" + placement + "' (expected buses or loads-gens)");
}

py::dict report_dict(const DetectionReport& r) {
    py::dict d;
    d["alpha"] = r.alpha;
    d["tau"] = r.tau;
    d["tp"] = r.tp;
    d["fn"] = r.fn;
    d["tn"] = r.tn;
    d["fp"] = r.fp;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Stealthy attack synthesis, state estimation and autoencoder detection on DC grid models.";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError);

    py::class_<GridModel>(m, "GridModel")
        .def_property_readonly("H", [](const GridModel& g) { return g.H; })
        .def_property_readonly("variances", [](const GridModel& g) { return g.variances; })
        .def_property_readonly("n_z", &GridModel::n_z)
        .def_property_readonly("n_x", &GridModel::n_x)
        .def_property_readonly("bus_count", [](const GridModel& g) { return g.topology.bus_count; })
        .def_property_readonly("load_bus_count", [](const GridModel& g) { return g.topology.load_buses.size(); })
        .def("label", &GridModel::label)
        .def("labels", &GridModel::labels)
        .def("find_flow", &GridModel::find_flow)
        .def("find_injection", &GridModel::find_injection)
        .def("resolve", &GridModel::resolve);

    m.def("load_grid", &load_grid, py::arg("case_path"), py::arg("meas_path") = std::nullopt,
          py::arg("placement") = "loads-gens", "Grid model from a case file and an optional measurement file.");
    m.def(
        "measure",
        [](const GridModel& g, const Eigen::VectorXd& x, std::optional<std::uint64_t> seed) {
            return measure(g, x, seed).values;
        },
        py::arg("model"), py::arg("state"), py::arg("seed") = std::nullopt);

    m.def(
        "wls_estimate",
        [](const GridModel& g, const Eigen::VectorXd& z) {
            const auto e = wls_estimate({z, std::nullopt}, g);
            return py::make_tuple(e.x_hat, e.z_hat, e.cost);
        },
        py::arg("model"), py::arg("z"), "Returns (x_hat, z_hat, J).");
    m.def(
        "residual", [](const GridModel& g, const Eigen::VectorXd& z) { return residual({z, std::nullopt}, g); },
        py::arg("model"), py::arg("z"));
    m.def(
        "bdd_test",
        [](double cost, int dof, double significance) {
            const auto v = bdd_test(cost, dof, significance);
            return py::make_tuple(v.alarm, v.threshold);
        },
        py::arg("cost"), py::arg("dof"), py::arg("significance") = kDefaultSignificance,
        "Returns (alarm, threshold).");
    m.def("chi_squared_quantile", &chi_squared_quantile, py::arg("p"), py::arg("dof"));
    m.def("chi_squared_cdf", &chi_squared_cdf, py::arg("x"), py::arg("dof"));

    py::class_<AttackPlan>(m, "AttackPlan")
        .def_readonly("c", &AttackPlan::c)
        .def_readonly("a", &AttackPlan::a)
        .def_readonly("support", &AttackPlan::support)
        .def_readonly("optimal", &AttackPlan::optimal)
        .def_readonly("target", &AttackPlan::target)
        .def_readonly("magnitude", &AttackPlan::magnitude)
        .def_property_readonly("cardinality", &AttackPlan::cardinality)
        .def("to_json", [](const AttackPlan& p) { return to_json(p).dump(); });

    m.def("craft_attack", [](const GridModel& g, const Eigen::VectorXd& c) { return craft_attack(g, c); },
          py::arg("model"), py::arg("c"));
    m.def(
        "min_resource_attack",
        [](const GridModel& g, Eigen::Index target, double magnitude, std::vector<Eigen::Index> protected_set,
           double c_max, long node_limit, double time_limit) {
            AttackSpec spec{target, magnitude, std::move(protected_set)};
            SolverOptions opts;
            opts.c_max = c_max;
            opts.node_limit = node_limit;
            opts.time_limit = time_limit;
            py::gil_scoped_release release;
            return min_resource_attack(g, spec, opts);
        },
        py::arg("model"), py::arg("target"), py::arg("magnitude") = -0.1,
        py::arg("protected") = std::vector<Eigen::Index>{}, py::arg("c_max") = SolverOptions{}.c_max,
        py::arg("node_limit") = SolverOptions{}.node_limit, py::arg("time_limit") = SolverOptions{}.time_limit);
    m.def(
        "brute_force_min_attack",
        [](const GridModel& g, Eigen::Index target, double magnitude, std::vector<Eigen::Index> protected_set,
           int max_support) {
            return brute_force_min_attack(g, {target, magnitude, std::move(protected_set)}, max_support);
        },
        py::arg("model"), py::arg("target"), py::arg("magnitude") = -0.1,
        py::arg("protected") = std::vector<Eigen::Index>{}, py::arg("max_support") = 6);

    m.def(
        "generate_scenarios",
        [](const GridModel& g, int hours, std::uint64_t synth_seed, std::uint64_t dispatch_seed,
           std::uint64_t noise_seed) {
            const auto loads = synthesize_loads(hours, static_cast<int>(g.topology.load_buses.size()), synth_seed);
            const auto s = generate_scenarios(loads, g, dispatch_seed, noise_seed);
            return py::make_tuple(s.measurements, s.states);
        },
        py::arg("model"), py::arg("hours"), py::arg("synth_seed") = 1, py::arg("dispatch_seed") = 2,
        py::arg("noise_seed") = 3, "Synthetic loads mapped to (measurements, states), one row per hour.");
    m.def(
        "split_sizes",
        [](Eigen::Index n) {
            const auto s = split_sizes(n);
            return py::make_tuple(s.train, s.validation, s.test);
        },
        py::arg("n"));

    py::class_<AutoencoderModel>(m, "AutoencoderModel")
        .def_property_readonly("dims", [](const AutoencoderModel& a) { return a.spec.dims; })
        .def("save", [](const AutoencoderModel& a, const std::filesystem::path& p) { save_model(a, p); });
    m.def("load_model", &load_model, py::arg("path"));
    m.def(
        "train_autoencoder",
        [](const Eigen::MatrixXd& train_rows, const Eigen::MatrixXd& val_rows, const std::vector<int>& hidden,
           int bottleneck, double learning_rate, int batch_size, int epochs, std::uint64_t seed) {
            TrainConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.batch_size = batch_size;
            cfg.epochs = epochs;
            cfg.seed = seed;
            cfg.validate();
            AutoencoderModel model =
                init_model(LayerSpec::symmetric(static_cast<int>(train_rows.cols()), hidden, bottleneck), seed);
            model.scaler = fit_scaler(train_rows);
            TrainResult r;
            {
                py::gil_scoped_release release;
                r = train(std::move(model), train_rows, val_rows, cfg);
            }
            py::dict history;
            history["train"] = r.history.train_error;
            history["val"] = r.history.val_error;
            history["diverged"] = r.diverged;
            return py::make_tuple(r.model, history);
        },
        py::arg("train_rows"), py::arg("val_rows"), py::arg("hidden") = std::vector<int>{256, 128, 64},
        py::arg("bottleneck") = 32, py::arg("learning_rate") = TrainConfig{}.learning_rate,
        py::arg("batch_size") = TrainConfig{}.batch_size, py::arg("epochs") = TrainConfig{}.epochs,
        py::arg("seed") = 0, "Returns (model, history).");
    m.def(
        "reconstruction_errors",
        [](const AutoencoderModel& a, const Eigen::MatrixXd& rows) { return reconstruction_errors(a, rows); },
        py::arg("model"), py::arg("rows"));

    m.def(
        "compute_threshold",
        [](const std::vector<double>& val, double alpha) { return compute_threshold(val, alpha).tau; },
        py::arg("val_errors"), py::arg("alpha"));
    m.def(
        "threshold_sweep",
        [](const std::vector<double>& val, const std::vector<double>& normal, const std::vector<double>& attack,
           const std::vector<double>& alphas) {
            py::list out;
            for (const auto& r : threshold_sweep(val, normal, attack, alphas)) out.append(report_dict(r));
            return out;
        },
        py::arg("val_errors"), py::arg("normal_errors"), py::arg("attack_errors"),
        py::arg("alphas") = kDefaultAlphaSweep);
    m.def(
        "roc_curve",
        [](const std::vector<double>& normal, const std::vector<double>& attack) {
            const RocCurve roc = roc_curve(normal, attack);
            std::vector<double> fp, tp;
            for (const auto& p : roc.points) {
                fp.push_back(p.fp_rate);
                tp.push_back(p.tp_rate);
            }
            return py::make_tuple(fp, tp, roc.auc);
        },
        py::arg("normal_errors"), py::arg("attack_errors"), "Returns (fp_rates, tp_rates, auc).");

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one fdia subcommand in-process; returns (exit_code, stdout, stderr).");
}
