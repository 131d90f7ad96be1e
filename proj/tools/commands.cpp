#include "commands.hpp"

#include "fdia/attack.hpp"
#include "fdia/autoencoder.hpp"
#include "fdia/data.hpp"
#include "fdia/detection.hpp"
#include "fdia/errors.hpp"
#include "fdia/estimation.hpp"
#include "fdia/grid.hpp"
#include "fdia/io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace fdia::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
    std::string case_path;
    std::string meas_path;
    std::string placement = "loads-gens";
    std::string loads_path;
    std::string data_dir;
    std::string model_path;
    std::string plan_path;
    std::string input_dir;
    std::string out_dir;
    std::string config_path;

    int hours = 8760;
    std::uint64_t synth_seed = 1;
    std::uint64_t dispatch_seed = 2;
    std::uint64_t noise_seed = 3;

    double learning_rate = TrainConfig{}.learning_rate;
    int batch_size = TrainConfig{}.batch_size;
    int epochs = TrainConfig{}.epochs;
    std::uint64_t train_seed = 0;
    std::vector<int> hidden{256, 128, 64};
    int bottleneck = 32;
    bool grid_search = false;
    std::vector<double> lr_grid{1e-2, 1e-3, 1e-4, 1e-5};
    std::vector<int> batch_grid{64, 128, 256};
    int log_every = 0;

    std::string target;
    double magnitude = -0.1;
    std::vector<std::string> protect;
    std::string spec_path;
    double c_max = SolverOptions{}.c_max;
    double big_m = 0.0;
    long node_limit = SolverOptions{}.node_limit;
    double time_limit = SolverOptions{}.time_limit;
    bool oracle = false;

    double alpha = 99.0;
    std::vector<double> alphas = kDefaultAlphaSweep;
    std::string mode = "relative";
    double percent = 10.0;

    std::vector<std::string> inputs;
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    auto res = std::to_chars(buf, buf + sizeof buf, v, 16);
    return "fnv1a64:" + std::string(buf, res.ptr);
}

std::string file_hash(const fs::path& p) { return hex64(fnv1a64(read_file(p))); }

fs::path out_dir(const RunConfig& cfg) { return cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir); }

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw InputError(std::string("missing ") + what);
    if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " not found: " + path);
}

GridModel load_grid(const RunConfig& cfg) {
    require_file(cfg.case_path, "grid case file");
    const GridTopology topo = load_case(cfg.case_path);
    MeasurementConfig meas;
    if (!cfg.meas_path.empty()) {
        require_file(cfg.meas_path, "measurement config");
        meas = load_measurement_config(cfg.meas_path, topo);
    } else if (cfg.placement == "buses") {
        meas = full_measurement_config(topo, InjectionPlacement::AllBuses);
    } else if (cfg.placement == "loads-gens") {
        meas = full_measurement_config(topo, InjectionPlacement::LoadsAndGenerators);
    } else {
        throw InputError("unknown placement '" + cfg.placement + "' (expected buses or loads-gens)");
    }
    return build_h_matrix(topo, meas);
}

ScenarioSet load_scenarios(const RunConfig& cfg) {
    if (cfg.data_dir.empty()) throw InputError("missing --data directory");
    if (!fs::is_directory(cfg.data_dir)) throw InputError("data directory not found: " + cfg.data_dir);
    return read_scenarios(cfg.data_dir);
}

AutoencoderModel load_trained(const RunConfig& cfg) {
    require_file(cfg.model_path, "model file");
    return load_model(cfg.model_path);
}

int cmd_gen_data(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const GridModel grid = load_grid(cfg);
    LoadSeries loads;
    if (!cfg.loads_path.empty()) {
        require_file(cfg.loads_path, "load file");
        loads = ingest_load_csv(cfg.loads_path);
        if (loads.dropped_rows > 0) err << "dropped " << loads.dropped_rows << " load rows with missing or negative values\n";
    } else {
        loads = synthesize_loads(cfg.hours, static_cast<int>(grid.topology.load_buses.size()), cfg.synth_seed);
    }
    const ScenarioSet set = generate_scenarios(loads, grid, cfg.dispatch_seed, cfg.noise_seed);
    const fs::path dir = out_dir(cfg);
    write_scenarios(dir, set, grid);

    const Eigen::VectorXd factors = participation_factors(grid.topology, cfg.dispatch_seed);
    json dispatch = json::array();
    for (int b = 0; b < grid.topology.bus_count; ++b)
        if (factors(b) > 0.0) dispatch.push_back({{"bus", b + 1}, {"factor", factors(b)}});
    json meta = {{"format_version", 1},
                 {"case_file", fs::path(cfg.case_path).filename().string()},
                 {"case_hash", file_hash(cfg.case_path)},
                 {"measurement_config", cfg.meas_path.empty() ? "full:" + cfg.placement
                                                              : fs::path(cfg.meas_path).filename().string()},
                 {"measurement_hash", cfg.meas_path.empty() ? hex64(fnv1a64(cfg.placement)) : file_hash(cfg.meas_path)},
                 {"n_z", grid.n_z()},
                 {"n_x", grid.n_x()},
                 {"hours", set.size()},
                 {"dispatch_seed", cfg.dispatch_seed},
                 {"noise_seed", cfg.noise_seed},
                 {"noise_seed_rule", "noise_seed + hour"},
                 {"participation_factors", dispatch}};
    if (loads.source == LoadSource::Synthetic) {
        meta["load_source"] = "synthetic";
        meta["load_seed"] = *loads.seed;
    } else {
        meta["load_source"] = "ingested";
        meta["load_file"] = fs::path(cfg.loads_path).filename().string();
        meta["load_hash"] = file_hash(cfg.loads_path);
        meta["dropped_rows"] = loads.dropped_rows;
    }
    write_file(dir / "metadata.json", meta.dump(2) + "\n");
    out << "wrote " << set.size() << " hours x " << grid.n_z() << " measurements to " << dir.string() << "\n";
    return kSuccess;
}

void write_history(const fs::path& path, const TrainHistory& h) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot write " + path.string());
    f << "epoch,train_J,val_J\n";
    for (std::size_t e = 0; e < h.epochs(); ++e)
        f << e + 1 << ',' << format_double(h.train_error[e]) << ',' << format_double(h.val_error[e]) << '\n';
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const SplitSet parts = split(load_scenarios(cfg));
    const Eigen::MatrixXd& train_rows = parts.train.measurements;
    const Eigen::MatrixXd& val_rows = parts.validation.measurements;
    const LayerSpec spec = LayerSpec::symmetric(static_cast<int>(train_rows.cols()), cfg.hidden, cfg.bottleneck);
    spec.validate();
    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);

    if (cfg.grid_search) {
        const auto entries = grid_search(train_rows, val_rows, cfg.lr_grid, cfg.batch_grid, spec, cfg.epochs, cfg.train_seed);
        std::ofstream ranked(dir / "grid_search.csv", std::ios::binary);
        std::ofstream hist(dir / "grid_history.csv", std::ios::binary);
        if (!ranked || !hist) throw InputError("cannot write grid search results to " + dir.string());
        ranked << "rank,learning_rate,batch_size,final_train_J,final_val_J,diverged\n";
        hist << "learning_rate,batch_size,epoch,train_J,val_J\n";
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const auto& e = entries[k];
            ranked << k + 1 << ',' << format_double(e.learning_rate) << ',' << e.batch_size << ','
                   << format_double(e.final_train_error) << ',' << format_double(e.final_val_error) << ','
                   << (e.diverged ? 1 : 0) << '\n';
            for (std::size_t t = 0; t < e.history.epochs(); ++t)
                hist << format_double(e.learning_rate) << ',' << e.batch_size << ',' << t + 1 << ','
                     << format_double(e.history.train_error[t]) << ',' << format_double(e.history.val_error[t]) << '\n';
            if (e.diverged)
                err << "learning rate " << format_double(e.learning_rate) << ", batch " << e.batch_size
                    << " diverged after " << e.history.epochs() << " epochs\n";
        }
        out << "best: learning rate " << format_double(entries.front().learning_rate) << ", batch "
            << entries.front().batch_size << ", validation J " << format_double(entries.front().final_val_error) << "\n";
        return kSuccess;
    }

    TrainConfig tc;
    tc.learning_rate = cfg.learning_rate;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.seed = cfg.train_seed;
    tc.validate();
    AutoencoderModel model = init_model(spec, cfg.train_seed);
    model.scaler = fit_scaler(train_rows);
    EpochCallback log;
    if (cfg.log_every > 0)
        log = [&](int epoch, double tj, double vj) {
            if (epoch % cfg.log_every == 0)
                err << "epoch " << epoch << " train J " << format_double(tj) << " val J " << format_double(vj) << "\n";
        };
    const TrainResult result = train(std::move(model), train_rows, val_rows, tc, log);
    write_history(dir / "history.csv", result.history);
    if (result.diverged)
        throw NumericalError("training diverged at epoch " + std::to_string(result.history.epochs()) +
                             " (learning rate " + format_double(tc.learning_rate) + "); history written, no model saved");
    save_model(result.model, dir / "model.json");
    out << "trained " << result.history.epochs() << " epochs, final train J "
        << format_double(result.history.train_error.back()) << ", val J "
        << format_double(result.history.val_error.back()) << "\n";
    return kSuccess;
}

int cmd_attack(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const GridModel grid = load_grid(cfg);
    AttackSpec spec;
    if (!cfg.spec_path.empty()) {
        require_file(cfg.spec_path, "attack spec");
        try {
            spec = attack_spec_from_json(json::parse(read_file(cfg.spec_path)));
        } catch (const json::parse_error& e) {
            throw InputError(cfg.spec_path + ": " + e.what());
        }
    } else {
        if (cfg.target.empty()) throw InputError("missing --target (flow:A-B, inj:B or a row number)");
        spec.target = grid.resolve(cfg.target);
        spec.magnitude = cfg.magnitude;
        for (const auto& p : cfg.protect) spec.protected_set.push_back(grid.resolve(p));
    }
    SolverOptions opts;
    opts.c_max = cfg.c_max;
    if (cfg.big_m > 0.0) opts.big_M = cfg.big_m;
    opts.node_limit = cfg.node_limit;
    opts.time_limit = cfg.time_limit;

    SearchStats stats;
    const AttackPlan plan = min_resource_attack(grid, spec, opts, &stats);
    const fs::path path = cfg.plan_path.empty() ? out_dir(cfg) / "plan.json" : fs::path(cfg.plan_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path, to_json(plan, &grid).dump(2) + "\n");

    out << "target " << grid.label(spec.target) << ", cardinality " << plan.cardinality()
        << (plan.optimal ? " (optimal)" : " (limit reached, not proven optimal)") << "\n";
    out << "support:";
    for (auto s : plan.support) out << ' ' << '[' << grid.label(s) << ']';
    out << "\nnodes " << stats.nodes << ", root bound " << format_double(stats.root_bound) << "\n";

    if (cfg.oracle) {
        // Enumeration up to the solver's cardinality; refuse when that is out of reach.
        const int k = static_cast<int>(plan.cardinality());
        double combos = 0.0, term = 1.0;
        const double n = static_cast<double>(grid.n_z() - 1);
        for (int j = 0; j < k; ++j) {
            combos += term;
            term *= (n - j) / (j + 1);
        }
        if (combos > 5e6) throw InputError("--oracle would enumerate " + format_double(combos) + " supports; use a smaller grid");
        const auto reference = brute_force_min_attack(grid, spec, k);
        if (!reference) throw NumericalError("oracle found no stealthy attack but the solver did");
        if (reference->cardinality() != plan.cardinality()) {
            err << "oracle disagrees: cardinality " << reference->cardinality() << " vs " << plan.cardinality() << "\n";
            return kInternalError;
        }
        out << "oracle agrees: cardinality " << reference->cardinality() << "\n";
    }
    if (!plan.optimal) {
        err << "search limit reached after " << stats.nodes << " nodes\n";
        return kInfeasible;
    }
    return kSuccess;
}

Eigen::VectorXd validation_errors(const AutoencoderModel& model, const SplitSet& parts) {
    return reconstruction_errors(model, parts.validation.measurements);
}

int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    const AutoencoderModel model = load_trained(cfg);
    const SplitSet parts = split(load_scenarios(cfg));
    const Eigen::VectorXd val = validation_errors(model, parts);
    const Threshold tau = compute_threshold({val.data(), static_cast<std::size_t>(val.size())}, cfg.alpha);
    ScenarioSet input = parts.test;
    if (!cfg.input_dir.empty()) {
        if (!fs::is_directory(cfg.input_dir)) throw InputError("input directory not found: " + cfg.input_dir);
        input = read_scenarios(cfg.input_dir);
    }
    const Eigen::VectorXd errors = reconstruction_errors(model, input.measurements);
    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);
    std::ofstream f(dir / "detections.csv", std::ios::binary);
    if (!f) throw InputError("cannot write " + (dir / "detections.csv").string());
    f << "hour,error,attack\n";
    long alarms = 0;
    for (Eigen::Index k = 0; k < errors.size(); ++k) {
        const bool attack = classify(errors(k), tau) == Label::Attack;
        alarms += attack;
        f << input.hours[static_cast<std::size_t>(k)] << ',' << format_double(errors(k)) << ',' << (attack ? 1 : 0) << '\n';
    }
    out << "tau " << format_double(tau.tau) << " at alpha " << format_double(tau.alpha) << ": " << alarms << " of "
        << errors.size() << " observations flagged\n";
    return kSuccess;
}

int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const AutoencoderModel model = load_trained(cfg);
    const SplitSet parts = split(load_scenarios(cfg));
    require_file(cfg.plan_path, "attack plan");
    AttackPlan plan;
    try {
        plan = attack_plan_from_json(json::parse(read_file(cfg.plan_path)));
    } catch (const json::parse_error& e) {
        throw InputError(cfg.plan_path + ": " + e.what());
    }
    CampaignMode mode;
    if (cfg.mode == "relative")
        mode = CampaignMode::RelativePercent;
    else if (cfg.mode == "fixed")
        mode = CampaignMode::FixedMagnitude;
    else
        throw InputError("unknown campaign mode '" + cfg.mode + "' (expected relative or fixed)");
    const CampaignResult campaign = attack_campaign(parts.test, plan, mode, cfg.percent);
    if (!campaign.skipped_hours.empty())
        err << "skipped " << campaign.skipped_hours.size() << " hours whose target measurement is zero\n";
    if (campaign.attacked.size() == 0) throw InputError("attack campaign produced no attacked observations");

    const Eigen::VectorXd val = validation_errors(model, parts);
    const Eigen::VectorXd normal = reconstruction_errors(model, parts.test.measurements);
    const Eigen::VectorXd attacked = reconstruction_errors(model, campaign.attacked.measurements);
    const auto view = [](const Eigen::VectorXd& v) { return std::span<const double>(v.data(), static_cast<std::size_t>(v.size())); };
    const auto reports = threshold_sweep(view(val), view(normal), view(attacked), cfg.alphas);
    const RocCurve roc = roc_curve(view(normal), view(attacked));

    const fs::path dir = out_dir(cfg);
    fs::create_directories(dir);
    {
        std::ofstream f(dir / "table.csv", std::ios::binary);
        write_report_csv(f, reports);
        std::ofstream r(dir / "roc.csv", std::ios::binary);
        write_roc_csv(r, roc);
        std::ofstream s(dir / "summary.csv", std::ios::binary);
        s << "key,value\n"
          << "auc," << format_double(roc.auc) << '\n'
          << "normal_observations," << normal.size() << '\n'
          << "attacked_observations," << attacked.size() << '\n'
          << "skipped_hours," << campaign.skipped_hours.size() << '\n'
          << "attack_cardinality," << plan.cardinality() << '\n';
        if (!f || !r || !s) throw InputError("cannot write evaluation results to " + dir.string());
    }
    std::ostringstream table;
    write_report_csv(table, reports);
    out << table.str() << "AUC " << format_double(roc.auc) << "\n";
    return kSuccess;
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream&) {
    std::vector<fs::path> files;
    const fs::path dir = out_dir(cfg);
    if (!cfg.inputs.empty()) {
        for (const auto& p : cfg.inputs) {
            require_file(p, "report input");
            files.emplace_back(p);
        }
    } else {
        for (const char* name : {"history.csv", "grid_search.csv", "table.csv", "summary.csv", "roc.csv"})
            if (fs::is_regular_file(dir / name)) files.push_back(dir / name);
        if (files.empty()) throw InputError("no result CSVs found in " + dir.string());
    }
    std::string text;
    for (const auto& f : files) {
        text += "# " + f.filename().string() + "\n";
        std::string body = read_file(f);
        if (!body.empty() && body.back() != '\n') body += '\n';
        text += body + "\n";
    }
    fs::create_directories(dir);
    write_file(dir / "report.txt", text);
    out << "wrote " << (dir / "report.txt").string() << " from " << files.size() << " files\n";
    return kSuccess;
}

std::map<std::string, std::string> read_config(const std::string& path) {
    require_file(path, "config file");
    std::map<std::string, std::string> kv;
    std::istringstream in(read_file(path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos)
            throw InputError(path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key{trim(body.substr(0, eq))};
        const std::string value{trim(body.substr(eq + 1))};
        if (key.empty()) throw InputError(path + ":" + std::to_string(line_no) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
    for (const auto& a : args)
        if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"False data injection attack synthesis and autoencoder detection"};
    app.name("fdia");
    app.require_subcommand(1);

    auto grid_opts = [&](CLI::App* sub) {
        sub->add_option("--case", cfg.case_path, "grid case file");
        sub->add_option("--meas", cfg.meas_path, "measurement config file (default: every flow plus injections)");
        sub->add_option("--placement", cfg.placement, "injection meters without --meas: buses or loads-gens");
    };
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", cfg.config_path, "key = value file; command line flags win");
        sub->add_option("--out", cfg.out_dir, "output directory (env FDIA_OUT_DIR)");
    };

    auto* gen = app.add_subcommand("gen-data", "generate a measurement scenario set");
    common(gen);
    grid_opts(gen);
    gen->add_option("--loads", cfg.loads_path, "hourly load CSV (default: synthetic loads)");
    gen->add_option("--hours", cfg.hours, "synthetic hours");
    gen->add_option("--synth-seed", cfg.synth_seed, "synthetic load seed");
    gen->add_option("--dispatch-seed", cfg.dispatch_seed, "generator participation seed");
    gen->add_option("--noise-seed", cfg.noise_seed, "measurement noise base seed");

    auto* tr = app.add_subcommand("train", "train the autoencoder on the training split");
    common(tr);
    tr->add_option("--data", cfg.data_dir, "scenario directory");
    tr->add_option("--lr", cfg.learning_rate, "learning rate");
    tr->add_option("--batch", cfg.batch_size, "batch size");
    tr->add_option("--epochs", cfg.epochs, "epochs");
    tr->add_option("--seed", cfg.train_seed, "initialisation and shuffle seed");
    tr->add_option("--hidden", cfg.hidden, "encoder hidden widths")->delimiter(',');
    tr->add_option("--bottleneck", cfg.bottleneck, "bottleneck width");
    tr->add_flag("--grid-search", cfg.grid_search, "train every learning rate x batch size pair instead");
    tr->add_option("--lr-grid", cfg.lr_grid, "grid search learning rates")->delimiter(',');
    tr->add_option("--batch-grid", cfg.batch_grid, "grid search batch sizes")->delimiter(',');
    tr->add_option("--log-every", cfg.log_every, "print errors every N epochs");

    auto* at = app.add_subcommand("attack", "solve the minimum-resource attack problem");
    common(at);
    grid_opts(at);
    at->add_option("--target", cfg.target, "flow:A-B, inj:B or a zero based row");
    at->add_option("--magnitude", cfg.magnitude, "change of the target measurement, p.u.");
    at->add_option("--protect", cfg.protect, "protected measurements")->delimiter(',');
    at->add_option("--spec", cfg.spec_path, "attack spec JSON (overrides target, magnitude, protect)");
    at->add_option("--c-max", cfg.c_max, "bound on |c|, p.u.");
    at->add_option("--big-m", cfg.big_m, "big-M (default c-max times the largest row 1-norm)");
    at->add_option("--node-limit", cfg.node_limit, "branch-and-bound node limit");
    at->add_option("--time-limit", cfg.time_limit, "time limit, seconds");
    at->add_option("--plan", cfg.plan_path, "output plan JSON (default OUT/plan.json)");
    at->add_flag("--oracle", cfg.oracle, "cross-check the cardinality by exhaustive search");

    auto* det = app.add_subcommand("detect", "classify observations with a trained model");
    common(det);
    det->add_option("--model", cfg.model_path, "model JSON");
    det->add_option("--data", cfg.data_dir, "scenario directory (validation split sets the threshold)");
    det->add_option("--input", cfg.input_dir, "scenario directory to classify (default: test split)");
    det->add_option("--alpha", cfg.alpha, "threshold percentile");

    auto* ev = app.add_subcommand("eval", "threshold sweep and ROC on an attacked test split");
    common(ev);
    ev->add_option("--model", cfg.model_path, "model JSON");
    ev->add_option("--data", cfg.data_dir, "scenario directory");
    ev->add_option("--plan", cfg.plan_path, "attack plan JSON");
    ev->add_option("--mode", cfg.mode, "relative or fixed");
    ev->add_option("--percent", cfg.percent, "relative decrease of the target, percent");
    ev->add_option("--alphas", cfg.alphas, "threshold percentiles")->delimiter(',');

    auto* rep = app.add_subcommand("report", "concatenate result CSVs into one summary");
    common(rep);
    rep->add_option("--inputs", cfg.inputs, "CSV files (default: known results in OUT)")->delimiter(',');

    try {
        std::vector<std::string> full;
        if (!args.empty()) {
            full.push_back(args.front());
            const std::vector<std::string> rest(args.begin() + 1, args.end());
            // Config values become flags placed ahead of the user's own, and
            // only for options the user did not give.
            std::string config_path;
            for (std::size_t k = 0; k < rest.size(); ++k) {
                if (rest[k] == "--config" && k + 1 < rest.size()) config_path = rest[k + 1];
                if (rest[k].rfind("--config=", 0) == 0) config_path = rest[k].substr(9);
            }
            CLI::App* sub = nullptr;
            for (auto* s : app.get_subcommands({})) if (s->get_name() == args.front()) sub = s;
            if (!config_path.empty() && sub) {
                for (const auto& [key, value] : read_config(config_path)) {
                    const std::string flag = "--" + key;
                    if (key == "config" || given(rest, flag)) continue;
                    const CLI::Option* opt = sub->get_option_no_throw(flag);
                    if (!opt) continue;
                    if (opt->get_expected_min() == 0) {
                        if (value == "true" || value == "1" || value == "yes") full.push_back(flag);
                    } else {
                        full.push_back(flag);
                        full.push_back(value);
                    }
                }
            }
            if (!given(rest, "--out")) {
                if (const char* env = std::getenv("FDIA_OUT_DIR"); env && *env) {
                    full.push_back("--out");
                    full.push_back(env);
                }
            }
            full.insert(full.end(), rest.begin(), rest.end());
        }
        std::vector<std::string> reversed(full.rbegin(), full.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kSuccess;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "gen-data") return cmd_gen_data(cfg, out, err);
        if (name == "train") return cmd_train(cfg, out, err);
        if (name == "attack") return cmd_attack(cfg, out, err);
        if (name == "detect") return cmd_detect(cfg, out, err);
        if (name == "eval") return cmd_eval(cfg, out, err);
        if (name == "report") return cmd_report(cfg, out, err);
        err << "error: unknown command " << name << "\n";
        return kInputError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kInfeasible;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kInternalError;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace fdia::cli
