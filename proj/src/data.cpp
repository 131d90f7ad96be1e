#include "fdia/data.hpp"

#include "fdia/errors.hpp"
#include "fdia/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace fdia {

LoadSeries ingest_load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open load file " + path.string());
    LoadSeries series;
    series.source = LoadSource::Ingested;
    std::string line;
    if (!std::getline(in, line)) throw InputError(path.string() + ": empty load file");
    series.names = split_fields(line, ',');
    const std::size_t cols = series.names.size();
    for (const auto& name : series.names)
        if (name.empty()) throw InputError(path.string() + ":1: empty load point name");

    std::vector<double> values;
    std::int64_t row = -1;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split_fields(line, ',');
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != cols)
            throw InputError(where + ": expected " + std::to_string(cols) + " fields, got " +
                             std::to_string(fields.size()));
        std::vector<double> parsed;
        bool keep = true;
        for (const auto& f : fields) {
            if (f.empty()) {
                keep = false;
                continue;
            }
            const double v = parse_double(f, where);
            if (!(v >= 0.0) || !std::isfinite(v)) keep = false;
            parsed.push_back(v);
        }
        if (!keep) {
            ++series.dropped_rows;
            continue;
        }
        values.insert(values.end(), parsed.begin(), parsed.end());
        series.hours.push_back(row);
    }
    if (series.hours.empty()) throw InputError(path.string() + ": no usable rows after cleaning");
    const auto n = static_cast<Eigen::Index>(series.hours.size());
    series.mw.resize(n, static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            series.mw(i, static_cast<Eigen::Index>(j)) = values[static_cast<std::size_t>(i) * cols + j];
    return series;
}

void write_load_csv(const std::filesystem::path& path, const LoadSeries& loads) {
    write_csv(path, loads.mw, loads.names);
}

LoadSeries synthesize_loads(int n_hours, int n_load_points, std::uint64_t seed) {
    if (n_hours <= 0 || n_load_points <= 0) throw InputError("load synthesis needs positive sizes");
    LoadSeries s;
    s.source = LoadSource::Synthetic;
    s.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> log_base(std::log(10.0), std::log(200.0));
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> base(static_cast<std::size_t>(n_load_points));
    for (int k = 0; k < n_load_points; ++k) {
        base[static_cast<std::size_t>(k)] = std::exp(log_base(rng));
        s.names.push_back("load" + std::to_string(k + 1));
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    s.mw.resize(n_hours, n_load_points);
    for (int h = 0; h < n_hours; ++h) {
        // Daily trough at midnight, yearly peak in the first week.
        const double diurnal = -std::cos(two_pi * (h % 24) / 24.0);
        const double seasonal = std::cos(two_pi * (h % 8760) / 8760.0);
        for (int k = 0; k < n_load_points; ++k) {
            const double v = base[static_cast<std::size_t>(k)] *
                             (1.0 + 0.15 * diurnal + 0.10 * seasonal + 0.05 * noise(rng));
            s.mw(h, k) = std::max(0.0, v);
        }
        s.hours.push_back(h);
    }
    return s;
}

Eigen::VectorXd participation_factors(const GridTopology& topology, std::uint64_t dispatch_seed) {
    if (topology.gen_buses.empty()) throw InputError("grid has no generator buses to dispatch");
    std::mt19937_64 rng(dispatch_seed);
    std::uniform_real_distribution<double> weight(0.5, 1.5);
    Eigen::VectorXd factors = Eigen::VectorXd::Zero(topology.bus_count);
    for (int b : topology.gen_buses) factors(b) += weight(rng);
    return factors / factors.sum();
}

ScenarioSet generate_scenarios(const LoadSeries& loads, const GridModel& grid, std::uint64_t dispatch_seed,
                               std::uint64_t noise_seed) {
    const auto& topo = grid.topology;
    if (loads.mw.cols() != static_cast<Eigen::Index>(topo.load_buses.size()))
        throw InputError("load series has " + std::to_string(loads.mw.cols()) + " load points, grid has " +
                         std::to_string(topo.load_buses.size()) + " load buses");
    const Eigen::VectorXd factors = participation_factors(topo, dispatch_seed);
    const Eigen::Index n = loads.mw.rows();
    ScenarioSet set;
    set.measurements.resize(n, grid.n_z());
    set.states.resize(n, grid.n_x());
    set.hours = loads.hours;
    if (static_cast<Eigen::Index>(set.hours.size()) != n) {
        set.hours.resize(static_cast<std::size_t>(n));
        for (Eigen::Index h = 0; h < n; ++h) set.hours[static_cast<std::size_t>(h)] = h;
    }
    Eigen::VectorXd injection(topo.bus_count);
    Eigen::VectorXd state(grid.n_x());
    for (Eigen::Index h = 0; h < n; ++h) {
        injection.setZero();
        for (std::size_t k = 0; k < topo.load_buses.size(); ++k)
            injection(topo.load_buses[k]) -= loads.mw(h, static_cast<Eigen::Index>(k)) / kBaseMva;
        injection += factors * (-injection.sum());
        for (int b = 0; b < topo.bus_count; ++b) {
            const int s = topo.state_index(b);
            if (s >= 0) state(s) = injection(b);
        }
        const auto hour = set.hours[static_cast<std::size_t>(h)];
        set.states.row(h) = state.transpose();
        set.measurements.row(h) =
            measure(grid, state, noise_seed + static_cast<std::uint64_t>(hour)).values.transpose();
    }
    return set;
}

SplitSizes split_sizes(Eigen::Index n, const std::vector<int>& ratios) {
    if (ratios.size() != 3) throw InputError("split needs three ratios");
    for (int r : ratios)
        if (r <= 0) throw InputError("split ratios must be positive");
    const long total = static_cast<long>(ratios[0]) + ratios[1] + ratios[2];
    if (n < total) throw InputError("too few rows to split: " + std::to_string(n));
    SplitSizes s;
    s.validation = n * ratios[1] / total;
    s.test = (n * ratios[2] + total - 1) / total;
    if (n >= 24 * total) s.test = (s.test + 23) / 24 * 24;
    s.train = n - s.validation - s.test;
    if (s.train < 1 || s.validation < 1 || s.test < 1) throw InputError("too few rows to split: " + std::to_string(n));
    return s;
}

ScenarioSet slice(const ScenarioSet& set, Eigen::Index start, Eigen::Index count) {
    if (start < 0 || count < 0 || start + count > set.size()) throw InputError("slice out of range");
    ScenarioSet out;
    out.measurements = set.measurements.middleRows(start, count);
    out.states = set.states.middleRows(start, count);
    out.hours.assign(set.hours.begin() + start, set.hours.begin() + start + count);
    return out;
}

SplitSet split(const ScenarioSet& scenarios, const std::vector<int>& ratios) {
    const auto sizes = split_sizes(scenarios.size(), ratios);
    return {slice(scenarios, 0, sizes.train), slice(scenarios, sizes.train, sizes.validation),
            slice(scenarios, sizes.train + sizes.validation, sizes.test)};
}

CampaignResult attack_campaign(const ScenarioSet& test_set, const AttackPlan& plan, CampaignMode mode,
                               double percent) {
    if (plan.a.size() != test_set.measurements.cols() || plan.c.size() != test_set.states.cols())
        throw InputError("attack plan does not match the scenario dimensions");
    CampaignResult result;
    if (mode == CampaignMode::FixedMagnitude) {
        result.attacked = test_set;
        result.attacked.measurements.rowwise() += plan.a.transpose();
        result.attacked.states.rowwise() += plan.c.transpose();
        return result;
    }
    if (percent == 0.0) {
        result.attacked = test_set;
        return result;
    }
    if (plan.target < 0 || plan.target >= plan.a.size() || plan.magnitude == 0.0)
        throw InputError("relative campaign needs a plan with a target and nonzero magnitude");
    std::vector<Eigen::Index> rows;
    std::vector<double> factors;
    for (Eigen::Index h = 0; h < test_set.size(); ++h) {
        const double measured = test_set.measurements(h, plan.target);
        if (std::abs(measured) <= 1e-9) {
            result.skipped_hours.push_back(test_set.hours[static_cast<std::size_t>(h)]);
            continue;
        }
        rows.push_back(h);
        factors.push_back(-percent / 100.0 * measured / plan.magnitude);
    }
    auto& out = result.attacked;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.measurements.resize(n, test_set.measurements.cols());
    out.states.resize(n, test_set.states.cols());
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index h = rows[static_cast<std::size_t>(k)];
        const AttackPlan scaled = scale_plan(plan, factors[static_cast<std::size_t>(k)]);
        out.measurements.row(k) = test_set.measurements.row(h) + scaled.a.transpose();
        out.states.row(k) = test_set.states.row(h) + scaled.c.transpose();
        out.hours.push_back(test_set.hours[static_cast<std::size_t>(h)]);
    }
    return result;
}

namespace {

void write_with_hours(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::int64_t>& hours, std::vector<std::string> header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << "hour";
    for (const auto& h : header) out << ',' << h;
    out << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        out << hours[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
        out << '\n';
    }
}

}  // namespace

void write_scenarios(const std::filesystem::path& dir, const ScenarioSet& set, const GridModel& grid) {
    std::filesystem::create_directories(dir);
    write_with_hours(dir / "measurements.csv", set.measurements, set.hours, grid.labels());
    std::vector<std::string> state_names;
    for (int b = 0; b < grid.topology.bus_count; ++b)
        if (b != grid.topology.slack_bus) state_names.push_back("p" + std::to_string(b + 1));
    write_with_hours(dir / "states.csv", set.states, set.hours, state_names);
}

ScenarioSet read_scenarios(const std::filesystem::path& dir) {
    const auto z = read_csv(dir / "measurements.csv");
    const auto x = read_csv(dir / "states.csv");
    if (z.values.rows() != x.values.rows()) throw InputError(dir.string() + ": measurement and state row counts differ");
    if (z.values.cols() < 2 || x.values.cols() < 2) throw InputError(dir.string() + ": scenario files need an hour column");
    ScenarioSet set;
    set.measurements = z.values.rightCols(z.values.cols() - 1);
    set.states = x.values.rightCols(x.values.cols() - 1);
    for (Eigen::Index i = 0; i < z.values.rows(); ++i) {
        if (z.values(i, 0) != x.values(i, 0)) throw InputError(dir.string() + ": hour columns disagree");
        set.hours.push_back(static_cast<std::int64_t>(z.values(i, 0)));
    }
    return set;
}

}  // namespace fdia
