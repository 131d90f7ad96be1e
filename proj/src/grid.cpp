#include "fdia/grid.hpp"

#include "fdia/errors.hpp"
#include "fdia/io.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace fdia {
namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    return out;
}

std::string strip_comment(const std::string& line) {
    const auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

int GridTopology::state_index(int bus) const {
    if (bus == slack_bus) return -1;
    return bus < slack_bus ? bus : bus - 1;
}

void GridTopology::validate() const {
    if (bus_count < 2) throw InputError("grid needs at least two buses");
    if (slack_bus < 0 || slack_bus >= bus_count)
        throw InputError("slack bus " + std::to_string(slack_bus + 1) + " out of range");
    auto check_bus = [&](int b, const char* what) {
        if (b < 0 || b >= bus_count)
            throw InputError(std::string(what) + " bus " + std::to_string(b + 1) + " out of range");
    };
    for (std::size_t k = 0; k < branches.size(); ++k) {
        const auto& br = branches[k];
        check_bus(br.from, "branch");
        check_bus(br.to, "branch");
        if (br.from == br.to)
            throw InputError("branch " + std::to_string(k + 1) + " connects bus " +
                             std::to_string(br.from + 1) + " to itself");
        if (!(br.reactance > 0.0))
            throw InputError("branch " + std::to_string(k + 1) + ": nonpositive reactance");
    }
    for (int b : load_buses) check_bus(b, "load");
    for (int b : gen_buses) check_bus(b, "gen");

    std::vector<int> parent(static_cast<std::size_t>(bus_count));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& br : branches) parent[find(br.from)] = find(br.to);
    std::string isolated;
    const int root = find(slack_bus);
    for (int b = 0; b < bus_count; ++b) {
        if (find(b) != root) isolated += (isolated.empty() ? "" : " ") + std::to_string(b + 1);
    }
    if (!isolated.empty())
        throw InputError("grid is not connected; buses unreachable from the slack: " + isolated);
}

GridTopology parse_case(std::istream& in, const std::string& source_name) {
    GridTopology topo;
    bool have_header = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tok = tokens_of(strip_comment(line));
        if (tok.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        auto bus_arg = [&](const std::string& t) {
            const auto b = parse_int(t, where);
            if (b < 1 || b > topo.bus_count)
                throw InputError(where + ": bus " + t + " out of range 1.." +
                                 std::to_string(topo.bus_count));
            return static_cast<int>(b - 1);
        };
        if (tok[0] == "buses") {
            if (have_header) throw InputError(where + ": duplicate header");
            if (tok.size() != 4 || tok[2] != "slack")
                throw InputError(where + ": expected 'buses N slack S'");
            topo.bus_count = static_cast<int>(parse_int(tok[1], where));
            if (topo.bus_count < 2) throw InputError(where + ": need at least two buses");
            topo.slack_bus = bus_arg(tok[3]);
            have_header = true;
            continue;
        }
        if (!have_header) throw InputError(where + ": missing 'buses N slack S' header");
        if (tok[0] == "branch") {
            if (tok.size() != 4) throw InputError(where + ": expected 'branch FROM TO REACTANCE'");
            Branch br{bus_arg(tok[1]), bus_arg(tok[2]), parse_double(tok[3], where)};
            if (br.from == br.to) throw InputError(where + ": branch endpoints coincide");
            if (!(br.reactance > 0.0)) throw InputError(where + ": nonpositive reactance");
            topo.branches.push_back(br);
        } else if (tok[0] == "load" || tok[0] == "gen") {
            if (tok.size() != 2) throw InputError(where + ": expected '" + tok[0] + " BUS'");
            (tok[0] == "load" ? topo.load_buses : topo.gen_buses).push_back(bus_arg(tok[1]));
        } else {
            throw InputError(where + ": unknown record '" + tok[0] + "'");
        }
    }
    if (!have_header) throw InputError(source_name + ": missing 'buses N slack S' header");
    topo.validate();
    return topo;
}

GridTopology load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open case file " + path.string());
    return parse_case(in, path.string());
}

MeasurementConfig parse_measurement_config(std::istream& in, const GridTopology& topology,
                                           const std::string& source_name) {
    MeasurementConfig config;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto tok = tokens_of(strip_comment(line));
        if (tok.empty()) continue;
        const std::string where = source_name + ":" + std::to_string(line_no);
        if (tok.size() != 3 || (tok[0] != "flow" && tok[0] != "inj"))
            throw InputError(where + ": expected 'flow BRANCH SIGMA' or 'inj BUS SIGMA'");
        Measurement m;
        m.kind = tok[0] == "flow" ? MeasurementKind::Flow : MeasurementKind::Injection;
        const auto idx = parse_int(tok[1], where);
        const auto limit = m.kind == MeasurementKind::Flow
                               ? static_cast<long long>(topology.branches.size())
                               : static_cast<long long>(topology.bus_count);
        if (idx < 1 || idx > limit)
            throw InputError(where + ": index " + tok[1] + " out of range 1.." + std::to_string(limit));
        m.index = static_cast<int>(idx - 1);
        m.sigma = parse_double(tok[2], where);
        if (!(m.sigma > 0.0)) throw InputError(where + ": sigma must be positive");
        config.measurements.push_back(m);
    }
    return config;
}

MeasurementConfig load_measurement_config(const std::filesystem::path& path,
                                          const GridTopology& topology) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open measurement file " + path.string());
    return parse_measurement_config(in, topology, path.string());
}

MeasurementConfig full_measurement_config(const GridTopology& topology,
                                          InjectionPlacement placement, double sigma) {
    MeasurementConfig config;
    for (std::size_t k = 0; k < topology.branches.size(); ++k)
        config.measurements.push_back({MeasurementKind::Flow, static_cast<int>(k), sigma});
    if (placement == InjectionPlacement::AllBuses) {
        for (int b = 0; b < topology.bus_count; ++b)
            config.measurements.push_back({MeasurementKind::Injection, b, sigma});
    } else {
        for (int b : topology.load_buses)
            config.measurements.push_back({MeasurementKind::Injection, b, sigma});
        for (int b : topology.gen_buses)
            config.measurements.push_back({MeasurementKind::Injection, b, sigma});
    }
    return config;
}

GridModel build_h_matrix(const GridTopology& topology, const MeasurementConfig& config) {
    topology.validate();
    const int nx = topology.state_dim();
    const auto nz = static_cast<Eigen::Index>(config.size());
    if (nz < nx)
        throw InputError("unobservable: " + std::to_string(nz) + " measurements for " +
                         std::to_string(nx) + " states");

    Eigen::MatrixXd b_reduced = Eigen::MatrixXd::Zero(nx, nx);
    for (const auto& br : topology.branches) {
        const double y = 1.0 / br.reactance;
        const int f = topology.state_index(br.from);
        const int t = topology.state_index(br.to);
        if (f >= 0) b_reduced(f, f) += y;
        if (t >= 0) b_reduced(t, t) += y;
        if (f >= 0 && t >= 0) {
            b_reduced(f, t) -= y;
            b_reduced(t, f) -= y;
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(b_reduced);
    if (llt.info() != Eigen::Success) throw NumericalError("reduced susceptance matrix is singular");
    // Angle sensitivity: theta = X * x with slack angle zero.
    const Eigen::MatrixXd X = llt.solve(Eigen::MatrixXd::Identity(nx, nx));

    GridModel model;
    model.topology = topology;
    model.config = config;
    model.H = Eigen::MatrixXd::Zero(nz, nx);
    model.variances.resize(nz);
    for (Eigen::Index row = 0; row < nz; ++row) {
        const auto& m = config.measurements[static_cast<std::size_t>(row)];
        if (!(m.sigma > 0.0)) throw InputError("measurement " + std::to_string(row) + ": sigma must be positive");
        model.variances(row) = m.sigma * m.sigma;
        if (m.kind == MeasurementKind::Flow) {
            if (m.index < 0 || m.index >= static_cast<int>(topology.branches.size()))
                throw InputError("flow measurement references unknown branch " + std::to_string(m.index + 1));
            const auto& br = topology.branches[static_cast<std::size_t>(m.index)];
            const int f = topology.state_index(br.from);
            const int t = topology.state_index(br.to);
            if (f >= 0) model.H.row(row) += X.row(f);
            if (t >= 0) model.H.row(row) -= X.row(t);
            model.H.row(row) /= br.reactance;
        } else {
            if (m.index < 0 || m.index >= topology.bus_count)
                throw InputError("injection measurement references unknown bus " + std::to_string(m.index + 1));
            const int s = topology.state_index(m.index);
            if (s >= 0) model.H(row, s) = 1.0;
            else model.H.row(row).setConstant(-1.0);
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(model.H);
    if (qr.rank() < nx)
        throw NumericalError("unobservable measurement configuration: rank " + std::to_string(qr.rank()) +
                             " < " + std::to_string(nx));
    return model;
}

std::string GridModel::label(Eigen::Index row) const {
    const auto& m = config.measurements.at(static_cast<std::size_t>(row));
    if (m.kind == MeasurementKind::Flow) {
        const auto& br = topology.branches.at(static_cast<std::size_t>(m.index));
        return "flow " + std::to_string(br.from + 1) + "-" + std::to_string(br.to + 1);
    }
    return "inj " + std::to_string(m.index + 1);
}

std::vector<std::string> GridModel::labels() const {
    std::vector<std::string> out;
    for (Eigen::Index i = 0; i < n_z(); ++i) out.push_back(label(i));
    return out;
}

Eigen::Index GridModel::find_flow(int from_bus, int to_bus) const {
    for (std::size_t row = 0; row < config.size(); ++row) {
        const auto& m = config.measurements[row];
        if (m.kind != MeasurementKind::Flow) continue;
        const auto& br = topology.branches[static_cast<std::size_t>(m.index)];
        if ((br.from + 1 == from_bus && br.to + 1 == to_bus) ||
            (br.from + 1 == to_bus && br.to + 1 == from_bus))
            return static_cast<Eigen::Index>(row);
    }
    return -1;
}

Eigen::Index GridModel::find_injection(int bus) const {
    for (std::size_t row = 0; row < config.size(); ++row) {
        const auto& m = config.measurements[row];
        if (m.kind == MeasurementKind::Injection && m.index + 1 == bus) return static_cast<Eigen::Index>(row);
    }
    return -1;
}

Eigen::Index GridModel::resolve(const std::string& reference) const {
    const std::string ctx = "measurement reference '" + reference + "'";
    Eigen::Index row = -1;
    if (reference.rfind("flow:", 0) == 0) {
        const auto parts = split_fields(std::string_view(reference).substr(5), '-');
        if (parts.size() != 2) throw InputError(ctx + ": expected flow:FROM-TO");
        row = find_flow(static_cast<int>(parse_int(parts[0], ctx)), static_cast<int>(parse_int(parts[1], ctx)));
    } else if (reference.rfind("inj:", 0) == 0) {
        row = find_injection(static_cast<int>(parse_int(reference.substr(4), ctx)));
    } else {
        row = static_cast<Eigen::Index>(parse_int(reference, ctx));
        if (row >= n_z()) row = -1;
    }
    if (row < 0) throw InputError(ctx + " does not match any measurement");
    return row;
}

MeasurementVector measure(const GridModel& model, const Eigen::VectorXd& state,
                          std::optional<std::uint64_t> seed) {
    if (state.size() != model.n_x())
        throw InputError("state has dimension " + std::to_string(state.size()) + ", expected " +
                         std::to_string(model.n_x()));
    MeasurementVector z{model.H * state, std::nullopt};
    if (seed) {
        std::mt19937_64 rng(*seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Eigen::Index i = 0; i < z.values.size(); ++i)
            z.values(i) += std::sqrt(model.variances(i)) * normal(rng);
    }
    return z;
}

Eigen::VectorXd bus_injections(const GridTopology& topology, const Eigen::VectorXd& state) {
    if (state.size() != topology.state_dim()) throw InputError("state dimension mismatch");
    Eigen::VectorXd p(topology.bus_count);
    for (int b = 0; b < topology.bus_count; ++b) {
        const int s = topology.state_index(b);
        p(b) = s >= 0 ? state(s) : -state.sum();
    }
    return p;
}

}  // namespace fdia
