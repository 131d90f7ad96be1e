#pragma once

// Linear DC measurement model z = Hx + e.
//
// The state x holds the net active power injections at every non-slack bus
// (n_x = N - 1); the slack bus absorbs the balance. Flow measurements are
// expressed in x through the reduced susceptance matrix, injection
// measurements are unit rows (or the all -1 row at the slack bus).

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fdia {

inline constexpr double kBaseMva = 100.0;
inline constexpr double kDefaultSigma = 0.01;

/// Bus indices are zero based in memory and one based in files and labels.
struct Branch {
    int from = 0;
    int to = 0;
    double reactance = 0.0;  // p.u.
};

struct GridTopology {
    int bus_count = 0;
    int slack_bus = 0;
    std::vector<Branch> branches;
    std::vector<int> load_buses;
    std::vector<int> gen_buses;

    int state_dim() const { return bus_count - 1; }
    /// Position of a non-slack bus in the state vector, -1 for the slack.
    int state_index(int bus) const;

    /// Throws InputError on any violated invariant, including disconnection.
    void validate() const;
};

enum class MeasurementKind { Flow, Injection };

struct Measurement {
    MeasurementKind kind = MeasurementKind::Flow;
    int index = 0;  // branch index for flows, bus index for injections
    double sigma = kDefaultSigma;
};

struct MeasurementConfig {
    std::vector<Measurement> measurements;

    std::size_t size() const { return measurements.size(); }
};

enum class InjectionPlacement {
    AllBuses,           // one meter per bus
    LoadsAndGenerators  // one meter per load and one per generator entry
};

/// Every branch flow followed by the injection meters of the chosen placement.
MeasurementConfig full_measurement_config(const GridTopology& topology,
                                          InjectionPlacement placement,
                                          double sigma = kDefaultSigma);

struct GridModel {
    GridTopology topology;
    MeasurementConfig config;
    Eigen::MatrixXd H;          // n_z x n_x
    Eigen::VectorXd variances;  // diagonal of R

    Eigen::Index n_z() const { return H.rows(); }
    Eigen::Index n_x() const { return H.cols(); }
    Eigen::VectorXd sigmas() const { return variances.cwiseSqrt(); }

    /// "flow 109-110" or "inj 103", one based.
    std::string label(Eigen::Index row) const;
    std::vector<std::string> labels() const;

    /// First measurement row for the flow on branch from->to (one based bus
    /// numbers, either direction), or -1.
    Eigen::Index find_flow(int from_bus, int to_bus) const;
    /// First injection row for a one based bus number, or -1.
    Eigen::Index find_injection(int bus) const;
    /// Resolves "flow:A-B", "inj:B" or a zero based row number.
    Eigen::Index resolve(const std::string& reference) const;
};

struct MeasurementVector {
    Eigen::VectorXd values;
    std::optional<std::int64_t> hour;
};

GridTopology parse_case(std::istream& in, const std::string& source_name);
GridTopology load_case(const std::filesystem::path& path);

MeasurementConfig parse_measurement_config(std::istream& in, const GridTopology& topology,
                                           const std::string& source_name);
MeasurementConfig load_measurement_config(const std::filesystem::path& path,
                                          const GridTopology& topology);

/// Builds H and R. Throws NumericalError when the configuration is unobservable.
GridModel build_h_matrix(const GridTopology& topology, const MeasurementConfig& config);

/// z = Hx + e with e ~ N(0, R) drawn from a generator seeded with `seed`;
/// without a seed the noise is zero.
MeasurementVector measure(const GridModel& model, const Eigen::VectorXd& state,
                          std::optional<std::uint64_t> seed);

/// Injection at every bus (slack included) implied by a state vector.
Eigen::VectorXd bus_injections(const GridTopology& topology, const Eigen::VectorXd& state);

}  // namespace fdia
