#pragma once

#include "fdia/attack.hpp"
#include "fdia/grid.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fdia {

enum class LoadSource { Ingested, Synthetic };

struct LoadSeries {
    Eigen::MatrixXd mw;  // hours x load points
    std::vector<std::string> names;
    std::vector<std::int64_t> hours;  // source row index of every kept row
    LoadSource source = LoadSource::Ingested;
    std::optional<std::uint64_t> seed;
    long dropped_rows = 0;
};

/// Header of load point names, one row per hour. Rows with an empty or
/// negative cell are dropped and counted, never imputed.
LoadSeries ingest_load_csv(const std::filesystem::path& path);
void write_load_csv(const std::filesystem::path& path, const LoadSeries& loads);

/// base_k * (1 + 0.15 diurnal(h) + 0.10 seasonal(h) + 0.05 noise), clamped at
/// zero, bases log-uniform in [10, 200] MW.
LoadSeries synthesize_loads(int n_hours, int n_load_points, std::uint64_t seed);

struct ScenarioSet {
    Eigen::MatrixXd measurements;  // hours x n_z, p.u.
    Eigen::MatrixXd states;        // hours x n_x, p.u.
    std::vector<std::int64_t> hours;

    Eigen::Index size() const { return measurements.rows(); }
};

/// Share of total demand carried by every bus with generation (sums to one).
/// One uniform(0.5, 1.5) weight per generator entry, normalised.
Eigen::VectorXd participation_factors(const GridTopology& topology, std::uint64_t dispatch_seed);

/// Loads (MW) onto load buses, generation dispatched by participation
/// factors, noise for hour h seeded with noise_seed + h.
ScenarioSet generate_scenarios(const LoadSeries& loads, const GridModel& grid, std::uint64_t dispatch_seed,
                               std::uint64_t noise_seed);

struct SplitSet {
    ScenarioSet train;
    ScenarioSet validation;
    ScenarioSet test;
};

struct SplitSizes {
    Eigen::Index train = 0;
    Eigen::Index validation = 0;
    Eigen::Index test = 0;
};

/// Contiguous blocks in time order. validation = floor(n * r_v / R) rows,
/// test = ceil(n * r_t / R) rounded up to whole days once the series spans
/// at least R days, train takes the rest.
SplitSizes split_sizes(Eigen::Index n, const std::vector<int>& ratios = {3, 1, 1});
SplitSet split(const ScenarioSet& scenarios, const std::vector<int>& ratios = {3, 1, 1});
ScenarioSet slice(const ScenarioSet& set, Eigen::Index start, Eigen::Index count);

enum class CampaignMode { FixedMagnitude, RelativePercent };

struct CampaignResult {
    ScenarioSet attacked;
    std::vector<std::int64_t> skipped_hours;
};

/// Relative mode rescales the plan every hour so the target changes by
/// -percent % of its measured value; fixed mode adds the plan's a unchanged.
CampaignResult attack_campaign(const ScenarioSet& test_set, const AttackPlan& plan, CampaignMode mode,
                               double percent = 10.0);

/// measurements.csv and states.csv with a leading hour column.
void write_scenarios(const std::filesystem::path& dir, const ScenarioSet& set, const GridModel& grid);
ScenarioSet read_scenarios(const std::filesystem::path& dir);

}  // namespace fdia
