#pragma once

#include "fdia/errors.hpp"
#include "fdia/grid.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <set>
#include <sstream>
#include <string>

namespace fdia::test {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(FDIA_DATA_DIR) / name; }

inline GridModel model_from_text(const std::string& case_text, const std::string& meas_text) {
    std::istringstream c(case_text);
    const GridTopology topo = parse_case(c, "inline.case");
    std::istringstream m(meas_text);
    return build_h_matrix(topo, parse_measurement_config(m, topo, "inline.meas"));
}

inline GridModel three_bus() {
    return model_from_text("buses 3 slack 3\nbranch 1 2 1.0\nbranch 1 3 1.0\nbranch 2 3 1.0\nload 2\ngen 1\n",
                           "flow 1 0.01\nflow 2 0.01\nflow 3 0.01\ninj 1 0.01\ninj 2 0.01\n");
}

inline GridModel bundled_model(const std::string& case_name, const std::string& meas_name) {
    const GridTopology topo = load_case(data_path(case_name));
    return build_h_matrix(topo, load_measurement_config(data_path(meas_name), topo));
}

/// Connected grid with random reactances and a random observable subset of
/// meters, at most max_z of them.
inline GridModel random_model(std::mt19937_64& rng, int buses, int max_z) {
    std::uniform_real_distribution<double> react(0.05, 0.5);
    while (true) {
        std::ostringstream c;
        c << "buses " << buses << " slack " << 1 + static_cast<int>(rng() % buses) << "\n";
        std::set<std::pair<int, int>> edges;
        for (int b = 2; b <= buses; ++b) {
            const int other = 1 + static_cast<int>(rng() % (b - 1));
            edges.insert({other, b});
        }
        const int extra = static_cast<int>(rng() % 3);
        for (int k = 0; k < extra; ++k) {
            const int a = 1 + static_cast<int>(rng() % buses);
            const int b = 1 + static_cast<int>(rng() % buses);
            if (a != b) edges.insert({std::min(a, b), std::max(a, b)});
        }
        for (auto [a, b] : edges) c << "branch " << a << ' ' << b << ' ' << react(rng) << "\n";
        std::ostringstream m;
        int count = 0;
        for (std::size_t k = 1; k <= edges.size() && count < max_z; ++k)
            if (rng() % 3 != 0) {
                m << "flow " << k << " 0.01\n";
                ++count;
            }
        for (int b = 1; b <= buses && count < max_z; ++b)
            if (rng() % 2 == 0) {
                m << "inj " << b << " 0.01\n";
                ++count;
            }
        try {
            return model_from_text(c.str(), m.str());
        } catch (const NumericalError&) {
            // unobservable draw, try again
        } catch (const InputError&) {
        }
    }
}

}  // namespace fdia::test
