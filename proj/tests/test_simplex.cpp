#include <doctest.h>

#include "fdia/simplex.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

using namespace fdia::simplex;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Enumerates every basic solution: m independent columns, the remaining
// columns at a finite bound. Returns the best feasible objective.
std::optional<double> vertex_oracle(const LinearProgram& lp) {
    const Eigen::Index m = lp.A.rows(), n = lp.A.cols();
    std::optional<double> best;
    std::vector<int> pick(static_cast<std::size_t>(n), 0);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != m) continue;
        std::vector<Eigen::Index> basic, non;
        for (Eigen::Index j = 0; j < n; ++j) ((mask >> j) & 1u ? basic : non).push_back(j);
        Eigen::MatrixXd B(m, m);
        for (Eigen::Index k = 0; k < m; ++k) B.col(k) = lp.A.col(basic[static_cast<std::size_t>(k)]);
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        if (lu.rank() < m) continue;
        for (std::uint32_t side = 0; side < (1u << non.size()); ++side) {
            Eigen::VectorXd x(n);
            bool finite = true;
            for (std::size_t k = 0; k < non.size(); ++k) {
                const Eigen::Index j = non[k];
                x(j) = (side >> k) & 1u ? lp.upper(j) : lp.lower(j);
                finite = finite && std::isfinite(x(j));
            }
            if (!finite) continue;
            Eigen::VectorXd rhs = lp.b;
            for (Eigen::Index j : non) rhs -= lp.A.col(j) * x(j);
            const Eigen::VectorXd xb = lu.solve(rhs);
            bool ok = true;
            for (Eigen::Index k = 0; k < m; ++k) {
                const Eigen::Index j = basic[static_cast<std::size_t>(k)];
                x(j) = xb(k);
                ok = ok && x(j) >= lp.lower(j) - 1e-9 && x(j) <= lp.upper(j) + 1e-9;
            }
            if (!ok) continue;
            const double obj = lp.cost.dot(x);
            if (!best || obj < *best) best = obj;
        }
    }
    return best;
}

LinearProgram random_lp(std::mt19937_64& rng, bool infinite_upper) {
    std::uniform_int_distribution<int> dm(1, 3), dn(0, 3);
    std::uniform_real_distribution<double> u(-2.0, 2.0), w(0.0, 2.0);
    const int m = dm(rng);
    const int n = m + 1 + dn(rng);
    LinearProgram lp;
    lp.A.resize(m, n);
    for (auto& v : lp.A.reshaped()) v = std::round(u(rng) * 4.0) / 4.0;
    lp.cost.resize(n);
    lp.lower.resize(n);
    lp.upper.resize(n);
    for (int j = 0; j < n; ++j) {
        lp.lower(j) = std::round(u(rng));
        lp.upper(j) = infinite_upper && rng() % 2 ? kInf : lp.lower(j) + 0.5 + w(rng);
        // nonnegative costs keep the infinite-bound problems bounded below
        lp.cost(j) = infinite_upper ? w(rng) : u(rng);
    }
    // right-hand side from a point inside the box about half of the time
    Eigen::VectorXd x0(n);
    for (int j = 0; j < n; ++j) x0(j) = lp.lower(j) + (std::isfinite(lp.upper(j)) ? 0.5 * (lp.upper(j) - lp.lower(j)) : w(rng));
    lp.b = lp.A * x0;
    if (rng() % 2) lp.b(0) += u(rng) * 3.0;
    return lp;
}

}  // namespace

TEST_CASE("small LP") {
    // max x + y  s.t. x + 2y + s = 4, 0 <= x <= 3, y, s >= 0
    LinearProgram lp;
    lp.A = Eigen::RowVector3d(1, 2, 1);
    lp.b = Eigen::VectorXd::Constant(1, 4.0);
    lp.cost = Eigen::Vector3d(-1, -1, 0);
    lp.lower = Eigen::Vector3d::Zero();
    lp.upper = Eigen::Vector3d(3, kInf, kInf);
    const Result r = solve(lp);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.objective == doctest::Approx(-3.5));
    CHECK(r.x(0) == doctest::Approx(3.0));
    CHECK(r.x(1) == doctest::Approx(0.5));
}

TEST_CASE("random LPs match vertex enumeration") {
    std::mt19937_64 rng(2024);
    for (bool infinite : {false, true}) {
        int feasible = 0;
        for (int k = 0; k < 400; ++k) {
            const LinearProgram lp = random_lp(rng, infinite);
            const auto want = vertex_oracle(lp);
            const Result got = solve(lp);
            if (!want) {
                CHECK(got.status == Status::Infeasible);
                continue;
            }
            ++feasible;
            REQUIRE(got.status == Status::Optimal);
            CHECK(got.objective == doctest::Approx(*want).epsilon(1e-8).scale(1.0));
            CHECK((lp.A * got.x - lp.b).cwiseAbs().maxCoeff() <= 1e-8);
            CHECK((got.x - lp.lower).minCoeff() >= -1e-9);
            CHECK((lp.upper - got.x).minCoeff() >= -1e-9);
        }
        CHECK(feasible > 100);
    }
}

TEST_CASE("infeasible and unbounded") {
    LinearProgram lp;
    lp.A = Eigen::RowVector2d(1, 1);
    lp.b = Eigen::VectorXd::Constant(1, 5.0);
    lp.cost = Eigen::Vector2d(1, 1);
    lp.lower = Eigen::Vector2d::Zero();
    lp.upper = Eigen::Vector2d(1, 1);
    CHECK(solve(lp).status == Status::Infeasible);

    lp.upper = Eigen::Vector2d(kInf, kInf);
    lp.cost = Eigen::Vector2d(-1, 0);
    lp.A = Eigen::RowVector2d(1, -1);
    lp.b(0) = 0.0;
    CHECK(solve(lp).status == Status::Unbounded);
}

TEST_CASE("degenerate cycling example terminates") {
    LinearProgram lp;
    lp.A.resize(3, 7);
    lp.A << 1, 0, 0, 0.25, -60, -1.0 / 25, 9,
            0, 1, 0, 0.5, -90, -1.0 / 50, 3,
            0, 0, 1, 0, 0, 1, 0;
    lp.b = Eigen::Vector3d(0, 0, 1);
    lp.cost.resize(7);
    lp.cost << 0, 0, 0, -0.75, 150, -1.0 / 50, 6;
    lp.lower = Eigen::VectorXd::Zero(7);
    lp.upper = Eigen::VectorXd::Constant(7, kInf);
    for (bool bland : {false, true}) {
        Options o;
        o.bland_only = bland;
        const Result r = solve(lp, o);
        REQUIRE(r.status == Status::Optimal);
        CHECK(r.objective == doctest::Approx(-0.05));
    }
}

TEST_CASE("warm restart matches a cold solve") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int compared = 0;
    for (int k = 0; k < 200; ++k) {
        LinearProgram lp = random_lp(rng, false);
        Solver s(lp);
        if (s.solve() != Status::Optimal) continue;
        const Basis first = s.basis();
        for (int step = 0; step < 4; ++step) {
            const Eigen::Index j = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(lp.A.cols()));
            if (u(rng) < 0.5)
                lp.upper(j) = lp.lower(j);
            else
                lp.cost(j) += 1.0;
            s.set_bounds(lp.lower, lp.upper);
            s.set_cost(lp.cost);
            if (step == 2) s.set_basis(first);
            const Status warm = s.solve();
            const Result cold = solve(lp);
            CHECK(warm == cold.status);
            if (warm == Status::Optimal && cold.status == Status::Optimal) {
                CHECK(s.objective() == doctest::Approx(cold.objective).epsilon(1e-8).scale(1.0));
                ++compared;
            }
        }
    }
    CHECK(compared > 100);
}
