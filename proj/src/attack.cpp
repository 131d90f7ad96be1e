#include "fdia/attack.hpp"

#include "fdia/errors.hpp"
#include "fdia/simplex.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>

namespace fdia {

void AttackSpec::validate(Eigen::Index n_z) const {
    if (target < 0 || target >= n_z)
        throw InputError("attack target " + std::to_string(target) + " out of range");
    if (magnitude == 0.0 || !std::isfinite(magnitude))
        throw InputError("attack magnitude must be finite and nonzero");
    for (auto p : protected_set) {
        if (p < 0 || p >= n_z) throw InputError("protected measurement " + std::to_string(p) + " out of range");
        if (p == target) throw InputError("attack target is in the protected set");
    }
}

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& a, double tol) {
    std::vector<Eigen::Index> s;
    for (Eigen::Index j = 0; j < a.size(); ++j)
        if (std::abs(a(j)) > tol) s.push_back(j);
    return s;
}

AttackPlan craft_attack(const GridModel& model, const Eigen::VectorXd& c, double support_tol) {
    if (c.size() != model.n_x())
        throw InputError("state bias has dimension " + std::to_string(c.size()) + ", expected " +
                         std::to_string(model.n_x()));
    AttackPlan plan;
    plan.c = c;
    plan.a = model.H * c;
    plan.support = support_of(plan.a, support_tol);
    plan.support_tol = support_tol;
    plan.optimal = false;
    return plan;
}

namespace {

enum class Fix : signed char { Free = -1, Zero = 0, One = 1 };

struct Node {
    std::vector<Fix> fix;
    int depth = 0;
    long parent = -1;  // sequence number of the node whose basis warm starts this one
    std::shared_ptr<const simplex::Basis> basis;
};

struct NodeSolution {
    bool feasible = false;
    double bound = 0.0;  // fixed-one count + LP objective
    Eigen::VectorXd c;
    Eigen::VectorXd y;  // relaxed indicator of each row
};

// LP relaxation of a node. With y_j = (u_j + v_j) / M and h_j c = u_j - v_j,
// u, v in [0, M], the big-M rows -M y_j <= h_j c <= M y_j become equalities
// in bounded variables. One LP covers every node: a row fixed to zero gets
// u_j = v_j = 0, a row fixed to one keeps its bounds but costs nothing, which
// imposes nothing because |h_j c| <= M holds on the box |c| <= c_max. Nodes
// therefore differ only in bounds and costs and are re-optimised from the
// parent's basis.
class NodeRelaxation {
public:
    NodeRelaxation(const Eigen::MatrixXd& H, const AttackSpec& spec, double big_M, double c_max)
        : nz_(H.rows()),
          nx_(H.cols()),
          target_(spec.target),
          big_M_(big_M),
          c_max_(c_max),
          solver_(build(H, spec, big_M, c_max)) {}

    NodeSolution solve(const Node& node, long sequence) {
        if (node.basis && node.parent != last_solved_) solver_.set_basis(*node.basis);
        const Eigen::Index nvar = nx_ + 2 * nz_;
        Eigen::VectorXd lower = Eigen::VectorXd::Zero(nvar);
        Eigen::VectorXd upper = Eigen::VectorXd::Constant(nvar, big_M_);
        Eigen::VectorXd cost = Eigen::VectorXd::Zero(nvar);
        lower.head(nx_).setConstant(-c_max_);
        upper.head(nx_).setConstant(c_max_);
        int ones = 0;
        for (Eigen::Index j = 0; j < nz_; ++j) {
            const auto f = node.fix[static_cast<std::size_t>(j)];
            if (j == target_ || f == Fix::One) {
                ++ones;
                if (j == target_) upper.segment(nx_ + 2 * j, 2).setZero();
            } else if (f == Fix::Zero) {
                upper.segment(nx_ + 2 * j, 2).setZero();
            } else {
                cost.segment(nx_ + 2 * j, 2).setConstant(1.0 / big_M_);
            }
        }
        solver_.set_bounds(lower, upper);
        solver_.set_cost(cost);
        const auto status = solver_.solve();
        last_solved_ = sequence;

        NodeSolution sol;
        if (status != simplex::Status::Optimal) {
            if (status != simplex::Status::Infeasible)
                throw NumericalError(std::string("node relaxation failed: ") + simplex::to_string(status));
            last_solved_ = -1;
            return sol;
        }
        const Eigen::VectorXd x = solver_.x();
        sol.feasible = true;
        sol.bound = ones + cost.dot(x);
        sol.c = x.head(nx_);
        sol.y.resize(nz_);
        for (Eigen::Index j = 0; j < nz_; ++j) sol.y(j) = (x(nx_ + 2 * j) + x(nx_ + 2 * j + 1)) / big_M_;
        return sol;
    }

    std::shared_ptr<const simplex::Basis> basis() const {
        return std::make_shared<const simplex::Basis>(solver_.basis());
    }
    long iterations() const { return solver_.iterations(); }

private:
    static simplex::LinearProgram build(const Eigen::MatrixXd& H, const AttackSpec& spec, double big_M,
                                        double c_max) {
        const Eigen::Index nz = H.rows();
        const Eigen::Index nx = H.cols();
        const Eigen::Index nvar = nx + 2 * nz;
        simplex::LinearProgram lp;
        lp.A = Eigen::MatrixXd::Zero(nz, nvar);
        lp.A.leftCols(nx) = H;
        for (Eigen::Index j = 0; j < nz; ++j) {
            lp.A(j, nx + 2 * j) = -1.0;
            lp.A(j, nx + 2 * j + 1) = 1.0;
        }
        lp.b = Eigen::VectorXd::Zero(nz);
        lp.b(spec.target) = spec.magnitude;
        lp.cost = Eigen::VectorXd::Zero(nvar);
        lp.lower = Eigen::VectorXd::Zero(nvar);
        lp.upper = Eigen::VectorXd::Constant(nvar, big_M);
        lp.lower.head(nx).setConstant(-c_max);
        lp.upper.head(nx).setConstant(c_max);
        return lp;
    }

    Eigen::Index nz_;
    Eigen::Index nx_;
    Eigen::Index target_;
    double big_M_;
    double c_max_;
    simplex::Solver solver_;
    long last_solved_ = -1;
};

AttackPlan make_plan(const GridModel& model, const AttackSpec& spec, const Eigen::VectorXd& c,
                     double big_M, double c_max, double tol) {
    AttackPlan plan = craft_attack(model, c, tol);
    plan.target = spec.target;
    plan.magnitude = spec.magnitude;
    plan.protected_set = spec.protected_set;
    plan.big_M = big_M;
    plan.c_max = c_max;
    return plan;
}

}  // namespace

AttackPlan min_resource_attack(const GridModel& model, const AttackSpec& spec,
                               const SolverOptions& options, SearchStats* stats) {
    spec.validate(model.n_z());
    if (!(options.support_tol > 0.0)) throw InputError("support tolerance must be positive");
    if (!(options.c_max > 0.0)) throw InputError("c_max must be positive");
    const double big_M = options.big_M.value_or(options.c_max * model.H.rowwise().lpNorm<1>().maxCoeff());
    if (!(big_M > 0.0)) throw InputError("big-M must be positive");
    if (model.H.row(spec.target).lpNorm<Eigen::Infinity>() == 0.0)
        throw InfeasibleError("target measurement does not depend on the state");

    SearchStats local;
    SearchStats& st = stats ? *stats : local;
    st.nodes = 0;
    st.lp_iterations = 0;
    st.limit_hit = false;
    st.trace.clear();
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    const Eigen::Index nz = model.n_z();
    NodeRelaxation relaxation(model.H, spec, big_M, options.c_max);
    const double tol = options.support_tol;

    Node root;
    root.fix.assign(static_cast<std::size_t>(nz), Fix::Free);
    root.fix[static_cast<std::size_t>(spec.target)] = Fix::One;  // |a_i| = |mu| > 0 forces y_i = 1
    for (auto p : spec.protected_set) root.fix[static_cast<std::size_t>(p)] = Fix::Zero;

    std::optional<AttackPlan> incumbent;
    std::vector<Node> stack{std::move(root)};
    while (!stack.empty()) {
        if (st.nodes >= options.node_limit || elapsed() > options.time_limit) {
            st.limit_hit = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++st.nodes;

        const long sequence = st.nodes;
        const NodeSolution sol = relaxation.solve(node, sequence);
        st.lp_iterations = relaxation.iterations();
        if (!sol.feasible) continue;
        if (st.nodes == 1) st.root_bound = sol.bound;

        // The LP point is itself a feasible attack; its support is an incumbent.
        const Eigen::VectorXd a = model.H * sol.c;
        const auto support = support_of(a, tol);
        bool within = std::abs(a(spec.target) - spec.magnitude) <= 1e-9 * std::max(1.0, std::abs(spec.magnitude));
        for (auto p : spec.protected_set) within = within && std::abs(a(p)) <= tol;
        if (within && (!incumbent || support.size() < incumbent->cardinality()))
            incumbent = make_plan(model, spec, sol.c, big_M, options.c_max, tol);

        if (st.record_nodes) {
            double cost = 0.0;
            for (Eigen::Index j = 0; j < nz; ++j) {
                const auto f = node.fix[static_cast<std::size_t>(j)];
                if (f == Fix::One || (f == Fix::Free && std::abs(a(j)) > tol)) cost += 1.0;
            }
            st.trace.push_back({node.depth, sol.bound, cost});
        }

        const double lower = std::ceil(sol.bound - 1e-6);
        if (incumbent && lower >= static_cast<double>(incumbent->cardinality())) continue;

        // Most fractional indicator, lowest index on ties.
        Eigen::Index branch = -1;
        double best = -1.0;
        for (Eigen::Index j = 0; j < nz; ++j) {
            if (node.fix[static_cast<std::size_t>(j)] != Fix::Free) continue;
            if (std::abs(a(j)) <= tol) continue;
            const double y = sol.y(j);
            if (y >= 1.0 - 1e-9) continue;
            const double frac = std::min(y, 1.0 - y);
            if (frac > best + 1e-15) {
                best = frac;
                branch = j;
            }
        }
        if (branch < 0) continue;  // integral relaxation; its point is already recorded

        const auto basis = relaxation.basis();
        Node zero{node.fix, node.depth + 1, sequence, basis};
        zero.fix[static_cast<std::size_t>(branch)] = Fix::Zero;
        Node one{std::move(node.fix), node.depth + 1, sequence, basis};
        one.fix[static_cast<std::size_t>(branch)] = Fix::One;
        // Depth first, indicator = 1 explored first.
        stack.push_back(std::move(zero));
        stack.push_back(std::move(one));
    }
    st.seconds = elapsed();

    if (!incumbent) {
        if (st.limit_hit) throw NumericalError("search limit reached before any stealthy attack was found");
        throw InfeasibleError("no stealthy attack reaches the target without touching protected measurements");
    }
    incumbent->optimal = !st.limit_hit;
    return *incumbent;
}

std::optional<AttackPlan> brute_force_min_attack(const GridModel& model, const AttackSpec& spec,
                                                 int max_support, double support_tol) {
    spec.validate(model.n_z());
    const Eigen::Index nz = model.n_z();
    const Eigen::Index nx = model.n_x();
    std::vector<bool> is_protected(static_cast<std::size_t>(nz), false);
    for (auto p : spec.protected_set) is_protected[static_cast<std::size_t>(p)] = true;
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index j = 0; j < nz; ++j)
        if (j != spec.target && !is_protected[static_cast<std::size_t>(j)]) candidates.push_back(j);

    const Eigen::RowVectorXd h_target = model.H.row(spec.target);
    const double scale = std::max(1.0, model.H.cwiseAbs().maxCoeff());

    // Feasible for support S iff the target row has a component outside the
    // row space of the rows that must stay zero.
    auto try_support = [&](const std::vector<Eigen::Index>& extra) -> std::optional<Eigen::VectorXd> {
        std::vector<bool> in_support(static_cast<std::size_t>(nz), false);
        in_support[static_cast<std::size_t>(spec.target)] = true;
        for (auto j : extra) in_support[static_cast<std::size_t>(j)] = true;
        Eigen::MatrixXd zero_rows(nz, nx);
        Eigen::Index k = 0;
        for (Eigen::Index j = 0; j < nz; ++j)
            if (!in_support[static_cast<std::size_t>(j)]) zero_rows.row(k++) = model.H.row(j);
        Eigen::MatrixXd null_basis;
        if (k == 0) {
            null_basis = Eigen::MatrixXd::Identity(nx, nx);
        } else {
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(zero_rows.topRows(k), Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            const double cutoff = 1e-10 * scale * std::max<double>(static_cast<double>(k), static_cast<double>(nx));
            Eigen::Index rank = 0;
            while (rank < sv.size() && sv(rank) > cutoff) ++rank;
            if (rank == nx) return std::nullopt;
            null_basis = svd.matrixV().rightCols(nx - rank);
        }
        const Eigen::RowVectorXd g = h_target * null_basis;
        if (g.norm() <= 1e-9 * scale) return std::nullopt;
        // Minimum-norm c in the null space with h_i c = mu.
        return Eigen::VectorXd(null_basis * (spec.magnitude / g.squaredNorm()) * g.transpose());
    };

    const int n_cand = static_cast<int>(candidates.size());
    for (int extra = 0; extra + 1 <= max_support && extra <= n_cand; ++extra) {
        std::vector<int> pick(static_cast<std::size_t>(extra));
        std::iota(pick.begin(), pick.end(), 0);
        while (true) {
            std::vector<Eigen::Index> rows;
            for (int p : pick) rows.push_back(candidates[static_cast<std::size_t>(p)]);
            if (auto c = try_support(rows)) {
                AttackPlan plan = craft_attack(model, *c, support_tol);
                plan.target = spec.target;
                plan.magnitude = spec.magnitude;
                plan.protected_set = spec.protected_set;
                plan.c_max = c->lpNorm<Eigen::Infinity>();
                plan.optimal = true;
                return plan;
            }
            // Next combination in lexicographic order.
            int i = extra - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == n_cand - extra + i) --i;
            if (i < 0) break;
            ++pick[static_cast<std::size_t>(i)];
            for (int t = i + 1; t < extra; ++t) pick[static_cast<std::size_t>(t)] = pick[static_cast<std::size_t>(t - 1)] + 1;
        }
    }
    return std::nullopt;
}

MeasurementVector apply_attack(const MeasurementVector& z, const AttackPlan& plan) {
    if (z.values.size() != plan.a.size())
        throw InputError("attack vector has dimension " + std::to_string(plan.a.size()) +
                         ", measurements have " + std::to_string(z.values.size()));
    return {z.values + plan.a, z.hour};
}

AttackPlan scale_plan(const AttackPlan& plan, double factor) {
    if (factor == 0.0 || !std::isfinite(factor)) throw InputError("scale factor must be finite and nonzero");
    AttackPlan out = plan;
    out.c *= factor;
    out.a *= factor;
    out.magnitude *= factor;
    return out;
}

namespace {

template <typename Vec>
std::vector<double> to_std(const Vec& v) {
    return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json to_json(const AttackSpec& spec) {
    return {{"target_index", spec.target},
            {"magnitude", spec.magnitude},
            {"protected_set", spec.protected_set}};
}

AttackSpec attack_spec_from_json(const nlohmann::json& j) {
    try {
        AttackSpec spec;
        spec.target = j.at("target_index").get<Eigen::Index>();
        spec.magnitude = j.at("magnitude").get<double>();
        if (j.contains("protected_set")) spec.protected_set = j.at("protected_set").get<std::vector<Eigen::Index>>();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid attack spec JSON: ") + e.what());
    }
}

nlohmann::json to_json(const AttackPlan& plan, const GridModel* model) {
    nlohmann::json j = {{"c", to_std(plan.c)},
                        {"a", to_std(plan.a)},
                        {"support", plan.support},
                        {"cardinality", plan.cardinality()},
                        {"optimal", plan.optimal},
                        {"target_index", plan.target},
                        {"magnitude", plan.magnitude},
                        {"protected_set", plan.protected_set},
                        {"big_M", plan.big_M},
                        {"c_max", plan.c_max},
                        {"support_tol", plan.support_tol}};
    if (model) {
        std::vector<std::string> labels;
        for (auto s : plan.support) labels.push_back(model->label(s));
        j["support_labels"] = labels;
    }
    return j;
}

AttackPlan attack_plan_from_json(const nlohmann::json& j) {
    try {
        AttackPlan plan;
        plan.c = to_eigen(j.at("c").get<std::vector<double>>());
        plan.a = to_eigen(j.at("a").get<std::vector<double>>());
        plan.support = j.at("support").get<std::vector<Eigen::Index>>();
        plan.optimal = j.at("optimal").get<bool>();
        plan.target = j.at("target_index").get<Eigen::Index>();
        plan.magnitude = j.at("magnitude").get<double>();
        plan.protected_set = j.value("protected_set", std::vector<Eigen::Index>{});
        plan.big_M = j.value("big_M", 0.0);
        plan.c_max = j.value("c_max", 0.0);
        plan.support_tol = j.value("support_tol", SolverOptions{}.support_tol);
        if (j.contains("cardinality") && j.at("cardinality").get<std::size_t>() != plan.support.size())
            throw InputError("attack plan cardinality does not match its support");
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("invalid attack plan JSON: ") + e.what());
    }
}

}  // namespace fdia
