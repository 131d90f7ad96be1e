#pragma once

// Stealthy false data injection attacks a = Hc and the minimum-resource
// attack problem
//
//     min ||a||_0  s.t.  a = Hc,  a_i = mu,  a_p = 0 for p in P,
//
// solved as a big-M mixed integer linear program by depth-first
// branch-and-bound over the support indicators.

#include "fdia/grid.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace fdia {

struct AttackSpec {
    Eigen::Index target = 0;  // measurement row i
    double magnitude = 0.0;   // mu, p.u.
    std::vector<Eigen::Index> protected_set;

    /// Throws InputError unless target is a valid row outside P and mu != 0.
    void validate(Eigen::Index n_z) const;
};

struct SolverOptions {
    double c_max = 10.0;          // box on the injected state bias, p.u.
    std::optional<double> big_M;  // defaults to c_max * max_j ||H_j||_1
    double support_tol = 1e-7;
    long node_limit = 2'000'000;
    double time_limit = 600.0;  // seconds
};

struct AttackPlan {
    Eigen::VectorXd c;  // injected state bias
    Eigen::VectorXd a;  // H c
    std::vector<Eigen::Index> support;
    bool optimal = false;
    Eigen::Index target = -1;
    double magnitude = 0.0;
    std::vector<Eigen::Index> protected_set;
    double big_M = 0.0;
    double c_max = 0.0;
    double support_tol = 1e-7;

    std::size_t cardinality() const { return support.size(); }
};

struct BranchAndBoundNode {
    int depth = 0;
    double bound = 0.0;        // LP relaxation value, fixed indicators included
    double lp_cost = 0.0;      // cost of the rounded LP solution within this node
};

struct SearchStats {
    long nodes = 0;
    long lp_iterations = 0;
    double root_bound = 0.0;
    double seconds = 0.0;
    bool limit_hit = false;
    /// Filled when record_nodes is set before the call.
    bool record_nodes = false;
    std::vector<BranchAndBoundNode> trace;
};

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& a, double tol);

/// a = Hc with no optimality claim.
AttackPlan craft_attack(const GridModel& model, const Eigen::VectorXd& c,
                        double support_tol = SolverOptions{}.support_tol);

/// Exact solution of the minimum-resource attack problem. Returns the best
/// incumbent with optimal = false if the node or time limit is reached.
/// Throws InfeasibleError when no stealthy attack satisfies the spec.
AttackPlan min_resource_attack(const GridModel& model, const AttackSpec& spec,
                               const SolverOptions& options = {}, SearchStats* stats = nullptr);

/// Enumerates candidate supports in increasing cardinality (lexicographic
/// within a cardinality) and returns the first feasible one. Independent of
/// the MILP; meant for small models.
std::optional<AttackPlan> brute_force_min_attack(const GridModel& model, const AttackSpec& spec,
                                                 int max_support,
                                                 double support_tol = SolverOptions{}.support_tol);

MeasurementVector apply_attack(const MeasurementVector& z, const AttackPlan& plan);

/// Scales c, a and mu by `factor`; the support is unchanged by linearity.
AttackPlan scale_plan(const AttackPlan& plan, double factor);

nlohmann::json to_json(const AttackSpec& spec);
AttackSpec attack_spec_from_json(const nlohmann::json& j);
/// `model` adds human readable support labels when given.
nlohmann::json to_json(const AttackPlan& plan, const GridModel* model = nullptr);
AttackPlan attack_plan_from_json(const nlohmann::json& j);

}  // namespace fdia
