#pragma once

// Dense bounded-variable simplex:
//
//     minimise  cost' x   subject to  A x = b,  lower <= x <= upper.
//
// Lower bounds must be finite; upper bounds may be +infinity. Nonbasic
// variables sit at one of their bounds. When every bound is finite the method
// starts from an artificial basis made dual feasible by bound flips and runs
// the dual simplex; otherwise it falls back to a two-phase primal method.
// A Solver keeps its basis between calls so that a sequence of problems that
// differ only in bounds or costs can be re-optimised from the last basis.

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace fdia::simplex {

struct LinearProgram {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd cost;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(Status status);

struct Options {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-10;
    long max_iterations = 200000;
    int degenerate_pivots_before_bland = 50;
    /// Use Bland's rule from the first primal pivot.
    bool bland_only = false;
    /// Rebuild the tableau from the basis after this many pivots.
    int refactor_interval = 200;
};

struct Result {
    Status status = Status::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    long iterations = 0;
};

enum class VarState : unsigned char { Basic, AtLower, AtUpper };

/// Basic column per row and the state of every column (structural columns
/// first, then one artificial column per row).
struct Basis {
    std::vector<Eigen::Index> basic;
    std::vector<VarState> state;
};

class Tableau;

class Solver {
public:
    explicit Solver(const LinearProgram& lp, const Options& options = {});
    ~Solver();
    Solver(Solver&&) noexcept;
    Solver& operator=(Solver&&) noexcept;

    /// First call solves from scratch, later calls start from the current basis.
    Status solve();

    void set_cost(const Eigen::VectorXd& cost);
    void set_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper);

    Basis basis() const;
    /// Restores a basis taken from this solver and refactorises.
    void set_basis(const Basis& basis);

    Eigen::VectorXd x() const;
    double objective() const;
    /// Pivots and bound flips over the solver's lifetime.
    long iterations() const;

private:
    std::unique_ptr<Tableau> tableau_;
};

Result solve(const LinearProgram& lp, const Options& options = {});

}  // namespace fdia::simplex
