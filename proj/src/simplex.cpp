#include "fdia/simplex.hpp"

#include "fdia/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace fdia::simplex {

const char* to_string(Status status) {
    switch (status) {
        case Status::Optimal: return "optimal";
        case Status::Infeasible: return "infeasible";
        case Status::Unbounded: return "unbounded";
        case Status::IterationLimit: return "iteration limit";
    }
    return "unknown";
}

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

// Columns 0..n-1 are structural, n..n+m-1 are artificials (sign_r e_r). The
// artificial block of the tableau is B^-1 diag(sign), which is what the basic
// values are recomputed from.
class Tableau {
public:
    Tableau(const LinearProgram& lp, const Options& opt) : opt_(opt) {
        m_ = lp.A.rows();
        n_ = lp.A.cols();
        A_ = lp.A;
        A_sparse_ = lp.A.sparseView();
        b_ = lp.b;
        const Eigen::Index total = n_ + m_;
        cost_ = Eigen::VectorXd::Zero(total);
        cost_.head(n_) = lp.cost;
        lower_.resize(total);
        upper_.resize(total);
        lower_.head(n_) = lp.lower;
        upper_.head(n_) = lp.upper;
        lower_.tail(m_).setZero();
        upper_.tail(m_).setConstant(kInf);
        value_ = lower_;
        sign_ = Eigen::VectorXd::Ones(m_);
        x_basic_ = Eigen::VectorXd::Zero(m_);
        T_.resize(m_, total);
        basis_.resize(static_cast<std::size_t>(m_));
        state_.assign(static_cast<std::size_t>(total), VarState::AtLower);
    }

    Status solve() {
        call_iterations_ = 0;
        if (!started_) {
            started_ = true;
            return cold_solve();
        }
        refresh_basic_values();
        if (primal_feasible()) return finish(primal_iterate());
        if (!make_dual_feasible()) return cold_solve();
        Status s = dual_iterate();
        if (s != Status::Optimal) return s;
        return finish(primal_iterate());
    }

    void set_cost(const Eigen::VectorXd& c) {
        cost_.head(n_) = c;
        if (started_) compute_reduced();
    }

    void set_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
        for (Eigen::Index j = 0; j < n_; ++j)
            if (!std::isfinite(lo(j))) throw InputError("simplex requires finite lower bounds");
        lower_.head(n_) = lo;
        upper_.head(n_) = hi;
        for (Eigen::Index j = 0; j < n_; ++j) {
            auto& st = state_[static_cast<std::size_t>(j)];
            if (st == VarState::AtUpper && upper_(j) == kInf) st = VarState::AtLower;
            if (st == VarState::AtLower) value_(j) = lower_(j);
            if (st == VarState::AtUpper) value_(j) = upper_(j);
        }
    }

    Basis basis() const { return {basis_, state_}; }

    void set_basis(const Basis& basis) {
        if (basis.basic.size() != static_cast<std::size_t>(m_) || basis.state.size() != state_.size())
            throw InputError("basis does not match the linear program");
        basis_ = basis.basic;
        state_ = basis.state;
        for (Eigen::Index j = 0; j < n_ + m_; ++j) {
            auto& st = state_[static_cast<std::size_t>(j)];
            if (st == VarState::AtUpper && upper_(j) == kInf) st = VarState::AtLower;
            if (st != VarState::Basic) value_(j) = st == VarState::AtUpper ? upper_(j) : lower_(j);
        }
        refactor();
        started_ = true;
    }

    Eigen::VectorXd solution() const {
        Eigen::VectorXd x = value_.head(n_);
        for (Eigen::Index r = 0; r < m_; ++r) {
            const auto j = basis_[static_cast<std::size_t>(r)];
            if (j < n_) x(j) = std::clamp(x_basic_(r), lower_(j), upper_(j));
        }
        return x;
    }

    double objective() const { return cost_.head(n_).dot(solution()); }
    long iterations() const { return iterations_; }

private:
    bool all_bounds_finite() const {
        for (Eigen::Index j = 0; j < n_; ++j)
            if (upper_(j) == kInf) return false;
        return true;
    }

    void reset_to_artificial_basis() {
        for (Eigen::Index j = 0; j < n_; ++j) {
            state_[static_cast<std::size_t>(j)] = VarState::AtLower;
            value_(j) = lower_(j);
        }
        const Eigen::VectorXd resid = b_ - A_ * lower_.head(n_);
        for (Eigen::Index r = 0; r < m_; ++r) {
            sign_(r) = resid(r) >= 0.0 ? 1.0 : -1.0;
            basis_[static_cast<std::size_t>(r)] = n_ + r;
            state_[static_cast<std::size_t>(n_ + r)] = VarState::Basic;
            value_(n_ + r) = 0.0;
        }
        T_.leftCols(n_) = sign_.asDiagonal() * A_;
        T_.rightCols(m_).setIdentity();
        pivots_since_refactor_ = 0;
    }

    Status cold_solve() {
        for (Eigen::Index j = 0; j < n_; ++j)
            if (upper_(j) < lower_(j)) return Status::Infeasible;
        reset_to_artificial_basis();
        if (all_bounds_finite()) {
            // Artificials are fixed at zero; the dual simplex drives them out.
            lower_.tail(m_).setZero();
            upper_.tail(m_).setZero();
            compute_reduced();
            make_dual_feasible();
            refresh_basic_values();
            const Status s = dual_iterate();
            if (s != Status::Optimal) return s;
            return finish(primal_iterate());
        }

        upper_.tail(m_).setConstant(kInf);
        const Eigen::VectorXd saved = cost_;
        cost_.head(n_).setZero();
        cost_.tail(m_).setOnes();
        refresh_basic_values();
        compute_reduced();
        Status s = primal_iterate();
        cost_ = saved;
        if (s == Status::IterationLimit) return s;
        refresh_basic_values();
        double infeasibility = 0.0;
        for (Eigen::Index r = 0; r < m_; ++r)
            if (basis_[static_cast<std::size_t>(r)] >= n_) infeasibility += std::abs(x_basic_(r));
        const double scale = 1.0 + (m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
        if (infeasibility > opt_.feasibility_tol * scale) return Status::Infeasible;
        drive_out_artificials();
        upper_.tail(m_).setZero();
        for (Eigen::Index j = n_; j < n_ + m_; ++j) {
            if (state_[static_cast<std::size_t>(j)] != VarState::Basic) {
                state_[static_cast<std::size_t>(j)] = VarState::AtLower;
                value_(j) = 0.0;
            }
        }
        compute_reduced();
        return finish(primal_iterate());
    }

    Status finish(Status s) {
        refresh_basic_values();
        return s;
    }

    void compute_reduced() {
        Eigen::VectorXd cb(m_);
        for (Eigen::Index r = 0; r < m_; ++r) cb(r) = cost_(basis_[static_cast<std::size_t>(r)]);
        reduced_ = cost_.transpose() - cb.transpose() * T_;
    }

    bool movable(Eigen::Index j) const { return upper_(j) > lower_(j); }

    bool primal_feasible() const {
        for (Eigen::Index r = 0; r < m_; ++r) {
            const auto j = basis_[static_cast<std::size_t>(r)];
            if (x_basic_(r) < lower_(j) - opt_.feasibility_tol || x_basic_(r) > upper_(j) + opt_.feasibility_tol)
                return false;
        }
        return true;
    }

    // Moves every nonbasic column to the bound its reduced cost asks for.
    // Fails only when that bound is infinite.
    bool make_dual_feasible() {
        bool moved = false;
        for (Eigen::Index j = 0; j < n_ + m_; ++j) {
            auto& st = state_[static_cast<std::size_t>(j)];
            if (st == VarState::Basic || !movable(j)) continue;
            if (st == VarState::AtLower && reduced_(j) < -opt_.optimality_tol) {
                if (upper_(j) == kInf) return false;
                st = VarState::AtUpper;
                value_(j) = upper_(j);
                moved = true;
            } else if (st == VarState::AtUpper && reduced_(j) > opt_.optimality_tol) {
                st = VarState::AtLower;
                value_(j) = lower_(j);
                moved = true;
            }
        }
        if (moved) refresh_basic_values();
        return true;
    }

    bool can_enter(Eigen::Index j) const {
        const auto st = state_[static_cast<std::size_t>(j)];
        if (st == VarState::Basic || !movable(j)) return false;
        return (st == VarState::AtLower && reduced_(j) < -opt_.optimality_tol) ||
               (st == VarState::AtUpper && reduced_(j) > opt_.optimality_tol);
    }

    bool out_of_iterations() const { return call_iterations_ >= opt_.max_iterations; }

    void count_iteration() {
        ++iterations_;
        ++call_iterations_;
    }

    Status primal_iterate() {
        bool bland = opt_.bland_only;
        int degenerate_run = 0;
        while (true) {
            if (out_of_iterations()) return Status::IterationLimit;
            Eigen::Index q = -1;
            double best = 0.0;
            for (Eigen::Index j = 0; j < n_ + m_; ++j) {
                if (!can_enter(j)) continue;
                if (bland) {
                    q = j;
                    break;
                }
                if (std::abs(reduced_(j)) > best) {
                    best = std::abs(reduced_(j));
                    q = j;
                }
            }
            if (q < 0) return Status::Optimal;
            count_iteration();

            const double dir = state_[static_cast<std::size_t>(q)] == VarState::AtLower ? 1.0 : -1.0;
            // Harris two-pass ratio test: the step allowed with bounds relaxed
            // by the feasibility tolerance, then the largest pivot (or, under
            // Bland, the smallest index) among rows blocking within it.
            auto limit_of = [&](Eigen::Index r, double alpha, double slack_tol, bool& to_upper) {
                const auto bj = basis_[static_cast<std::size_t>(r)];
                if (alpha > 0.0) {
                    to_upper = false;
                    return (x_basic_(r) - lower_(bj) + slack_tol) / alpha;
                }
                to_upper = true;
                if (upper_(bj) == kInf) return kInf;
                return (upper_(bj) - x_basic_(r) + slack_tol) / -alpha;
            };
            double harris = kInf;
            bool to_upper = false;
            for (Eigen::Index r = 0; r < m_; ++r) {
                const double alpha = dir * T_(r, q);  // basic value moves by -alpha * step
                if (std::abs(alpha) <= opt_.pivot_tol) continue;
                harris = std::min(harris, limit_of(r, alpha, opt_.feasibility_tol, to_upper));
            }
            Eigen::Index leave = -1;
            bool leave_to_upper = false;
            double leave_pivot = 0.0;
            double theta = kInf;
            for (Eigen::Index r = 0; harris < kInf && r < m_; ++r) {
                const double alpha = dir * T_(r, q);
                if (std::abs(alpha) <= opt_.pivot_tol) continue;
                const double limit = std::max(0.0, limit_of(r, alpha, 0.0, to_upper));
                if (limit > harris) continue;
                const bool take = leave < 0 || (bland ? basis_[static_cast<std::size_t>(r)] <
                                                            basis_[static_cast<std::size_t>(leave)]
                                                      : std::abs(alpha) > std::abs(leave_pivot));
                if (take) {
                    theta = limit;
                    leave = r;
                    leave_to_upper = to_upper;
                    leave_pivot = alpha;
                }
            }
            const double flip = upper_(q) - lower_(q);
            if (flip <= theta) {
                theta = flip;
                leave = -1;
            }
            if (leave < 0 && theta == kInf) return Status::Unbounded;

            if (theta <= 1e-12) {
                if (++degenerate_run >= opt_.degenerate_pivots_before_bland) bland = true;
            } else {
                degenerate_run = 0;
                if (!opt_.bland_only) bland = false;
            }

            x_basic_ -= (dir * theta) * T_.col(q);
            if (leave < 0) {
                // Bound flip, basis unchanged.
                const bool to_upper = state_[static_cast<std::size_t>(q)] == VarState::AtLower;
                state_[static_cast<std::size_t>(q)] = to_upper ? VarState::AtUpper : VarState::AtLower;
                value_(q) = to_upper ? upper_(q) : lower_(q);
                continue;
            }
            pivot(leave, q, value_(q) + dir * theta, leave_to_upper);
        }
    }

    Status dual_iterate() {
        while (true) {
            if (out_of_iterations()) return Status::IterationLimit;
            // Leaving row: largest bound violation.
            Eigen::Index r = -1;
            double worst = opt_.feasibility_tol;
            for (Eigen::Index k = 0; k < m_; ++k) {
                const auto j = basis_[static_cast<std::size_t>(k)];
                const double v = std::max(lower_(j) - x_basic_(k), x_basic_(k) - upper_(j));
                if (v > worst) {
                    worst = v;
                    r = k;
                }
            }
            if (r < 0) return Status::Optimal;
            count_iteration();
            const auto out = basis_[static_cast<std::size_t>(r)];
            const bool raise = x_basic_(r) < lower_(out);
            const double target = raise ? lower_(out) : upper_(out);

            // Entering column, Harris two-pass: the widest ratio bound allowed
            // by the optimality tolerance, then the largest pivot within it.
            auto helps = [&](Eigen::Index j, double alpha) {
                const bool up = state_[static_cast<std::size_t>(j)] == VarState::AtLower;
                // x_r changes by -alpha * dx_j.
                return raise ? (up ? alpha < 0.0 : alpha > 0.0) : (up ? alpha > 0.0 : alpha < 0.0);
            };
            double bound = kInf;
            for (Eigen::Index j = 0; j < n_ + m_; ++j) {
                if (state_[static_cast<std::size_t>(j)] == VarState::Basic || !movable(j)) continue;
                const double alpha = T_(r, j);
                if (std::abs(alpha) <= opt_.pivot_tol || !helps(j, alpha)) continue;
                bound = std::min(bound, (std::abs(reduced_(j)) + opt_.optimality_tol) / std::abs(alpha));
            }
            Eigen::Index q = -1;
            double best_alpha = 0.0;
            for (Eigen::Index j = 0; j < n_ + m_ && bound < kInf; ++j) {
                if (state_[static_cast<std::size_t>(j)] == VarState::Basic || !movable(j)) continue;
                const double alpha = T_(r, j);
                if (std::abs(alpha) <= opt_.pivot_tol || !helps(j, alpha)) continue;
                if (std::abs(reduced_(j)) / std::abs(alpha) <= bound && std::abs(alpha) > std::abs(best_alpha)) {
                    best_alpha = alpha;
                    q = j;
                }
            }
            if (q < 0) return Status::Infeasible;

            const double delta = (x_basic_(r) - target) / T_(r, q);
            x_basic_ -= delta * T_.col(q);
            pivot(r, q, value_(q) + delta, !raise);
        }
    }

    void pivot(Eigen::Index r, Eigen::Index q, double entering_value, bool leave_to_upper) {
        const auto out = basis_[static_cast<std::size_t>(r)];
        state_[static_cast<std::size_t>(out)] = leave_to_upper ? VarState::AtUpper : VarState::AtLower;
        value_(out) = leave_to_upper ? upper_(out) : lower_(out);

        const double p = T_(r, q);
        T_.row(r) /= p;
        const Eigen::RowVectorXd pivot_row = T_.row(r);
        Eigen::VectorXd col = T_.col(q);
        col(r) = 0.0;
        T_.noalias() -= col * pivot_row;
        reduced_ -= reduced_(q) * pivot_row;
        reduced_(q) = 0.0;

        basis_[static_cast<std::size_t>(r)] = q;
        state_[static_cast<std::size_t>(q)] = VarState::Basic;
        x_basic_(r) = entering_value;

        if (++pivots_since_refactor_ >= opt_.refactor_interval) refactor();
    }

    void refactor() {
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
        for (Eigen::Index r = 0; r < m_; ++r) {
            const auto j = basis_[static_cast<std::size_t>(r)];
            if (j < n_)
                B.col(r) = A_.col(j);
            else
                B(j - n_, r) = sign_(j - n_);
        }
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        if (m_ > 0 && !(lu.rcond() > 1e-14)) throw NumericalError("simplex basis became singular");
        const Eigen::MatrixXd inv = lu.inverse();
        T_.leftCols(n_) = inv * A_sparse_;
        T_.rightCols(m_) = inv * sign_.asDiagonal();
        pivots_since_refactor_ = 0;
        compute_reduced();
        refresh_basic_values();
    }

    void drive_out_artificials() {
        for (Eigen::Index r = 0; r < m_; ++r) {
            if (basis_[static_cast<std::size_t>(r)] < n_) continue;
            Eigen::Index best = -1;
            double mag = 1e-9;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (state_[static_cast<std::size_t>(j)] == VarState::Basic) continue;
                if (std::abs(T_(r, j)) > mag) {
                    mag = std::abs(T_(r, j));
                    best = j;
                }
            }
            // A row with no structural entry is redundant; its artificial stays
            // basic at zero.
            if (best >= 0) pivot(r, best, value_(best), false);
        }
        refresh_basic_values();
    }

    void refresh_basic_values() {
        Eigen::VectorXd rhs = b_;
        for (Eigen::Index j = 0; j < n_; ++j)
            if (state_[static_cast<std::size_t>(j)] != VarState::Basic && value_(j) != 0.0)
                rhs -= A_.col(j) * value_(j);
        x_basic_ = T_.rightCols(m_) * sign_.cwiseProduct(rhs);
        for (Eigen::Index j = n_; j < n_ + m_; ++j)
            if (state_[static_cast<std::size_t>(j)] != VarState::Basic && value_(j) != 0.0)
                x_basic_ -= T_.col(j) * value_(j);
    }

    Options opt_;
    Eigen::Index m_ = 0;
    Eigen::Index n_ = 0;
    Eigen::MatrixXd A_;
    Eigen::SparseMatrix<double> A_sparse_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd T_;
    Eigen::VectorXd sign_;
    Eigen::VectorXd lower_, upper_, value_, cost_;
    Eigen::RowVectorXd reduced_;
    Eigen::VectorXd x_basic_;
    std::vector<Eigen::Index> basis_;
    std::vector<VarState> state_;
    long iterations_ = 0;
    long call_iterations_ = 0;
    int pivots_since_refactor_ = 0;
    bool started_ = false;
};

Solver::Solver(const LinearProgram& lp, const Options& options) {
    const auto m = lp.A.rows();
    const auto n = lp.A.cols();
    if (lp.b.size() != m || lp.cost.size() != n || lp.lower.size() != n || lp.upper.size() != n)
        throw InputError("linear program dimensions are inconsistent");
    for (Eigen::Index j = 0; j < n; ++j)
        if (!std::isfinite(lp.lower(j))) throw InputError("simplex requires finite lower bounds");
    tableau_ = std::make_unique<Tableau>(lp, options);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

Status Solver::solve() { return tableau_->solve(); }
void Solver::set_cost(const Eigen::VectorXd& cost) { tableau_->set_cost(cost); }
void Solver::set_bounds(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper) {
    tableau_->set_bounds(lower, upper);
}
Basis Solver::basis() const { return tableau_->basis(); }
void Solver::set_basis(const Basis& basis) { tableau_->set_basis(basis); }
Eigen::VectorXd Solver::x() const { return tableau_->solution(); }
double Solver::objective() const { return tableau_->objective(); }
long Solver::iterations() const { return tableau_->iterations(); }

Result solve(const LinearProgram& lp, const Options& options) {
    Solver solver(lp, options);
    Result result;
    result.status = solver.solve();
    result.iterations = solver.iterations();
    if (result.status == Status::Optimal || result.status == Status::IterationLimit) {
        result.x = solver.x();
        result.objective = solver.objective();
    }
    return result;
}

}  // namespace fdia::simplex
