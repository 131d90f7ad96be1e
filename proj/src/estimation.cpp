#include "fdia/estimation.hpp"

#include "fdia/errors.hpp"

#include <cmath>
#include <limits>

namespace fdia {

WlsEstimator::WlsEstimator(const GridModel& model)
    : H_(model.H), inv_sigma_(model.variances.cwiseSqrt().cwiseInverse()) {
    qr_.compute(inv_sigma_.asDiagonal() * H_);
    if (qr_.rank() < H_.cols()) throw NumericalError("normal equations are singular (H is rank deficient)");
}

StateEstimate WlsEstimator::estimate(const Eigen::VectorXd& z) const {
    if (z.size() != H_.rows())
        throw InputError("measurement vector has dimension " + std::to_string(z.size()) + ", expected " +
                         std::to_string(H_.rows()));
    StateEstimate est;
    est.x_hat = qr_.solve(inv_sigma_.cwiseProduct(z));
    est.z_hat = H_ * est.x_hat;
    est.cost = inv_sigma_.cwiseProduct(z - est.z_hat).squaredNorm();
    return est;
}

StateEstimate wls_estimate(const MeasurementVector& z, const GridModel& model) {
    return WlsEstimator(model).estimate(z.values);
}

Eigen::VectorXd residual(const MeasurementVector& z, const GridModel& model) {
    if (z.values.size() != model.n_z()) throw InputError("measurement vector dimension mismatch");
    const Eigen::VectorXd w = model.variances.cwiseInverse();
    const Eigen::MatrixXd gain = model.H.transpose() * w.asDiagonal() * model.H;
    Eigen::LLT<Eigen::MatrixXd> llt(gain);
    if (llt.info() != Eigen::Success) throw NumericalError("normal equations are singular");
    const Eigen::VectorXd rhs = model.H.transpose() * w.cwiseProduct(z.values);
    return z.values - model.H * llt.solve(rhs);
}

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0) throw InputError("incomplete gamma requires a > 0");
    if (x <= 0.0) return 0.0;
    const double log_prefix = a * std::log(x) - x - std::lgamma(a);
    if (x < a + 1.0) {
        // Power series.
        double term = 1.0 / a;
        double sum = term;
        for (int n = 1; n < 10000; ++n) {
            term *= x / (a + n);
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-17) break;
        }
        return std::min(1.0, sum * std::exp(log_prefix));
    }
    // Continued fraction for Q(a, x), modified Lentz.
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::max(0.0, 1.0 - std::exp(log_prefix) * h);
}

double chi_squared_cdf(double x, int dof) {
    if (dof < 1) throw InputError("chi-squared needs dof >= 1");
    return regularized_gamma_p(0.5 * dof, 0.5 * x);
}

double chi_squared_quantile(double p, int dof) {
    if (dof < 1) throw InputError("chi-squared needs dof >= 1");
    if (!(p > 0.0 && p < 1.0)) throw InputError("quantile probability must lie in (0, 1)");
    double lo = 0.0;
    double hi = std::max(1.0, static_cast<double>(dof));
    while (chi_squared_cdf(hi, dof) < p) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chi_squared_cdf(mid, dof) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

BddVerdict bdd_test(double cost, int dof, double significance) {
    if (!(significance > 0.0 && significance < 1.0))
        throw InputError("significance must lie in (0, 1), got " + std::to_string(significance));
    if (dof < 1) throw InputError("bad data detection needs at least one degree of freedom");
    BddVerdict v;
    v.cost = cost;
    v.degrees_of_freedom = dof;
    v.threshold = chi_squared_quantile(1.0 - significance, dof);
    v.alarm = cost > v.threshold;
    return v;
}

}  // namespace fdia
