#pragma once

#include "fdia/grid.hpp"

#include <Eigen/Dense>

namespace fdia {

inline constexpr double kDefaultSignificance = 0.05;

struct StateEstimate {
    Eigen::VectorXd x_hat;
    Eigen::VectorXd z_hat;  // H * x_hat
    double cost = 0.0;      // J = ||R^{-1/2} (z - z_hat)||^2
};

struct BddVerdict {
    double cost = 0.0;
    double threshold = 0.0;
    int degrees_of_freedom = 0;
    bool alarm = false;
};

/// Weighted least squares estimator with the QR factorisation of R^{-1/2} H
/// computed once, for repeated estimates against the same model.
class WlsEstimator {
public:
    explicit WlsEstimator(const GridModel& model);

    StateEstimate estimate(const Eigen::VectorXd& z) const;
    int degrees_of_freedom() const { return static_cast<int>(H_.rows() - H_.cols()); }

private:
    Eigen::MatrixXd H_;
    Eigen::VectorXd inv_sigma_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

StateEstimate wls_estimate(const MeasurementVector& z, const GridModel& model);

/// r = (I - H (H^T R^-1 H)^-1 H^T R^-1) z, evaluated through a Cholesky
/// factorisation of the normal equations. Independent of the QR route used by
/// wls_estimate.
Eigen::VectorXd residual(const MeasurementVector& z, const GridModel& model);

/// Chi-squared test of the WLS cost at the given significance level.
BddVerdict bdd_test(double cost, int dof, double significance = kDefaultSignificance);

/// Regularised lower incomplete gamma function P(a, x).
double regularized_gamma_p(double a, double x);
double chi_squared_cdf(double x, int dof);
/// Inverse of chi_squared_cdf for p in (0, 1).
double chi_squared_quantile(double p, int dof);

}  // namespace fdia
