#pragma once

#include "fdia/autoencoder.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <vector>

namespace fdia {

struct Threshold {
    double alpha = 99.0;  // percentile in (0, 100]
    double tau = 0.0;
};

enum class Label { Normal, Attack };

struct DetectionReport {
    double alpha = 0.0;
    double tau = 0.0;
    double tp = 0.0, fn = 0.0, tn = 0.0, fp = 0.0;  // per-class rates
    long tp_count = 0, fn_count = 0, tn_count = 0, fp_count = 0;
};

struct RocPoint {
    double fp_rate = 0.0;
    double tp_rate = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // (0,0) ... (1,1), fp_rate nondecreasing
    double auc = 0.0;
};

inline const std::vector<double> kDefaultAlphaSweep = {96.0, 97.0, 98.0, 99.0, 99.5, 100.0};

/// Nearest-rank percentile: the ceil(alpha/100 * n)-th smallest error.
Threshold compute_threshold(std::span<const double> val_errors, double alpha);

/// Attack iff error > tau.
Label classify(double error, const Threshold& threshold);

DetectionReport evaluate_errors(std::span<const double> normal_errors, std::span<const double> attack_errors,
                                const Threshold& threshold);
/// Raw (unscaled) observation rows; errors are computed with the model's scaler.
DetectionReport evaluate(const AutoencoderModel& model, const Threshold& threshold,
                         const Eigen::MatrixXd& normal_rows, const Eigen::MatrixXd& attacked_rows);

/// One report per alpha, thresholds taken from the validation errors.
std::vector<DetectionReport> threshold_sweep(std::span<const double> val_errors,
                                             std::span<const double> normal_errors,
                                             std::span<const double> attack_errors,
                                             const std::vector<double>& alphas);

RocCurve roc_curve(std::span<const double> normal_errors, std::span<const double> attack_errors);

/// alpha,tau,TP,FN,TN,FP with rates as fractions.
void write_report_csv(std::ostream& out, const std::vector<DetectionReport>& reports);
/// fp_rate,tp_rate
void write_roc_csv(std::ostream& out, const RocCurve& roc);

}  // namespace fdia
