#include "fdia/detection.hpp"

#include "fdia/errors.hpp"
#include "fdia/io.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace fdia {

Threshold compute_threshold(std::span<const double> val_errors, double alpha) {
    if (val_errors.empty()) throw InputError("threshold needs at least one validation error");
    if (!(alpha > 0.0 && alpha <= 100.0)) throw InputError("alpha must lie in (0, 100]");
    std::vector<double> sorted(val_errors.begin(), val_errors.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    // The small offset keeps exact products such as 99 * 100 / 100 from
    // rounding up to the next rank.
    auto rank = static_cast<std::size_t>(std::ceil(alpha * n / 100.0 - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return {alpha, sorted[rank - 1]};
}

Label classify(double error, const Threshold& threshold) {
    return error > threshold.tau ? Label::Attack : Label::Normal;
}

DetectionReport evaluate_errors(std::span<const double> normal_errors, std::span<const double> attack_errors,
                                const Threshold& threshold) {
    if (normal_errors.empty() || attack_errors.empty()) throw InputError("evaluation needs non-empty normal and attacked sets");
    DetectionReport r;
    r.alpha = threshold.alpha;
    r.tau = threshold.tau;
    for (double e : attack_errors) (classify(e, threshold) == Label::Attack ? r.tp_count : r.fn_count)++;
    for (double e : normal_errors) (classify(e, threshold) == Label::Attack ? r.fp_count : r.tn_count)++;
    const auto na = static_cast<double>(attack_errors.size());
    const auto nn = static_cast<double>(normal_errors.size());
    r.tp = static_cast<double>(r.tp_count) / na;
    r.fn = static_cast<double>(r.fn_count) / na;
    r.fp = static_cast<double>(r.fp_count) / nn;
    r.tn = static_cast<double>(r.tn_count) / nn;
    return r;
}

DetectionReport evaluate(const AutoencoderModel& model, const Threshold& threshold,
                         const Eigen::MatrixXd& normal_rows, const Eigen::MatrixXd& attacked_rows) {
    if (normal_rows.rows() == 0 || attacked_rows.rows() == 0) throw InputError("evaluation needs non-empty normal and attacked sets");
    const Eigen::VectorXd normal = reconstruction_errors(model, normal_rows);
    const Eigen::VectorXd attacked = reconstruction_errors(model, attacked_rows);
    return evaluate_errors({normal.data(), static_cast<std::size_t>(normal.size())},
                           {attacked.data(), static_cast<std::size_t>(attacked.size())}, threshold);
}

std::vector<DetectionReport> threshold_sweep(std::span<const double> val_errors,
                                             std::span<const double> normal_errors,
                                             std::span<const double> attack_errors,
                                             const std::vector<double>& alphas) {
    std::vector<DetectionReport> out;
    for (double alpha : alphas) out.push_back(evaluate_errors(normal_errors, attack_errors, compute_threshold(val_errors, alpha)));
    return out;
}

RocCurve roc_curve(std::span<const double> normal_errors, std::span<const double> attack_errors) {
    if (normal_errors.empty() || attack_errors.empty()) throw InputError("ROC needs non-empty normal and attacked sets");
    // Sweep the threshold downwards through every distinct error; equal
    // errors from either class move in one step.
    struct Scored {
        double error;
        bool attack;
    };
    std::vector<Scored> all;
    all.reserve(normal_errors.size() + attack_errors.size());
    for (double e : normal_errors) all.push_back({e, false});
    for (double e : attack_errors) all.push_back({e, true});
    std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) { return a.error > b.error; });

    const auto nn = static_cast<double>(normal_errors.size());
    const auto na = static_cast<double>(attack_errors.size());
    RocCurve roc;
    roc.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    for (std::size_t i = 0; i < all.size();) {
        const double e = all[i].error;
        while (i < all.size() && all[i].error == e) {
            (all[i].attack ? tp : fp)++;
            ++i;
        }
        roc.points.push_back({static_cast<double>(fp) / nn, static_cast<double>(tp) / na});
    }
    if (roc.points.back().fp_rate != 1.0 || roc.points.back().tp_rate != 1.0) roc.points.push_back({1.0, 1.0});
    for (std::size_t k = 1; k < roc.points.size(); ++k) {
        const auto& p = roc.points[k - 1];
        const auto& q = roc.points[k];
        roc.auc += (q.fp_rate - p.fp_rate) * 0.5 * (q.tp_rate + p.tp_rate);
    }
    return roc;
}

void write_report_csv(std::ostream& out, const std::vector<DetectionReport>& reports) {
    out << "alpha,tau,TP,FN,TN,FP\n";
    for (const auto& r : reports) {
        out << format_double(r.alpha) << ',' << format_double(r.tau) << ',' << format_double(r.tp) << ','
            << format_double(r.fn) << ',' << format_double(r.tn) << ',' << format_double(r.fp) << '\n';
    }
}

void write_roc_csv(std::ostream& out, const RocCurve& roc) {
    out << "fp_rate,tp_rate\n";
    for (const auto& p : roc.points) out << format_double(p.fp_rate) << ',' << format_double(p.tp_rate) << '\n';
}

}  // namespace fdia
