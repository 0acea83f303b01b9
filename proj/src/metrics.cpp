#include "wadamp/metrics.hpp"

#include <cmath>

#include "wadamp/errors.hpp"

namespace wadamp::pipeline {

double metric_auc(const DataWindow& window, const std::string& channel, double from, double to) {
    const double t0 = window.start_time();
    const double Ts = window.sample_time();
    const double t_last = window.time(window.size() - 1);
    if (from < t0 - 1e-9 || to > t_last + 1e-9) {
        throw ValidationError("metric_auc: interval outside the window");
    }
    const Eigen::Index i0 = static_cast<Eigen::Index>(std::ceil((from - t0) / Ts - 1e-9));
    const Eigen::Index i1 = static_cast<Eigen::Index>(std::floor((to - t0) / Ts + 1e-9));
    if (i1 <= i0) throw ValidationError("metric_auc: empty interval");

    Eigen::VectorXd x = window.channel(channel).cwiseAbs();
    double area = 0.0;
    for (Eigen::Index i = i0; i < i1; ++i) area += 0.5 * (x(i) + x(i + 1)) * Ts;
    return area;
}

double metric_relative_error(const Eigen::VectorXd& reference, const Eigen::VectorXd& delayed) {
    if (reference.size() != delayed.size()) {
        throw ValidationError("metric_relative_error: length mismatch");
    }
    const double norm = reference.norm();
    if (norm == 0.0) throw ValidationError("metric_relative_error: zero-norm reference");
    return (reference - delayed).norm() / norm;
}

double metric_peak(const DataWindow& window, const std::string& channel, double at_time) {
    const double t0 = window.start_time();
    const Eigen::Index idx =
        static_cast<Eigen::Index>(std::llround((at_time - t0) / window.sample_time()));
    if (idx < 0 || idx >= window.size()) {
        throw ValidationError("metric_peak: time outside the window");
    }
    return std::abs(window.channel(channel)(idx));
}

}  // namespace wadamp::pipeline
