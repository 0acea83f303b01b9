#pragma once

#include <Eigen/Dense>
#include <string>

#include "wadamp/data_window.hpp"

namespace wadamp::pipeline {

/// Trapezoidal integral of |channel| over [from, to] (endpoints snapped to
/// the sample grid).
double metric_auc(const DataWindow& window, const std::string& channel, double from, double to);

/// ||reference - delayed||_2 / ||reference||_2.
double metric_relative_error(const Eigen::VectorXd& reference, const Eigen::VectorXd& delayed);

/// |channel| at the sample nearest to at_time.
double metric_peak(const DataWindow& window, const std::string& channel, double at_time);

}  // namespace wadamp::pipeline
