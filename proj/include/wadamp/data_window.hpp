#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace wadamp {

/// Uniformly sampled multichannel signal block. Rows are samples, columns are
/// named channels. Immutable after construction.
class DataWindow {
public:
    DataWindow(double sample_time, double start_time, std::vector<std::string> names,
               Eigen::MatrixXd data);

    double sample_time() const { return sample_time_; }
    double start_time() const { return start_time_; }
    Eigen::Index size() const { return data_.rows(); }
    Eigen::Index channel_count() const { return data_.cols(); }
    double duration() const { return static_cast<double>(size() - 1) * sample_time_; }
    double time(Eigen::Index i) const { return start_time_ + static_cast<double>(i) * sample_time_; }

    const std::vector<std::string>& names() const { return names_; }
    const Eigen::MatrixXd& data() const { return data_; }

    bool has_channel(const std::string& name) const;
    Eigen::Index channel_index(const std::string& name) const;  // throws ValidationError
    Eigen::VectorXd channel(const std::string& name) const;
    Eigen::VectorXd channel(Eigen::Index i) const { return data_.col(i); }

    DataWindow with_data(Eigen::MatrixXd data) const;

private:
    double sample_time_;
    double start_time_;
    std::vector<std::string> names_;
    Eigen::MatrixXd data_;
};

}  // namespace wadamp
