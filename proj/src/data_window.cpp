#include "wadamp/data_window.hpp"

#include <set>

#include "wadamp/errors.hpp"

namespace wadamp {

DataWindow::DataWindow(double sample_time, double start_time, std::vector<std::string> names,
                       Eigen::MatrixXd data)
    : sample_time_(sample_time),
      start_time_(start_time),
      names_(std::move(names)),
      data_(std::move(data)) {
    if (sample_time_ <= 0.0) {
        throw ValidationError("DataWindow: sample_time must be positive");
    }
    if (data_.rows() < 1) {
        throw ValidationError("DataWindow: need at least one sample");
    }
    if (static_cast<Eigen::Index>(names_.size()) != data_.cols()) {
        throw ValidationError("DataWindow: channel name count does not match data columns");
    }
    std::set<std::string> unique(names_.begin(), names_.end());
    if (unique.size() != names_.size()) {
        throw ValidationError("DataWindow: duplicate channel names");
    }
}

bool DataWindow::has_channel(const std::string& name) const {
    for (const auto& n : names_) {
        if (n == name) return true;
    }
    return false;
}

Eigen::Index DataWindow::channel_index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (names_[i] == name) return static_cast<Eigen::Index>(i);
    }
    throw ValidationError("DataWindow: unknown channel '" + name + "'");
}

Eigen::VectorXd DataWindow::channel(const std::string& name) const {
    return data_.col(channel_index(name));
}

DataWindow DataWindow::with_data(Eigen::MatrixXd data) const {
    return DataWindow(sample_time_, start_time_, names_, std::move(data));
}

}  // namespace wadamp
