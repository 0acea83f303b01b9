#pragma once

#include <string>

#include "wadamp/data_window.hpp"

namespace wadamp::pipeline {

/// UTF-8 CSV with a header row; first column `time` in seconds, one column
/// per channel, values at 17 significant digits (lossless round trip).
void csv_export(const DataWindow& window, const std::string& path);

/// Rejects malformed headers, ragged rows and non-uniform time (jitter above
/// 1e-6 of the sample time), naming the offending line.
DataWindow csv_import(const std::string& path);

}  // namespace wadamp::pipeline
