#include "wadamp/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "wadamp/errors.hpp"

namespace wadamp::pipeline {

void csv_export(const DataWindow& window, const std::string& path) {
    for (const auto& name : window.names()) {
        if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos) {
            throw IoError("csv_export: channel name '" + name + "' cannot be represented");
        }
    }
    std::ofstream out(path);
    if (!out) throw IoError("csv_export: cannot open '" + path + "' for writing");

    out << "time";
    for (const auto& name : window.names()) out << "," << name;
    out << "\n";

    char buf[32];
    for (Eigen::Index i = 0; i < window.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", window.time(i));
        out << buf;
        for (Eigen::Index j = 0; j < window.channel_count(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", window.data()(i, j));
            out << "," << buf;
        }
        out << "\n";
    }
    if (!out) throw IoError("csv_export: write to '" + path + "' failed");
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(const std::string& field, std::size_t line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    auto result = std::from_chars(begin, end, value);
    if (result.ec != std::errc() || result.ptr != end) {
        throw IoError("csv_import: invalid number '" + field + "' at line " +
                      std::to_string(line_no));
    }
    return value;
}

}  // namespace

DataWindow csv_import(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("csv_import: cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw IoError("csv_import: empty file '" + path + "'");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_line(line);
    if (header.empty() || header[0] != "time") {
        throw IoError("csv_import: first header column must be 'time' in '" + path + "'");
    }
    std::vector<std::string> names(header.begin() + 1, header.end());
    if (names.empty()) throw IoError("csv_import: no data channels in '" + path + "'");

    std::vector<double> times;
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != header.size()) {
            throw IoError("csv_import: ragged row at line " + std::to_string(line_no));
        }
        times.push_back(parse_double(fields[0], line_no));
        std::vector<double> row(names.size());
        for (std::size_t j = 0; j < names.size(); ++j) {
            row[j] = parse_double(fields[j + 1], line_no);
        }
        rows.push_back(std::move(row));
    }
    if (times.size() < 2) {
        throw IoError("csv_import: need at least two rows to infer the sample time");
    }

    const double Ts = times[1] - times[0];
    if (Ts <= 0.0) throw IoError("csv_import: non-increasing time column at line 3");
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double expected = times[0] + static_cast<double>(i) * Ts;
        if (std::abs(times[i] - expected) > 1e-6 * Ts) {
            throw IoError("csv_import: non-uniform time column at line " + std::to_string(i + 2));
        }
    }

    Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < names.size(); ++j) {
            data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return DataWindow(Ts, times[0], names, std::move(data));
}

}  // namespace wadamp::pipeline
