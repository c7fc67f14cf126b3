#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "extremis/types.hpp"

namespace extremis {

/// Shortest round-trip decimal form of a double ("1.25", "0.1", "1e+300").
std::string format_double(double v);

struct CsvTable {
    std::vector<std::string> header;  // empty when the file had none
    std::vector<std::vector<std::string>> rows;
};

/// Comma- or whitespace-separated table. With detect_header, a first line
/// with no numeric field at all is treated as a header.
CsvTable read_delimited(std::istream& in, bool detect_header);
CsvTable read_delimited_file(const std::string& path, bool detect_header);

/// Streaming variant for large files: invokes fn(fields, data_row_index)
/// per row without keeping the table in memory.
void for_each_row(std::istream& in, bool detect_header,
                  const std::function<void(std::vector<std::string>&, std::size_t)>& fn);

/// Strictly numeric CSV with a header row (the fit/score data format).
FeatureMatrix read_feature_csv(const std::string& path, std::vector<std::string>* header = nullptr);

void write_feature_csv(std::ostream& out, const FeatureMatrix& data,
                       const std::vector<std::string>& header);

bool parse_double(const std::string& s, double& out);

}  // namespace extremis
