#include "extremis/csv.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace extremis {

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    if (line.find(',') != std::string::npos) {
        std::string field;
        std::stringstream ss(line);
        while (std::getline(ss, field, ',')) {
            while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
                field.pop_back();
            std::size_t start = field.find_first_not_of(' ');
            fields.push_back(start == std::string::npos ? std::string() : field.substr(start));
        }
        if (!line.empty() && line.back() == ',') fields.emplace_back();
    } else {
        std::stringstream ss(line);
        std::string field;
        while (ss >> field) {
            while (!field.empty() && field.back() == '\r') field.pop_back();
            fields.push_back(field);
        }
    }
    return fields;
}

// Header heuristic: a row qualifies only when no field parses as a number,
// so mixed rows (e.g. network logs with categorical columns) stay data.
bool looks_like_header(const std::vector<std::string>& fields) {
    double tmp;
    for (const auto& f : fields)
        if (parse_double(f, tmp)) return false;
    return !fields.empty();
}

}  // namespace

CsvTable read_delimited(std::istream& in, bool detect_header) {
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (fields.empty()) continue;
        if (first && detect_header && looks_like_header(fields)) {
            table.header = std::move(fields);
        } else {
            table.rows.push_back(std::move(fields));
        }
        first = false;
    }
    return table;
}

void for_each_row(std::istream& in, bool detect_header,
                  const std::function<void(std::vector<std::string>&, std::size_t)>& fn) {
    std::string line;
    bool first = true;
    std::size_t index = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (fields.empty()) continue;
        if (!(first && detect_header && looks_like_header(fields))) fn(fields, index++);
        first = false;
    }
}

CsvTable read_delimited_file(const std::string& path, bool detect_header) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open " + path);
    return read_delimited(in, detect_header);
}

FeatureMatrix read_feature_csv(const std::string& path, std::vector<std::string>* header) {
    CsvTable table = read_delimited_file(path, /*detect_header=*/true);
    if (table.rows.empty()) throw InvalidInputError(path + ": no data rows");
    const std::size_t d = table.rows.front().size();
    std::vector<double> values;
    values.reserve(table.rows.size() * d);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != d)
            throw InvalidInputError(path + ": row " + std::to_string(i + 1) + " has " +
                                    std::to_string(row.size()) + " fields, expected " +
                                    std::to_string(d));
        for (std::size_t j = 0; j < d; ++j) {
            double v;
            if (!parse_double(row[j], v))
                throw InvalidInputError(path + ": non-numeric field '" + row[j] + "' at row " +
                                        std::to_string(i + 1) + ", column " + std::to_string(j + 1));
            values.push_back(v);
        }
    }
    if (header) *header = table.header;
    return FeatureMatrix(table.rows.size(), d, std::move(values));
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& data,
                       const std::vector<std::string>& header) {
    for (std::size_t j = 0; j < header.size(); ++j)
        out << (j ? "," : "") << header[j];
    if (!header.empty()) out << '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t j = 0; j < data.cols(); ++j)
            out << (j ? "," : "") << format_double(data(i, j));
        out << '\n';
    }
}

}  // namespace extremis
