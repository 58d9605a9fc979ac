#include "cdiff/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cdiff/errors.hpp"

namespace cdiff {

namespace {

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && begin != end;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

SeriesData read_series_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    SeriesData out;
    std::string line;
    long line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        double value;
        bool ok = false;
        std::string date;
        if (fields.size() == 1) {
            ok = parse_double(fields[0], value);
        } else {
            date = fields.front();
            ok = parse_double(fields.back(), value);
        }
        if (!ok) {
            if (first_content_line) {  // header row
                first_content_line = false;
                continue;
            }
            throw DataError(path + ": malformed row at line " + std::to_string(line_no));
        }
        first_content_line = false;
        out.values.push_back(value);
        if (!date.empty()) out.dates.push_back(date);
    }
    if (out.values.empty()) throw DataError(path + ": no observations");
    return out;
}

void write_series_csv(const std::string& path, std::span<const double> values, double delta) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << "index,time,value\n";
    for (std::size_t i = 0; i < values.size(); ++i)
        out << i << ',' << static_cast<double>(i) * delta << ',' << values[i] << '\n';
    if (!out) throw IoError("write failed for " + path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(12);
    for (std::size_t j = 0; j < header.size(); ++j)
        out << header[j] << (j + 1 < header.size() ? ',' : '\n');
    std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << columns[j][i] << (j + 1 < columns.size() ? ',' : '\n');
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace cdiff
