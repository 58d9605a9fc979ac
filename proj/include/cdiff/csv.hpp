#ifndef CDIFF_CSV_HPP
#define CDIFF_CSV_HPP

#include <span>
#include <string>
#include <vector>

namespace cdiff {

struct SeriesData {
    std::vector<double> values;
    std::vector<std::string> dates;  // empty when the file has no date column
};

/// One observation per row; an optional leading date column is kept for
/// export but ignored by estimation. A non-numeric first row is treated as a
/// header. Malformed rows raise DataError naming the line.
SeriesData read_series_csv(const std::string& path);

/// (index, time, value) rows; time = index * delta.
void write_series_csv(const std::string& path, std::span<const double> values, double delta);

/// Generic rectangular CSV with a header row.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns);

}  // namespace cdiff

#endif  // CDIFF_CSV_HPP
