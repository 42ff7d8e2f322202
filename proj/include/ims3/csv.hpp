#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ims3/errors.hpp"

namespace ims3 {

/// Shortest text form that round-trips the exact f64 value.
std::string format_double(double x);
double parse_double(const std::string& s);

/// Streaming CSV writer with a mandatory header row.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
    std::size_t width_;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace ims3
