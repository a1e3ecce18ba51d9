#pragma once

#include <string>
#include <vector>

namespace bermuda {

// CSV cells are written with enough digits that re-parsing reproduces the
// exact double.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace bermuda
