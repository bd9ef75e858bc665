#pragma once

#include "cqc/cqc.hpp"
#include "cqc/dataset.hpp"
#include "cqc/simlab.hpp"

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

namespace cqc::io {

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

// Columns y, a and x1..xd in any order; other columns are ignored. Throws
// DataError naming the offending line.
Dataset parse_dataset_csv(std::istream& in, std::string_view source = "<input>");
Dataset read_dataset_csv(const std::filesystem::path& path);

std::string dataset_csv(const Dataset& data);
std::string error_report_csv(const ErrorReport& report);
std::string error_report_json(const ErrorReport& report);
// Header: "y" followed by the x1 value of every x-grid row; one line per y.
std::string surface_csv(const Surface& surface);

// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace cqc::io
