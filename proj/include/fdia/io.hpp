#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fdia {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

double parse_double(std::string_view token, const std::string& context);
long long parse_int(std::string_view token, const std::string& context);

std::vector<std::string> split_fields(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Writes a row-major CSV with an optional header row.
void write_csv(std::ostream& out, const Eigen::MatrixXd& m,
               const std::vector<std::string>& header = {});
void write_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
               const std::vector<std::string>& header = {});

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;
};

/// Reads a numeric CSV whose first row is a header. Empty cells are an error.
CsvTable read_csv(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// 64-bit FNV-1a, used to fingerprint input files in metadata sidecars.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace fdia
