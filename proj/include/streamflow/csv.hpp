#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace streamflow::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name, or nullopt.
    std::optional<std::size_t> column(std::string_view name) const;
};

/// Reads a comma-separated file with a header row. Blank lines are skipped.
/// Throws DataError when the file is missing or a row has the wrong arity.
Table read(const std::filesystem::path& path);

std::vector<std::string> split_line(std::string_view line);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Parses a full-field double. Empty (after trimming) returns nullopt;
/// "nan" and other junk throw DataError.
std::optional<double> parse_optional_double(std::string_view field, std::string_view context);
double parse_double(std::string_view field, std::string_view context);

std::string_view trim(std::string_view s);

/// Writes `content` to `path` (creating parent directories), replacing any existing file.
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace streamflow::csv
