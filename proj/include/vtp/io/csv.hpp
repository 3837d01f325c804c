#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vtp::io {

/// 17 significant digits, round-trip exact for doubles.
std::string format_double(double value);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view text);

/// Row writer with RFC 4180 quoting.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}
    void header(const std::vector<std::string>& names);
    CsvWriter& field(std::string_view text);
    CsvWriter& field(double value);
    CsvWriter& field(long long value);
    CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
    CsvWriter& field(std::size_t value) { return field(static_cast<long long>(value)); }
    void end_row();

private:
    std::ostream& out_;
    bool row_started_ = false;
};

struct CsvRow {
    std::size_t line = 0;  // 1-based line number in the file
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;

    /// Column index by name, or -1.
    int column(std::string_view name) const;
};

/// Parses RFC 4180 CSV (quoted fields may not span lines). Throws DataError
/// naming the file and line on malformed input.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, const std::string& source);

/// Strict number parsing; throws DataError with source and line on failure.
double parse_double(std::string_view text, const std::string& source, std::size_t line);
long long parse_int(std::string_view text, const std::string& source, std::size_t line);

/// Reads a whole file; throws DataError when it cannot be opened.
std::string read_file(const std::filesystem::path& path);
/// Creates parent directories and overwrites the file.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace vtp::io
