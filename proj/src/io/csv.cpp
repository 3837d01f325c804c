#include "vtp/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vtp/core/error.hpp"

namespace vtp::io {

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

void CsvWriter::header(const std::vector<std::string>& names) {
    for (const auto& n : names) field(n);
    end_row();
}

CsvWriter& CsvWriter::field(std::string_view text) {
    if (row_started_) out_ << ',';
    out_ << csv_field(text);
    row_started_ = true;
    return *this;
}

CsvWriter& CsvWriter::field(double value) {
    return field(std::string_view(format_double(value)));
}

CsvWriter& CsvWriter::field(long long value) {
    return field(std::string_view(std::to_string(value)));
}

void CsvWriter::end_row() {
    out_ << "\r\n";
    row_started_ = false;
}

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
    CsvTable table;
    bool have_header = false;
    std::size_t line = 1;
    std::size_t pos = 0;
    auto fail = [&](std::size_t at, const std::string& what) {
        throw DataError(source + ":" + std::to_string(at) + ": " + what);
    };
    while (pos < text.size()) {
        const std::size_t record_line = line;
        std::vector<std::string> fields;
        std::string cur;
        bool was_quoted = false;
        bool blank = true;
        // one record; quoted fields may span lines
        while (pos < text.size()) {
            const char c = text[pos];
            if (c == '"') {
                if (!cur.empty() || was_quoted) fail(line, "unexpected quote");
                was_quoted = true;
                blank = false;
                ++pos;
                for (;;) {
                    if (pos >= text.size()) fail(record_line, "unterminated quoted field");
                    const char q = text[pos++];
                    if (q == '"') {
                        if (pos < text.size() && text[pos] == '"') {
                            cur += '"';
                            ++pos;
                        } else {
                            break;
                        }
                    } else {
                        if (q == '\n') ++line;
                        cur += q;
                    }
                }
            } else if (c == ',') {
                fields.push_back(std::move(cur));
                cur.clear();
                was_quoted = false;
                blank = false;
                ++pos;
            } else if (c == '\n' || (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n')) {
                pos += c == '\r' ? 2 : 1;
                ++line;
                break;
            } else {
                if (was_quoted) fail(line, "text after closing quote");
                cur += c;
                blank = false;
                ++pos;
            }
        }
        if (blank) continue;
        fields.push_back(std::move(cur));
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size())
            fail(record_line, "expected " + std::to_string(table.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
        table.rows.push_back({record_line, std::move(fields)});
    }
    if (!have_header) throw DataError(source + ": empty file");
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_file(path), path.string());
}

double parse_double(std::string_view text, const std::string& source, std::size_t line) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw DataError(source + ":" + std::to_string(line) + ": not a number: '" + std::string(text) + "'");
    return value;
}

long long parse_int(std::string_view text, const std::string& source, std::size_t line) {
    long long value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw DataError(source + ":" + std::to_string(line) + ": not an integer: '" + std::string(text) + "'");
    return value;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace vtp::io
