#pragma once

#include <string>
#include <vector>

namespace fbsde {

/// Shortest representation that round-trips a double (up to 17 significant
/// digits).
std::string format_full(double v);

/// RFC-4180 quoting: wrap in quotes when the field contains a comma, quote,
/// or newline; double embedded quotes.
std::string csv_escape(const std::string& field);

/// A small row-oriented CSV writer with atomic output (write to a temp file
/// in the target directory, then rename).
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(const std::vector<std::string>& cells);  // throws on width mismatch
    /// Writes header + rows; no partial file remains on error.
    void write(const std::string& path) const;

    std::string to_string() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

/// Minimal reader for files produced by CsvWriter (used by round-trip tests).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

/// Atomically writes arbitrary text (temp file + rename).
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace fbsde
