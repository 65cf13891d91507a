#include "fbsde/csv.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fbsde {

std::string format_full(double v) {
    // shortest form that parses back exactly; 17 significant digits suffice
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {
    if (header_.empty()) throw std::invalid_argument("CsvWriter: empty header");
}

void CsvWriter::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size())
        throw std::invalid_argument("CsvWriter: row width does not match header");
    rows_.push_back(cells);
}

std::string CsvWriter::to_string() const {
    std::ostringstream os;
    auto emit = [&os](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            os << csv_escape(cells[i]);
        }
        os << '\n';
    };
    emit(header_);
    for (const auto& r : rows_) emit(r);
    return os.str();
}

void CsvWriter::write(const std::string& path) const {
    write_text_atomic(path, to_string());
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path tmp = dir / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            fs::remove(tmp, ec);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("rename failed for " + path + ": " + ec.message());
    }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> cur;
    std::string cell;
    bool quoted = false, anything = false;
    char c;
    while (in.get(c)) {
        if (quoted) {
            if (c == '"') {
                if (in.peek() == '"') { cell += '"'; in.get(); }
                else quoted = false;
            } else cell += c;
            continue;
        }
        switch (c) {
            case '"': quoted = true; anything = true; break;
            case ',': cur.push_back(cell); cell.clear(); anything = true; break;
            case '\r': break;
            case '\n':
                if (anything || !cell.empty() || !cur.empty()) {
                    cur.push_back(cell);
                    rows.push_back(std::move(cur));
                }
                cur = {};
                cell.clear();
                anything = false;
                break;
            default: cell += c; anything = true; break;
        }
    }
    if (anything || !cell.empty() || !cur.empty()) {
        cur.push_back(cell);
        rows.push_back(std::move(cur));
    }
    return rows;
}

}  // namespace fbsde
