#include "aoi/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace aoi {

CsvWriter::CsvWriter(const std::string& path, const std::string& provenance,
                     const std::vector<std::string>& columns)
    : out_(path) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    out_ << "# " << provenance << "\n";
    row(columns);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << cells[i];
    }
    out_ << '\n';
    out_.flush();
}

void CsvWriter::numeric_row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(num(v));
    row(s);
}

std::string CsvWriter::num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace aoi
