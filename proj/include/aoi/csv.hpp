#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace aoi {

// CSV emitter with a leading provenance comment line. Rows are flushed as
// they are written so interrupted runs keep their completed rows. Numbers
// are formatted with 12 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::string& provenance,
              const std::vector<std::string>& columns);

    void row(const std::vector<std::string>& cells);
    void numeric_row(const std::vector<double>& cells);

    static std::string num(double v);

private:
    std::ofstream out_;
};

}  // namespace aoi
