#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace qcns {

// CSV writer with shortest round-trip formatting for doubles. All numeric
// output in the project goes through this so re-reading a file reproduces
// every value bit-exactly.
class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path& path);

    void header(const std::vector<std::string>& columns);

    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(const std::string& v);
    void end_row();

    void flush() { out_.flush(); }

  private:
    std::ofstream out_;
    bool row_started_ = false;
};

std::string format_double(double v);  // shortest representation that round-trips

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    size_t column_index(const std::string& name) const;  // throws if absent
};

// Strict reader: every row must have the header's column count and every
// field must parse as a double. Throws std::runtime_error on violations.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace qcns
