#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>

namespace mfgtrack {

std::string build_id();
std::string format_number(double v);

// CSV output with a '#'-prefixed metadata header; no timestamps, so identical
// inputs give byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    explicit CsvWriter(std::ostream& os);

    void metadata(const std::string& key, const std::string& value);
    void metadata(const std::string& key, double value);
    void metadata(const std::string& key, std::uint64_t value);
    void header(std::initializer_list<std::string> cols);
    void row(std::initializer_list<double> vals);
    void raw_row(const std::string& line);

private:
    std::ostream& os();
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_{nullptr};
};

}  // namespace mfgtrack
