#include "mfgtrack/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace mfgtrack {

std::string build_id() {
#ifdef MFGTRACK_BUILD_ID
    return MFGTRACK_BUILD_ID;
#else
    return "unknown";
#endif
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::string& path) : file_(std::make_unique<std::ofstream>(path)) {
    if (!file_->is_open()) throw std::runtime_error("CsvWriter: cannot open " + path);
    stream_ = file_.get();
}

CsvWriter::CsvWriter(std::ostream& os) : stream_(&os) {}

std::ostream& CsvWriter::os() { return *stream_; }

void CsvWriter::metadata(const std::string& key, const std::string& value) {
    os() << "# " << key << "=" << value << "\n";
}

void CsvWriter::metadata(const std::string& key, double value) {
    metadata(key, format_number(value));
}

void CsvWriter::metadata(const std::string& key, std::uint64_t value) {
    metadata(key, std::to_string(value));
}

void CsvWriter::header(std::initializer_list<std::string> cols) {
    bool first = true;
    for (const auto& c : cols) {
        if (!first) os() << ",";
        os() << c;
        first = false;
    }
    os() << "\n";
}

void CsvWriter::row(std::initializer_list<double> vals) {
    bool first = true;
    for (double v : vals) {
        if (!first) os() << ",";
        os() << format_number(v);
        first = false;
    }
    os() << "\n";
}

void CsvWriter::raw_row(const std::string& line) { os() << line << "\n"; }

}  // namespace mfgtrack
