#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "c3/errors.hpp"

namespace c3 {

/// Locale-independent float rendering at 6 significant digits ("%.6g").
std::string fmt_g6(double v);

/// CSV file with LF line endings and fmt_g6 float rendering.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    void row(const std::vector<std::string>& cells);
    const std::string& path() const { return path_; }

    static std::string cell(double v) { return fmt_g6(v); }
    static std::string cell(int v) { return std::to_string(v); }

private:
    std::string path_;
    std::ofstream f_;
};

std::string base64_encode(const void* data, std::size_t len);
std::vector<std::uint8_t> base64_decode(const std::string& text);

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal line plot: axes, ticks, one polyline per series.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series);

/// ISO-8601 UTC timestamp of now.
std::string timestamp_utc();

void ensure_directory(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace c3
