#include "c3/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <sstream>

namespace c3 {

std::string fmt_g6(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : path_(path), f_(path, std::ios::binary | std::ios::trunc) {
    if (!f_) throw IoError("cannot open for writing: " + path);
    row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) f_ << ',';
        f_ << cells[i];
    }
    f_ << '\n';
    if (!f_) throw IoError("short write: " + path_);
}

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t chunk = static_cast<std::uint32_t>(p[i]) << 16;
        if (i + 1 < len) chunk |= static_cast<std::uint32_t>(p[i + 1]) << 8;
        if (i + 2 < len) chunk |= p[i + 2];
        out.push_back(kB64[(chunk >> 18) & 63]);
        out.push_back(kB64[(chunk >> 12) & 63]);
        out.push_back(i + 1 < len ? kB64[(chunk >> 6) & 63] : '=');
        out.push_back(i + 2 < len ? kB64[chunk & 63] : '=');
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    int acc = 0, bits = 0;
    for (char c : text) {
        if (c == '=' || c == '\n' || c == '\r') continue;
        const int v = val(c);
        if (v < 0) throw FormatError("invalid base64 character");
        acc = (acc << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xff));
        }
    }
    return out;
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<SvgSeries>& series) {
    const int width = 640, height = 400;
    const int ml = 60, mr = 20, mt = 40, mb = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n";
    svg << "<line x1='" << ml << "' y1='" << height - mb << "' x2='" << width - mr << "' y2='"
        << height - mb << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << height - mb
        << "' stroke='black'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        svg << "<line x1='" << px(xv) << "' y1='" << height - mb << "' x2='" << px(xv) << "' y2='"
            << height - mb + 5 << "' stroke='black'/>\n";
        svg << "<text x='" << px(xv) << "' y='" << height - mb + 18
            << "' text-anchor='middle' font-size='10'>" << fmt_g6(xv) << "</text>\n";
        svg << "<line x1='" << ml - 5 << "' y1='" << py(yv) << "' x2='" << ml << "' y2='" << py(yv)
            << "' stroke='black'/>\n";
        svg << "<text x='" << ml - 8 << "' y='" << py(yv) + 3
            << "' text-anchor='end' font-size='10'>" << fmt_g6(yv) << "</text>\n";
    }
    int ci = 0;
    for (const auto& s : series) {
        const char* color = kColors[ci % 5];
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (const auto& [x, y] : s.points) svg << px(x) << "," << py(y) << " ";
        svg << "'/>\n";
        svg << "<text x='" << width - mr - 5 << "' y='" << mt + 14 * ci
            << "' text-anchor='end' font-size='11' fill='" << color << "'>" << s.label
            << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    write_text_file(path, svg.str());
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IoError("cannot create directory " + path + ": " + ec.message());
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw IoError("short write: " + path);
}

}  // namespace c3
