#include "c3/tensor.hpp"

#include <cstring>
#include <fstream>

namespace c3 {

namespace {

constexpr char kMagic[4] = {'C', '3', 'T', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void require_pow2_dims(int height, int width, const char* who) {
    if (height < 2 || width < 2 || !is_pow2(height) || !is_pow2(width)) {
        throw DimensionError(std::string(who) + ": spatial dims must be powers of two >= 2, got " +
                             std::to_string(height) + "x" + std::to_string(width));
    }
}

void save_tensor_file(const std::string& path, const std::vector<std::uint32_t>& dims,
                      const float* payload) {
    std::string header;
    header.append(kMagic, 4);
    put_u32le(header, kVersion);
    header.push_back(static_cast<char>(dims.size()));
    std::size_t count = 1;
    for (std::uint32_t d : dims) {
        put_u32le(header, d);
        count *= d;
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(header.data(), static_cast<std::streamsize>(header.size()));

    // Payload is f32 little-endian; serialize via byte copy (host is LE on all
    // supported targets, asserted by the round-trip tests).
    f.write(reinterpret_cast<const char*>(payload),
            static_cast<std::streamsize>(count * sizeof(float)));
    if (!f) throw IoError("short write: " + path);
}

RawTensor load_tensor_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 4 || std::memcmp(p, kMagic, 4) != 0) {
        throw FormatError("bad magic at offset 0 in " + path);
    }
    if (n < 8) throw FormatError("truncated header at offset 4 in " + path);
    const std::uint32_t version = get_u32le(p + 4);
    if (version != kVersion) {
        throw FormatError("unsupported version " + std::to_string(version) + " at offset 4 in " +
                          path);
    }
    if (n < 9) throw FormatError("truncated header at offset 8 in " + path);
    const int rank = p[8];
    std::size_t off = 9;
    if (n < off + 4u * rank) {
        throw FormatError("truncated dims at offset " + std::to_string(off) + " in " + path);
    }

    RawTensor t;
    std::size_t count = 1;
    for (int i = 0; i < rank; ++i) {
        const std::uint32_t d = get_u32le(p + off);
        t.dims.push_back(d);
        count *= d;
        off += 4;
    }
    const std::size_t need = count * sizeof(float);
    if (n - off < need) {
        throw FormatError("truncated payload at offset " + std::to_string(off) + " in " + path +
                          ": expected " + std::to_string(need) + " bytes, got " +
                          std::to_string(n - off));
    }
    t.data.resize(count);
    std::memcpy(t.data.data(), p + off, need);
    return t;
}

void save_tensor(const std::string& path, const FeatureMap& x) {
    save_tensor_file(path,
                     {static_cast<std::uint32_t>(x.channels), static_cast<std::uint32_t>(x.height),
                      static_cast<std::uint32_t>(x.width)},
                     x.data.data());
}

FeatureMap load_tensor(const std::string& path) {
    RawTensor t = load_tensor_file(path);
    if (t.dims.size() != 3) {
        throw FormatError("expected rank-3 tensor in " + path + ", got rank " +
                          std::to_string(t.dims.size()));
    }
    FeatureMap x(static_cast<int>(t.dims[0]), static_cast<int>(t.dims[1]),
                 static_cast<int>(t.dims[2]));
    x.data = std::move(t.data);
    return x;
}

}  // namespace c3
