#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace c3 {

/// Counter-based deterministic random stream. Every draw is a pure function of
/// (seed, stream id, counter), so sequences are identical across runs and
/// platforms and never depend on call interleaving elsewhere in the process.
/// Streams are single-owner; concurrent work gets disjoint stream ids instead
/// of a shared generator.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id) {}

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform();

    /// Standard normal via Box-Muller; consumes two uniforms per pair.
    double normal();

    float normal_f() { return static_cast<float>(normal()); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a 64-bit hash; used to derive per-string seeds and config digests.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(std::string_view s);

}  // namespace c3
