#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace rr {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

// FNV-1a over the bytes. Integrity oracle for tests and the benchmark
// harness; payloads on the wire never carry it.
constexpr std::uint64_t checksum64(std::span<const std::uint8_t> data) {
    std::uint64_t h = kFnvOffsetBasis;
    for (std::uint8_t b : data) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t checksum64(const void* data, std::size_t len) {
    return checksum64(std::span(static_cast<const std::uint8_t*>(data), len));
}

}  // namespace rr
