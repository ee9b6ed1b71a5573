#pragma once

#include <cstdint>

namespace rr {

// A window into one Wasm instance's linear memory. Offsets are 32-bit
// because Wasm32 linear memory is 32-bit addressed; lengths are 64-bit so
// region arithmetic never overflows host-side.
struct MemoryRegion {
    std::uint32_t offset = 0;
    std::uint64_t length = 0;

    std::uint64_t end() const { return std::uint64_t(offset) + length; }

    bool operator==(const MemoryRegion&) const = default;
};

}  // namespace rr
