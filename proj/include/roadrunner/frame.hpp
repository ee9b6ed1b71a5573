#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "roadrunner/error.hpp"

namespace rr {

using WorkflowId = std::array<std::uint8_t, 16>;

std::string workflow_to_hex(const WorkflowId& id);
std::optional<WorkflowId> workflow_from_hex(std::string_view hex);

enum class MsgType : std::uint8_t {
    Data = 1,
    Ack = 2,
    Register = 3,
    Error = 4,
};

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {0x52, 0x52, 0x4E, 0x52};  // "RRNR"
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 40;

// Flag bit 0: payload moved over the zero-copy hose path. Remaining bits
// are reserved and must be zero.
inline constexpr std::uint16_t kFlagZeroCopy = 0x0001;

// Fixed-layout header preceding every kernel/network payload. Payload bytes
// are never part of the encoding; they are streamed separately so the wire
// path never buffers or transforms them.
//
// Layout, little-endian integers:
//   bytes 0-3   magic "RRNR"
//         4     version (1)
//         5     msg_type
//         6-7   flags
//         8-23  workflow_id
//         24-27 source_fn
//         28-31 target_fn
//         32-39 payload_len
struct FrameHeader {
    MsgType msg_type = MsgType::Data;
    std::uint16_t flags = 0;
    WorkflowId workflow_id{};
    std::uint32_t source_fn = 0;
    std::uint32_t target_fn = 0;
    std::uint64_t payload_len = 0;

    bool operator==(const FrameHeader&) const = default;
};

std::array<std::uint8_t, kFrameHeaderSize> encode_frame_header(const FrameHeader& header);

// Inverse of encode_frame_header. FrameMalformed when the input is not
// exactly 40 bytes, the magic mismatches, version != 1, or msg_type is out
// of range.
Result<FrameHeader> decode_frame_header(std::span<const std::uint8_t> bytes);

}  // namespace rr
