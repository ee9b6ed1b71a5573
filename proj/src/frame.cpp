#include "roadrunner/frame.hpp"

#include <cstring>

namespace rr {

namespace {

void put_u16(std::uint8_t* p, std::uint16_t v) {
    p[0] = std::uint8_t(v);
    p[1] = std::uint8_t(v >> 8);
}

void put_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; i++) p[i] = std::uint8_t(v >> (8 * i));
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; i++) p[i] = std::uint8_t(v >> (8 * i));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; i++) v |= std::uint32_t(p[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; i++) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
}

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

std::string workflow_to_hex(const WorkflowId& id) {
    static const char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(32);
    for (std::uint8_t b : id) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

std::optional<WorkflowId> workflow_from_hex(std::string_view hex) {
    if (hex.size() != 32) return std::nullopt;
    WorkflowId id{};
    for (std::size_t i = 0; i < 16; i++) {
        int hi = hex_nibble(hex[2 * i]);
        int lo = hex_nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        id[i] = std::uint8_t((hi << 4) | lo);
    }
    return id;
}

std::array<std::uint8_t, kFrameHeaderSize> encode_frame_header(const FrameHeader& header) {
    std::array<std::uint8_t, kFrameHeaderSize> out{};
    std::memcpy(out.data(), kFrameMagic.data(), 4);
    out[4] = kFrameVersion;
    out[5] = std::uint8_t(header.msg_type);
    put_u16(out.data() + 6, header.flags);
    std::memcpy(out.data() + 8, header.workflow_id.data(), 16);
    put_u32(out.data() + 24, header.source_fn);
    put_u32(out.data() + 28, header.target_fn);
    put_u64(out.data() + 32, header.payload_len);
    return out;
}

Result<FrameHeader> decode_frame_header(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != kFrameHeaderSize) {
        return make_error(ErrorKind::FrameMalformed,
                          "frame header must be exactly 40 bytes, got " +
                              std::to_string(bytes.size()));
    }
    if (std::memcmp(bytes.data(), kFrameMagic.data(), 4) != 0) {
        return make_error(ErrorKind::FrameMalformed, "bad frame magic");
    }
    if (bytes[4] != kFrameVersion) {
        return make_error(ErrorKind::FrameMalformed,
                          "unsupported frame version " + std::to_string(bytes[4]));
    }
    std::uint8_t type = bytes[5];
    if (type < std::uint8_t(MsgType::Data) || type > std::uint8_t(MsgType::Error)) {
        return make_error(ErrorKind::FrameMalformed,
                          "message type " + std::to_string(type) + " out of range");
    }
    FrameHeader header;
    header.msg_type = MsgType(type);
    header.flags = get_u16(bytes.data() + 6);
    std::memcpy(header.workflow_id.data(), bytes.data() + 8, 16);
    header.source_fn = get_u32(bytes.data() + 24);
    header.target_fn = get_u32(bytes.data() + 28);
    header.payload_len = get_u64(bytes.data() + 32);
    return header;
}

}  // namespace rr
