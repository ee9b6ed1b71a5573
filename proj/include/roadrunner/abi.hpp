#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roadrunner/error.hpp"
#include "roadrunner/wasm/module.hpp"

namespace rr::abi {

// Host import namespace guests link against.
inline constexpr const char* kHostModule = "roadrunner";
inline constexpr const char* kSendToHost = "send_to_host";

// Linear-memory layout conventions shared by the shim and every guest:
// bytes [0, 8) are reserved so that offset 0 can mean allocation failure,
// and the two mailbox words tell a guest where delivered data landed
// before run() is invoked.
inline constexpr std::uint32_t kMailboxOffsetAddr = 8;   // u32 LE: delivered offset
inline constexpr std::uint32_t kMailboxLengthAddr = 12;  // u32 LE: delivered length
inline constexpr std::uint32_t kReservedLowBytes = 16;

struct RequiredExport {
    const char* name;
    wasm::FuncType type;
};

// Exports every conformant guest must provide, with exact signatures.
const std::vector<RequiredExport>& required_exports();

// The one import a conformant guest may declare: roadrunner.send_to_host(i32, i32).
const wasm::FuncType& send_to_host_type();

struct ConformanceReport {
    bool conformant = false;
    std::vector<std::string> problems;
};

// Static inspection of a module's import/export sections against the guest
// contract. Extra exports are allowed; extra imports are not.
ConformanceReport check_module(const wasm::Module& module);
Result<ConformanceReport> check_file(const std::string& path);

// Pseudorandom payload generator mirroring the producer guest: a 64-bit
// LCG stepped once per byte, emitting the low byte of the state after each
// step. Host-side twin of the guest implementation, used as the integrity
// oracle by tests and the benchmark harness.
inline constexpr std::uint64_t kLcgMultiplier = 6364136223846793005ull;
inline constexpr std::uint64_t kLcgIncrement = 1442695040888963407ull;

void reference_payload(std::uint64_t seed, std::span<std::uint8_t> out);
std::vector<std::uint8_t> reference_payload(std::uint64_t seed, std::size_t n);

// Parameter block staged into the producer guest: seed and byte count,
// little-endian u64 each.
std::array<std::uint8_t, 16> encode_producer_params(std::uint64_t seed, std::uint64_t n);

}  // namespace rr::abi
