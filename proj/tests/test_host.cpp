#include <doctest.h>

#include <random>

#include "roadrunner/checksum.hpp"
#include "guest_util.hpp"

using namespace rr;
using guestutil::bytes_of;
using guestutil::make_instance;
using guestutil::stage_input;

TEST_SUITE("host") {

TEST_CASE("instantiation resolves the guest contract") {
    auto echo = make_instance("echo.wasm");
    CHECK(echo->has_export("allocate_memory"));
    CHECK(echo->has_export("deallocate_memory"));
    CHECK(echo->has_export("run"));
    CHECK(echo->has_export("checksum"));
    CHECK(echo->memory_size() % 65536 == 0);
}

TEST_CASE("module missing a required export is rejected") {
    auto r = host::Instance::instantiate_file(guestutil::guest_path("broken.wasm"),
                                              host::InstanceLimits{16 << 20});
    REQUIRE(!r.ok());
    CHECK(r.error().kind == ErrorKind::GuestAbiMissing);
}

TEST_CASE("limit below the module minimum fails to instantiate") {
    auto r = host::Instance::instantiate_file(guestutil::guest_path("echo.wasm"),
                                              host::InstanceLimits{65536});
    REQUIRE(!r.ok());
    CHECK(r.error().kind == ErrorKind::AllocationFailed);
}

TEST_CASE("guest allocation basics") {
    auto inst = make_instance("echo.wasm");

    auto r1 = inst->guest_alloc(5);
    REQUIRE(r1.ok());
    CHECK(r1.value().length == 5);
    CHECK(r1.value().end() <= inst->memory_size());
    CHECK(r1.value().offset >= 16);  // reserved low memory

    auto zero = inst->guest_alloc(0);
    REQUIRE(!zero.ok());
    CHECK(zero.error().kind == ErrorKind::AllocationFailed);

    auto a = inst->guest_alloc(1024);
    auto b = inst->guest_alloc(1024);
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    bool disjoint = a.value().end() <= b.value().offset || b.value().end() <= a.value().offset;
    CHECK(disjoint);
}

TEST_CASE("allocation grows memory in page units") {
    auto inst = make_instance("echo.wasm", 64ull << 20);
    auto before = inst->memory_size();
    auto big = inst->guest_alloc(4 << 20);
    REQUIRE(big.ok());
    CHECK(inst->memory_size() > before);
    CHECK(inst->memory_size() % 65536 == 0);
}

TEST_CASE("deallocation and reuse") {
    auto inst = make_instance("echo.wasm");

    auto sentinel = inst->guest_alloc(128);
    REQUIRE(sentinel.ok());
    std::vector<std::uint8_t> pattern(128);
    for (std::size_t i = 0; i < pattern.size(); i++) pattern[i] = std::uint8_t(i * 7 + 1);
    REQUIRE(inst->write_memory(pattern, sentinel.value().offset).ok());
    auto sentinel_sum = checksum64(pattern.data(), pattern.size());

    auto region = inst->guest_alloc(64);
    REQUIRE(region.ok());
    REQUIRE(inst->guest_dealloc(region.value()).ok());
    auto again = inst->guest_alloc(64);
    REQUIRE(again.ok());

    // Past-the-end region is refused.
    MemoryRegion oob{std::uint32_t(inst->memory_size() - 16), 64};
    auto bad = inst->guest_dealloc(oob);
    REQUIRE(!bad.ok());
    CHECK(bad.error().kind == ErrorKind::BoundsViolation);

    // Double release must not disturb live allocations.
    REQUIRE(inst->guest_dealloc(again.value()).ok());
    REQUIRE(inst->guest_dealloc(again.value()).ok());
    auto readback = inst->read_memory(sentinel.value());
    REQUIRE(readback.ok());
    CHECK(checksum64(readback.value().data(), readback.value().size()) == sentinel_sum);
}

TEST_CASE("memory write/read round trip and guest checksum oracle") {
    auto inst = make_instance("consumer.wasm");
    auto data = bytes_of("hello");
    auto region = stage_input(*inst, data, false);
    REQUIRE(region.ok());

    auto back = inst->read_memory(region.value());
    REQUIRE(back.ok());
    CHECK(back.value() == data);

    auto guest_sum = inst->invoke(
        "checksum", std::array<std::uint64_t, 2>{region.value().offset, region.value().length});
    REQUIRE(guest_sum.ok());
    CHECK(guest_sum.value().at(0) == checksum64(data.data(), data.size()));
}

TEST_CASE("reads at the memory boundary are rejected") {
    auto inst = make_instance("echo.wasm");
    MemoryRegion at_end{std::uint32_t(inst->memory_size()), 1};
    auto r = inst->read_memory(at_end);
    REQUIRE(!r.ok());
    CHECK(r.error().kind == ErrorKind::BoundsViolation);
}

TEST_CASE("failed boundary write leaves the last page intact") {
    auto inst = make_instance("echo.wasm");
    std::uint64_t size = inst->memory_size();
    auto last_page = inst->read_memory(MemoryRegion{std::uint32_t(size - 65536), 65536});
    REQUIRE(last_page.ok());
    auto before = checksum64(last_page.value().data(), last_page.value().size());

    std::vector<std::uint8_t> data(64, 0xAB);
    auto s = inst->write_memory(data, std::uint32_t(size - 32));
    REQUIRE(!s.ok());
    CHECK(s.error().kind == ErrorKind::BoundsViolation);

    auto after_bytes = inst->read_memory(MemoryRegion{std::uint32_t(size - 65536), 65536});
    REQUIRE(after_bytes.ok());
    CHECK(checksum64(after_bytes.value().data(), after_bytes.value().size()) == before);
}

TEST_CASE("writes to unregistered regions are rejected") {
    auto inst = make_instance("echo.wasm");
    std::vector<std::uint8_t> data(16, 0x42);
    // Offset 4096 was never returned by the guest allocator.
    auto s = inst->write_memory(data, 4096);
    REQUIRE(!s.ok());
    CHECK(s.error().kind == ErrorKind::BoundsViolation);
}

TEST_CASE("bounds totality over randomized out-of-range regions") {
    auto inst = make_instance("echo.wasm");
    std::uint64_t size = inst->memory_size();
    auto whole = inst->read_memory(MemoryRegion{0, size});
    REQUIRE(whole.ok());
    auto before = checksum64(whole.value().data(), whole.value().size());

    std::mt19937_64 rng(99);
    for (int i = 0; i < 10000; i++) {
        std::uint32_t offset = std::uint32_t(rng() % (size + 1024));
        std::uint64_t max_over = size - std::min<std::uint64_t>(offset, size) + 1;
        std::uint64_t length = max_over + rng() % 4096;
        MemoryRegion region{offset, length};
        REQUIRE(region.end() > size);

        auto r = inst->read_memory(region);
        REQUIRE(!r.ok());
        REQUIRE(r.error().kind == ErrorKind::BoundsViolation);

        std::vector<std::uint8_t> junk(std::size_t(std::min<std::uint64_t>(length, 64)), 0xFF);
        auto w = inst->write_memory(junk, offset);
        REQUIRE(!w.ok());
    }

    auto after = inst->read_memory(MemoryRegion{0, size});
    REQUIRE(after.ok());
    CHECK(checksum64(after.value().data(), after.value().size()) == before);
}

TEST_CASE("instances are isolated") {
    auto a = make_instance("echo.wasm");
    auto b = make_instance("echo.wasm");
    CHECK(a->id() != b->id());

    auto stage_b = stage_input(*b, bytes_of("untouched"), false);
    REQUIRE(stage_b.ok());
    auto b_before = b->read_memory(MemoryRegion{0, b->memory_size()});
    REQUIRE(b_before.ok());
    auto sum_before = checksum64(b_before.value().data(), b_before.value().size());

    std::mt19937_64 rng(1234);
    for (int i = 0; i < 50; i++) {
        auto region = a->guest_alloc(1 + rng() % 8192);
        REQUIRE(region.ok());
        std::vector<std::uint8_t> data(std::size_t(region.value().length));
        for (auto& byte : data) byte = std::uint8_t(rng());
        REQUIRE(a->write_memory(data, region.value().offset).ok());
        REQUIRE(a->write_mailbox(region.value()).ok());
        REQUIRE(a->invoke("run", {}).ok());
        a->take_captures();
        if (rng() % 2) REQUIRE(a->guest_dealloc(region.value()).ok());
    }

    auto b_after = b->read_memory(MemoryRegion{0, b->memory_size()});
    REQUIRE(b_after.ok());
    CHECK(checksum64(b_after.value().data(), b_after.value().size()) == sum_before);
}

TEST_CASE("invoke failures") {
    auto inst = make_instance("echo.wasm");

    auto missing = inst->invoke("no_such_export", {});
    REQUIRE(!missing.ok());
    CHECK(missing.error().kind == ErrorKind::GuestAbiMissing);

    auto bad_arity = inst->invoke("run", std::array<std::uint64_t, 2>{1, 2});
    REQUIRE(!bad_arity.ok());
    CHECK(bad_arity.error().kind == ErrorKind::GuestAbiMissing);

    auto trapped = inst->invoke("crash", {});
    REQUIRE(!trapped.ok());
    CHECK(!trapped.error().detail.empty());

    // The instance survives the trap.
    CHECK(inst->memory_size() > 0);
    auto ok = inst->guest_alloc(8);
    CHECK(ok.ok());
}

TEST_CASE("captures are ordered and cleared on take") {
    auto inst = make_instance("echo.wasm");
    CHECK(inst->take_captures().empty());

    auto data = bytes_of("abcdefgh");
    auto region = stage_input(*inst, data, false);
    REQUIRE(region.ok());
    REQUIRE(inst->invoke("send_split", {}).ok());

    auto captures = inst->take_captures();
    REQUIRE(captures.size() == 2);
    CHECK(captures[0].sequence_no < captures[1].sequence_no);
    CHECK(captures[0].region.length == 4);
    CHECK(captures[1].region.length == 4);
    CHECK(captures[0].instance_id == inst->id());

    auto first = inst->read_memory(captures[0].region);
    auto second = inst->read_memory(captures[1].region);
    REQUIRE(first.ok());
    REQUIRE(second.ok());
    CHECK(first.value() == std::vector<std::uint8_t>(data.begin(), data.begin() + 4));
    CHECK(second.value() == std::vector<std::uint8_t>(data.begin() + 4, data.end()));

    CHECK(inst->take_captures().empty());
}

TEST_CASE("out-of-bounds send descriptor traps without recording a capture") {
    auto inst = make_instance("echo.wasm");
    auto r = inst->invoke("send_out_of_bounds", {});
    REQUIRE(!r.ok());
    CHECK(r.error().kind == ErrorKind::BoundsViolation);
    CHECK(inst->take_captures().empty());
}

TEST_CASE("memory round trip property") {
    auto inst = make_instance("echo.wasm");
    std::mt19937_64 rng(777);
    for (int i = 0; i < 100; i++) {
        std::uint64_t len = 1 + rng() % 2048;
        auto region = inst->guest_alloc(len);
        REQUIRE(region.ok());
        std::vector<std::uint8_t> data(static_cast<std::size_t>(len));
        for (auto& b : data) b = std::uint8_t(rng());
        REQUIRE(inst->write_memory(data, region.value().offset).ok());
        auto back = inst->read_memory(region.value());
        REQUIRE(back.ok());
        REQUIRE(back.value() == data);
        REQUIRE(inst->guest_dealloc(region.value()).ok());
    }
}

}  // TEST_SUITE
