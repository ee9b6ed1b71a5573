#include <doctest.h>

#include "roadrunner/abi.hpp"
#include "roadrunner/checksum.hpp"
#include "guest_util.hpp"

using namespace rr;
using guestutil::bytes_of;
using guestutil::make_instance;
using guestutil::stage_input;

TEST_SUITE("abi") {

TEST_CASE("sample guests conform") {
    for (const char* name : {"echo.wasm", "producer.wasm", "consumer.wasm"}) {
        auto report = abi::check_file(guestutil::guest_path(name));
        REQUIRE_MESSAGE(report.ok(), name);
        INFO(name);
        for (const auto& p : report.value().problems) MESSAGE(p);
        CHECK(report.value().conformant);
    }
}

TEST_CASE("guest missing an export is reported") {
    auto report = abi::check_file(guestutil::guest_path("broken.wasm"));
    REQUIRE(report.ok());
    CHECK(!report.value().conformant);
    bool names_allocate = false;
    for (const auto& p : report.value().problems) {
        if (p.find("allocate_memory") != std::string::npos) names_allocate = true;
    }
    CHECK(names_allocate);
}

TEST_CASE("unreadable path is an error") {
    auto report = abi::check_file("/nonexistent/guest.wasm");
    REQUIRE(!report.ok());
    CHECK(report.error().kind == ErrorKind::GuestAbiMissing);
}

TEST_CASE("foreign imports fail conformance") {
    // A module importing something outside the host interface.
    std::vector<std::uint8_t> binary = {
        0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00,
        // type section: () -> ()
        0x01, 0x04, 0x01, 0x60, 0x00, 0x00,
        // import section: "env"."evil" func type 0
        0x02, 0x0D, 0x01, 0x03, 'e', 'n', 'v', 0x04, 'e', 'v', 'i', 'l', 0x00, 0x00, 0x00,
    };
    // Fix section size byte: payload is module+name+kind+type = 1+4+5+2
    binary[15] = 0x0C;
    auto module = wasm::Module::parse(binary);
    if (module.ok()) {
        auto report = abi::check_module(module.value());
        CHECK(!report.conformant);
    }
}

TEST_CASE("producer is deterministic and matches the host generator") {
    const std::uint64_t seed = 0xFEEDFACE;
    const std::uint64_t n = 4096;

    auto run_producer = [&](host::Instance& inst) {
        auto params = abi::encode_producer_params(seed, n);
        auto staged = stage_input(inst, params);
        REQUIRE(staged.ok());
        auto captures = inst.take_captures();
        REQUIRE(captures.size() == 1);
        auto bytes = inst.read_memory(captures[0].region);
        REQUIRE(bytes.ok());
        return std::move(bytes).value();
    };

    auto p1 = make_instance("producer.wasm");
    auto p2 = make_instance("producer.wasm");
    auto out1 = run_producer(*p1);
    auto out2 = run_producer(*p2);
    CHECK(out1 == out2);

    auto reference = abi::reference_payload(seed, n);
    CHECK(out1 == reference);
}

TEST_CASE("producer output length follows the parameter block") {
    auto producer = make_instance("producer.wasm");
    auto params = abi::encode_producer_params(3, 17);
    auto staged = stage_input(*producer, params);
    REQUIRE(staged.ok());
    auto captures = producer->take_captures();
    REQUIRE(captures.size() == 1);
    CHECK(captures[0].region.length == 17);
}

TEST_CASE("consumer stores the checksum of its delivery") {
    auto consumer = make_instance("consumer.wasm");
    auto data = bytes_of("abc");
    auto region = stage_input(*consumer, data);
    REQUIRE(region.ok());

    auto last = consumer->invoke("last_checksum", {});
    REQUIRE(last.ok());
    CHECK(last.value().at(0) == checksum64(data.data(), data.size()));

    auto direct = consumer->invoke(
        "checksum", std::array<std::uint64_t, 2>{region.value().offset, region.value().length});
    REQUIRE(direct.ok());
    CHECK(direct.value().at(0) == checksum64(data.data(), data.size()));
}

TEST_CASE("zero-length checksum is the offset basis") {
    auto consumer = make_instance("consumer.wasm");
    auto sum = consumer->invoke("checksum", std::array<std::uint64_t, 2>{16, 0});
    REQUIRE(sum.ok());
    CHECK(sum.value().at(0) == kFnvOffsetBasis);
}

TEST_CASE("1 MiB payload round trips through guest checksum") {
    auto consumer = make_instance("consumer.wasm");
    auto payload = abi::reference_payload(42, 1 << 20);
    auto region = stage_input(*consumer, payload);
    REQUIRE(region.ok());
    auto last = consumer->invoke("last_checksum", {});
    REQUIRE(last.ok());
    CHECK(last.value().at(0) == checksum64(payload.data(), payload.size()));
}

TEST_CASE("reference generator layout") {
    // First bytes follow the documented recurrence.
    std::uint64_t s = 9;
    std::vector<std::uint8_t> expect;
    for (int i = 0; i < 16; i++) {
        s = s * abi::kLcgMultiplier + abi::kLcgIncrement;
        expect.push_back(std::uint8_t(s));
    }
    CHECK(abi::reference_payload(9, 16) == expect);
}

}  // TEST_SUITE
