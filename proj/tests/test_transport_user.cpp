#include <doctest.h>

#include "roadrunner/abi.hpp"
#include "roadrunner/checksum.hpp"
#include "roadrunner/transport/local.hpp"
#include "guest_util.hpp"

using namespace rr;
using namespace rr::transport;
using guestutil::bytes_of;
using guestutil::make_instance;
using guestutil::stage_input;

namespace {

WorkflowId test_workflow() {
    WorkflowId id{};
    id[0] = 0xAA;
    return id;
}

host::HostCallCapture capture_from(host::Instance& inst) {
    auto captures = inst.take_captures();
    REQUIRE(captures.size() == 1);
    return captures[0];
}

}  // namespace

TEST_SUITE("transport-user") {

TEST_CASE("echo to consumer delivers byte-identical payload") {
    auto echo = make_instance("echo.wasm");
    auto consumer = make_instance("consumer.wasm");
    DeliverySink sink(*consumer, /*dealloc_after_run=*/false);

    auto data = bytes_of("hello");
    REQUIRE(stage_input(*echo, data).ok());
    auto capture = capture_from(*echo);

    LocalRoute route{echo->id(), consumer->id(), test_workflow()};
    auto region = deliver_local(*echo, sink, route, capture);
    REQUIRE_MESSAGE(region.ok(), (region.ok() ? "" : region.error().to_string()));
    REQUIRE(sink.complete(region.value()).ok());

    auto delivered = consumer->read_memory(region.value());
    REQUIRE(delivered.ok());
    CHECK(delivered.value() == data);

    auto sum = consumer->invoke("last_checksum", {});
    REQUIRE(sum.ok());
    CHECK(sum.value().at(0) == checksum64(data.data(), data.size()));

    // Source region untouched by the transfer.
    auto source_bytes = echo->read_memory(capture.region);
    REQUIRE(source_bytes.ok());
    CHECK(source_bytes.value() == data);
}

TEST_CASE("route validation") {
    auto echo = make_instance("echo.wasm");
    auto consumer = make_instance("consumer.wasm");
    DeliverySink sink(*consumer);

    REQUIRE(stage_input(*echo, bytes_of("x")).ok());
    auto capture = capture_from(*echo);

    SUBCASE("source equals target") {
        LocalRoute route{echo->id(), echo->id(), test_workflow()};
        DeliverySink self_sink(*echo);
        auto r = deliver_local(*echo, self_sink, route, capture);
        REQUIRE(!r.ok());
        CHECK(r.error().kind == ErrorKind::RegistryMiss);
    }
    SUBCASE("capture from a different instance") {
        LocalRoute route{consumer->id(), echo->id(), test_workflow()};
        DeliverySink echo_sink(*echo);
        auto r = deliver_local(*consumer, echo_sink, route, capture);
        REQUIRE(!r.ok());
        CHECK(r.error().kind == ErrorKind::RegistryMiss);
    }
    SUBCASE("zero-length capture") {
        host::HostCallCapture zero = capture;
        zero.region.length = 0;
        LocalRoute route{echo->id(), consumer->id(), test_workflow()};
        auto r = deliver_local(*echo, sink, route, zero);
        REQUIRE(!r.ok());
        CHECK(r.error().kind == ErrorKind::BoundsViolation);
    }
}

TEST_CASE("exactly one bulk copy per delivery") {
    auto echo = make_instance("echo.wasm", 64ull << 20);
    auto consumer = make_instance("consumer.wasm", 64ull << 20);
    DeliverySink sink(*consumer);

    auto payload = abi::reference_payload(5, 1 << 20);
    REQUIRE(stage_input(*echo, payload).ok());
    auto capture = capture_from(*echo);

    reset_bulk_copy_count();
    LocalRoute route{echo->id(), consumer->id(), test_workflow()};
    auto region = deliver_local(*echo, sink, route, capture);
    REQUIRE(region.ok());
    CHECK(bulk_copy_count() == 1);
    REQUIRE(sink.complete(region.value()).ok());

    auto sum = consumer->invoke("last_checksum", {});
    REQUIRE(sum.ok());
    CHECK(sum.value().at(0) == checksum64(payload.data(), payload.size()));
}

TEST_CASE("repeat delivery of the same capture produces equal contents") {
    auto echo = make_instance("echo.wasm");
    auto consumer = make_instance("consumer.wasm");
    DeliverySink sink(*consumer, /*dealloc_after_run=*/false);

    auto data = bytes_of("repeatable payload");
    REQUIRE(stage_input(*echo, data).ok());
    auto capture = capture_from(*echo);
    LocalRoute route{echo->id(), consumer->id(), test_workflow()};

    auto r1 = deliver_local(*echo, sink, route, capture);
    REQUIRE(r1.ok());
    REQUIRE(sink.complete(r1.value()).ok());
    auto r2 = deliver_local(*echo, sink, route, capture);
    REQUIRE(r2.ok());
    REQUIRE(sink.complete(r2.value()).ok());

    CHECK(r1.value().offset != r2.value().offset);  // both regions live
    auto b1 = consumer->read_memory(r1.value());
    auto b2 = consumer->read_memory(r2.value());
    REQUIRE(b1.ok());
    REQUIRE(b2.ok());
    CHECK(b1.value() == data);
    CHECK(b2.value() == data);
}

}  // TEST_SUITE
