#include <doctest.h>

#include "roadrunner/wasm/vm.hpp"
#include "wasm_test_util.hpp"

using namespace rr;
using namespace rr::wasm;
using wasmbuild::FuncDef;
using wasmbuild::FuncSig;
using wasmbuild::TestModule;

namespace {

Result<std::unique_ptr<VmInstance>> instantiate(const std::vector<std::uint8_t>& binary,
                                                std::uint64_t max_memory = 16 * 65536) {
    auto module = Module::parse(binary);
    if (!module.ok()) return std::move(module).error();
    return VmInstance::create(std::make_shared<const Module>(std::move(module).value()),
                              VmLimits{max_memory}, {});
}

std::uint64_t call1(VmInstance& vm, const char* name, std::uint64_t a) {
    auto r = vm.call_export(name, std::array<std::uint64_t, 1>{a});
    REQUIRE(r.ok());
    REQUIRE(r.value().size() == 1);
    return r.value()[0];
}

std::uint64_t call2(VmInstance& vm, const char* name, std::uint64_t a, std::uint64_t b) {
    auto r = vm.call_export(name, std::array<std::uint64_t, 2>{a, b});
    REQUIRE(r.ok());
    REQUIRE(r.value().size() == 1);
    return r.value()[0];
}

}  // namespace

TEST_SUITE("wasm") {

TEST_CASE("add function") {
    TestModule m;
    m.types.push_back(FuncSig{{0x7F, 0x7F}, {0x7F}});
    m.funcs.push_back(FuncDef{0, {}, wasmbuild::body({0x20, 0, 0x20, 1, 0x6A}), "add"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    CHECK(call2(*vm.value(), "add", 2, 3) == 5);
    CHECK(call2(*vm.value(), "add", 0xFFFFFFFF, 1) == 0);  // i32 wraps
}

TEST_CASE("locals, loops and branches: iterative factorial") {
    // local 2 = result accumulator (i64); param 0 counts down
    TestModule m;
    m.types.push_back(FuncSig{{0x7F}, {0x7E}});
    std::vector<std::uint8_t> b;
    // result = 1
    b.insert(b.end(), {0x42, 0x01, 0x21, 1});  // i64.const 1, local.set 1
    // loop: if (param == 0) break; result *= param; param--
    b.insert(b.end(), {0x02, 0x40});           // block
    b.insert(b.end(), {0x03, 0x40});           // loop
    b.insert(b.end(), {0x20, 0, 0x45, 0x0D, 1});  // local.get 0, i32.eqz, br_if 1
    b.insert(b.end(), {0x20, 1, 0x20, 0, 0xAD, 0x7E, 0x21, 1});  // res *= (i64)param
    b.insert(b.end(), {0x20, 0, 0x41, 0x01, 0x6B, 0x21, 0});     // param -= 1
    b.insert(b.end(), {0x0C, 0});              // br 0 (continue loop)
    b.insert(b.end(), {0x0B, 0x0B});           // end loop, end block
    b.insert(b.end(), {0x20, 1});              // local.get 1
    m.funcs.push_back(FuncDef{0, {{1, 0x7E}}, b, "fact"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    CHECK(call1(*vm.value(), "fact", 5) == 120);
    CHECK(call1(*vm.value(), "fact", 20) == 2432902008176640000ull);
    CHECK(call1(*vm.value(), "fact", 0) == 1);
}

TEST_CASE("if/else with result") {
    TestModule m;
    m.types.push_back(FuncSig{{0x7F}, {0x7F}});
    // if (param) 11 else 22
    m.funcs.push_back(FuncDef{
        0, {}, wasmbuild::body({0x20, 0, 0x04, 0x7F, 0x41, 11, 0x05, 0x41, 22, 0x0B}), "pick"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    CHECK(call1(*vm.value(), "pick", 1) == 11);
    CHECK(call1(*vm.value(), "pick", 0) == 22);
}

TEST_CASE("br_table selects targets") {
    TestModule m;
    m.types.push_back(FuncSig{{0x7F}, {0x7F}});
    // block block block br_table(0 1) default 2 -> returns 10/20/30
    std::vector<std::uint8_t> b = {
        0x02, 0x40,              // block A
        0x02, 0x40,              // block B
        0x02, 0x40,              // block C
        0x20, 0,                 // local.get 0
        0x0E, 2, 0, 1, 2,        // br_table [C B] A
        0x0B,                    // end C
        0x41, 10, 0x0F,          // return 10
        0x0B,                    // end B
        0x41, 20, 0x0F,          // return 20
        0x0B,                    // end A
        0x41, 30,                // 30
    };
    m.funcs.push_back(FuncDef{0, {}, b, "sel"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    CHECK(call1(*vm.value(), "sel", 0) == 10);
    CHECK(call1(*vm.value(), "sel", 1) == 20);
    CHECK(call1(*vm.value(), "sel", 2) == 30);
    CHECK(call1(*vm.value(), "sel", 9) == 30);  // clamps to default
}

TEST_CASE("calls between functions") {
    TestModule m;
    m.types.push_back(FuncSig{{0x7F}, {0x7F}});
    m.funcs.push_back(FuncDef{0, {}, wasmbuild::body({0x20, 0, 0x41, 1, 0x6A}), "inc"});
    m.funcs.push_back(FuncDef{0, {}, wasmbuild::body({0x20, 0, 0x10, 0, 0x10, 0}), "inc2"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    CHECK(call1(*vm.value(), "inc2", 40) == 42);
}

TEST_CASE("memory load/store and grow") {
    TestModule m;
    m.types.push_back(FuncSig{{0x7F, 0x7F}, {}});
    m.types.push_back(FuncSig{{0x7F}, {0x7F}});
    m.types.push_back(FuncSig{{0x7F}, {0x7F}});
    m.funcs.push_back(
        FuncDef{0, {}, wasmbuild::body({0x20, 0, 0x20, 1, 0x36, 2, 0}), "store"});
    m.funcs.push_back(FuncDef{1, {}, wasmbuild::body({0x20, 0, 0x28, 2, 0}), "load"});
    m.funcs.push_back(FuncDef{2, {}, wasmbuild::body({0x20, 0, 0x40, 0}), "grow"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    auto& inst = *vm.value();
    CHECK(inst.memory_size() == 65536);

    auto s = inst.call_export("store", std::array<std::uint64_t, 2>{64, 0xDEADBEEF});
    REQUIRE(s.ok());
    CHECK(call1(inst, "load", 64) == 0xDEADBEEF);
    // Byte-level view agrees (little endian).
    CHECK(inst.memory()[64] == 0xEF);

    CHECK(call1(inst, "grow", 2) == 1);  // previous pages
    CHECK(inst.memory_size() == 3 * 65536);
    CHECK(call1(inst, "grow", 1000) == std::uint64_t(std::uint32_t(-1)));  // beyond the limit
}

TEST_CASE("traps surface as errors and leave the instance usable") {
    TestModule m;
    m.types.push_back(FuncSig{{}, {}});
    m.types.push_back(FuncSig{{0x7F}, {0x7F}});
    m.funcs.push_back(FuncDef{0, {}, wasmbuild::body({0x00}), "boom"});  // unreachable
    m.funcs.push_back(FuncDef{1, {}, wasmbuild::body({0x20, 0, 0x28, 2, 0}), "load"});
    m.funcs.push_back(
        FuncDef{1, {}, wasmbuild::body({0x41, 1, 0x20, 0, 0x6E}), "div"});  // 1 / param
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    auto& inst = *vm.value();

    auto r = inst.call_export("boom", {});
    REQUIRE(!r.ok());
    CHECK(!r.error().detail.empty());

    auto oob = inst.call_export("load", std::array<std::uint64_t, 1>{65536});
    REQUIRE(!oob.ok());
    CHECK(oob.error().kind == ErrorKind::BoundsViolation);

    auto div0 = inst.call_export("div", std::array<std::uint64_t, 1>{0});
    REQUIRE(!div0.ok());

    // Still queryable and runnable afterwards.
    CHECK(inst.memory_size() == 65536);
    CHECK(call1(inst, "div", 1) == 1);
}

TEST_CASE("export lookup failures") {
    TestModule m;
    m.types.push_back(FuncSig{{}, {}});
    m.funcs.push_back(FuncDef{0, {}, {}, "noop"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());

    auto missing = vm.value()->call_export("nope", {});
    REQUIRE(!missing.ok());
    CHECK(missing.error().kind == ErrorKind::GuestAbiMissing);

    auto bad_arity = vm.value()->call_export("noop", std::array<std::uint64_t, 1>{1});
    REQUIRE(!bad_arity.ok());
    CHECK(bad_arity.error().kind == ErrorKind::GuestAbiMissing);
}

TEST_CASE("parse rejections") {
    SUBCASE("bad magic") {
        std::vector<std::uint8_t> bad = {'X', 'X', 'X', 'X', 1, 0, 0, 0};
        CHECK(!Module::parse(bad).ok());
    }
    SUBCASE("truncated") {
        TestModule m;
        m.types.push_back(FuncSig{{}, {}});
        m.funcs.push_back(FuncDef{0, {}, {}, "f"});
        auto bytes = m.build();
        bytes.resize(bytes.size() - 3);
        CHECK(!Module::parse(bytes).ok());
    }
    SUBCASE("floating point opcode") {
        TestModule m;
        m.types.push_back(FuncSig{{}, {}});
        // f32.const 0; drop
        m.funcs.push_back(FuncDef{0, {}, wasmbuild::body({0x43, 0, 0, 0, 0, 0x1A}), "f"});
        auto r = Module::parse(m.build());
        CHECK(!r.ok());
    }
    SUBCASE("stack underflow") {
        TestModule m;
        m.types.push_back(FuncSig{{}, {}});
        m.funcs.push_back(FuncDef{0, {}, wasmbuild::body({0x1A}), "f"});  // drop on empty
        CHECK(!Module::parse(m.build()).ok());
    }
}

TEST_CASE("instantiation limit below module minimum fails") {
    TestModule m;
    m.types.push_back(FuncSig{{}, {}});
    m.funcs.push_back(FuncDef{0, {}, {}, "f"});
    m.memory_min_pages = 4;
    auto vm = instantiate(m.build(), 65536);
    REQUIRE(!vm.ok());
    CHECK(vm.error().kind == ErrorKind::AllocationFailed);
}

TEST_CASE("select and comparisons") {
    TestModule m;
    m.types.push_back(FuncSig{{0x7F, 0x7F}, {0x7F}});
    // max(a, b) via select(a, b, a > b)
    m.funcs.push_back(FuncDef{
        0, {}, wasmbuild::body({0x20, 0, 0x20, 1, 0x20, 0, 0x20, 1, 0x4B, 0x1B}), "max"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    CHECK(call2(*vm.value(), "max", 3, 9) == 9);
    CHECK(call2(*vm.value(), "max", 9, 3) == 9);
}

TEST_CASE("sign extension and 64-bit arithmetic") {
    TestModule m;
    m.types.push_back(FuncSig{{0x7E, 0x7E}, {0x7E}});
    m.types.push_back(FuncSig{{0x7F}, {0x7F}});
    m.funcs.push_back(FuncDef{0, {}, wasmbuild::body({0x20, 0, 0x20, 1, 0x7E}), "mul64"});
    m.funcs.push_back(FuncDef{1, {}, wasmbuild::body({0x20, 0, 0xC0}), "ext8"});
    auto vm = instantiate(m.build());
    REQUIRE(vm.ok());
    CHECK(call2(*vm.value(), "mul64", 6364136223846793005ull, 3) ==
          std::uint64_t(6364136223846793005ull * 3));
    CHECK(call1(*vm.value(), "ext8", 0x80) == 0xFFFFFF80u);
}

}  // TEST_SUITE
