#include "roadrunner/abi.hpp"

#include <cstdio>
#include <fstream>

namespace rr::abi {

using wasm::ExternKind;
using wasm::FuncType;
using wasm::ValType;

const std::vector<RequiredExport>& required_exports() {
    static const std::vector<RequiredExport> exports = {
        {"allocate_memory", FuncType{{ValType::I32}, {ValType::I32}}},
        {"deallocate_memory", FuncType{{ValType::I32}, {}}},
        {"run", FuncType{{}, {}}},
        {"checksum", FuncType{{ValType::I32, ValType::I32}, {ValType::I64}}},
    };
    return exports;
}

const FuncType& send_to_host_type() {
    static const FuncType type{{ValType::I32, ValType::I32}, {}};
    return type;
}

namespace {

std::string type_to_string(const FuncType& t) {
    auto name = [](ValType v) {
        switch (v) {
        case ValType::I32: return "i32";
        case ValType::I64: return "i64";
        case ValType::F32: return "f32";
        case ValType::F64: return "f64";
        }
        return "?";
    };
    std::string out = "(";
    for (std::size_t i = 0; i < t.params.size(); i++) {
        if (i) out += ", ";
        out += name(t.params[i]);
    }
    out += ") -> (";
    for (std::size_t i = 0; i < t.results.size(); i++) {
        if (i) out += ", ";
        out += name(t.results[i]);
    }
    out += ")";
    return out;
}

}  // namespace

ConformanceReport check_module(const wasm::Module& module) {
    ConformanceReport report;

    for (const RequiredExport& req : required_exports()) {
        const wasm::Export* e = module.find_export(req.name, ExternKind::Function);
        if (!e) {
            report.problems.push_back(std::string("missing required export: ") + req.name);
            continue;
        }
        const FuncType& got = module.function_type(e->index);
        if (!(got == req.type)) {
            report.problems.push_back(std::string("export ") + req.name + " has signature " +
                                      type_to_string(got) + ", expected " +
                                      type_to_string(req.type));
        }
    }

    for (const wasm::Import& imp : module.imports) {
        if (imp.kind != ExternKind::Function) {
            report.problems.push_back("import " + imp.module + "." + imp.name +
                                      " is not a function import");
            continue;
        }
        if (imp.module != kHostModule || imp.name != kSendToHost) {
            report.problems.push_back("import " + imp.module + "." + imp.name +
                                      " is outside the allowed host interface");
            continue;
        }
        const FuncType& got = module.types[imp.type_index];
        if (!(got == send_to_host_type())) {
            report.problems.push_back("import " + imp.module + "." + imp.name +
                                      " has signature " + type_to_string(got) + ", expected " +
                                      type_to_string(send_to_host_type()));
        }
    }

    if (!module.memory) {
        report.problems.push_back("module defines no linear memory");
    }

    report.conformant = report.problems.empty();
    return report;
}

Result<ConformanceReport> check_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return make_error(ErrorKind::GuestAbiMissing, "cannot open module file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    auto module = wasm::Module::parse(bytes);
    if (!module.ok()) return std::move(module).error();
    return check_module(module.value());
}

void reference_payload(std::uint64_t seed, std::span<std::uint8_t> out) {
    std::uint64_t s = seed;
    for (std::uint8_t& b : out) {
        s = s * kLcgMultiplier + kLcgIncrement;
        b = std::uint8_t(s);
    }
}

std::vector<std::uint8_t> reference_payload(std::uint64_t seed, std::size_t n) {
    std::vector<std::uint8_t> out(n);
    reference_payload(seed, out);
    return out;
}

std::array<std::uint8_t, 16> encode_producer_params(std::uint64_t seed, std::uint64_t n) {
    std::array<std::uint8_t, 16> out{};
    for (int i = 0; i < 8; i++) out[i] = std::uint8_t(seed >> (8 * i));
    for (int i = 0; i < 8; i++) out[8 + i] = std::uint8_t(n >> (8 * i));
    return out;
}

}  // namespace rr::abi
