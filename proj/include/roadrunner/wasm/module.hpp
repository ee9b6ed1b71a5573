#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roadrunner/error.hpp"

namespace rr::wasm {

inline constexpr std::uint32_t kPageSize = 65536;

enum class ValType : std::uint8_t {
    I32 = 0x7F,
    I64 = 0x7E,
    F32 = 0x7D,
    F64 = 0x7C,
};

struct FuncType {
    std::vector<ValType> params;
    std::vector<ValType> results;

    bool operator==(const FuncType&) const = default;
};

enum class ExternKind : std::uint8_t {
    Function = 0,
    Table = 1,
    Memory = 2,
    Global = 3,
};

struct Import {
    std::string module;
    std::string name;
    ExternKind kind;
    std::uint32_t type_index = 0;  // function imports only
};

struct Export {
    std::string name;
    ExternKind kind;
    std::uint32_t index = 0;
};

struct MemLimits {
    std::uint32_t min_pages = 0;
    std::optional<std::uint32_t> max_pages;
};

struct GlobalDef {
    ValType type;
    bool is_mutable;
    std::uint64_t init;
};

struct DataSegment {
    std::uint32_t offset;
    std::vector<std::uint8_t> bytes;
};

struct ElemSegment {
    std::uint32_t offset;
    std::vector<std::uint32_t> func_indices;
};

// Pre-decoded instruction forms executed by the interpreter. Structured
// control flow is resolved at decode time: blocks and ends emit nothing,
// branches carry absolute target indices plus the operand-stack unwind
// they must perform.
enum class Op : std::uint8_t {
    Unreachable,
    Jump,        // a = target
    JumpIfZero,  // a = target (pops condition)
    Br,          // a = target, b = values kept, imm = stack height to unwind to
    BrIf,        // same as Br, conditional
    BrTable,     // a = aux offset, b = entry count (triples), default last
    Return,      // b = result count
    Call,        // a = function index
    CallIndirect,  // a = type index
    Drop,
    Select,
    LocalGet,   // a = slot
    LocalSet,
    LocalTee,
    GlobalGet,  // a = global index
    GlobalSet,
    I32Const,  // imm
    I64Const,  // imm
    I32Load,   // imm = static offset (all memory ops)
    I64Load,
    I32Load8S,
    I32Load8U,
    I32Load16S,
    I32Load16U,
    I64Load8S,
    I64Load8U,
    I64Load16S,
    I64Load16U,
    I64Load32S,
    I64Load32U,
    I32Store,
    I64Store,
    I32Store8,
    I32Store16,
    I64Store8,
    I64Store16,
    I64Store32,
    MemorySize,
    MemoryGrow,
    MemoryCopy,
    MemoryFill,
    I32Eqz,
    I32Eq,
    I32Ne,
    I32LtS,
    I32LtU,
    I32GtS,
    I32GtU,
    I32LeS,
    I32LeU,
    I32GeS,
    I32GeU,
    I64Eqz,
    I64Eq,
    I64Ne,
    I64LtS,
    I64LtU,
    I64GtS,
    I64GtU,
    I64LeS,
    I64LeU,
    I64GeS,
    I64GeU,
    I32Clz,
    I32Ctz,
    I32Popcnt,
    I32Add,
    I32Sub,
    I32Mul,
    I32DivS,
    I32DivU,
    I32RemS,
    I32RemU,
    I32And,
    I32Or,
    I32Xor,
    I32Shl,
    I32ShrS,
    I32ShrU,
    I32Rotl,
    I32Rotr,
    I64Clz,
    I64Ctz,
    I64Popcnt,
    I64Add,
    I64Sub,
    I64Mul,
    I64DivS,
    I64DivU,
    I64RemS,
    I64RemU,
    I64And,
    I64Or,
    I64Xor,
    I64Shl,
    I64ShrS,
    I64ShrU,
    I64Rotl,
    I64Rotr,
    I32WrapI64,
    I64ExtendI32S,
    I64ExtendI32U,
    I32Extend8S,
    I32Extend16S,
    I64Extend8S,
    I64Extend16S,
    I64Extend32S,
};

struct Instr {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint64_t imm = 0;
};

struct Function {
    std::uint32_t type_index = 0;
    std::uint32_t local_slots = 0;  // params + declared locals
    std::uint32_t max_stack = 0;    // operand stack upper bound, from decode
    std::vector<Instr> code;
    std::vector<std::uint32_t> aux;  // br_table data: (target, keep, unwind)*
};

// A parsed, pre-decoded module. Integer-only subset of the core
// instruction set (plus sign-extension and memory.copy/fill); floating
// point opcodes are rejected at parse time since guests compiled from
// integer C never emit them.
class Module {
public:
    static Result<Module> parse(std::span<const std::uint8_t> binary);

    std::vector<FuncType> types;
    std::vector<Import> imports;            // all kinds, in section order
    std::vector<std::uint32_t> func_types;  // type index per local function
    std::vector<Function> functions;        // local functions only
    std::vector<Export> exports;
    std::optional<MemLimits> memory;
    std::vector<GlobalDef> globals;  // local globals only
    std::vector<DataSegment> data_segments;
    std::vector<ElemSegment> elem_segments;
    std::optional<std::uint32_t> table_min;
    std::optional<std::uint32_t> start_func;

    std::uint32_t imported_function_count = 0;

    // Function index space: imports first, then local functions.
    std::uint32_t total_function_count() const {
        return imported_function_count + std::uint32_t(functions.size());
    }
    const FuncType& function_type(std::uint32_t func_index) const;
    const Import* function_import(std::uint32_t func_index) const;

    const Export* find_export(std::string_view name, ExternKind kind) const;
};

}  // namespace rr::wasm
