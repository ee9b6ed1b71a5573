#include "roadrunner/wasm/vm.hpp"

#include <bit>
#include <cstring>
#include <limits>

namespace rr::wasm {

namespace {

constexpr std::uint32_t kNullFunc = std::numeric_limits<std::uint32_t>::max();
constexpr std::size_t kMaxStackSlots = std::size_t(1) << 23;  // 64 MiB of value stack
constexpr std::size_t kMaxCallDepth = 4096;

TransferError trap(ErrorKind kind, const char* what) {
    return make_error(kind, std::string("guest trap: ") + what);
}

}  // namespace

Result<std::unique_ptr<VmInstance>> VmInstance::create(std::shared_ptr<const Module> module,
                                                       const VmLimits& limits,
                                                       std::vector<HostFunction> host_functions) {
    auto vm = std::unique_ptr<VmInstance>(new VmInstance());
    vm->module_ = std::move(module);
    vm->host_functions_ = std::move(host_functions);
    const Module& m = *vm->module_;

    // Resolve imports. Only function imports are supported by this embedder.
    vm->callees_.resize(m.total_function_count());
    std::uint32_t func_index = 0;
    for (const Import& imp : m.imports) {
        if (imp.kind != ExternKind::Function) {
            return make_error(ErrorKind::GuestAbiMissing,
                              "unsupported non-function import " + imp.module + "." + imp.name);
        }
        const FuncType& want = m.types[imp.type_index];
        const HostFunction* found = nullptr;
        for (const HostFunction& h : vm->host_functions_) {
            if (h.module == imp.module && h.name == imp.name) {
                if (!(h.type == want)) {
                    return make_error(ErrorKind::GuestAbiMissing,
                                      "import signature mismatch for " + imp.module + "." + imp.name);
                }
                found = &h;
                break;
            }
        }
        if (!found) {
            return make_error(ErrorKind::GuestAbiMissing,
                              "unresolved import " + imp.module + "." + imp.name);
        }
        vm->callees_[func_index] = Callee{nullptr, found, &want};
        func_index++;
    }
    for (std::size_t i = 0; i < m.functions.size(); i++) {
        const Function& fn = m.functions[i];
        vm->callees_[func_index + i] = Callee{&fn, nullptr, &m.types[fn.type_index]};
    }

    if (!m.memory) {
        return make_error(ErrorKind::GuestAbiMissing, "module defines no linear memory");
    }
    std::uint64_t min_bytes = std::uint64_t(m.memory->min_pages) * kPageSize;
    if (min_bytes > limits.max_memory_bytes) {
        return make_error(ErrorKind::AllocationFailed,
                          "module requires " + std::to_string(min_bytes) +
                              " bytes of memory, limit is " +
                              std::to_string(limits.max_memory_bytes));
    }
    std::uint64_t limit_pages = limits.max_memory_bytes / kPageSize;
    vm->max_pages_ = std::uint32_t(std::min<std::uint64_t>(limit_pages, 65536));
    if (m.memory->max_pages && *m.memory->max_pages < vm->max_pages_)
        vm->max_pages_ = *m.memory->max_pages;
    vm->memory_.resize(min_bytes);

    vm->globals_.reserve(m.globals.size());
    for (const GlobalDef& g : m.globals) vm->globals_.push_back(g.init);

    if (m.table_min) {
        vm->table_.assign(*m.table_min, kNullFunc);
        for (const ElemSegment& seg : m.elem_segments) {
            std::uint64_t end = std::uint64_t(seg.offset) + seg.func_indices.size();
            if (end > vm->table_.size()) {
                return make_error(ErrorKind::GuestAbiMissing, "element segment out of range");
            }
            for (std::size_t i = 0; i < seg.func_indices.size(); i++) {
                std::uint32_t f = seg.func_indices[i];
                if (f >= m.total_function_count()) {
                    return make_error(ErrorKind::GuestAbiMissing, "element entry out of range");
                }
                vm->table_[seg.offset + i] = f;
            }
        }
    } else if (!m.elem_segments.empty()) {
        return make_error(ErrorKind::GuestAbiMissing, "element segment without table");
    }

    for (const DataSegment& seg : m.data_segments) {
        std::uint64_t end = std::uint64_t(seg.offset) + seg.bytes.size();
        if (end > vm->memory_.size()) {
            return make_error(ErrorKind::GuestAbiMissing, "data segment out of range");
        }
        std::memcpy(vm->memory_.data() + seg.offset, seg.bytes.data(), seg.bytes.size());
    }

    if (m.start_func) {
        auto r = vm->call(*m.start_func, {});
        if (!r.ok()) return std::move(r).error();
    }
    return vm;
}

Result<std::vector<std::uint64_t>> VmInstance::call_export(std::string_view name,
                                                           std::span<const std::uint64_t> args) {
    const Export* e = module_->find_export(name, ExternKind::Function);
    if (!e) {
        return make_error(ErrorKind::GuestAbiMissing,
                          "export not found: " + std::string(name));
    }
    return call(e->index, args);
}

Result<std::vector<std::uint64_t>> VmInstance::call(std::uint32_t func_index,
                                                    std::span<const std::uint64_t> args) {
    if (func_index >= callees_.size()) {
        return make_error(ErrorKind::GuestAbiMissing, "function index out of range");
    }
    const Callee& callee = callees_[func_index];
    if (callee.type->params.size() != args.size()) {
        return make_error(ErrorKind::GuestAbiMissing,
                          "argument count mismatch: expected " +
                              std::to_string(callee.type->params.size()) + ", got " +
                              std::to_string(args.size()));
    }
    if (callee.host) {
        std::vector<std::uint64_t> results;
        if (auto s = callee.host->invoke(args, results); !s.ok()) return std::move(s).error();
        return results;
    }
    if (executing_) {
        return make_error(ErrorKind::GuestAbiMissing, "reentrant call into executing instance");
    }
    executing_ = true;
    auto r = execute(func_index, args);
    executing_ = false;
    return r;
}

Result<std::vector<std::uint64_t>> VmInstance::execute(std::uint32_t func_index,
                                                       std::span<const std::uint64_t> args) {
    struct Frame {
        const Function* fn;
        std::uint32_t pc;
        std::size_t locals;
    };
    std::vector<Frame> frames;
    frames.reserve(64);

    stack_.clear();
    stack_.insert(stack_.end(), args.begin(), args.end());

    const Function* fn = callees_[func_index].fn;
    std::size_t locals = 0;

    // Frame layout on the value stack: [locals (params first)][operands].
    auto frame_slots = [](const Function& f) {
        return std::size_t(f.local_slots) + std::size_t(f.max_stack);
    };
    if (frame_slots(*fn) > kMaxStackSlots)
        return trap(ErrorKind::AllocationFailed, "call stack exhausted");
    stack_.resize(std::size_t(fn->local_slots) + fn->max_stack);
    for (std::size_t i = args.size(); i < fn->local_slots; i++) stack_[i] = 0;

    std::uint64_t* st = stack_.data();
    std::size_t sp = fn->local_slots;  // operand slots start above the locals
    std::uint32_t pc = 0;
    const Instr* code = fn->code.data();

    std::uint8_t* mem = memory_.data();
    std::size_t msize = memory_.size();

#define RR_BINOP_U32(expr)                                        \
    do {                                                          \
        std::uint32_t rhs = std::uint32_t(st[--sp]);              \
        std::uint32_t lhs = std::uint32_t(st[sp - 1]);            \
        st[sp - 1] = std::uint64_t(std::uint32_t(expr));          \
    } while (0)
#define RR_BINOP_S32(expr)                                        \
    do {                                                          \
        std::int32_t rhs = std::int32_t(st[--sp]);                \
        std::int32_t lhs = std::int32_t(st[sp - 1]);              \
        st[sp - 1] = std::uint64_t(std::uint32_t(expr));          \
    } while (0)
#define RR_BINOP_U64(expr)                                        \
    do {                                                          \
        std::uint64_t rhs = st[--sp];                             \
        std::uint64_t lhs = st[sp - 1];                           \
        st[sp - 1] = std::uint64_t(expr);                         \
    } while (0)
#define RR_BINOP_S64(expr)                                        \
    do {                                                          \
        std::int64_t rhs = std::int64_t(st[--sp]);                \
        std::int64_t lhs = std::int64_t(st[sp - 1]);              \
        st[sp - 1] = std::uint64_t(expr);                         \
    } while (0)
#define RR_LOAD(T, EXT)                                                          \
    do {                                                                         \
        std::uint64_t addr = std::uint64_t(std::uint32_t(st[sp - 1])) + in.imm;  \
        if (addr + sizeof(T) > msize)                                            \
            return trap(ErrorKind::BoundsViolation, "out-of-bounds memory read"); \
        T v;                                                                     \
        std::memcpy(&v, mem + addr, sizeof(T));                                  \
        st[sp - 1] = std::uint64_t(EXT(v));                                      \
    } while (0)
#define RR_STORE(T, FROM)                                                         \
    do {                                                                          \
        T v = T(FROM(st[--sp]));                                                  \
        std::uint64_t addr = std::uint64_t(std::uint32_t(st[--sp])) + in.imm;     \
        if (addr + sizeof(T) > msize)                                             \
            return trap(ErrorKind::BoundsViolation, "out-of-bounds memory write"); \
        std::memcpy(mem + addr, &v, sizeof(T));                                   \
    } while (0)

    for (;;) {
        const Instr& in = code[pc++];
        switch (in.op) {
        case Op::Unreachable:
            return trap(ErrorKind::GuestAbiMissing, "unreachable executed");
        case Op::Jump:
            pc = in.a;
            break;
        case Op::JumpIfZero:
            if (std::uint32_t(st[--sp]) == 0) pc = in.a;
            break;
        case Op::Br: {
            std::size_t dst = locals + fn->local_slots + in.imm;
            std::size_t src = sp - in.b;
            if (dst != src && in.b) std::memmove(st + dst, st + src, in.b * sizeof(std::uint64_t));
            sp = dst + in.b;
            pc = in.a;
            break;
        }
        case Op::BrIf: {
            if (std::uint32_t(st[--sp]) != 0) {
                std::size_t dst = locals + fn->local_slots + in.imm;
                std::size_t src = sp - in.b;
                if (dst != src && in.b)
                    std::memmove(st + dst, st + src, in.b * sizeof(std::uint64_t));
                sp = dst + in.b;
                pc = in.a;
            }
            break;
        }
        case Op::BrTable: {
            std::uint32_t idx = std::uint32_t(st[--sp]);
            if (idx > in.b) idx = in.b;
            const std::uint32_t* entry = fn->aux.data() + in.a + std::size_t(idx) * 3;
            std::uint32_t keep = entry[1];
            std::size_t dst = locals + fn->local_slots + entry[2];
            std::size_t src = sp - keep;
            if (dst != src && keep) std::memmove(st + dst, st + src, keep * sizeof(std::uint64_t));
            sp = dst + keep;
            pc = entry[0];
            break;
        }
        case Op::Return: {
            std::uint32_t keep = in.b;
            if (keep) std::memmove(st + locals, st + sp - keep, keep * sizeof(std::uint64_t));
            sp = locals + keep;
            if (frames.empty()) {
                std::vector<std::uint64_t> results(st + locals, st + sp);
                return results;
            }
            Frame f = frames.back();
            frames.pop_back();
            fn = f.fn;
            pc = f.pc;
            locals = f.locals;
            code = fn->code.data();
            break;
        }
        case Op::Call:
        case Op::CallIndirect: {
            std::uint32_t callee_index;
            if (in.op == Op::CallIndirect) {
                std::uint32_t elem = std::uint32_t(st[--sp]);
                if (elem >= table_.size())
                    return trap(ErrorKind::GuestAbiMissing, "indirect call out of table range");
                callee_index = table_[elem];
                if (callee_index == kNullFunc)
                    return trap(ErrorKind::GuestAbiMissing, "indirect call to null entry");
                if (!(*callees_[callee_index].type == module_->types[in.a]))
                    return trap(ErrorKind::GuestAbiMissing, "indirect call signature mismatch");
            } else {
                callee_index = in.a;
            }
            const Callee& target = callees_[callee_index];
            std::size_t nargs = target.type->params.size();
            if (target.host) {
                std::vector<std::uint64_t> results;
                auto s = target.host->invoke(std::span(st + sp - nargs, nargs), results);
                if (!s.ok()) return std::move(s).error();
                if (results.size() != target.type->results.size())
                    return trap(ErrorKind::GuestAbiMissing, "host function result arity mismatch");
                sp -= nargs;
                for (std::uint64_t v : results) st[sp++] = v;
                break;
            }
            if (frames.size() >= kMaxCallDepth)
                return trap(ErrorKind::AllocationFailed, "call stack exhausted");
            frames.push_back(Frame{fn, pc, locals});
            fn = target.fn;
            code = fn->code.data();
            pc = 0;
            locals = sp - nargs;
            std::size_t need = locals + fn->local_slots + fn->max_stack;
            if (need > kMaxStackSlots)
                return trap(ErrorKind::AllocationFailed, "call stack exhausted");
            if (need > stack_.size()) {
                stack_.resize(std::max(need, stack_.size() * 2));
                st = stack_.data();
            }
            for (std::size_t i = locals + nargs; i < locals + fn->local_slots; i++) st[i] = 0;
            sp = locals + fn->local_slots;
            break;
        }
        case Op::Drop:
            sp--;
            break;
        case Op::Select: {
            std::uint32_t c = std::uint32_t(st[--sp]);
            std::uint64_t b = st[--sp];
            if (c == 0) st[sp - 1] = b;
            break;
        }
        case Op::LocalGet:
            st[sp++] = st[locals + in.a];
            break;
        case Op::LocalSet:
            st[locals + in.a] = st[--sp];
            break;
        case Op::LocalTee:
            st[locals + in.a] = st[sp - 1];
            break;
        case Op::GlobalGet:
            st[sp++] = globals_[in.a];
            break;
        case Op::GlobalSet:
            globals_[in.a] = st[--sp];
            break;
        case Op::I32Const:
        case Op::I64Const:
            st[sp++] = in.imm;
            break;

        case Op::I32Load: RR_LOAD(std::uint32_t, std::uint64_t); break;
        case Op::I64Load: RR_LOAD(std::uint64_t, std::uint64_t); break;
        case Op::I32Load8S: RR_LOAD(std::int8_t, std::uint32_t); break;
        case Op::I32Load8U: RR_LOAD(std::uint8_t, std::uint64_t); break;
        case Op::I32Load16S: RR_LOAD(std::int16_t, std::uint32_t); break;
        case Op::I32Load16U: RR_LOAD(std::uint16_t, std::uint64_t); break;
        case Op::I64Load8S: RR_LOAD(std::int8_t, std::uint64_t); break;
        case Op::I64Load8U: RR_LOAD(std::uint8_t, std::uint64_t); break;
        case Op::I64Load16S: RR_LOAD(std::int16_t, std::uint64_t); break;
        case Op::I64Load16U: RR_LOAD(std::uint16_t, std::uint64_t); break;
        case Op::I64Load32S: RR_LOAD(std::int32_t, std::uint64_t); break;
        case Op::I64Load32U: RR_LOAD(std::uint32_t, std::uint64_t); break;
        case Op::I32Store: RR_STORE(std::uint32_t, std::uint32_t); break;
        case Op::I64Store: RR_STORE(std::uint64_t, std::uint64_t); break;
        case Op::I32Store8: RR_STORE(std::uint8_t, std::uint32_t); break;
        case Op::I32Store16: RR_STORE(std::uint16_t, std::uint32_t); break;
        case Op::I64Store8: RR_STORE(std::uint8_t, std::uint64_t); break;
        case Op::I64Store16: RR_STORE(std::uint16_t, std::uint64_t); break;
        case Op::I64Store32: RR_STORE(std::uint32_t, std::uint64_t); break;

        case Op::MemorySize:
            st[sp++] = msize / kPageSize;
            break;
        case Op::MemoryGrow: {
            std::uint64_t delta = std::uint32_t(st[sp - 1]);
            std::uint64_t cur = msize / kPageSize;
            if (cur + delta > max_pages_) {
                st[sp - 1] = std::uint64_t(std::uint32_t(-1));
            } else {
                memory_.resize((cur + delta) * kPageSize);
                mem = memory_.data();
                msize = memory_.size();
                st[sp - 1] = cur;
            }
            break;
        }
        case Op::MemoryCopy: {
            std::uint64_t n = std::uint32_t(st[--sp]);
            std::uint64_t src = std::uint32_t(st[--sp]);
            std::uint64_t dst = std::uint32_t(st[--sp]);
            if (src + n > msize || dst + n > msize)
                return trap(ErrorKind::BoundsViolation, "memory.copy out of bounds");
            std::memmove(mem + dst, mem + src, n);
            break;
        }
        case Op::MemoryFill: {
            std::uint64_t n = std::uint32_t(st[--sp]);
            std::uint8_t val = std::uint8_t(st[--sp]);
            std::uint64_t dst = std::uint32_t(st[--sp]);
            if (dst + n > msize)
                return trap(ErrorKind::BoundsViolation, "memory.fill out of bounds");
            std::memset(mem + dst, val, n);
            break;
        }

        case Op::I32Eqz:
            st[sp - 1] = (std::uint32_t(st[sp - 1]) == 0);
            break;
        case Op::I32Eq: RR_BINOP_U32(lhs == rhs); break;
        case Op::I32Ne: RR_BINOP_U32(lhs != rhs); break;
        case Op::I32LtS: RR_BINOP_S32(lhs < rhs); break;
        case Op::I32LtU: RR_BINOP_U32(lhs < rhs); break;
        case Op::I32GtS: RR_BINOP_S32(lhs > rhs); break;
        case Op::I32GtU: RR_BINOP_U32(lhs > rhs); break;
        case Op::I32LeS: RR_BINOP_S32(lhs <= rhs); break;
        case Op::I32LeU: RR_BINOP_U32(lhs <= rhs); break;
        case Op::I32GeS: RR_BINOP_S32(lhs >= rhs); break;
        case Op::I32GeU: RR_BINOP_U32(lhs >= rhs); break;
        case Op::I64Eqz:
            st[sp - 1] = (st[sp - 1] == 0);
            break;
        case Op::I64Eq: RR_BINOP_U64(lhs == rhs); break;
        case Op::I64Ne: RR_BINOP_U64(lhs != rhs); break;
        case Op::I64LtS: RR_BINOP_S64(lhs < rhs); break;
        case Op::I64LtU: RR_BINOP_U64(lhs < rhs); break;
        case Op::I64GtS: RR_BINOP_S64(lhs > rhs); break;
        case Op::I64GtU: RR_BINOP_U64(lhs > rhs); break;
        case Op::I64LeS: RR_BINOP_S64(lhs <= rhs); break;
        case Op::I64LeU: RR_BINOP_U64(lhs <= rhs); break;
        case Op::I64GeS: RR_BINOP_S64(lhs >= rhs); break;
        case Op::I64GeU: RR_BINOP_U64(lhs >= rhs); break;

        case Op::I32Clz:
            st[sp - 1] = std::uint64_t(std::countl_zero(std::uint32_t(st[sp - 1])));
            break;
        case Op::I32Ctz:
            st[sp - 1] = std::uint64_t(std::countr_zero(std::uint32_t(st[sp - 1])));
            break;
        case Op::I32Popcnt:
            st[sp - 1] = std::uint64_t(std::popcount(std::uint32_t(st[sp - 1])));
            break;
        case Op::I32Add: RR_BINOP_U32(lhs + rhs); break;
        case Op::I32Sub: RR_BINOP_U32(lhs - rhs); break;
        case Op::I32Mul: RR_BINOP_U32(lhs * rhs); break;
        case Op::I32DivS: {
            std::int32_t rhs = std::int32_t(st[--sp]);
            std::int32_t lhs = std::int32_t(st[sp - 1]);
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            if (lhs == std::numeric_limits<std::int32_t>::min() && rhs == -1)
                return trap(ErrorKind::GuestAbiMissing, "integer overflow");
            st[sp - 1] = std::uint64_t(std::uint32_t(lhs / rhs));
            break;
        }
        case Op::I32DivU: {
            std::uint32_t rhs = std::uint32_t(st[--sp]);
            std::uint32_t lhs = std::uint32_t(st[sp - 1]);
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            st[sp - 1] = lhs / rhs;
            break;
        }
        case Op::I32RemS: {
            std::int32_t rhs = std::int32_t(st[--sp]);
            std::int32_t lhs = std::int32_t(st[sp - 1]);
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            if (lhs == std::numeric_limits<std::int32_t>::min() && rhs == -1)
                st[sp - 1] = 0;
            else
                st[sp - 1] = std::uint64_t(std::uint32_t(lhs % rhs));
            break;
        }
        case Op::I32RemU: {
            std::uint32_t rhs = std::uint32_t(st[--sp]);
            std::uint32_t lhs = std::uint32_t(st[sp - 1]);
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            st[sp - 1] = lhs % rhs;
            break;
        }
        case Op::I32And: RR_BINOP_U32(lhs & rhs); break;
        case Op::I32Or: RR_BINOP_U32(lhs | rhs); break;
        case Op::I32Xor: RR_BINOP_U32(lhs ^ rhs); break;
        case Op::I32Shl: RR_BINOP_U32(lhs << (rhs & 31)); break;
        case Op::I32ShrS: RR_BINOP_S32(lhs >> (rhs & 31)); break;
        case Op::I32ShrU: RR_BINOP_U32(lhs >> (rhs & 31)); break;
        case Op::I32Rotl: RR_BINOP_U32(std::rotl(lhs, int(rhs & 31))); break;
        case Op::I32Rotr: RR_BINOP_U32(std::rotr(lhs, int(rhs & 31))); break;

        case Op::I64Clz:
            st[sp - 1] = std::uint64_t(std::countl_zero(st[sp - 1]));
            break;
        case Op::I64Ctz:
            st[sp - 1] = std::uint64_t(std::countr_zero(st[sp - 1]));
            break;
        case Op::I64Popcnt:
            st[sp - 1] = std::uint64_t(std::popcount(st[sp - 1]));
            break;
        case Op::I64Add: RR_BINOP_U64(lhs + rhs); break;
        case Op::I64Sub: RR_BINOP_U64(lhs - rhs); break;
        case Op::I64Mul: RR_BINOP_U64(lhs * rhs); break;
        case Op::I64DivS: {
            std::int64_t rhs = std::int64_t(st[--sp]);
            std::int64_t lhs = std::int64_t(st[sp - 1]);
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            if (lhs == std::numeric_limits<std::int64_t>::min() && rhs == -1)
                return trap(ErrorKind::GuestAbiMissing, "integer overflow");
            st[sp - 1] = std::uint64_t(lhs / rhs);
            break;
        }
        case Op::I64DivU: {
            std::uint64_t rhs = st[--sp];
            std::uint64_t lhs = st[sp - 1];
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            st[sp - 1] = lhs / rhs;
            break;
        }
        case Op::I64RemS: {
            std::int64_t rhs = std::int64_t(st[--sp]);
            std::int64_t lhs = std::int64_t(st[sp - 1]);
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            if (lhs == std::numeric_limits<std::int64_t>::min() && rhs == -1)
                st[sp - 1] = 0;
            else
                st[sp - 1] = std::uint64_t(lhs % rhs);
            break;
        }
        case Op::I64RemU: {
            std::uint64_t rhs = st[--sp];
            std::uint64_t lhs = st[sp - 1];
            if (rhs == 0) return trap(ErrorKind::GuestAbiMissing, "integer divide by zero");
            st[sp - 1] = lhs % rhs;
            break;
        }
        case Op::I64And: RR_BINOP_U64(lhs & rhs); break;
        case Op::I64Or: RR_BINOP_U64(lhs | rhs); break;
        case Op::I64Xor: RR_BINOP_U64(lhs ^ rhs); break;
        case Op::I64Shl: RR_BINOP_U64(lhs << (rhs & 63)); break;
        case Op::I64ShrS: RR_BINOP_S64(std::uint64_t(lhs >> (rhs & 63))); break;
        case Op::I64ShrU: RR_BINOP_U64(lhs >> (rhs & 63)); break;
        case Op::I64Rotl: RR_BINOP_U64(std::rotl(lhs, int(rhs & 63))); break;
        case Op::I64Rotr: RR_BINOP_U64(std::rotr(lhs, int(rhs & 63))); break;

        case Op::I32WrapI64:
            st[sp - 1] = std::uint64_t(std::uint32_t(st[sp - 1]));
            break;
        case Op::I64ExtendI32S:
            st[sp - 1] = std::uint64_t(std::int64_t(std::int32_t(st[sp - 1])));
            break;
        case Op::I64ExtendI32U:
            st[sp - 1] = std::uint64_t(std::uint32_t(st[sp - 1]));
            break;
        case Op::I32Extend8S:
            st[sp - 1] = std::uint64_t(std::uint32_t(std::int32_t(std::int8_t(st[sp - 1]))));
            break;
        case Op::I32Extend16S:
            st[sp - 1] = std::uint64_t(std::uint32_t(std::int32_t(std::int16_t(st[sp - 1]))));
            break;
        case Op::I64Extend8S:
            st[sp - 1] = std::uint64_t(std::int64_t(std::int8_t(st[sp - 1])));
            break;
        case Op::I64Extend16S:
            st[sp - 1] = std::uint64_t(std::int64_t(std::int16_t(st[sp - 1])));
            break;
        case Op::I64Extend32S:
            st[sp - 1] = std::uint64_t(std::int64_t(std::int32_t(st[sp - 1])));
            break;
        }
    }

#undef RR_BINOP_U32
#undef RR_BINOP_S32
#undef RR_BINOP_U64
#undef RR_BINOP_S64
#undef RR_LOAD
#undef RR_STORE
}

}  // namespace rr::wasm
