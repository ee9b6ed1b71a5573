#include "roadrunner/wasm/module.hpp"

#include <cstring>
#include <limits>

namespace rr::wasm {

namespace {

TransferError bad_module(std::string detail) {
    return make_error(ErrorKind::GuestAbiMissing, "invalid module: " + std::move(detail));
}

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }
    bool done() const { return pos_ >= size_; }

    bool read_u8(std::uint8_t& out) {
        if (pos_ >= size_) return false;
        out = data_[pos_++];
        return true;
    }

    bool read_bytes(std::uint8_t* out, std::size_t n) {
        if (remaining() < n) return false;
        std::memcpy(out, data_ + pos_, n);
        pos_ += n;
        return true;
    }

    bool skip(std::size_t n) {
        if (remaining() < n) return false;
        pos_ += n;
        return true;
    }

    bool read_leb_u32(std::uint32_t& out) {
        std::uint64_t v;
        if (!read_leb_u64(v, 5)) return false;
        if (v > std::numeric_limits<std::uint32_t>::max()) return false;
        out = std::uint32_t(v);
        return true;
    }

    bool read_leb_u64(std::uint64_t& out, int max_bytes = 10) {
        std::uint64_t result = 0;
        int shift = 0;
        for (int i = 0; i < max_bytes; i++) {
            std::uint8_t b;
            if (!read_u8(b)) return false;
            result |= std::uint64_t(b & 0x7F) << shift;
            if (!(b & 0x80)) {
                out = result;
                return true;
            }
            shift += 7;
        }
        return false;
    }

    bool read_leb_s64(std::int64_t& out, int max_bytes = 10) {
        std::int64_t result = 0;
        int shift = 0;
        std::uint8_t b = 0;
        for (int i = 0; i < max_bytes; i++) {
            if (!read_u8(b)) return false;
            result |= std::int64_t(b & 0x7F) << shift;
            shift += 7;
            if (!(b & 0x80)) {
                if (shift < 64 && (b & 0x40)) result |= -(std::int64_t(1) << shift);
                out = result;
                return true;
            }
        }
        return false;
    }

    bool read_name(std::string& out) {
        std::uint32_t len;
        if (!read_leb_u32(len) || remaining() < len) return false;
        out.assign(reinterpret_cast<const char*>(data_ + pos_), len);
        pos_ += len;
        return true;
    }

    const std::uint8_t* data_at(std::size_t p) const { return data_ + p; }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

bool is_valtype(std::uint8_t b) {
    return b == 0x7F || b == 0x7E || b == 0x7D || b == 0x7C;
}

bool read_valtype(ByteReader& r, ValType& out) {
    std::uint8_t b;
    if (!r.read_u8(b) || !is_valtype(b)) return false;
    out = ValType(b);
    return true;
}

// Constant expression: single i32/i64.const followed by end. Anything else
// (imported-global init, float constants) is outside the supported subset.
Result<std::uint64_t> read_const_expr(ByteReader& r, ValType expected) {
    std::uint8_t op;
    if (!r.read_u8(op)) return bad_module("truncated const expression");
    std::uint64_t value;
    if (op == 0x41 && expected == ValType::I32) {
        std::int64_t v;
        if (!r.read_leb_s64(v, 5)) return bad_module("bad i32.const");
        value = std::uint64_t(std::uint32_t(v));
    } else if (op == 0x42 && expected == ValType::I64) {
        std::int64_t v;
        if (!r.read_leb_s64(v)) return bad_module("bad i64.const");
        value = std::uint64_t(v);
    } else {
        return bad_module("unsupported const expression opcode " + std::to_string(op));
    }
    std::uint8_t end;
    if (!r.read_u8(end) || end != 0x0B) return bad_module("const expression missing end");
    return value;
}

Result<MemLimits> read_limits(ByteReader& r) {
    std::uint8_t flags;
    std::uint32_t min, max;
    if (!r.read_u8(flags) || flags > 1) return bad_module("bad limits flags");
    if (!r.read_leb_u32(min)) return bad_module("bad limits minimum");
    MemLimits lim;
    lim.min_pages = min;
    if (flags == 1) {
        if (!r.read_leb_u32(max) || max < min) return bad_module("bad limits maximum");
        lim.max_pages = max;
    }
    return lim;
}

// ---- code decoding -------------------------------------------------------

struct BlockSig {
    std::uint32_t params = 0;
    std::uint32_t results = 0;
};

struct PatchRef {
    std::uint32_t instr_index;
    std::int32_t aux_slot;  // >= 0: patch function.aux[slot], else instr.a
};

struct Ctrl {
    char kind;  // 'F' function, 'B' block, 'L' loop, 'I' if
    BlockSig sig;
    std::uint32_t height;  // operand height at entry, params excluded
    bool unreachable = false;
    bool has_else = false;
    std::uint32_t loop_start = 0;
    std::uint32_t if_instr = std::numeric_limits<std::uint32_t>::max();
    std::vector<PatchRef> end_patches;
};

class FunctionDecoder {
public:
    FunctionDecoder(const Module& module, std::uint32_t total_globals, Function& fn,
                    const FuncType& type)
        : module_(module), total_globals_(total_globals), fn_(fn), type_(type) {}

    Status decode(ByteReader& r, std::size_t body_end);

private:
    Status fail(const std::string& msg) {
        return bad_module(msg + " (instr " + std::to_string(fn_.code.size()) + ")");
    }

    void push(std::uint32_t n = 1) {
        height_ += n;
        if (height_ > fn_.max_stack) fn_.max_stack = height_;
    }

    bool pop(std::uint32_t n = 1) {
        Ctrl& c = ctrls_.back();
        for (std::uint32_t i = 0; i < n; i++) {
            if (height_ == c.height) {
                if (!c.unreachable) return false;
                continue;  // polymorphic stack below the barrier
            }
            height_--;
        }
        return true;
    }

    void mark_unreachable() {
        Ctrl& c = ctrls_.back();
        height_ = c.height;
        c.unreachable = true;
    }

    void emit(Op op, std::uint32_t a = 0, std::uint32_t b = 0, std::uint64_t imm = 0) {
        fn_.code.push_back(Instr{op, a, b, imm});
    }

    Result<BlockSig> read_blocktype(ByteReader& r);
    Status do_branch(ByteReader& r, std::uint32_t depth, Op op);

    const Module& module_;
    std::uint32_t total_globals_;
    Function& fn_;
    const FuncType& type_;
    std::vector<Ctrl> ctrls_;
    std::uint32_t height_ = 0;
};

Result<BlockSig> FunctionDecoder::read_blocktype(ByteReader& r) {
    std::int64_t v;
    if (!r.read_leb_s64(v, 5)) return bad_module("bad block type");
    if (v >= 0) {
        if (std::uint64_t(v) >= module_.types.size()) return bad_module("block type index out of range");
        const FuncType& t = module_.types[std::size_t(v)];
        return BlockSig{std::uint32_t(t.params.size()), std::uint32_t(t.results.size())};
    }
    switch (v) {
    case -64: return BlockSig{0, 0};  // empty
    case -1:                          // i32
    case -2: return BlockSig{0, 1};   // i64
    default: return bad_module("unsupported block type " + std::to_string(v));
    }
}

Status FunctionDecoder::do_branch(ByteReader& r, std::uint32_t depth, Op op) {
    (void)r;
    if (depth >= ctrls_.size()) return fail("branch depth out of range");
    Ctrl& target = ctrls_[ctrls_.size() - 1 - depth];
    std::uint32_t keep = (target.kind == 'L') ? target.sig.params : target.sig.results;

    if (op == Op::BrIf) {
        if (!pop()) return fail("br_if condition underflow");
    }
    if (!pop(keep)) return fail("branch operand underflow");
    push(keep);

    std::uint32_t idx = std::uint32_t(fn_.code.size());
    emit(op, 0, keep, target.height);
    if (target.kind == 'L') {
        fn_.code.back().a = target.loop_start;
    } else {
        target.end_patches.push_back(PatchRef{idx, -1});
    }
    if (op == Op::Br) {
        if (!pop(keep)) return fail("branch underflow");
        mark_unreachable();
    }
    return ok_status();
}

Status FunctionDecoder::decode(ByteReader& r, std::size_t body_end) {
    Ctrl func_ctrl;
    func_ctrl.kind = 'F';
    func_ctrl.sig = BlockSig{0, std::uint32_t(type_.results.size())};
    func_ctrl.height = 0;
    ctrls_.push_back(std::move(func_ctrl));

    const std::uint32_t total_funcs = module_.total_function_count();

    while (r.pos() < body_end) {
        std::uint8_t op;
        if (!r.read_u8(op)) return fail("truncated body");

        switch (op) {
        case 0x00:  // unreachable
            emit(Op::Unreachable);
            mark_unreachable();
            break;
        case 0x01:  // nop
            break;
        case 0x02:    // block
        case 0x03: {  // loop
            auto sig = read_blocktype(r);
            if (!sig.ok()) return std::move(sig).error();
            if (!pop(sig.value().params)) return fail("block param underflow");
            Ctrl c;
            c.kind = (op == 0x02) ? 'B' : 'L';
            c.sig = sig.value();
            c.height = height_;
            c.loop_start = std::uint32_t(fn_.code.size());
            ctrls_.push_back(std::move(c));
            push(sig.value().params);
            break;
        }
        case 0x04: {  // if
            auto sig = read_blocktype(r);
            if (!sig.ok()) return std::move(sig).error();
            if (!pop()) return fail("if condition underflow");
            if (!pop(sig.value().params)) return fail("if param underflow");
            Ctrl c;
            c.kind = 'I';
            c.sig = sig.value();
            c.height = height_;
            c.if_instr = std::uint32_t(fn_.code.size());
            ctrls_.push_back(std::move(c));
            emit(Op::JumpIfZero);
            push(sig.value().params);
            break;
        }
        case 0x05: {  // else
            if (ctrls_.size() < 2 || ctrls_.back().kind != 'I' || ctrls_.back().has_else)
                return fail("else without if");
            Ctrl& c = ctrls_.back();
            if (!pop(c.sig.results)) return fail("then-branch result underflow");
            if (!c.unreachable && height_ != c.height) return fail("then-branch height mismatch");
            // Jump over the else body; lands at end.
            c.end_patches.push_back(PatchRef{std::uint32_t(fn_.code.size()), -1});
            emit(Op::Jump);
            fn_.code[c.if_instr].a = std::uint32_t(fn_.code.size());
            c.has_else = true;
            c.unreachable = false;
            height_ = c.height;
            push(c.sig.params);
            break;
        }
        case 0x0B: {  // end
            Ctrl c = std::move(ctrls_.back());
            if (!pop(c.sig.results)) return fail("block result underflow");
            if (!c.unreachable && height_ != c.height) return fail("block height mismatch");
            ctrls_.pop_back();
            if (c.kind == 'I' && !c.has_else) {
                if (c.sig.params != c.sig.results) return fail("if without else must preserve stack");
                fn_.code[c.if_instr].a = std::uint32_t(fn_.code.size());
            }
            std::uint32_t here = std::uint32_t(fn_.code.size());
            for (const PatchRef& p : c.end_patches) {
                if (p.aux_slot >= 0)
                    fn_.aux[std::size_t(p.aux_slot)] = here;
                else
                    fn_.code[p.instr_index].a = here;
            }
            if (ctrls_.empty()) {
                emit(Op::Return, 0, c.sig.results);
                if (r.pos() != body_end) return fail("trailing bytes after function end");
                return ok_status();
            }
            height_ = c.height;
            push(c.sig.results);
            break;
        }
        case 0x0C: {  // br
            std::uint32_t depth;
            if (!r.read_leb_u32(depth)) return fail("bad br depth");
            if (auto s = do_branch(r, depth, Op::Br); !s.ok()) return s;
            break;
        }
        case 0x0D: {  // br_if
            std::uint32_t depth;
            if (!r.read_leb_u32(depth)) return fail("bad br_if depth");
            if (auto s = do_branch(r, depth, Op::BrIf); !s.ok()) return s;
            break;
        }
        case 0x0E: {  // br_table
            std::uint32_t count;
            if (!r.read_leb_u32(count)) return fail("bad br_table count");
            if (count > r.remaining()) return fail("br_table count exceeds body");
            if (!pop()) return fail("br_table index underflow");
            std::uint32_t aux_base = std::uint32_t(fn_.aux.size());
            fn_.aux.resize(fn_.aux.size() + std::size_t(count + 1) * 3);
            std::optional<std::uint32_t> keep_all;
            for (std::uint32_t i = 0; i <= count; i++) {
                std::uint32_t depth;
                if (!r.read_leb_u32(depth)) return fail("bad br_table target");
                if (depth >= ctrls_.size()) return fail("br_table depth out of range");
                Ctrl& target = ctrls_[ctrls_.size() - 1 - depth];
                std::uint32_t keep = (target.kind == 'L') ? target.sig.params : target.sig.results;
                if (keep_all && *keep_all != keep) return fail("br_table arity mismatch");
                keep_all = keep;
                std::uint32_t slot = aux_base + i * 3;
                fn_.aux[slot + 1] = keep;
                fn_.aux[slot + 2] = target.height;
                if (target.kind == 'L') {
                    fn_.aux[slot] = target.loop_start;
                } else {
                    target.end_patches.push_back(PatchRef{0, std::int32_t(slot)});
                }
            }
            if (!pop(*keep_all)) return fail("br_table operand underflow");
            emit(Op::BrTable, aux_base, count);
            mark_unreachable();
            break;
        }
        case 0x0F: {  // return
            std::uint32_t results = std::uint32_t(type_.results.size());
            if (!pop(results)) return fail("return underflow");
            emit(Op::Return, 0, results);
            mark_unreachable();
            break;
        }
        case 0x10: {  // call
            std::uint32_t idx;
            if (!r.read_leb_u32(idx)) return fail("bad call index");
            if (idx >= total_funcs) return fail("call index out of range");
            const FuncType& t = module_.function_type(idx);
            if (!pop(std::uint32_t(t.params.size()))) return fail("call argument underflow");
            emit(Op::Call, idx);
            push(std::uint32_t(t.results.size()));
            break;
        }
        case 0x11: {  // call_indirect
            std::uint32_t type_idx, table_idx;
            if (!r.read_leb_u32(type_idx) || !r.read_leb_u32(table_idx))
                return fail("bad call_indirect");
            if (table_idx != 0) return fail("call_indirect table index must be 0");
            if (type_idx >= module_.types.size()) return fail("call_indirect type out of range");
            const FuncType& t = module_.types[type_idx];
            if (!pop()) return fail("call_indirect index underflow");
            if (!pop(std::uint32_t(t.params.size()))) return fail("call_indirect argument underflow");
            emit(Op::CallIndirect, type_idx);
            push(std::uint32_t(t.results.size()));
            break;
        }
        case 0x1A:  // drop
            if (!pop()) return fail("drop underflow");
            emit(Op::Drop);
            break;
        case 0x1B:  // select
            if (!pop(3)) return fail("select underflow");
            emit(Op::Select);
            push();
            break;
        case 0x1C: {  // select with explicit types
            std::uint32_t n;
            if (!r.read_leb_u32(n) || n != 1) return fail("bad typed select");
            ValType t;
            if (!read_valtype(r, t)) return fail("bad select type");
            if (!pop(3)) return fail("select underflow");
            emit(Op::Select);
            push();
            break;
        }
        case 0x20:    // local.get
        case 0x21:    // local.set
        case 0x22: {  // local.tee
            std::uint32_t idx;
            if (!r.read_leb_u32(idx)) return fail("bad local index");
            if (idx >= fn_.local_slots) return fail("local index out of range");
            if (op == 0x20) {
                emit(Op::LocalGet, idx);
                push();
            } else if (op == 0x21) {
                if (!pop()) return fail("local.set underflow");
                emit(Op::LocalSet, idx);
            } else {
                if (!pop()) return fail("local.tee underflow");
                emit(Op::LocalTee, idx);
                push();
            }
            break;
        }
        case 0x23:    // global.get
        case 0x24: {  // global.set
            std::uint32_t idx;
            if (!r.read_leb_u32(idx)) return fail("bad global index");
            if (idx >= total_globals_) return fail("global index out of range");
            if (op == 0x23) {
                emit(Op::GlobalGet, idx);
                push();
            } else {
                if (!pop()) return fail("global.set underflow");
                emit(Op::GlobalSet, idx);
            }
            break;
        }
        case 0x3F:    // memory.size
        case 0x40: {  // memory.grow
            std::uint8_t memidx;
            if (!r.read_u8(memidx) || memidx != 0) return fail("bad memory index");
            if (op == 0x3F) {
                emit(Op::MemorySize);
                push();
            } else {
                if (!pop()) return fail("memory.grow underflow");
                emit(Op::MemoryGrow);
                push();
            }
            break;
        }
        case 0x41: {  // i32.const
            std::int64_t v;
            if (!r.read_leb_s64(v, 5)) return fail("bad i32.const");
            emit(Op::I32Const, 0, 0, std::uint64_t(std::uint32_t(v)));
            push();
            break;
        }
        case 0x42: {  // i64.const
            std::int64_t v;
            if (!r.read_leb_s64(v)) return fail("bad i64.const");
            emit(Op::I64Const, 0, 0, std::uint64_t(v));
            push();
            break;
        }
        case 0xFC: {  // extended prefix: bulk memory subset
            std::uint32_t sub;
            if (!r.read_leb_u32(sub)) return fail("bad 0xFC opcode");
            if (sub == 10) {  // memory.copy
                std::uint8_t a, b;
                if (!r.read_u8(a) || !r.read_u8(b) || a != 0 || b != 0)
                    return fail("bad memory.copy indices");
                if (!pop(3)) return fail("memory.copy underflow");
                emit(Op::MemoryCopy);
            } else if (sub == 11) {  // memory.fill
                std::uint8_t a;
                if (!r.read_u8(a) || a != 0) return fail("bad memory.fill index");
                if (!pop(3)) return fail("memory.fill underflow");
                emit(Op::MemoryFill);
            } else {
                return fail("unsupported 0xFC opcode " + std::to_string(sub));
            }
            break;
        }
        default: {
            // Memory loads/stores 0x28..0x3E
            if (op >= 0x28 && op <= 0x3E) {
                static constexpr Op kMemOps[] = {
                    Op::I32Load,    Op::I64Load,    Op::I32Load,    Op::I32Load,  // f32/f64 slots unused
                    Op::I32Load8S,  Op::I32Load8U,  Op::I32Load16S, Op::I32Load16U,
                    Op::I64Load8S,  Op::I64Load8U,  Op::I64Load16S, Op::I64Load16U,
                    Op::I64Load32S, Op::I64Load32U, Op::I32Store,   Op::I64Store,
                    Op::I32Store,   Op::I32Store,  // f32/f64 stores unused
                    Op::I32Store8,  Op::I32Store16, Op::I64Store8,  Op::I64Store16,
                    Op::I64Store32,
                };
                if (op == 0x2A || op == 0x2B || op == 0x38 || op == 0x39)
                    return fail("floating point memory access unsupported");
                std::uint32_t align, offset;
                if (!r.read_leb_u32(align) || !r.read_leb_u32(offset)) return fail("bad memarg");
                bool is_store = op >= 0x36;
                if (is_store) {
                    if (!pop(2)) return fail("store underflow");
                } else {
                    if (!pop()) return fail("load underflow");
                    push();
                }
                emit(kMemOps[op - 0x28], 0, 0, offset);
                break;
            }
            // Numeric ops 0x45..0x78 map 1:1 onto the Op enum.
            if (op >= 0x45 && op <= 0x78) {
                static constexpr Op kNumOps[] = {
                    Op::I32Eqz,  Op::I32Eq,   Op::I32Ne,   Op::I32LtS,  Op::I32LtU,
                    Op::I32GtS,  Op::I32GtU,  Op::I32LeS,  Op::I32LeU,  Op::I32GeS,
                    Op::I32GeU,  Op::I64Eqz,  Op::I64Eq,   Op::I64Ne,   Op::I64LtS,
                    Op::I64LtU,  Op::I64GtS,  Op::I64GtU,  Op::I64LeS,  Op::I64LeU,
                    Op::I64GeS,  Op::I64GeU,
                };
                static constexpr Op kArithOps[] = {
                    Op::I32Clz,  Op::I32Ctz,  Op::I32Popcnt, Op::I32Add,  Op::I32Sub,
                    Op::I32Mul,  Op::I32DivS, Op::I32DivU,   Op::I32RemS, Op::I32RemU,
                    Op::I32And,  Op::I32Or,   Op::I32Xor,    Op::I32Shl,  Op::I32ShrS,
                    Op::I32ShrU, Op::I32Rotl, Op::I32Rotr,   Op::I64Clz,  Op::I64Ctz,
                    Op::I64Popcnt, Op::I64Add, Op::I64Sub,   Op::I64Mul,  Op::I64DivS,
                    Op::I64DivU, Op::I64RemS, Op::I64RemU,   Op::I64And,  Op::I64Or,
                    Op::I64Xor,  Op::I64Shl,  Op::I64ShrS,   Op::I64ShrU, Op::I64Rotl,
                    Op::I64Rotr,
                };
                if (op >= 0x5B && op <= 0x66) return fail("floating point comparison unsupported");
                if (op <= 0x5A) {
                    // Comparisons and eqz. eqz pops one, the rest pop two.
                    bool unary = (op == 0x45 || op == 0x50);
                    if (!pop(unary ? 1 : 2)) return fail("comparison underflow");
                    push();
                    emit(kNumOps[op - 0x45]);
                } else {
                    // 0x67..0x78: i32 unary/binary arithmetic
                    bool unary = (op >= 0x67 && op <= 0x69);
                    if (!pop(unary ? 1 : 2)) return fail("arith underflow");
                    push();
                    emit(kArithOps[op - 0x67]);
                }
                break;
            }
            if (op >= 0x79 && op <= 0x8A) {
                static constexpr Op kI64Arith[] = {
                    Op::I64Clz,  Op::I64Ctz,  Op::I64Popcnt, Op::I64Add,  Op::I64Sub,
                    Op::I64Mul,  Op::I64DivS, Op::I64DivU,   Op::I64RemS, Op::I64RemU,
                    Op::I64And,  Op::I64Or,   Op::I64Xor,    Op::I64Shl,  Op::I64ShrS,
                    Op::I64ShrU, Op::I64Rotl, Op::I64Rotr,
                };
                bool unary = (op >= 0x79 && op <= 0x7B);
                if (!pop(unary ? 1 : 2)) return fail("arith underflow");
                push();
                emit(kI64Arith[op - 0x79]);
                break;
            }
            switch (op) {
            case 0xA7:  // i32.wrap_i64
                if (!pop()) return fail("conversion underflow");
                push();
                emit(Op::I32WrapI64);
                break;
            case 0xAC:
                if (!pop()) return fail("conversion underflow");
                push();
                emit(Op::I64ExtendI32S);
                break;
            case 0xAD:
                if (!pop()) return fail("conversion underflow");
                push();
                emit(Op::I64ExtendI32U);
                break;
            case 0xC0:
            case 0xC1:
            case 0xC2:
            case 0xC3:
            case 0xC4: {
                static constexpr Op kExt[] = {Op::I32Extend8S, Op::I32Extend16S, Op::I64Extend8S,
                                              Op::I64Extend16S, Op::I64Extend32S};
                if (!pop()) return fail("conversion underflow");
                push();
                emit(kExt[op - 0xC0]);
                break;
            }
            default:
                return fail("unsupported opcode 0x" + [op] {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "%02x", op);
                    return std::string(buf);
                }());
            }
        }
        }
    }
    return fail("function body missing terminal end");
}

}  // namespace

const FuncType& Module::function_type(std::uint32_t func_index) const {
    if (func_index < imported_function_count) {
        std::uint32_t seen = 0;
        for (const Import& imp : imports) {
            if (imp.kind != ExternKind::Function) continue;
            if (seen == func_index) return types[imp.type_index];
            seen++;
        }
    }
    return types[func_types[func_index - imported_function_count]];
}

const Import* Module::function_import(std::uint32_t func_index) const {
    if (func_index >= imported_function_count) return nullptr;
    std::uint32_t seen = 0;
    for (const Import& imp : imports) {
        if (imp.kind != ExternKind::Function) continue;
        if (seen == func_index) return &imp;
        seen++;
    }
    return nullptr;
}

const Export* Module::find_export(std::string_view name, ExternKind kind) const {
    for (const Export& e : exports) {
        if (e.kind == kind && e.name == name) return &e;
    }
    return nullptr;
}

Result<Module> Module::parse(std::span<const std::uint8_t> binary) {
    ByteReader r(binary.data(), binary.size());

    std::uint8_t header[8];
    if (!r.read_bytes(header, 8) || std::memcmp(header, "\0asm", 4) != 0)
        return bad_module("bad magic");
    if (std::memcmp(header + 4, "\x01\0\0\0", 4) != 0) return bad_module("unsupported version");

    Module m;
    std::uint32_t imported_globals = 0;
    bool imported_memory = false;
    int last_section = -1;

    while (!r.done()) {
        std::uint8_t section_id;
        std::uint32_t section_size;
        if (!r.read_u8(section_id) || !r.read_leb_u32(section_size))
            return bad_module("truncated section header");
        if (section_size > r.remaining()) return bad_module("section size exceeds file");
        std::size_t section_end = r.pos() + section_size;

        if (section_id != 0 && section_id != 12) {
            // Custom sections and the data-count section may appear between
            // any two sections; the rest must be ordered.
            if (int(section_id) <= last_section) return bad_module("section out of order");
            last_section = section_id;
        }

        switch (section_id) {
        case 0:  // custom: skipped
            if (!r.skip(section_size)) return bad_module("truncated custom section");
            break;
        case 1: {  // types
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > r.remaining())
                return bad_module("bad type count");
            m.types.reserve(count);
            for (std::uint32_t i = 0; i < count; i++) {
                std::uint8_t form;
                if (!r.read_u8(form) || form != 0x60) return bad_module("bad function type form");
                FuncType t;
                std::uint32_t n;
                if (!r.read_leb_u32(n) || n > r.remaining()) return bad_module("bad param count");
                t.params.resize(n);
                for (auto& v : t.params)
                    if (!read_valtype(r, v)) return bad_module("bad param type");
                if (!r.read_leb_u32(n) || n > r.remaining()) return bad_module("bad result count");
                t.results.resize(n);
                for (auto& v : t.results)
                    if (!read_valtype(r, v)) return bad_module("bad result type");
                m.types.push_back(std::move(t));
            }
            break;
        }
        case 2: {  // imports
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > r.remaining())
                return bad_module("bad import count");
            for (std::uint32_t i = 0; i < count; i++) {
                Import imp;
                if (!r.read_name(imp.module) || !r.read_name(imp.name))
                    return bad_module("bad import name");
                std::uint8_t kind;
                if (!r.read_u8(kind) || kind > 3) return bad_module("bad import kind");
                imp.kind = ExternKind(kind);
                switch (imp.kind) {
                case ExternKind::Function:
                    if (!r.read_leb_u32(imp.type_index) || imp.type_index >= m.types.size())
                        return bad_module("bad import type index");
                    m.imported_function_count++;
                    break;
                case ExternKind::Table: {
                    std::uint8_t elemtype;
                    if (!r.read_u8(elemtype) || elemtype != 0x70)
                        return bad_module("bad table import");
                    auto lim = read_limits(r);
                    if (!lim.ok()) return std::move(lim).error();
                    break;
                }
                case ExternKind::Memory: {
                    auto lim = read_limits(r);
                    if (!lim.ok()) return std::move(lim).error();
                    imported_memory = true;
                    break;
                }
                case ExternKind::Global: {
                    ValType t;
                    std::uint8_t mut;
                    if (!read_valtype(r, t) || !r.read_u8(mut))
                        return bad_module("bad global import");
                    imported_globals++;
                    break;
                }
                }
                m.imports.push_back(std::move(imp));
            }
            break;
        }
        case 3: {  // function declarations
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > r.remaining())
                return bad_module("bad function count");
            m.func_types.resize(count);
            for (auto& t : m.func_types) {
                if (!r.read_leb_u32(t) || t >= m.types.size())
                    return bad_module("bad function type index");
            }
            break;
        }
        case 4: {  // table
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > 1) return bad_module("at most one table");
            if (count == 1) {
                std::uint8_t elemtype;
                if (!r.read_u8(elemtype) || elemtype != 0x70) return bad_module("bad table type");
                auto lim = read_limits(r);
                if (!lim.ok()) return std::move(lim).error();
                m.table_min = lim.value().min_pages;
            }
            break;
        }
        case 5: {  // memory
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > 1) return bad_module("at most one memory");
            if (count == 1) {
                auto lim = read_limits(r);
                if (!lim.ok()) return std::move(lim).error();
                m.memory = lim.value();
            }
            break;
        }
        case 6: {  // globals
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > r.remaining())
                return bad_module("bad global count");
            m.globals.reserve(count);
            for (std::uint32_t i = 0; i < count; i++) {
                GlobalDef g{};
                std::uint8_t mut;
                if (!read_valtype(r, g.type) || !r.read_u8(mut) || mut > 1)
                    return bad_module("bad global definition");
                g.is_mutable = (mut == 1);
                auto init = read_const_expr(r, g.type);
                if (!init.ok()) return std::move(init).error();
                g.init = init.value();
                m.globals.push_back(g);
            }
            break;
        }
        case 7: {  // exports
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > r.remaining())
                return bad_module("bad export count");
            m.exports.reserve(count);
            for (std::uint32_t i = 0; i < count; i++) {
                Export e;
                if (!r.read_name(e.name)) return bad_module("bad export name");
                std::uint8_t kind;
                if (!r.read_u8(kind) || kind > 3) return bad_module("bad export kind");
                e.kind = ExternKind(kind);
                if (!r.read_leb_u32(e.index)) return bad_module("bad export index");
                m.exports.push_back(std::move(e));
            }
            break;
        }
        case 8: {  // start
            std::uint32_t idx;
            if (!r.read_leb_u32(idx)) return bad_module("bad start function");
            m.start_func = idx;
            break;
        }
        case 9: {  // element segments
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > r.remaining())
                return bad_module("bad elem count");
            for (std::uint32_t i = 0; i < count; i++) {
                std::uint32_t flags;
                if (!r.read_leb_u32(flags) || flags != 0)
                    return bad_module("unsupported elem segment flags");
                auto off = read_const_expr(r, ValType::I32);
                if (!off.ok()) return std::move(off).error();
                ElemSegment seg;
                seg.offset = std::uint32_t(off.value());
                std::uint32_t n;
                if (!r.read_leb_u32(n) || n > r.remaining()) return bad_module("bad elem size");
                seg.func_indices.resize(n);
                for (auto& f : seg.func_indices)
                    if (!r.read_leb_u32(f)) return bad_module("bad elem entry");
                m.elem_segments.push_back(std::move(seg));
            }
            break;
        }
        case 10: {  // code
            std::uint32_t count;
            if (!r.read_leb_u32(count)) return bad_module("bad code count");
            if (count != m.func_types.size())
                return bad_module("code count does not match function count");
            m.functions.resize(count);
            std::uint32_t total_globals = imported_globals + std::uint32_t(m.globals.size());
            for (std::uint32_t i = 0; i < count; i++) {
                std::uint32_t body_size;
                if (!r.read_leb_u32(body_size) || body_size > r.remaining())
                    return bad_module("bad body size");
                std::size_t body_end = r.pos() + body_size;
                Function& fn = m.functions[i];
                fn.type_index = m.func_types[i];
                const FuncType& type = m.types[fn.type_index];

                std::uint32_t decl_count;
                if (!r.read_leb_u32(decl_count) || decl_count > r.remaining())
                    return bad_module("bad local declaration count");
                std::uint64_t slots = type.params.size();
                for (std::uint32_t d = 0; d < decl_count; d++) {
                    std::uint32_t n;
                    ValType t;
                    if (!r.read_leb_u32(n) || !read_valtype(r, t))
                        return bad_module("bad local declaration");
                    slots += n;
                    if (slots > 100000) return bad_module("too many locals");
                }
                fn.local_slots = std::uint32_t(slots);

                FunctionDecoder dec(m, total_globals, fn, type);
                if (auto s = dec.decode(r, body_end); !s.ok())
                    return make_error(s.error().kind,
                                      s.error().detail + " in function " + std::to_string(i));
                fn.code.shrink_to_fit();
            }
            break;
        }
        case 11: {  // data segments
            std::uint32_t count;
            if (!r.read_leb_u32(count) || count > r.remaining())
                return bad_module("bad data count");
            for (std::uint32_t i = 0; i < count; i++) {
                std::uint32_t flags;
                if (!r.read_leb_u32(flags)) return bad_module("bad data flags");
                if (flags == 1) return bad_module("passive data segments unsupported");
                if (flags == 2) {
                    std::uint32_t memidx;
                    if (!r.read_leb_u32(memidx) || memidx != 0)
                        return bad_module("bad data memory index");
                }
                auto off = read_const_expr(r, ValType::I32);
                if (!off.ok()) return std::move(off).error();
                DataSegment seg;
                seg.offset = std::uint32_t(off.value());
                std::uint32_t n;
                if (!r.read_leb_u32(n) || n > r.remaining()) return bad_module("bad data size");
                seg.bytes.resize(n);
                if (!r.read_bytes(seg.bytes.data(), n)) return bad_module("truncated data segment");
                m.data_segments.push_back(std::move(seg));
            }
            break;
        }
        case 12: {  // data count: value unused by this subset
            std::uint32_t count;
            if (!r.read_leb_u32(count)) return bad_module("bad data count section");
            break;
        }
        default:
            return bad_module("unknown section id " + std::to_string(section_id));
        }

        if (r.pos() != section_end) return bad_module("section size mismatch");
    }

    if (imported_memory && m.memory) return bad_module("both imported and local memory");

    // Export indices must be inside their index spaces.
    std::uint32_t total_globals = imported_globals + std::uint32_t(m.globals.size());
    for (const Export& e : m.exports) {
        bool ok = true;
        switch (e.kind) {
        case ExternKind::Function: ok = e.index < m.total_function_count(); break;
        case ExternKind::Global: ok = e.index < total_globals; break;
        case ExternKind::Memory: ok = e.index == 0 && (m.memory || imported_memory); break;
        case ExternKind::Table: ok = e.index == 0; break;
        }
        if (!ok) return bad_module("export index out of range: " + e.name);
    }
    if (m.start_func && *m.start_func >= m.total_function_count())
        return bad_module("start function out of range");

    return m;
}

}  // namespace rr::wasm
