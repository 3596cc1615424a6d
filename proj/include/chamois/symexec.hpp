// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Symbolic execution of straight-line blocks over hash-consed terms.
 *
 * Terms are created only through TermArena, and every application goes
 * through `mk`, which rewrites at the root until no rule applies. Since the
 * arguments are already normal, every term in an arena is in normal form and
 * two blocks leave equal normal forms in a register iff they leave the same
 * handle there.
 *
 * Rules: constant folding for add, sub and mul; x+0, x-0, x*1 -> x;
 * x*0 -> 0; x-x -> 0; (x+c1)+c2 -> x+(c1+c2); add and mul operands sorted by
 * (is constant, handle id). Division is never rewritten. Potential traps are
 * recorded when the division executes, so a rule like x*0 -> 0 cannot hide
 * one.
 ******************************************************************************/

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chamois/interpreter.hpp"
#include "chamois/intern.hpp"
#include "chamois/ir.hpp"
#include "chamois/ptrie.hpp"

namespace chamois {

struct TermShape {
    enum class Kind : std::uint8_t { input, constant, app };

    Kind kind = Kind::input;
    Reg reg = 0;      // input
    Int value;        // constant
    BinOp op{};       // app
    Handle arg1;      // app
    Handle arg2;      // app

    friend bool operator==(const TermShape&, const TermShape&) = default;

    [[nodiscard]] std::uint64_t hash() const {
        switch (kind) {
        case Kind::input: return hash_combine(mix64(1), static_cast<std::uint64_t>(reg));
        case Kind::constant: return hash_combine(mix64(2), hash_int(value));
        case Kind::app: {
            std::uint64_t h = hash_combine(mix64(3), static_cast<std::uint64_t>(op));
            h = hash_combine(h, arg1.id);
            return hash_combine(h, arg2.id);
        }
        }
        return 0;
    }

    template <typename F>
    void for_each_child(F&& f) const {
        if (kind == Kind::app) {
            f(arg1);
            f(arg2);
        }
    }

  private:
    static std::uint64_t hash_int(const Int& v) {
        if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
            return mix64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v)));
        }
        return std::hash<std::string>{}(v.str());
    }
};

class TermArena;

class Term {
  public:
    [[nodiscard]] Handle handle() const { return h_; }

    friend bool operator==(Term, Term) = default;
    friend auto operator<=>(Term, Term) = default;

  private:
    friend class TermArena;
    explicit Term(Handle h) : h_(h) {}
    Handle h_;
};

using Valuation = std::map<Reg, Int>;

class TermArena {
  public:
    [[nodiscard]] Term input(Reg r) {
        check_key(r);
        TermShape s;
        s.kind = TermShape::Kind::input;
        s.reg = r;
        return Term(arena_.intern(s));
    }

    [[nodiscard]] Term constant(Int v) {
        TermShape s;
        s.kind = TermShape::Kind::constant;
        s.value = std::move(v);
        return Term(arena_.intern(s));
    }

    // Smart constructor: the interned normal form of "op a b".
    [[nodiscard]] Term mk(BinOp op, Term a, Term b) {
        own(a);
        own(b);
        if (op == BinOp::add || op == BinOp::mul) {
            if (order_key(b) < order_key(a)) {
                std::swap(a, b);
            }
        }
        const auto ca = constant_value(a);
        const auto cb = constant_value(b);
        if (ca && cb && op != BinOp::div) {
            return constant(*eval_binop(op, *ca, *cb));
        }
        switch (op) {
        case BinOp::add:
            if (cb && *cb == 0) {
                return a;
            }
            if (cb) {
                const TermShape sa = shape(a);
                if (sa.kind == TermShape::Kind::app && sa.op == BinOp::add) {
                    if (auto c1 = constant_value(Term(sa.arg2))) {
                        return mk(BinOp::add, Term(sa.arg1), constant(*c1 + *cb));
                    }
                }
            }
            break;
        case BinOp::sub:
            if (cb && *cb == 0) {
                return a;
            }
            if (a == b) {
                return constant(0);
            }
            break;
        case BinOp::mul:
            if (cb && *cb == 1) {
                return a;
            }
            if (cb && *cb == 0) {
                return b;
            }
            break;
        case BinOp::div: break;
        }
        TermShape s;
        s.kind = TermShape::Kind::app;
        s.op = op;
        s.arg1 = a.h_;
        s.arg2 = b.h_;
        return Term(arena_.intern(s));
    }

    // Returned by value: interning may move the node storage.
    [[nodiscard]] TermShape shape(Term t) const { return arena_.node(t.h_); }

    // Rebuilds t through the public constructors; equals t for every term of
    // this arena.
    [[nodiscard]] Term remake(Term t) {
        const TermShape s = shape(t);
        switch (s.kind) {
        case TermShape::Kind::input: return input(s.reg);
        case TermShape::Kind::constant: return constant(s.value);
        case TermShape::Kind::app: return mk(s.op, Term(s.arg1), Term(s.arg2));
        }
        return t;
    }

    [[nodiscard]] Term arg1(Term t) const { return Term(app_shape(t).arg1); }
    [[nodiscard]] Term arg2(Term t) const { return Term(app_shape(t).arg2); }

    [[nodiscard]] std::optional<Int> constant_value(Term t) const {
        const TermShape& s = arena_.node(t.h_);
        if (s.kind != TermShape::Kind::constant) {
            return std::nullopt;
        }
        return s.value;
    }

    [[nodiscard]] bool owns(Term t) const { return arena_.owns(t.h_); }
    [[nodiscard]] std::size_t size() const { return arena_.size(); }
    [[nodiscard]] const ArenaStats& stats() const { return arena_.stats(); }
    [[nodiscard]] const Arena<TermShape>& arena() const { return arena_; }

    // Size of t as a tree (leaves count 1, applications 1 + both arguments),
    // computed over the DAG. Children always have smaller ids than their
    // parents, so one forward pass suffices.
    [[nodiscard]] Int tree_size(Term t) {
        own(t);
        while (tree_sizes_.size() <= t.h_.id) {
            const TermShape& s = arena_.node(Handle{t.h_.arena, static_cast<std::uint32_t>(tree_sizes_.size())});
            if (s.kind == TermShape::Kind::app) {
                tree_sizes_.push_back(Int(1 + tree_sizes_[s.arg1.id] + tree_sizes_[s.arg2.id]));
            } else {
                tree_sizes_.emplace_back(1);
            }
        }
        return tree_sizes_[t.h_.id];
    }

    // Value of t under `env`; nullopt when a division by zero occurs anywhere
    // in t. Throws if t mentions an input missing from env.
    [[nodiscard]] std::optional<Int> evaluate(Term t, const Valuation& env) const {
        std::unordered_map<std::uint32_t, std::optional<Int>> memo;
        return eval_rec(t.h_, env, memo);
    }

    [[nodiscard]] std::string to_string(Term t) const {
        const TermShape& s = arena_.node(t.h_);
        switch (s.kind) {
        case TermShape::Kind::input: return "in(" + reg_name(s.reg) + ")";
        case TermShape::Kind::constant: return s.value.str();
        case TermShape::Kind::app: break;
        }
        std::string out = std::string(chamois::to_string(s.op)) + "(";
        out += short_name(s.arg1) + ", " + short_name(s.arg2) + ")";
        return out;
    }

  private:
    void own(Term t) const {
        if (!arena_.owns(t.h_)) {
            throw UsageError("term " + std::to_string(t.h_.id) + " does not belong to this arena");
        }
    }

    [[nodiscard]] std::pair<bool, std::uint32_t> order_key(Term t) const {
        return {arena_.node(t.h_).kind == TermShape::Kind::constant, t.h_.id};
    }

    [[nodiscard]] const TermShape& app_shape(Term t) const {
        const TermShape& s = arena_.node(t.h_);
        if (s.kind != TermShape::Kind::app) {
            throw UsageError("term is not an application");
        }
        return s;
    }

    // Leaves inline, applications by id.
    [[nodiscard]] std::string short_name(Handle h) const {
        const TermShape& s = arena_.node(h);
        if (s.kind == TermShape::Kind::app) {
            return "#" + std::to_string(h.id);
        }
        return to_string(Term(h));
    }

    std::optional<Int> eval_rec(Handle h, const Valuation& env,
                                std::unordered_map<std::uint32_t, std::optional<Int>>& memo) const {
        if (auto it = memo.find(h.id); it != memo.end()) {
            return it->second;
        }
        const TermShape& s = arena_.node(h);
        std::optional<Int> out;
        switch (s.kind) {
        case TermShape::Kind::input: {
            auto it = env.find(s.reg);
            if (it == env.end()) {
                throw UsageError("no value for input " + reg_name(s.reg));
            }
            out = it->second;
            break;
        }
        case TermShape::Kind::constant: out = s.value; break;
        case TermShape::Kind::app: {
            const Handle a = s.arg1;
            const Handle b = s.arg2;
            const BinOp op = s.op;
            auto x = eval_rec(a, env, memo);
            auto y = eval_rec(b, env, memo);
            if (x && y) {
                out = eval_binop(op, *x, *y);
            }
            break;
        }
        }
        memo.emplace(h.id, out);
        return out;
    }

    Arena<TermShape> arena_;
    std::vector<Int> tree_sizes_; // by id, filled on demand
};

struct SymState {
    PTrie<Term> regs;
    std::set<Term> traps; // division terms, as executed
};

// Instructions of a branch-free function from the entry up to (excluding) its
// return. Throws on a branch or a cycle.
inline std::vector<Instr> straight_line_block(const Function& f) {
    std::vector<Instr> out;
    std::unordered_set<Loc> seen;
    Loc pc = f.entry;
    while (true) {
        if (!seen.insert(pc).second) {
            throw UsageError("block " + f.name + " loops back to location " + std::to_string(pc));
        }
        const Instr& ins = f.at(pc);
        if (std::holds_alternative<instr::Return>(ins)) {
            return out;
        }
        if (std::holds_alternative<instr::Branch>(ins)) {
            throw UsageError("block " + f.name + " branches at location " + std::to_string(pc));
        }
        out.push_back(ins);
        pc = successors(ins).front();
    }
}

inline SymState sym_exec(const std::vector<Instr>& block, const std::vector<Reg>& inputs, TermArena& a) {
    SymState st;
    for (Reg r : inputs) {
        st.regs = st.regs.set(r, a.input(r));
    }
    auto read = [&](Reg r) {
        const Term* t = st.regs.find(r);
        if (t == nullptr) {
            throw UsageError("read of unwritten register " + reg_name(r));
        }
        return *t;
    };
    for (const Instr& ins : block) {
        std::visit(overloaded{
                       [&](const instr::Nop&) {},
                       [&](const instr::Const& x) { st.regs = st.regs.set(x.dst, a.constant(x.value)); },
                       [&](const instr::Move& x) { st.regs = st.regs.set(x.dst, read(x.src)); },
                       [&](const instr::Op& x) {
                           const Term t = a.mk(x.op, read(x.src1), read(x.src2));
                           if (is_trapping(x.op)) {
                               st.traps.insert(t);
                           }
                           st.regs = st.regs.set(x.dst, t);
                       },
                       [&](const instr::Branch&) { throw UsageError("branch inside a straight-line block"); },
                       [&](const instr::Return&) { throw UsageError("return inside a straight-line block"); },
                   },
                   ins);
    }
    return st;
}

struct Verdict {
    enum class Kind { equivalent, live_mismatch, trap_not_included, input_mismatch };

    Kind kind = Kind::equivalent;
    Reg reg = 0;                  // live_mismatch
    std::optional<Term> src_term; // live_mismatch
    std::optional<Term> tgt_term; // live_mismatch; also the extra trap
    std::string message;

    [[nodiscard]] bool equivalent() const { return kind == Kind::equivalent; }
};

inline std::string_view to_string(Verdict::Kind k) {
    switch (k) {
    case Verdict::Kind::equivalent: return "equivalent";
    case Verdict::Kind::live_mismatch: return "live register mismatch";
    case Verdict::Kind::trap_not_included: return "trap set not included";
    case Verdict::Kind::input_mismatch: return "input shape mismatch";
    }
    return "?";
}

// Equivalent iff every live register holds the same handle after both blocks
// and every potential trap of tgt is one of src. A rejection does not imply
// the blocks differ.
inline Verdict validate(TermArena& a, const std::vector<Instr>& src, const std::vector<Instr>& tgt,
                        const std::vector<Reg>& inputs, const std::vector<Reg>& live_out) {
    const SymState s = sym_exec(src, inputs, a);
    const SymState t = sym_exec(tgt, inputs, a);
    Verdict v;
    for (Reg r : live_out) {
        const Term* ts = s.regs.find(r);
        const Term* tt = t.regs.find(r);
        if (ts == nullptr || tt == nullptr || *ts != *tt) {
            v.kind = Verdict::Kind::live_mismatch;
            v.reg = r;
            if (ts) {
                v.src_term = *ts;
            }
            if (tt) {
                v.tgt_term = *tt;
            }
            v.message = reg_name(r) + ": " + (ts ? a.to_string(*ts) : "unset") + " vs " +
                        (tt ? a.to_string(*tt) : "unset");
            return v;
        }
    }
    for (Term trap : t.traps) {
        if (!s.traps.contains(trap)) {
            v.kind = Verdict::Kind::trap_not_included;
            v.tgt_term = trap;
            v.message = "target may trap at " + a.to_string(trap);
            return v;
        }
    }
    return v;
}

struct ValidationReport {
    Verdict verdict;
    std::size_t nodes = 0;
    Int would_be_tree_size = 0; // summed over the live registers of the source
};

// Whole-file validation: both blocks must take the same inputs; the live set
// is the union of both trailers.
inline ValidationReport validate_blocks(const Function& src, const std::vector<Reg>& src_live, const Function& tgt,
                                        const std::vector<Reg>& tgt_live) {
    ValidationReport out;
    if (src.params != tgt.params) {
        out.verdict.kind = Verdict::Kind::input_mismatch;
        out.verdict.message = "source and target take different inputs";
        return out;
    }
    std::set<Reg> live(src_live.begin(), src_live.end());
    live.insert(tgt_live.begin(), tgt_live.end());
    const std::vector<Reg> live_out(live.begin(), live.end());
    TermArena a;
    const auto sb = straight_line_block(src);
    out.verdict = validate(a, sb, straight_line_block(tgt), src.params, live_out);
    const SymState s = sym_exec(sb, src.params, a);
    for (Reg r : live_out) {
        if (const Term* t = s.regs.find(r)) {
            out.would_be_tree_size += a.tree_size(*t);
        }
    }
    out.nodes = a.size();
    return out;
}

struct DagStats {
    std::size_t nodes = 0;
    Int would_be_tree_size = 0;
};

// Arena size and the summed tree sizes of `roots`.
inline DagStats dag_stats(TermArena& a, const std::vector<Term>& roots) {
    DagStats out{a.size(), 0};
    for (Term t : roots) {
        out.would_be_tree_size += a.tree_size(t);
    }
    return out;
}

} // namespace chamois
