// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Register-transfer IR: functions are control-flow graphs over pseudo
// registers r1, r2, ... with one instruction per (positive) location.

#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "chamois/common.hpp"
#include "chamois/ptrie.hpp"

namespace chamois {

using Reg = Key;
using Loc = Key;

enum class BinOp { add, sub, mul, div };
enum class Cmp { eq, ne, lt, le, gt, ge };

namespace instr {
struct Nop {
    Loc succ;
    friend bool operator==(const Nop&, const Nop&) = default;
};
struct Const {
    Reg dst;
    Int value;
    Loc succ;
    friend bool operator==(const Const&, const Const&) = default;
};
struct Move {
    Reg dst;
    Reg src;
    Loc succ;
    friend bool operator==(const Move&, const Move&) = default;
};
struct Op {
    Reg dst;
    BinOp op;
    Reg src1;
    Reg src2;
    Loc succ;
    friend bool operator==(const Op&, const Op&) = default;
};
struct Branch {
    Cmp cmp;
    Reg src1;
    Reg src2;
    Loc if_true;
    Loc if_false;
    friend bool operator==(const Branch&, const Branch&) = default;
};
struct Return {
    Reg src;
    friend bool operator==(const Return&, const Return&) = default;
};
} // namespace instr

using Instr = std::variant<instr::Nop, instr::Const, instr::Move, instr::Op, instr::Branch, instr::Return>;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Successors in fixed order: fallthrough / true branch first.
inline std::vector<Loc> successors(const Instr& i) {
    return std::visit(overloaded{
                          [](const instr::Branch& b) { return std::vector<Loc>{b.if_true, b.if_false}; },
                          [](const instr::Return&) { return std::vector<Loc>{}; },
                          [](const auto& x) { return std::vector<Loc>{x.succ}; },
                      },
                      i);
}

inline std::optional<Reg> defined_register(const Instr& i) {
    return std::visit(overloaded{
                          [](const instr::Const& x) -> std::optional<Reg> { return x.dst; },
                          [](const instr::Move& x) -> std::optional<Reg> { return x.dst; },
                          [](const instr::Op& x) -> std::optional<Reg> { return x.dst; },
                          [](const auto&) -> std::optional<Reg> { return std::nullopt; },
                      },
                      i);
}

inline bool is_trapping(BinOp op) { return op == BinOp::div; }

inline std::string_view to_string(BinOp op) {
    switch (op) {
    case BinOp::add: return "add";
    case BinOp::sub: return "sub";
    case BinOp::mul: return "mul";
    case BinOp::div: return "div";
    }
    return "?";
}

inline std::string_view to_string(Cmp c) {
    switch (c) {
    case Cmp::eq: return "eq";
    case Cmp::ne: return "ne";
    case Cmp::lt: return "lt";
    case Cmp::le: return "le";
    case Cmp::gt: return "gt";
    case Cmp::ge: return "ge";
    }
    return "?";
}

inline std::optional<BinOp> binop_from_string(std::string_view s) {
    if (s == "add") return BinOp::add;
    if (s == "sub") return BinOp::sub;
    if (s == "mul") return BinOp::mul;
    if (s == "div") return BinOp::div;
    return std::nullopt;
}

inline std::optional<Cmp> cmp_from_string(std::string_view s) {
    if (s == "eq") return Cmp::eq;
    if (s == "ne") return Cmp::ne;
    if (s == "lt") return Cmp::lt;
    if (s == "le") return Cmp::le;
    if (s == "gt") return Cmp::gt;
    if (s == "ge") return Cmp::ge;
    return std::nullopt;
}

inline Cmp negate(Cmp c) {
    switch (c) {
    case Cmp::eq: return Cmp::ne;
    case Cmp::ne: return Cmp::eq;
    case Cmp::lt: return Cmp::ge;
    case Cmp::le: return Cmp::gt;
    case Cmp::gt: return Cmp::le;
    case Cmp::ge: return Cmp::lt;
    }
    return c;
}

// a cmp b  <=>  b swap(cmp) a
inline Cmp swap_operands(Cmp c) {
    switch (c) {
    case Cmp::lt: return Cmp::gt;
    case Cmp::le: return Cmp::ge;
    case Cmp::gt: return Cmp::lt;
    case Cmp::ge: return Cmp::le;
    default: return c;
    }
}

template <typename T>
bool compare(Cmp c, const T& a, const T& b) {
    switch (c) {
    case Cmp::eq: return a == b;
    case Cmp::ne: return a != b;
    case Cmp::lt: return a < b;
    case Cmp::le: return a <= b;
    case Cmp::gt: return a > b;
    case Cmp::ge: return a >= b;
    }
    return false;
}

inline std::string reg_name(Reg r) { return "r" + std::to_string(r); }

inline std::string to_string(const Instr& i) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const instr::Nop& x) { os << "nop -> " << x.succ; },
                   [&](const instr::Const& x) { os << reg_name(x.dst) << " := " << x.value << " -> " << x.succ; },
                   [&](const instr::Move& x) {
                       os << reg_name(x.dst) << " := move " << reg_name(x.src) << " -> " << x.succ;
                   },
                   [&](const instr::Op& x) {
                       os << reg_name(x.dst) << " := " << to_string(x.op) << ' ' << reg_name(x.src1) << ' '
                          << reg_name(x.src2) << " -> " << x.succ;
                   },
                   [&](const instr::Branch& x) {
                       os << "if " << to_string(x.cmp) << ' ' << reg_name(x.src1) << ' ' << reg_name(x.src2)
                          << " -> " << x.if_true << ", " << x.if_false;
                   },
                   [&](const instr::Return& x) { os << "return " << reg_name(x.src); },
               },
               i);
    return os.str();
}

struct Function {
    std::string name;
    std::vector<Reg> params;
    Loc entry = 1;
    PTrie<Instr> code;

    [[nodiscard]] const Instr& at(Loc l) const {
        const Instr* i = code.find(l);
        if (i == nullptr) {
            throw UsageError("undefined location " + std::to_string(l));
        }
        return *i;
    }

    [[nodiscard]] std::vector<Loc> locations() const {
        std::vector<Loc> out;
        for (const auto& [l, _] : code.bindings()) {
            out.push_back(l);
        }
        return out;
    }

    friend bool operator==(const Function& a, const Function& b) {
        return a.name == b.name && a.params == b.params && a.entry == b.entry && a.code == b.code;
    }
};

// Empty string when well formed, otherwise the first problem found.
inline std::string check_well_formed(const Function& f) {
    if (!f.code.contains(f.entry)) {
        return "undefined location " + std::to_string(f.entry);
    }
    for (const auto& [l, i] : f.code.bindings()) {
        for (Loc s : successors(i)) {
            if (s < 1 || !f.code.contains(s)) {
                return "undefined location " + std::to_string(s);
            }
        }
    }
    return {};
}

// Canonical text: one instruction per line, ascending locations.
inline std::string print(const Function& f) {
    std::ostringstream os;
    os << "func " << f.name << '(';
    for (std::size_t i = 0; i < f.params.size(); ++i) {
        os << (i ? ", " : "") << reg_name(f.params[i]);
    }
    os << ") entry " << f.entry << " {\n";
    for (const auto& [l, i] : f.code.bindings()) {
        os << "  " << l << ": " << to_string(i) << '\n';
    }
    os << "}\n";
    return os.str();
}

} // namespace chamois
