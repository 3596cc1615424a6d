// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reference small-step semantics over unbounded integers. This is the oracle
// the analyses and transformations are differentially tested against.

#include <cstddef>
#include <map>
#include <span>
#include <variant>

#include "chamois/ir.hpp"

namespace chamois {

struct Returned {
    Int value;
    friend bool operator==(const Returned&, const Returned&) = default;
};
struct Trapped {
    Loc at;
    friend bool operator==(const Trapped&, const Trapped&) = default;
};
struct OutOfFuel {
    friend bool operator==(const OutOfFuel&, const OutOfFuel&) = default;
};

using Outcome = std::variant<Returned, Trapped, OutOfFuel>;
using RegFile = std::map<Reg, Int>;

// Quotient truncated toward zero; nullopt on a zero divisor.
inline std::optional<Int> eval_binop(BinOp op, const Int& a, const Int& b) {
    switch (op) {
    case BinOp::add: return a + b;
    case BinOp::sub: return a - b;
    case BinOp::mul: return a * b;
    case BinOp::div:
        if (b == 0) {
            return std::nullopt;
        }
        return Int(a / b);
    }
    return std::nullopt;
}

inline const Int& read_register(const RegFile& regs, Reg r) {
    auto it = regs.find(r);
    if (it == regs.end()) {
        throw UsageError("read of unwritten register " + reg_name(r));
    }
    return it->second;
}

// Runs f for at most `fuel` instructions. `observe(loc, regs)` sees the state
// before each executed instruction.
template <typename Observer>
Outcome interpret(const Function& f, std::span<const Int> inputs, std::size_t fuel, Observer&& observe) {
    if (inputs.size() != f.params.size()) {
        throw UsageError("function " + f.name + " expects " + std::to_string(f.params.size()) + " inputs, got " +
                         std::to_string(inputs.size()));
    }
    RegFile regs;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        regs[f.params[i]] = inputs[i];
    }
    Loc pc = f.entry;
    for (std::size_t step = 0; step < fuel; ++step) {
        const Instr& ins = f.at(pc);
        observe(pc, static_cast<const RegFile&>(regs));
        bool trapped = false;
        std::optional<Int> result;
        std::visit(overloaded{
                       [&](const instr::Nop& x) { pc = x.succ; },
                       [&](const instr::Const& x) {
                           regs[x.dst] = x.value;
                           pc = x.succ;
                       },
                       [&](const instr::Move& x) {
                           Int v = read_register(regs, x.src);
                           regs[x.dst] = std::move(v);
                           pc = x.succ;
                       },
                       [&](const instr::Op& x) {
                           auto v = eval_binop(x.op, read_register(regs, x.src1), read_register(regs, x.src2));
                           if (!v) {
                               trapped = true;
                               return;
                           }
                           regs[x.dst] = std::move(*v);
                           pc = x.succ;
                       },
                       [&](const instr::Branch& x) {
                           pc = compare(x.cmp, read_register(regs, x.src1), read_register(regs, x.src2)) ? x.if_true
                                                                                                          : x.if_false;
                       },
                       [&](const instr::Return& x) { result = read_register(regs, x.src); },
                   },
                   ins);
        if (trapped) {
            return Trapped{pc};
        }
        if (result) {
            return Returned{std::move(*result)};
        }
    }
    return OutOfFuel{};
}

inline Outcome interpret(const Function& f, std::span<const Int> inputs, std::size_t fuel) {
    return interpret(f, inputs, fuel, [](Loc, const RegFile&) {});
}

} // namespace chamois
