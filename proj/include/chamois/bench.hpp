// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Counter-based scaling scenarios. Everything here is deterministic given the
// seed: the reports contain operation counts, never timings.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "chamois/cfg.hpp"
#include "chamois/interval.hpp"
#include "chamois/ir.hpp"
#include "chamois/solver.hpp"
#include "chamois/symexec.hpp"

namespace chamois {

// r1..r{keys} get constants, then `diamonds` conditionals each overwrite
// `touched` random registers on the true arm and fall through on the false
// arm. The condition compares two parameters, so both arms stay feasible.
inline Function if_chain_function(std::size_t keys, std::size_t touched, std::size_t diamonds, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Key> pick(1, static_cast<Key>(keys));
    const Reg pa = static_cast<Reg>(keys) + 1;
    const Reg pb = pa + 1;
    Function f;
    f.name = "if_chain";
    f.params = {pa, pb};
    f.entry = 1;
    Loc next = 1;
    auto emit = [&](Instr i) { f.code = f.code.set(next++, std::move(i)); };
    for (Key r = 1; r <= static_cast<Key>(keys); ++r) {
        emit(instr::Const{r, Int(r), next + 1});
    }
    for (std::size_t d = 0; d < diamonds; ++d) {
        const Loc branch = next;
        const Loc arm_true = branch + 1;
        const Loc arm_false = arm_true + static_cast<Loc>(touched);
        const Loc merge = arm_false + 1;
        emit(instr::Branch{Cmp::lt, pa, pb, arm_true, arm_false});
        for (std::size_t i = 0; i < touched; ++i) {
            const Loc succ = i + 1 == touched ? merge : next + 1;
            emit(instr::Const{pick(rng), Int(1000 + static_cast<long long>(d)), succ});
        }
        emit(instr::Nop{merge});
        emit(instr::Nop{next + 1});
    }
    emit(instr::Return{1});
    return f;
}

// Chain r{i+1} := add r{i} r{i}, i = 1..n, returning r{n+1}.
inline Function doubling_chain_function(std::size_t n) {
    Function f;
    f.name = "chain";
    f.params = {1};
    f.entry = 1;
    for (Key i = 1; i <= static_cast<Key>(n); ++i) {
        f.code = f.code.set(i, instr::Op{i + 1, BinOp::add, i, i, i + 1});
    }
    f.code = f.code.set(static_cast<Key>(n) + 1, instr::Return{static_cast<Reg>(n) + 1});
    return f;
}

struct JoinScalingRow {
    std::size_t keys = 0;
    std::size_t merges = 0; // joins of two reachable states
    std::uint64_t naive_visits = 0;
    std::uint64_t sharing_visits = 0;
    std::uint64_t sharing_shortcuts = 0;

    [[nodiscard]] double naive_per_join() const { return merges ? double(naive_visits) / double(merges) : 0.0; }
    [[nodiscard]] double sharing_per_join() const { return merges ? double(sharing_visits) / double(merges) : 0.0; }
};

namespace detail {

// Interval hooks that count merges and route join visits into one counter.
struct CountingIntervalDomain : IntervalDomain {
    std::size_t* merges = nullptr;

    [[nodiscard]] State join(const State& a, const State& b) const {
        if (!a.is_bottom() && !b.is_bottom()) {
            ++*merges;
        }
        return chamois::join(a, b, join_options);
    }
};

} // namespace detail

// Solves the if-chain twice, with naive and with sharing joins, counting
// nodes visited by the joins only.
inline JoinScalingRow join_scaling_run(std::size_t keys, std::size_t touched, std::uint64_t seed) {
    const std::size_t diamonds = std::max<std::size_t>(1, keys / 100);
    const Function f = renumber(if_chain_function(keys, touched, diamonds, seed)).function;
    JoinScalingRow row;
    row.keys = keys;
    for (bool naive : {true, false}) {
        ShareStats stats;
        std::size_t merges = 0;
        detail::CountingIntervalDomain d;
        d.join_options = JoinOptions{naive, &stats};
        d.merges = &merges;
        SolverOptions opts;
        opts.fuel = 4 * f.code.size();
        auto r = kildall(f, d, AbsState::top(), widening_points(f), opts);
        if (!r.ok()) {
            throw UsageError("join-scaling solve ran out of fuel");
        }
        row.merges = merges;
        (naive ? row.naive_visits : row.sharing_visits) = stats.nodes_visited;
        if (!naive) {
            row.sharing_shortcuts = stats.shortcut_hits;
        }
    }
    return row;
}

inline std::vector<JoinScalingRow> join_scaling(const std::vector<std::size_t>& sizes, std::size_t touched,
                                                std::uint64_t seed) {
    std::vector<JoinScalingRow> out;
    for (std::size_t v : sizes) {
        out.push_back(join_scaling_run(v, touched, seed));
    }
    return out;
}

struct DagScalingRow {
    std::size_t length = 0;
    std::size_t nodes = 0;
    Int tree_size = 0;
    bool validated = false; // chain checked against itself
};

inline DagScalingRow dag_scaling_run(std::size_t n) {
    const Function f = doubling_chain_function(n);
    const auto block = straight_line_block(f);
    TermArena a;
    const Reg out = static_cast<Reg>(n) + 1;
    DagScalingRow row;
    row.length = n;
    row.validated = validate(a, block, block, f.params, {out}).equivalent();
    const SymState s = sym_exec(block, f.params, a);
    row.nodes = a.size();
    row.tree_size = a.tree_size(*s.regs.find(out));
    return row;
}

inline std::vector<DagScalingRow> dag_scaling(const std::vector<std::size_t>& lengths) {
    std::vector<DagScalingRow> out;
    for (std::size_t n : lengths) {
        out.push_back(dag_scaling_run(n));
    }
    return out;
}

} // namespace chamois
