// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Workset fixpoint engine and inductiveness checker.
 *
 * `kildall` is the oracle: it may use widening, heuristics and a fuel
 * budget, and it is allowed to fail. `check_inductive` is the checker: it
 * accepts an invariant (from kildall, from a file, from anywhere) only if it
 * contains the entry state and is closed under every transfer edge. Nothing
 * the checker concludes depends on how the invariant was produced.
 ******************************************************************************/

#include <concepts>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chamois/cfg.hpp"
#include "chamois/ir.hpp"
#include "chamois/ptrie.hpp"

namespace chamois {

template <typename D>
concept AbstractDomain = requires(const D& d, const typename D::State& s, const Instr& i) {
    { d.bottom() } -> std::convertible_to<typename D::State>;
    { d.is_bottom(s) } -> std::convertible_to<bool>;
    { d.transfer(i, s) } -> std::convertible_to<std::vector<std::pair<Loc, typename D::State>>>;
    { d.join(s, s) } -> std::convertible_to<typename D::State>;
    { d.widen(s, s) } -> std::convertible_to<typename D::State>;
    { d.leq(s, s) } -> std::convertible_to<bool>;
};

template <typename State>
using Invariant = PTrie<State>;

struct Failure {
    std::string reason;
    std::size_t picks = 0;
};

template <typename State>
struct SolveResult {
    std::optional<Invariant<State>> invariant;
    std::optional<Failure> failure;
    std::size_t picks = 0;
    std::vector<Loc> pick_log; // filled when SolverOptions::record_picks

    [[nodiscard]] bool ok() const { return invariant.has_value(); }
};

struct SolverOptions {
    std::size_t fuel = 0; // 0: 50 picks per location
    bool record_picks = false;
};

inline std::size_t default_fuel(const Function& f) { return 50 * f.code.size(); }

// Expects a renumbered function: the largest pending location is picked
// first, which is the earliest one in reverse postorder.
template <AbstractDomain D>
SolveResult<typename D::State> kildall(const Function& f, const D& domain, const typename D::State& entry_state,
                                       const std::set<Loc>& widen_at, const SolverOptions& opts = {}) {
    using State = typename D::State;
    SolveResult<State> out;
    const std::size_t fuel = opts.fuel ? opts.fuel : default_fuel(f);

    Invariant<State> inv;
    for (Loc l : f.locations()) {
        inv = inv.set(l, domain.bottom());
    }
    inv = inv.set(f.entry, entry_state);

    std::set<Loc> work{f.entry};
    while (!work.empty()) {
        if (out.picks == fuel) {
            out.failure = Failure{"out of fuel", out.picks};
            return out;
        }
        const Loc p = *work.rbegin();
        work.erase(p);
        ++out.picks;
        if (opts.record_picks) {
            out.pick_log.push_back(p);
        }
        for (auto& [succ, s] : domain.transfer(f.at(p), *inv.find(p))) {
            const State& cur = *inv.find(succ);
            if (domain.leq(s, cur)) {
                continue;
            }
            State next = domain.join(cur, s);
            if (widen_at.contains(succ)) {
                next = domain.widen(cur, next);
            }
            inv = inv.set(succ, std::move(next));
            work.insert(succ);
        }
    }
    out.invariant = std::move(inv);
    return out;
}

template <typename State>
struct CounterExample {
    Loc from = 0; // 0 for the entry condition
    Loc to = 0;
    std::string reason;
    std::optional<State> propagated; // state carried along the edge
    std::optional<State> claimed;    // state the invariant gives at `to`
};

template <typename State>
struct CheckResult {
    std::optional<CounterExample<State>> counterexample;

    [[nodiscard]] bool ok() const { return !counterexample.has_value(); }
};

// Accepts iff entry_state <= inv(entry) and, for every location p with
// inv(p) not bottom and every (p', s') in transfer(p, inv(p)), s' <= inv(p').
// Locations are visited in reverse postorder, then the unreachable ones.
template <AbstractDomain D>
CheckResult<typename D::State> check_inductive(const Function& f, const Invariant<typename D::State>& inv,
                                               const typename D::State& entry_state, const D& domain) {
    using State = typename D::State;
    CheckResult<State> out;
    auto fail = [&](Loc from, Loc to, std::string reason, std::optional<State> prop, std::optional<State> claim) {
        out.counterexample = CounterExample<State>{from, to, std::move(reason), std::move(prop), std::move(claim)};
        return out;
    };

    const State* at_entry = inv.find(f.entry);
    if (at_entry == nullptr) {
        return fail(0, f.entry, "missing", entry_state, std::nullopt);
    }
    if (!domain.leq(entry_state, *at_entry)) {
        return fail(0, f.entry, "entry state not included", entry_state, *at_entry);
    }

    std::vector<Loc> order = reverse_postorder(f);
    std::unordered_set<Loc> reached(order.begin(), order.end());
    for (Loc l : f.locations()) {
        if (!reached.contains(l)) {
            order.push_back(l);
        }
    }
    for (Loc p : order) {
        const State* here = inv.find(p);
        if (here == nullptr) {
            return fail(p, p, "missing", std::nullopt, std::nullopt);
        }
        if (domain.is_bottom(*here)) {
            continue;
        }
        for (auto& [succ, s] : domain.transfer(f.at(p), *here)) {
            const State* there = inv.find(succ);
            if (there == nullptr) {
                return fail(p, succ, "missing", std::move(s), std::nullopt);
            }
            if (!domain.leq(s, *there)) {
                return fail(p, succ, "not inductive", std::move(s), *there);
            }
        }
    }
    return out;
}

} // namespace chamois
