// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner: one line per criterion, "[PASS]" or "[FAIL]".
//
//   acceptance [--allow-fail N]...
//
// Exits 0 when every failing criterion was named with --allow-fail.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chamois/bench.hpp"
#include "chamois/cfg.hpp"
#include "chamois/facts.hpp"
#include "chamois/hset.hpp"
#include "chamois/interpreter.hpp"
#include "chamois/interval.hpp"
#include "chamois/parser.hpp"
#include "chamois/polycert.hpp"
#include "chamois/ptrie.hpp"
#include "chamois/solver.hpp"
#include "chamois/symexec.hpp"
#include "support/generators.hpp"

using namespace chamois;
using chamois::testing::coin;
using chamois::testing::Rng;
using chamois::testing::uniform;

namespace {

struct Result {
    bool pass = true;
    std::string detail;
};

// Collects the first few failure messages of a criterion.
struct Log {
    bool pass = true;
    int failures = 0;
    std::ostringstream notes;
    std::ostringstream problems;

    void fail(const std::string& what) {
        pass = false;
        if (++failures <= 3) {
            problems << "\n      " << what;
        }
    }
    [[nodiscard]] std::string detail() const {
        std::string out = notes.str() + problems.str();
        if (failures > 3) {
            out += "\n      ... " + std::to_string(failures - 3) + " more";
        }
        return out;
    }
    void expect(bool ok, const std::string& what) {
        if (!ok) {
            fail(what);
        }
    }
};

Interval iv(long long lo, long long hi) { return {Bound(lo), Bound(hi)}; }

// --- 1 ------------------------------------------------------------------------

Result worked_examples() {
    Log log;
    {
        const Function f = parse(R"(
            func running(r1) entry 1 {
              1: r2 := move r1 -> 2
              2: r3 := sub r1 r2 -> 3
              3: return r3
            })");
        const Renumbered rn = renumber(f);
        const auto r = kildall(rn.function, IntervalDomain{}, AbsState::top().set(1, iv(0, 1)),
                               widening_points(rn.function));
        log.expect(r.ok(), "interval analysis ran out of fuel");
        if (r.ok()) {
            const Interval z = r.invariant->find(rn.new_of_old.at(3))->get(3);
            log.expect(z == iv(-1, 1), "z = " + z.to_string() + ", expected [-1, 1]");
        }
    }
    {
        // x = r1, y = r2, u = r3, z = r4, t = r5, v = r6
        const Function src = parse(R"(
            func src(r1, r2) entry 1 {
              1: r3 := add r1 r2 -> 2
              2: r4 := add r1 r2 -> 3
              3: r5 := sub r1 r2 -> 4
              4: r6 := sub r1 r2 -> 5
              5: return r3
            })");
        const Function tgt = parse(R"(
            func tgt(r1, r2) entry 1 {
              1: r3 := add r1 r2 -> 2
              2: r5 := sub r1 r2 -> 3
              3: r1 := 0 -> 4
              4: r4 := move r3 -> 5
              5: return r3
            })");
        const std::vector<Reg> live{2, 3, 4, 5};
        const auto ok = validate_blocks(src, live, tgt, live);
        log.expect(ok.verdict.equivalent(), "pair with x, v dead rejected: " + ok.verdict.message);
        const std::vector<Reg> x_live{1, 2, 3, 4, 5};
        const auto bad = validate_blocks(src, x_live, tgt, x_live);
        log.expect(bad.verdict.kind == Verdict::Kind::live_mismatch && bad.verdict.reg == 1,
                   "pair with x live not rejected on x");
    }
    {
        const Polyhedron p{{Constraint({{1, 1}, {2, 1}}, 1), Constraint({{1, 1}, {2, -1}}, 2)}};
        const Constraint c({{1, 1}}, Rational(3, 2));
        const Rational half(1, 2);
        log.expect(check_entailment(p, c, FarkasCert{{{0, half}, {1, half}}}), "certificate (1/2, 1/2) rejected");
        const std::vector<Rational> deltas{Rational(1, 1000), Rational(-1, 1000), Rational(1, 6), Rational(-1, 2),
                                           Rational(1), Rational(-1)};
        int perturbed = 0;
        for (const Rational& d : deltas) {
            for (int which = 0; which < 3; ++which) {
                Rational l0 = half + (which != 1 ? d : Rational(0));
                Rational l1 = half + (which != 0 ? d : Rational(0));
                ++perturbed;
                std::map<std::size_t, Rational> lambdas{{0, l0}, {1, l1}};
                log.expect(!check_entailment(p, c, FarkasCert{lambdas}),
                           "perturbed certificate (" + l0.str() + ", " + l1.str() + ") accepted");
            }
        }
        log.expect(!check_entailment(p, c, FarkasCert{{{0, half}}}), "dropped multiplier accepted");
        log.expect(!check_entailment(p, c, FarkasCert{}), "empty certificate accepted");
        log.notes << "z in [-1, 1]; pair accepted, x live rejected; " << perturbed + 2
                  << " perturbed certificates rejected";
    }
    return {log.pass, log.detail()};
}

// --- 2 ------------------------------------------------------------------------

Key random_key(Rng& rng) { return coin(rng) ? uniform(rng, 1, 64) : uniform(rng, 1, std::int64_t(1) << 40); }

Result canonicity() {
    Log log;
    Rng rng(2002);
    for (int round = 0; round < 10000; ++round) {
        std::map<Key, int> m;
        const auto n = uniform(rng, 0, 40);
        for (int i = 0; i < n; ++i) {
            m[random_key(rng)] = static_cast<int>(uniform(rng, 0, 5));
        }
        std::vector<std::pair<Key, int>> order(m.begin(), m.end());
        auto build = [&](bool noise) {
            std::shuffle(order.begin(), order.end(), rng);
            PTrie<int> t;
            for (const auto& [k, v] : order) {
                if (noise && coin(rng, 0.3)) {
                    const Key extra = random_key(rng);
                    if (!m.contains(extra)) {
                        t = t.set(extra, 99).remove(extra);
                    }
                    t = t.set(k, v + 1);
                }
                t = t.set(k, v);
            }
            return t;
        };
        const PTrie<int> a = build(false);
        const PTrie<int> b = build(true);
        if (!(a == b) || !a.is_canonical() || !b.is_canonical() || a.node_count() != b.node_count()) {
            log.fail("ptrie round " + std::to_string(round) + " differs across construction orders");
        }
    }
    SetArena arena;
    for (int round = 0; round < 10000; ++round) {
        std::set<Key> s;
        const auto n = uniform(rng, 0, 40);
        for (int i = 0; i < n; ++i) {
            s.insert(random_key(rng));
        }
        std::vector<Key> order(s.begin(), s.end());
        std::shuffle(order.begin(), order.end(), rng);
        HSet a = arena.empty();
        for (Key k : order) {
            a = arena.add(a, k);
        }
        std::shuffle(order.begin(), order.end(), rng);
        HSet b = arena.empty();
        for (Key k : order) {
            const Key extra = random_key(rng);
            if (!s.contains(extra) && coin(rng, 0.3)) {
                b = arena.remove(arena.add(b, extra), extra);
            }
            b = arena.add(b, k);
        }
        // A third route: split in two halves and union them.
        const auto mid = order.begin() + static_cast<std::ptrdiff_t>(order.size() / 2);
        const HSet c = arena.unite(arena.from_elements(std::vector<Key>(order.begin(), mid)),
                                   arena.from_elements(std::vector<Key>(mid, order.end())));
        if (a != b || a != c) {
            log.fail("hset round " + std::to_string(round) + " gives different handles");
        }
    }
    log.expect(arena.arena().check_acyclic(), "hset arena has a child with a larger id");
    log.expect(arena.arena().check_unique(), "hset arena holds two equal nodes");
    log.notes << "10000 ptrie + 10000 hset sequences, " << arena.node_count() << " hset nodes";
    return {log.pass, log.detail()};
}

// --- 3 ------------------------------------------------------------------------

// Association list: the naive reference for maps and sets.
using Alist = std::vector<std::pair<Key, int>>;

const int* alist_find(const Alist& l, Key k) {
    for (const auto& [key, v] : l) {
        if (key == k) {
            return &v;
        }
    }
    return nullptr;
}

Alist alist_set(Alist l, Key k, int v) {
    for (auto& [key, val] : l) {
        if (key == k) {
            val = v;
            return l;
        }
    }
    l.emplace_back(k, v);
    return l;
}

Alist alist_remove(Alist l, Key k) {
    std::erase_if(l, [&](const auto& kv) { return kv.first == k; });
    return l;
}

Alist sorted(Alist l) {
    std::sort(l.begin(), l.end());
    return l;
}

Result oracle_equivalence() {
    Log log;
    Rng rng(3003);
    auto sum = [](const std::optional<int>& a, const std::optional<int>& b) -> std::optional<int> {
        if (!a || !b) {
            return a ? a : b;
        }
        return *a + *b;
    };
    auto product = [](const std::optional<int>& a, const std::optional<int>& b) -> std::optional<int> {
        if (!a || !b) {
            return std::nullopt;
        }
        return *a * *b;
    };
    auto keep_max = [](const std::optional<int>& a, const std::optional<int>& b) -> std::optional<int> {
        if (!a || !b) {
            return a ? a : b;
        }
        return std::max(*a, *b);
    };
    const LeqPolicy<int> pointwise{std::less_equal<int>{}, OneSided<int>::always(false), OneSided<int>::always(true)};
    for (int round = 0; round < 10000; ++round) {
        Alist la;
        Alist lb;
        PTrie<int> a;
        PTrie<int> b;
        const Key range = coin(rng) ? 200 : std::int64_t(1) << 40;
        for (int i = 0, n = static_cast<int>(uniform(rng, 0, 25)); i < n; ++i) {
            const Key k = uniform(rng, 1, range);
            const int v = static_cast<int>(uniform(rng, 0, 9));
            if (coin(rng, 0.8)) {
                la = alist_set(la, k, v);
                a = a.set(k, v);
            } else {
                la = alist_remove(la, k);
                a = a.remove(k);
            }
        }
        if (coin(rng, 0.2)) {
            lb = la;
            b = a;
        }
        for (int i = 0, n = static_cast<int>(uniform(rng, 0, 25)); i < n; ++i) {
            const Key k = coin(rng, 0.5) && !la.empty() ? la[static_cast<std::size_t>(uniform(rng, 0, std::int64_t(la.size()) - 1))].first
                                                        : uniform(rng, 1, range);
            const int v = static_cast<int>(uniform(rng, 0, 9));
            lb = alist_set(lb, k, v);
            b = b.set(k, v);
        }
        const std::string at = "ptrie round " + std::to_string(round);
        if (a.bindings() != sorted(la) || b.bindings() != sorted(lb)) {
            log.fail(at + ": set/remove bindings differ");
            continue;
        }
        for (int probe = 0; probe < 5; ++probe) {
            const Key k = uniform(rng, 1, range);
            const int* x = alist_find(la, k);
            const int* y = a.find(k);
            if ((x == nullptr) != (y == nullptr) || (x && *x != *y)) {
                log.fail(at + ": find differs");
            }
        }
        Alist u;
        Alist in;
        Alist mx = lb;
        for (const auto& [k, v] : la) {
            const int* w = alist_find(lb, k);
            u.emplace_back(k, w ? v + *w : v);
            if (w) {
                in.emplace_back(k, v * *w);
            }
            mx = alist_set(mx, k, w ? std::max(v, *w) : v);
        }
        for (const auto& [k, w] : lb) {
            if (!alist_find(la, k)) {
                u.emplace_back(k, w);
            }
        }
        bool le = true;
        for (const auto& [k, v] : la) {
            const int* w = alist_find(lb, k);
            le = le && w != nullptr && v <= *w;
        }
        for (bool shortcuts : {true, false}) {
            const auto cu = PTrie<int>::combine(sum, a, b, {.shortcuts = shortcuts});
            const auto ci = PTrie<int>::combine(product, a, b,
                                                {.absent = AbsentRule::absorbing, .shortcuts = shortcuts});
            const auto cm = PTrie<int>::combine(keep_max, a, b,
                                                {.idempotent = true, .absent = AbsentRule::neutral,
                                                 .shortcuts = shortcuts});
            if (cu.bindings() != sorted(u) || ci.bindings() != sorted(in) || cm.bindings() != sorted(mx) ||
                !cu.is_canonical() || !ci.is_canonical() || !cm.is_canonical()) {
                log.fail(at + ": combine differs");
            }
        }
        if (PTrie<int>::leq(pointwise, a, b) != le) {
            log.fail(at + ": leq differs");
        }
    }

    SetArena arena;
    for (int round = 0; round < 10000; ++round) {
        std::vector<Key> la;
        std::vector<Key> lb;
        const Key range = coin(rng) ? 100 : std::int64_t(1) << 40;
        auto add = [](std::vector<Key>& l, Key k) {
            if (std::find(l.begin(), l.end(), k) == l.end()) {
                l.push_back(k);
            }
        };
        HSet a = arena.empty();
        for (int i = 0, n = static_cast<int>(uniform(rng, 0, 25)); i < n; ++i) {
            const Key k = uniform(rng, 1, range);
            add(la, k);
            a = arena.add(a, k);
        }
        HSet b = coin(rng, 0.2) ? a : arena.empty();
        if (b == a) {
            lb = la;
        }
        for (int i = 0, n = static_cast<int>(uniform(rng, 0, 25)); i < n; ++i) {
            const Key k = coin(rng) && !la.empty() ? la[static_cast<std::size_t>(uniform(rng, 0, std::int64_t(la.size()) - 1))]
                                                   : uniform(rng, 1, range);
            if (coin(rng, 0.8)) {
                add(lb, k);
                b = arena.add(b, k);
            } else {
                std::erase(lb, k);
                b = arena.remove(b, k);
            }
        }
        auto has = [](const std::vector<Key>& l, Key k) { return std::find(l.begin(), l.end(), k) != l.end(); };
        std::vector<Key> u = la;
        std::vector<Key> in;
        std::vector<Key> d;
        for (Key k : lb) {
            add(u, k);
        }
        for (Key k : la) {
            (has(lb, k) ? in : d).push_back(k);
        }
        const bool sub = std::all_of(la.begin(), la.end(), [&](Key k) { return has(lb, k); });
        auto sort_keys = [](std::vector<Key> l) {
            std::sort(l.begin(), l.end());
            return l;
        };
        const std::string at = "hset round " + std::to_string(round);
        if (arena.elements(a) != sort_keys(la) || arena.elements(b) != sort_keys(lb)) {
            log.fail(at + ": add/remove differs");
            continue;
        }
        if (arena.elements(arena.unite(a, b)) != sort_keys(u) || arena.elements(arena.inter(a, b)) != sort_keys(in) ||
            arena.elements(arena.diff(a, b)) != sort_keys(d) || arena.subset(a, b) != sub) {
            log.fail(at + ": set operation differs");
        }
        const Key probe = uniform(rng, 1, range);
        if (arena.mem(a, probe) != has(la, probe)) {
            log.fail(at + ": mem differs");
        }
    }

    // Exhaustive interval checks with a plain 64-bit oracle.
    std::vector<std::pair<long long, long long>> ivs;
    for (long long lo = -8; lo <= 8; ++lo) {
        for (long long hi = lo; hi <= 8; ++hi) {
            ivs.emplace_back(lo, hi);
        }
    }
    long long fwd_cases = 0;
    long long refine_cases = 0;
    for (const auto& [alo, ahi] : ivs) {
        for (const auto& [blo, bhi] : ivs) {
            const Interval a = iv(alo, ahi);
            const Interval b = iv(blo, bhi);
            for (BinOp op : {BinOp::add, BinOp::sub, BinOp::mul, BinOp::div}) {
                ++fwd_cases;
                const Interval r = fwd_op(op, a, b);
                for (long long x = alo; x <= ahi; ++x) {
                    for (long long y = blo; y <= bhi; ++y) {
                        long long v = 0;
                        switch (op) {
                        case BinOp::add: v = x + y; break;
                        case BinOp::sub: v = x - y; break;
                        case BinOp::mul: v = x * y; break;
                        case BinOp::div:
                            if (y == 0) {
                                continue;
                            }
                            v = x / y;
                            break;
                        }
                        if (!r.contains(Int(v))) {
                            log.fail("fwd_op " + std::string(to_string(op)) + " " + a.to_string() + " " +
                                     b.to_string() + " misses " + std::to_string(v));
                        }
                    }
                }
            }
            for (Cmp c : {Cmp::eq, Cmp::ne, Cmp::lt, Cmp::le, Cmp::gt, Cmp::ge}) {
                for (bool taken : {true, false}) {
                    ++refine_cases;
                    const auto r = refine(c, taken, a, b);
                    for (long long x = alo; x <= ahi; ++x) {
                        for (long long y = blo; y <= bhi; ++y) {
                            bool holds = false;
                            switch (c) {
                            case Cmp::eq: holds = x == y; break;
                            case Cmp::ne: holds = x != y; break;
                            case Cmp::lt: holds = x < y; break;
                            case Cmp::le: holds = x <= y; break;
                            case Cmp::gt: holds = x > y; break;
                            case Cmp::ge: holds = x >= y; break;
                            }
                            if (holds == taken && (!r || !r->first.contains(Int(x)) || !r->second.contains(Int(y)))) {
                                log.fail("refine " + std::string(to_string(c)) + (taken ? " taken " : " not taken ") +
                                         a.to_string() + " " + b.to_string() + " loses (" + std::to_string(x) +
                                         ", " + std::to_string(y) + ")");
                            }
                        }
                    }
                }
            }
        }
    }
    log.notes << "10000 ptrie + 10000 hset cases; " << fwd_cases << " fwd_op and " << refine_cases
              << " refine cases on [-8, 8]";
    return {log.pass, log.detail()};
}

// --- 4 ------------------------------------------------------------------------

struct Observed {
    // Concrete states seen at each original location.
    std::map<Loc, std::vector<RegFile>> at;
};

Observed observe(Rng& rng, const Function& f, int runs, std::size_t fuel) {
    Observed o;
    for (int i = 0; i < runs; ++i) {
        const auto in = chamois::testing::random_inputs(rng, f.params.size());
        for (auto& [l, regs] : chamois::testing::trace(f, in, fuel)) {
            auto& v = o.at[l];
            if (v.size() < 64) {
                v.push_back(std::move(regs));
            }
        }
    }
    return o;
}

bool fact_holds(const Fact& f, const RegFile& regs) {
    if (!regs.contains(f.dst) || !regs.contains(f.src1) || !regs.contains(f.src2)) {
        return false;
    }
    const auto v = eval_binop(f.op, regs.at(f.src1), regs.at(f.src2));
    return v && *v == regs.at(f.dst);
}

Result closure() {
    Log log;
    Rng rng(4004);
    long long cfgs = 0;
    long long interval_fuel_out = 0;
    // Literal reading of the criterion.
    long long top_weakenings = 0;
    long long top_rejected = 0;
    long long strict_shrinks = 0;
    long long strict_accepted = 0;
    // Variants that must hold for any sound checker.
    long long bottom_shrinks = 0;
    long long excluding_shrinks = 0;
    long long all_top_checked = 0;
    for (int round = 0; round < 1000; ++round) {
        const Function f = chamois::testing::random_function(rng);
        const Renumbered rn = renumber(f);
        const Function& g = rn.function;
        const auto heads = widening_points(g);
        const Observed seen = observe(rng, f, 10, 2000);
        std::map<Loc, Loc> old_of_new;
        for (const auto& [o, n] : rn.new_of_old) {
            old_of_new[n] = o;
        }
        auto observed_at = [&](Loc l) -> const std::vector<RegFile>& {
            static const std::vector<RegFile> none;
            auto it = seen.at.find(old_of_new.at(l));
            return it == seen.at.end() ? none : it->second;
        };
        ++cfgs;

        // Intervals.
        const IntervalDomain dom;
        const auto sol = kildall(g, dom, AbsState::top(), heads);
        if (!sol.ok()) {
            ++interval_fuel_out;
        } else {
            const auto& inv = *sol.invariant;
            log.expect(check_inductive(g, inv, AbsState::top(), dom).ok(),
                       "checker rejects kildall output on round " + std::to_string(round));
            Invariant<AbsState> all_top;
            for (Loc l : g.locations()) {
                all_top = all_top.set(l, AbsState::top());
            }
            ++all_top_checked;
            log.expect(check_inductive(g, all_top, AbsState::top(), dom).ok(), "all-top invariant rejected");
            for (Loc l : g.locations()) {
                ++top_weakenings;
                if (!check_inductive(g, inv.set(l, AbsState::top()), AbsState::top(), dom).ok()) {
                    ++top_rejected;
                }
            }
            for (Loc h : heads) {
                const AbsState& s = *inv.find(h);
                if (s.is_bottom()) {
                    continue;
                }
                ++bottom_shrinks;
                log.expect(!check_inductive(g, inv.set(h, AbsState::bottom()), AbsState::top(), dom).ok(),
                           "head shrunk to bottom accepted");
                const auto& obs = observed_at(h);
                for (const auto& [r, i] : s.env().bindings()) {
                    // Literal strict shrinks: each bound one step inward, or an
                    // infinite bound pulled in to the widest observed value.
                    std::vector<Interval> shrunk;
                    auto push = [&](Bound lo, Bound hi) {
                        if (lo <= hi && lo != Bound::plus_infinity() && hi != Bound::minus_infinity()) {
                            Interval n(lo, hi);
                            if (!(n == i)) {
                                shrunk.push_back(n);
                            }
                        }
                    };
                    std::optional<Int> obs_min;
                    std::optional<Int> obs_max;
                    for (const auto& regs : obs) {
                        if (auto it = regs.find(r); it != regs.end()) {
                            obs_min = obs_min ? std::min(*obs_min, it->second) : it->second;
                            obs_max = obs_max ? std::max(*obs_max, it->second) : it->second;
                        }
                    }
                    const Bound finite_lo = i.lo().is_finite() ? i.lo() : Bound(obs_min.value_or(0));
                    const Bound finite_hi = i.hi().is_finite() ? i.hi() : Bound(obs_max.value_or(0));
                    if (i.lo().is_finite()) {
                        push(i.lo() + Bound(1), i.hi());
                    } else {
                        push(std::min(finite_lo, i.hi()), i.hi());
                    }
                    if (i.hi().is_finite()) {
                        push(i.lo(), i.hi() + Bound(-1));
                    } else {
                        push(i.lo(), std::max(finite_hi, i.lo()));
                    }
                    for (const Interval& n : shrunk) {
                        ++strict_shrinks;
                        const auto bad = inv.set(h, s.set(r, n));
                        const bool accepted = check_inductive(g, bad, AbsState::top(), dom).ok();
                        if (accepted) {
                            ++strict_accepted;
                        }
                        // Sound variant: excluding an observed state must be rejected.
                        const bool excludes = std::any_of(obs.begin(), obs.end(), [&](const RegFile& regs) {
                            auto it = regs.find(r);
                            return it != regs.end() && !n.contains(it->second);
                        });
                        if (excludes) {
                            ++excluding_shrinks;
                            log.expect(!accepted, "shrink excluding a reachable state accepted");
                        }
                    }
                }
            }
        }

        // Facts.
        FactAnalysis fa = fact_kildall(g);
        if (!fa.result.ok()) {
            log.fail("fact_kildall ran out of fuel on round " + std::to_string(round));
            continue;
        }
        const auto& finv = *fa.result.invariant;
        const auto& facts = fa.table.facts();
        log.expect(fact_check(g, finv, facts, fa.arena).ok(), "fact checker rejects fact_kildall output");
        for (Loc l : g.locations()) {
            ++top_weakenings;
            if (!fact_check(g, finv.set(l, FactState::known(fa.arena.empty())), facts, fa.arena).ok()) {
                ++top_rejected;
            }
        }
        for (Loc h : heads) {
            const FactState& s = *finv.find(h);
            if (s.is_unreached()) {
                continue;
            }
            ++bottom_shrinks;
            log.expect(!fact_check(g, finv.set(h, FactState::unreached()), facts, fa.arena).ok(),
                       "fact head shrunk to unreached accepted");
            const auto& obs = observed_at(h);
            for (Key k = 1; k <= static_cast<Key>(facts.size()); ++k) {
                if (fa.arena.mem(s.facts(), k)) {
                    continue;
                }
                ++strict_shrinks;
                const auto bad = finv.set(h, FactState::known(fa.arena.add(s.facts(), k)));
                const bool accepted = fact_check(g, bad, facts, fa.arena).ok();
                if (accepted) {
                    ++strict_accepted;
                }
                const Fact& fact = facts[static_cast<std::size_t>(k - 1)];
                if (std::any_of(obs.begin(), obs.end(), [&](const RegFile& regs) { return !fact_holds(fact, regs); })) {
                    ++excluding_shrinks;
                    log.expect(!accepted, "fact shrink excluding a reachable state accepted");
                }
            }
        }
    }
    const bool literal_top = top_rejected == 0;
    const bool literal_shrink = strict_accepted == 0;
    if (!literal_top) {
        log.pass = false;
    }
    if (!literal_shrink) {
        log.pass = false;
    }
    log.notes << cfgs << " CFGs (" << interval_fuel_out << " interval solves out of fuel); checkers accept all solver "
              << "outputs and " << all_top_checked << " all-top invariants"
              << "\n      literal: " << top_rejected << "/" << top_weakenings
              << " single-location top weakenings rejected (criterion wants 0), " << strict_accepted << "/"
              << strict_shrinks << " strict head shrinks accepted (criterion wants 0)"
              << "\n      sound variants: " << bottom_shrinks << " heads shrunk to bottom and " << excluding_shrinks
              << " shrinks excluding observed states, all rejected";
    return {log.pass, log.detail()};
}

// --- 5 ------------------------------------------------------------------------

Result concrete_soundness() {
    Log log;
    Rng rng(5005);
    int programs = 0;
    int skipped = 0;
    long long states = 0;
    long long cse_runs = 0;
    long long cse_capped = 0;
    int rewritten = 0;
    while (programs < 200) {
        const Function f = chamois::testing::random_function(rng, {30, 8, 0.3});
        const Renumbered rn = renumber(f);
        const Function& g = rn.function;
        const auto sol = kildall(g, IntervalDomain{}, AbsState::top(), widening_points(g));
        FactAnalysis fa = fact_kildall(g);
        if (!sol.ok() || !fa.result.ok()) {
            ++skipped;
            continue;
        }
        ++programs;
        for (int k = 0; k < 50; ++k) {
            const auto in = chamois::testing::random_inputs(rng, f.params.size());
            for (const auto& [l, regs] : chamois::testing::trace(f, in, 10000)) {
                ++states;
                const Loc n = rn.new_of_old.at(l);
                const AbsState& s = *sol.invariant->find(n);
                bool inside = !s.is_bottom();
                for (const auto& [r, v] : regs) {
                    inside = inside && s.get(r).contains(v);
                }
                log.expect(inside, "interval invariant misses a concrete state at " + std::to_string(l));
                const FactState& fs = *fa.result.invariant->find(n);
                bool facts_ok = !fs.is_unreached();
                if (facts_ok) {
                    for (Key idx : fa.arena.elements(fs.facts())) {
                        facts_ok = facts_ok && fact_holds(fa.table.at(idx), regs);
                    }
                }
                log.expect(facts_ok, "fact invariant misses a concrete state at " + std::to_string(l));
            }
        }
        const Function h = apply_cse(g, *fa.result.invariant, fa.table.facts(), fa.arena);
        if (!(h == g)) {
            ++rewritten;
        }
        for (int k = 0; k < 100; ++k) {
            const auto in = chamois::testing::random_inputs(rng, f.params.size());
            const auto before = chamois::testing::bounded_run(g, in, 10000);
            const auto after = chamois::testing::bounded_run(h, in, 10000);
            if (!before || !after) {
                ++cse_capped;
                continue;
            }
            ++cse_runs;
            log.expect(*before == *after, "apply_cse changed an outcome");
        }
    }
    log.notes << programs << " programs (" << skipped << " skipped: solver out of fuel), " << states
              << " concrete states inside both invariants; " << cse_runs << " CSE runs identical (" << rewritten
              << " programs rewritten, " << cse_capped << " runs stopped on values above 2^256)";
    return {log.pass, log.detail()};
}

// --- 6 ------------------------------------------------------------------------

std::string fixed2(double x) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << x;
    return os.str();
}

Result sharing_scaling() {
    Log log;
    const auto rows = join_scaling({1000, 2000, 4000, 8000}, 10, 1);
    log.notes << "per join (naive / sharing):";
    for (const auto& r : rows) {
        log.notes << " " << r.keys << ": " << fixed2(r.naive_per_join()) << " / " << fixed2(r.sharing_per_join()) << ";";
    }
    log.notes << "\n      growth per doubling (naive / sharing):";
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double naive = rows[i].naive_per_join() / rows[i - 1].naive_per_join();
        const double sharing = rows[i].sharing_per_join() / rows[i - 1].sharing_per_join();
        log.notes << " " << fixed2(naive) << "x / " << fixed2(sharing) << "x";
        log.expect(sharing <= 1.3, "sharing join grew " + fixed2(sharing) + "x");
        log.expect(naive >= 1.9, "naive join grew only " + fixed2(naive) + "x");
    }

    SetArena arena;
    std::vector<Key> keys;
    for (Key k = 1; k <= 1000; ++k) {
        keys.push_back(k * 7);
    }
    const HSet s = arena.from_elements(keys);
    ShareStats us;
    (void)arena.unite(s, s, &us);
    log.expect(us.shortcut_hits == 1 && us.nodes_visited <= 1, "union(s, s) did not shortcut");
    AbsState t = AbsState::top();
    for (Reg r = 1; r <= 1000; ++r) {
        t = t.set(r, iv(0, r));
    }
    ShareStats ls;
    (void)leq(t, t, &ls);
    log.expect(ls.shortcut_hits == 1 && ls.nodes_visited <= 1, "leq(t, t) did not shortcut");
    log.notes << "\n      union(s, s): " << us.shortcut_hits << " shortcut, " << us.nodes_visited
              << " visited; leq(t, t): " << ls.shortcut_hits << " shortcut, " << ls.nodes_visited << " visited";
    return {log.pass, log.detail()};
}

// --- 7 ------------------------------------------------------------------------

Result dag_scaling_check() {
    Log log;
    const auto start = std::chrono::steady_clock::now();
    const DagScalingRow row = dag_scaling_run(40);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.expect(row.validated, "chain does not validate against itself");
    log.expect(row.nodes <= 41, "arena has " + std::to_string(row.nodes) + " nodes");
    log.expect(row.tree_size == (Int(1) << 41) - 1, "tree size " + row.tree_size.str());
    log.expect(secs < 1.0, "took " + fixed2(secs) + " s");
    log.notes << "n = 40: " << row.nodes << " nodes, would-be tree size " << row.tree_size.str() << ", "
              << fixed2(secs * 1000) << " ms";
    return {log.pass, log.detail()};
}

// --- 8 ------------------------------------------------------------------------

Result farkas_pipeline() {
    Log log;
    Rng rng(8008);
    long long certs = 0;
    long long pairs = 0;
    for (int round = 0; round < 1000; ++round) {
        const auto n = static_cast<std::size_t>(uniform(rng, 2, 4));
        const Polyhedron p = chamois::testing::random_polyhedron(rng, n, static_cast<std::size_t>(uniform(rng, 2, 6)));
        const Var v = uniform(rng, 1, static_cast<std::int64_t>(n));
        const Projection pr = fm_project(p, v);
        for (std::size_t i = 0; i < pr.result.constraints.size(); ++i) {
            ++certs;
            if (pr.certs[i].lambdas.size() == 2) {
                ++pairs;
            }
            log.expect(check_entailment(p, pr.result.constraints[i], pr.certs[i]),
                       "certificate " + std::to_string(i) + " rejected on round " + std::to_string(round));
        }
        GridBox box;
        for (Var w = 1; w <= static_cast<Var>(n); ++w) {
            box[w] = {-10, 10};
        }
        log.expect(grid_check(p, pr.result, box), "projection unsound on the grid, round " + std::to_string(round));
    }
    log.notes << "1000 projections, " << certs << " certificates (" << pairs
              << " from eliminated pairs) accepted; grid [-10, 10]^n finds no counterexample";
    return {log.pass, log.detail()};
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds; // 0: no stated limit
    std::function<Result()> run;
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> allowed;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--allow-fail" && i + 1 < argc) {
            allowed.insert(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--allow-fail N]...\n";
            return 2;
        }
    }
    const std::vector<Criterion> criteria{
        {1, "worked examples", 1, worked_examples},
        {2, "canonicity", 30, canonicity},
        {3, "oracle equivalence", 60, oracle_equivalence},
        {4, "oracle/checker closure", 120, closure},
        {5, "concrete soundness", 120, concrete_soundness},
        {6, "sharing scaling", 0, sharing_scaling},
        {7, "DAG scaling", 0, dag_scaling_check},
        {8, "Farkas pipeline", 60, farkas_pipeline},
    };
    int unexpected = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Result o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
            o.pass = false;
            o.detail += "\n      over the " + fixed2(c.limit_seconds) + " s limit";
        }
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << " (" << fixed2(secs) << " s): "
                  << o.detail << (o.pass || !allowed.contains(c.id) ? "" : "\n      known failure, allowed") << "\n"
                  << std::flush;
        if (!o.pass && !allowed.contains(c.id)) {
            ++unexpected;
        }
    }
    return unexpected == 0 ? 0 : 1;
}
