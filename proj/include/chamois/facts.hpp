// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Available-expression facts "dst = op src1 src2".
 *
 * Facts get dense indices from 1 the first time the solver meets them, so the
 * universe grows during the solve. Per-location fact sets are hash-consed
 * HSets; merging control flow intersects them. The checker never trusts the
 * solver's auxiliary tables: it rebuilds the index and kill tables from the
 * plain list of facts before re-checking inductiveness.
 ******************************************************************************/

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chamois/hset.hpp"
#include "chamois/ir.hpp"
#include "chamois/solver.hpp"

namespace chamois {

struct Fact {
    Reg dst;
    BinOp op;
    Reg src1;
    Reg src2;

    friend bool operator==(const Fact&, const Fact&) = default;

    [[nodiscard]] std::string to_string() const {
        return reg_name(dst) + " = " + std::string(chamois::to_string(op)) + " " + reg_name(src1) + " " +
               reg_name(src2);
    }
};

struct FactHash {
    std::size_t operator()(const Fact& f) const {
        std::uint64_t h = hash_combine(mix64(static_cast<std::uint64_t>(f.dst)), static_cast<std::uint64_t>(f.op));
        h = hash_combine(h, static_cast<std::uint64_t>(f.src1));
        return hash_combine(h, static_cast<std::uint64_t>(f.src2));
    }
};

class FactTable {
  public:
    // Index of `f`, allocating the next one (and extending the kill sets of
    // every register it mentions) on first sight.
    Key intern(SetArena& arena, const Fact& f) {
        if (auto it = by_fact_.find(f); it != by_fact_.end()) {
            return it->second;
        }
        by_index_.push_back(f);
        const auto index = static_cast<Key>(by_index_.size());
        by_fact_.emplace(f, index);
        for (Reg r : {f.dst, f.src1, f.src2}) {
            auto it = kill_.find(r);
            HSet s = it == kill_.end() ? arena.empty() : it->second;
            kill_.insert_or_assign(r, arena.add(s, index));
        }
        return index;
    }

    [[nodiscard]] std::optional<Key> find(const Fact& f) const {
        auto it = by_fact_.find(f);
        return it == by_fact_.end() ? std::nullopt : std::optional<Key>(it->second);
    }

    [[nodiscard]] const Fact& at(Key index) const {
        if (index < 1 || static_cast<std::size_t>(index) > by_index_.size()) {
            throw UsageError("unknown fact index " + std::to_string(index));
        }
        return by_index_[index - 1];
    }

    // Facts invalidated by a write to r.
    [[nodiscard]] HSet kill(const SetArena& arena, Reg r) const {
        auto it = kill_.find(r);
        return it == kill_.end() ? arena.empty() : it->second;
    }

    [[nodiscard]] std::size_t size() const { return by_index_.size(); }
    [[nodiscard]] const std::vector<Fact>& facts() const { return by_index_; }
    [[nodiscard]] const std::map<Reg, HSet>& kill_sets() const { return kill_; }

  private:
    std::vector<Fact> by_index_; // index i at position i - 1
    std::unordered_map<Fact, Key, FactHash> by_fact_;
    std::map<Reg, HSet> kill_;
};

// Rebuilds index and kill tables from an untrusted list of facts (index i at
// position i - 1). Fails if two indices name the same fact.
inline std::optional<FactTable> rebuild_fact_table(SetArena& arena, const std::vector<Fact>& by_index,
                                                   std::string* why = nullptr) {
    FactTable t;
    for (std::size_t i = 0; i < by_index.size(); ++i) {
        if (t.intern(arena, by_index[i]) != static_cast<Key>(i + 1)) {
            if (why) {
                *why = "fact " + std::to_string(i + 1) + " duplicates an earlier index";
            }
            return std::nullopt;
        }
    }
    return t;
}

// Unreached is the identity of the merge; Known(s) means every fact of s holds.
class FactState {
  public:
    static FactState unreached() { return FactState(); }
    static FactState known(HSet s) { return FactState(s); }

    [[nodiscard]] bool is_unreached() const { return !facts_.has_value(); }
    [[nodiscard]] HSet facts() const {
        if (!facts_) {
            throw UsageError("unreached state has no facts");
        }
        return *facts_;
    }

    friend bool operator==(const FactState&, const FactState&) = default;

  private:
    FactState() = default;
    explicit FactState(HSet s) : facts_(s) {}

    std::optional<HSet> facts_;
};

inline std::string to_string(const SetArena& arena, const FactState& s) {
    if (s.is_unreached()) {
        return "unreached";
    }
    std::string out = "{";
    bool first = true;
    for (Key k : arena.elements(s.facts())) {
        out += (first ? "" : ", ") + std::to_string(k);
        first = false;
    }
    return out + "}";
}

// Domain hooks. With `grow` set, transfer interns the facts it generates;
// otherwise (checking) it only uses facts already in the table.
class FactDomain {
  public:
    using State = FactState;

    FactDomain(SetArena& arena, FactTable& table, bool grow, ShareStats* stats = nullptr)
        : arena_(arena), table_(table), grow_(grow), stats_(stats) {}

    [[nodiscard]] State bottom() const { return FactState::unreached(); }
    [[nodiscard]] bool is_bottom(const State& s) const { return s.is_unreached(); }

    [[nodiscard]] State join(const State& a, const State& b) const {
        if (a.is_unreached()) {
            return b;
        }
        if (b.is_unreached()) {
            return a;
        }
        return FactState::known(arena_.inter(a.facts(), b.facts(), stats_));
    }

    // Finite height per universe: no extrapolation needed.
    [[nodiscard]] State widen(const State&, const State& next) const { return next; }

    // More facts, fewer states.
    [[nodiscard]] bool leq(const State& a, const State& b) const {
        if (a.is_unreached()) {
            return true;
        }
        if (b.is_unreached()) {
            return false;
        }
        return arena_.subset(b.facts(), a.facts(), stats_);
    }

    [[nodiscard]] std::vector<std::pair<Loc, State>> transfer(const Instr& ins, const State& s) const {
        std::vector<std::pair<Loc, State>> out;
        if (s.is_unreached()) {
            return out;
        }
        const HSet facts = s.facts();
        auto killed = [&](Reg r) { return arena_.diff(facts, table_.kill(arena_, r), stats_); };
        std::visit(overloaded{
                       [&](const instr::Nop& x) { out.emplace_back(x.succ, s); },
                       [&](const instr::Const& x) { out.emplace_back(x.succ, FactState::known(killed(x.dst))); },
                       [&](const instr::Move& x) { out.emplace_back(x.succ, FactState::known(killed(x.dst))); },
                       [&](const instr::Op& x) {
                           HSet next = killed(x.dst);
                           if (x.dst != x.src1 && x.dst != x.src2) {
                               const Fact f{x.dst, x.op, x.src1, x.src2};
                               std::optional<Key> index = grow_ ? table_.intern(arena_, f) : table_.find(f);
                               if (index) {
                                   next = arena_.add(next, *index);
                               }
                           }
                           out.emplace_back(x.succ, FactState::known(next));
                       },
                       [&](const instr::Branch& x) {
                           out.emplace_back(x.if_true, s);
                           out.emplace_back(x.if_false, s);
                       },
                       [&](const instr::Return&) {},
                   },
                   ins);
        return out;
    }

  private:
    SetArena& arena_;
    FactTable& table_;
    bool grow_;
    ShareStats* stats_;
};

struct FactAnalysis {
    SetArena arena;
    FactTable table;
    SolveResult<FactState> result;
};

inline FactState fact_entry_state(const SetArena& arena) { return FactState::known(arena.empty()); }

inline FactAnalysis fact_kildall(const Function& f, const SolverOptions& opts = {}) {
    FactAnalysis out;
    FactDomain d(out.arena, out.table, true);
    out.result = kildall(f, d, fact_entry_state(out.arena), {}, opts);
    return out;
}

// Checker for an untrusted (invariant, fact list) pair. The sets in `inv`
// must live in `arena`; the kill tables are rebuilt from `by_index`.
inline CheckResult<FactState> fact_check(const Function& f, const Invariant<FactState>& inv,
                                         const std::vector<Fact>& by_index, SetArena& arena) {
    CheckResult<FactState> out;
    std::string why;
    auto table = rebuild_fact_table(arena, by_index, &why);
    if (!table) {
        out.counterexample = CounterExample<FactState>{0, 0, "bad fact table: " + why, {}, {}};
        return out;
    }
    for (const auto& [l, s] : inv.bindings()) {
        if (!s.is_unreached()) {
            for (Key k : arena.elements(s.facts())) {
                if (static_cast<std::size_t>(k) > table->size()) {
                    out.counterexample =
                        CounterExample<FactState>{l, l, "unknown fact index " + std::to_string(k), {}, s};
                    return out;
                }
            }
        }
    }
    FactDomain d(arena, *table, false);
    return check_inductive(f, inv, fact_entry_state(arena), d);
}

// Replaces "dst := op a b" at p by "dst := move d" when the checked
// invariant says "d = op a b" holds at p. Refuses invariants the checker
// rejects.
inline Function apply_cse(const Function& f, const Invariant<FactState>& inv, const std::vector<Fact>& by_index,
                          SetArena& arena) {
    auto check = fact_check(f, inv, by_index, arena);
    if (!check.ok()) {
        throw UsageError("apply_cse: invariant rejected (" + check.counterexample->reason + ")");
    }
    Function out = f;
    for (const auto& [p, ins] : f.code.bindings()) {
        const auto* op = std::get_if<instr::Op>(&ins);
        const FactState* s = inv.find(p);
        if (op == nullptr || s == nullptr || s->is_unreached()) {
            continue;
        }
        for (Key k : arena.elements(s->facts())) {
            const Fact& fact = by_index[k - 1];
            if (fact.op == op->op && fact.src1 == op->src1 && fact.src2 == op->src2 && fact.dst != op->dst) {
                out.code = out.code.set(p, instr::Move{op->dst, fact.dst, op->succ});
                break;
            }
        }
    }
    return out;
}

} // namespace chamois
