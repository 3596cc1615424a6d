// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Control-flow graph utilities: depth-first orders, back edges, widening
// points and renumbering.
//
// The depth-first search explores successors last-to-first, which is the
// order a stack filled in successor order pops them. The resulting reverse
// postorder therefore lists the true branch of a conditional before its
// false branch (diamond 1 -> {2, 3} -> 4 gives 1, 2, 3, 4).

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "chamois/ir.hpp"

namespace chamois {

struct DfsResult {
    std::vector<Loc> postorder;
    std::vector<std::pair<Loc, Loc>> back_edges;
};

inline DfsResult depth_first(const Function& f) {
    DfsResult out;
    enum class Mark { on_stack, done };
    std::unordered_map<Loc, Mark> mark;
    struct Frame {
        Loc loc;
        std::vector<Loc> succs;
        std::size_t next; // counts down
    };
    std::vector<Frame> stack;
    auto push = [&](Loc l) {
        mark[l] = Mark::on_stack;
        auto succs = successors(f.at(l));
        const std::size_t n = succs.size();
        stack.push_back(Frame{l, std::move(succs), n});
    };
    push(f.entry);
    while (!stack.empty()) {
        Frame& top = stack.back();
        if (top.next == 0) {
            mark[top.loc] = Mark::done;
            out.postorder.push_back(top.loc);
            stack.pop_back();
            continue;
        }
        const Loc s = top.succs[--top.next];
        const Loc from = top.loc;
        auto it = mark.find(s);
        if (it == mark.end()) {
            push(s);
        } else if (it->second == Mark::on_stack) {
            out.back_edges.emplace_back(from, s);
        }
    }
    return out;
}

// Reachable locations, entry first.
inline std::vector<Loc> reverse_postorder(const Function& f) {
    auto order = depth_first(f).postorder;
    std::reverse(order.begin(), order.end());
    return order;
}

inline std::vector<std::pair<Loc, Loc>> back_edges(const Function& f) { return depth_first(f).back_edges; }

// Targets of back edges; every cycle of the reachable graph goes through one.
inline std::set<Loc> widening_points(const Function& f) {
    std::set<Loc> out;
    for (const auto& [from, to] : back_edges(f)) {
        out.insert(to);
    }
    return out;
}

// Acyclicity of the reachable graph once every edge entering `cut` is removed.
inline bool acyclic_without_edges_into(const Function& f, const std::set<Loc>& cut) {
    const auto nodes = reverse_postorder(f);
    std::unordered_map<Loc, int> indegree;
    for (Loc l : nodes) {
        indegree.emplace(l, 0);
    }
    for (Loc l : nodes) {
        for (Loc s : successors(f.at(l))) {
            if (!cut.contains(s)) {
                ++indegree[s];
            }
        }
    }
    std::vector<Loc> ready;
    for (Loc l : nodes) {
        if (indegree[l] == 0) {
            ready.push_back(l);
        }
    }
    std::size_t seen = 0;
    while (!ready.empty()) {
        Loc l = ready.back();
        ready.pop_back();
        ++seen;
        for (Loc s : successors(f.at(l))) {
            if (!cut.contains(s) && --indegree[s] == 0) {
                ready.push_back(s);
            }
        }
    }
    return seen == nodes.size();
}

struct Renumbered {
    Function function;
    std::vector<Loc> dropped;     // unreachable locations of the input
    std::map<Loc, Loc> new_of_old; // reachable locations only
};

// Relabels the reachable locations so that the i-th location in reverse
// postorder becomes n - i: the entry gets the largest label and "largest
// label first" coincides with "earliest in reverse postorder".
inline Renumbered renumber(const Function& f) {
    const auto order = reverse_postorder(f);
    const auto n = static_cast<Loc>(order.size());
    Renumbered out;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.new_of_old[order[i]] = n - static_cast<Loc>(i);
    }
    auto relabel = [&](Loc l) { return out.new_of_old.at(l); };
    out.function.name = f.name;
    out.function.params = f.params;
    out.function.entry = relabel(f.entry);
    for (const auto& [old, ins] : f.code.bindings()) {
        if (!out.new_of_old.contains(old)) {
            out.dropped.push_back(old);
            continue;
        }
        Instr moved = std::visit(overloaded{
                                     [&](instr::Branch b) -> Instr {
                                         b.if_true = relabel(b.if_true);
                                         b.if_false = relabel(b.if_false);
                                         return b;
                                     },
                                     [&](instr::Return r) -> Instr { return r; },
                                     [&](auto x) -> Instr {
                                         x.succ = relabel(x.succ);
                                         return x;
                                     },
                                 },
                                 ins);
        out.function.code = out.function.code.set(relabel(old), std::move(moved));
    }
    return out;
}

} // namespace chamois
