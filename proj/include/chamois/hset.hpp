// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Hash-consed canonical sets of positive integers.
 *
 * Same binary decomposition as PTrie, with a membership bit in place of the
 * value slot. Every node is interned in a SetArena, and the all-empty node is
 * collapsed to Empty, so two sets with the same members have the same handle.
 * Set equality is handle equality, including the negative answer; union,
 * intersection, difference and inclusion skip equal subtrees and memoize
 * their results per arena.
 ******************************************************************************/

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "chamois/intern.hpp"
#include "chamois/ptrie.hpp"

namespace chamois {

struct SetShape {
    bool is_node = false;
    Handle left;
    bool here = false;
    Handle right;

    friend bool operator==(const SetShape&, const SetShape&) = default;

    [[nodiscard]] std::uint64_t hash() const {
        if (!is_node) {
            return mix64(0);
        }
        std::uint64_t h = hash_combine(mix64(1), left.id);
        h = hash_combine(h, here ? 1 : 0);
        return hash_combine(h, right.id);
    }

    template <typename F>
    void for_each_child(F&& f) const {
        if (is_node) {
            f(left);
            f(right);
        }
    }
};

class SetArena;

class HSet {
  public:
    [[nodiscard]] Handle handle() const { return h_; }

    friend bool operator==(HSet, HSet) = default;
    friend auto operator<=>(HSet, HSet) = default;

  private:
    friend class SetArena;
    explicit HSet(Handle h) : h_(h) {}
    Handle h_;
};

class SetArena {
  public:
    SetArena() : empty_(arena_.intern(SetShape{})) {}

    [[nodiscard]] HSet empty() const { return HSet(empty_); }

    [[nodiscard]] HSet singleton(Key k) { return add(empty(), k); }

    [[nodiscard]] HSet add(HSet s, Key k) {
        check_key(k);
        return HSet(add_rec(own(s), k));
    }

    [[nodiscard]] HSet remove(HSet s, Key k) {
        check_key(k);
        return HSet(remove_rec(own(s), k));
    }

    [[nodiscard]] bool mem(HSet s, Key k) const {
        check_key(k);
        Handle h = own(s);
        while (true) {
            const SetShape& n = arena_.node(h);
            if (!n.is_node) {
                return false;
            }
            if (k == 1) {
                return n.here;
            }
            h = (k & 1) ? n.right : n.left;
            k >>= 1;
        }
    }

    [[nodiscard]] HSet unite(HSet a, HSet b, ShareStats* stats = nullptr) {
        return HSet(union_rec(own(a), own(b), stats));
    }

    [[nodiscard]] HSet inter(HSet a, HSet b, ShareStats* stats = nullptr) {
        return HSet(inter_rec(own(a), own(b), stats));
    }

    // a \ b
    [[nodiscard]] HSet diff(HSet a, HSet b, ShareStats* stats = nullptr) {
        return HSet(diff_rec(own(a), own(b), stats));
    }

    [[nodiscard]] bool subset(HSet a, HSet b, ShareStats* stats = nullptr) {
        return subset_rec(own(a), own(b), stats);
    }

    // O(1) in both directions: interning makes the handle canonical.
    [[nodiscard]] bool set_equal(HSet a, HSet b) const { return own(a) == own(b); }

    [[nodiscard]] std::vector<Key> elements(HSet s) const {
        std::vector<Key> out;
        collect(own(s), 0, 0, out);
        std::sort(out.begin(), out.end());
        return out;
    }

    template <typename F, typename Acc>
    [[nodiscard]] Acc fold(HSet s, F&& f, Acc acc) const {
        for (Key k : elements(s)) {
            acc = f(std::move(acc), k);
        }
        return acc;
    }

    [[nodiscard]] std::size_t cardinality(HSet s) const { return elements(s).size(); }

    template <typename Range>
    [[nodiscard]] HSet from_elements(const Range& keys) {
        HSet s = empty();
        for (Key k : keys) {
            s = add(s, k);
        }
        return s;
    }

    [[nodiscard]] bool owns(HSet s) const { return arena_.owns(s.h_); }
    [[nodiscard]] std::size_t node_count() const { return arena_.size(); }
    [[nodiscard]] const Arena<SetShape>& arena() const { return arena_; }
    [[nodiscard]] const ArenaStats& stats() const { return arena_.stats(); }

  private:
    enum MemoOp : std::uint32_t { op_union = 1, op_inter = 2, op_diff = 3, op_subset = 4 };

    Handle own(HSet s) const {
        if (!arena_.owns(s.h_)) {
            throw UsageError("set handle does not belong to this arena");
        }
        return s.h_;
    }

    Handle make(Handle l, bool here, Handle r) {
        if (l == empty_ && !here && r == empty_) {
            return empty_;
        }
        return arena_.intern(SetShape{true, l, here, r});
    }

    Handle add_rec(Handle h, Key k) {
        const SetShape n = arena_.node(h);
        const Handle l = n.is_node ? n.left : empty_;
        const Handle r = n.is_node ? n.right : empty_;
        if (k == 1) {
            return make(l, true, r);
        }
        if (k & 1) {
            return make(l, n.here, add_rec(r, k >> 1));
        }
        return make(add_rec(l, k >> 1), n.here, r);
    }

    Handle remove_rec(Handle h, Key k) {
        const SetShape n = arena_.node(h);
        if (!n.is_node) {
            return h;
        }
        if (k == 1) {
            return make(n.left, false, n.right);
        }
        if (k & 1) {
            return make(n.left, n.here, remove_rec(n.right, k >> 1));
        }
        return make(remove_rec(n.left, k >> 1), n.here, n.right);
    }

    static std::pair<Handle, Handle> ordered(Handle a, Handle b) { return a.id <= b.id ? std::pair{a, b} : std::pair{b, a}; }

    std::optional<Handle> memo_handle(MemoOp op, Handle a, Handle b) {
        if (auto r = arena_.memo_lookup(op, a, b)) {
            return Handle{arena_.serial(), static_cast<std::uint32_t>(*r)};
        }
        return std::nullopt;
    }

    static void count_shortcut(ShareStats* stats) {
        if (stats) {
            ++stats->shortcut_hits;
        }
    }
    static void count_visit(ShareStats* stats) {
        if (stats) {
            ++stats->nodes_visited;
        }
    }

    Handle union_rec(Handle a, Handle b, ShareStats* stats) {
        if (a == b) {
            count_shortcut(stats);
            return a;
        }
        if (a == empty_) {
            return b;
        }
        if (b == empty_) {
            return a;
        }
        auto [x, y] = ordered(a, b);
        if (auto m = memo_handle(op_union, x, y)) {
            return *m;
        }
        count_visit(stats);
        const SetShape na = arena_.node(a);
        const SetShape nb = arena_.node(b);
        const Handle l = union_rec(na.left, nb.left, stats);
        const Handle r = union_rec(na.right, nb.right, stats);
        const Handle res = make(l, na.here || nb.here, r);
        arena_.memo_store(op_union, x, y, res.id);
        return res;
    }

    Handle inter_rec(Handle a, Handle b, ShareStats* stats) {
        if (a == b) {
            count_shortcut(stats);
            return a;
        }
        if (a == empty_ || b == empty_) {
            return empty_;
        }
        auto [x, y] = ordered(a, b);
        if (auto m = memo_handle(op_inter, x, y)) {
            return *m;
        }
        count_visit(stats);
        const SetShape na = arena_.node(a);
        const SetShape nb = arena_.node(b);
        const Handle l = inter_rec(na.left, nb.left, stats);
        const Handle r = inter_rec(na.right, nb.right, stats);
        const Handle res = make(l, na.here && nb.here, r);
        arena_.memo_store(op_inter, x, y, res.id);
        return res;
    }

    Handle diff_rec(Handle a, Handle b, ShareStats* stats) {
        if (a == b) {
            count_shortcut(stats);
            return empty_;
        }
        if (a == empty_ || b == empty_) {
            return a;
        }
        if (auto m = memo_handle(op_diff, a, b)) {
            return *m;
        }
        count_visit(stats);
        const SetShape na = arena_.node(a);
        const SetShape nb = arena_.node(b);
        const Handle l = diff_rec(na.left, nb.left, stats);
        const Handle r = diff_rec(na.right, nb.right, stats);
        const Handle res = make(l, na.here && !nb.here, r);
        arena_.memo_store(op_diff, a, b, res.id);
        return res;
    }

    bool subset_rec(Handle a, Handle b, ShareStats* stats) {
        if (a == b) {
            count_shortcut(stats);
            return true;
        }
        if (a == empty_) {
            return true;
        }
        if (b == empty_) {
            return false;
        }
        if (auto m = arena_.memo_lookup(op_subset, a, b)) {
            return *m != 0;
        }
        count_visit(stats);
        const SetShape na = arena_.node(a);
        const SetShape nb = arena_.node(b);
        // Stops at the first path that witnesses a member of a missing from b.
        const bool res = !(na.here && !nb.here) && subset_rec(na.left, nb.left, stats) &&
                         subset_rec(na.right, nb.right, stats);
        arena_.memo_store(op_subset, a, b, res ? 1 : 0);
        return res;
    }

    void collect(Handle h, int depth, std::uint64_t path, std::vector<Key>& out) const {
        const SetShape& n = arena_.node(h);
        if (!n.is_node) {
            return;
        }
        if (n.here) {
            out.push_back(static_cast<Key>((std::uint64_t{1} << depth) | path));
        }
        collect(n.left, depth + 1, path, out);
        collect(n.right, depth + 1, path | (std::uint64_t{1} << depth), out);
    }

    Arena<SetShape> arena_;
    Handle empty_;
};

} // namespace chamois
