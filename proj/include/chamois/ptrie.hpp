// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Canonical persistent binary tries mapping positive integers to values.
 *
 * A key is consumed from its low-order bit upwards: key 1 lands on the value
 * slot of the current node, an even key continues into the left subtree with
 * key/2 and an odd key (> 1) into the right subtree with key/2.
 *
 * The only node shape that is never built is Node(Empty, absent, Empty), so
 * two tries binding the same keys to equal values are structurally equal.
 * Tries are immutable; every update shares the untouched subtrees of its
 * input. Binary operations look for subtrees that are the same allocation
 * ("same node") and skip them when the operation allows it. That probe is
 * only ever trusted in one direction: same node implies equal contents.
 ******************************************************************************/

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "chamois/common.hpp"

namespace chamois {

// Instrumentation counters. Owned by the caller and passed per operation, so
// concurrent analyses keep independent counts.
struct ShareStats {
    std::size_t nodes_allocated = 0;
    std::size_t nodes_visited = 0;
    std::size_t shortcut_hits = 0;

    void reset() { *this = ShareStats{}; }
};

// How a combine function treats keys bound on one side only.
enum class AbsentRule {
    general,   // call f(v, absent) / f(absent, v) on every such value
    absorbing, // f(v, absent) = f(absent, v) = absent: drop one-sided subtrees
    neutral,   // f(v, absent) = f(absent, v) = v: keep one-sided subtrees as they are
};

struct CombineOptions {
    // f(v, v) = v, so combine(t, t) = t without looking inside.
    bool idempotent = false;
    AbsentRule absent = AbsentRule::general;
    // false selects the naive traversal (no identity probe, no result sharing),
    // kept as the reference for cost measurements.
    bool shortcuts = true;
};

// Answer for keys bound on one side only in `leq`. A constant answer lets the
// walk skip the whole one-sided subtree.
template <typename V>
struct OneSided {
    std::optional<bool> constant;
    std::function<bool(const V&)> test;

    static OneSided always(bool b) { return OneSided{b, {}}; }
    static OneSided check(std::function<bool(const V&)> f) { return OneSided{std::nullopt, std::move(f)}; }
};

template <typename V>
struct LeqPolicy {
    std::function<bool(const V&, const V&)> both;
    OneSided<V> left_only;  // key bound in the left trie only
    OneSided<V> right_only; // key bound in the right trie only
};

template <typename V>
class PTrie {
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    struct Node {
        NodePtr left;
        std::optional<V> value;
        NodePtr right;
    };

    NodePtr root_;

    explicit PTrie(NodePtr root) : root_(std::move(root)) {}

  public:
    using value_type = V;
    using binding_t = std::pair<Key, V>;

    PTrie() = default;

    static PTrie empty() { return PTrie(); }

    [[nodiscard]] bool is_empty() const { return root_ == nullptr; }

    [[nodiscard]] const V* find(Key k) const {
        check_key(k);
        const Node* n = root_.get();
        while (n != nullptr) {
            if (k == 1) {
                return n->value ? &*n->value : nullptr;
            }
            n = (k & 1) ? n->right.get() : n->left.get();
            k >>= 1;
        }
        return nullptr;
    }

    [[nodiscard]] std::optional<V> get(Key k) const {
        const V* v = find(k);
        return v ? std::optional<V>(*v) : std::nullopt;
    }

    [[nodiscard]] bool contains(Key k) const { return find(k) != nullptr; }

    [[nodiscard]] PTrie set(Key k, V v, ShareStats* stats = nullptr) const {
        check_key(k);
        return PTrie(set_rec(root_, k, std::move(v), stats));
    }

    [[nodiscard]] PTrie remove(Key k, ShareStats* stats = nullptr) const {
        check_key(k);
        return PTrie(remove_rec(root_, k, stats));
    }

    // Pointwise f(a(k), b(k)). f must map (absent, absent) to absent.
    template <typename F>
    [[nodiscard]] static PTrie combine(F&& f, const PTrie& a, const PTrie& b, const CombineOptions& opts = {},
                                       ShareStats* stats = nullptr) {
        Combiner<F> c{f, opts, stats};
        return PTrie(c.run(a.root_, b.root_));
    }

    // True iff the policy holds for every key bound in a or b.
    [[nodiscard]] static bool leq(const LeqPolicy<V>& policy, const PTrie& a, const PTrie& b,
                                  ShareStats* stats = nullptr) {
        return leq_rec(policy, a.root_.get(), b.root_.get(), stats);
    }

    template <typename Eq>
    [[nodiscard]] static bool equal(Eq&& eq, const PTrie& a, const PTrie& b, ShareStats* stats = nullptr) {
        return equal_rec(eq, a.root_.get(), b.root_.get(), stats);
    }

    // Identity probe: true implies a and b are structurally equal. A false
    // answer carries no information.
    [[nodiscard]] static bool same_node(const PTrie& a, const PTrie& b) { return a.root_ == b.root_; }

    [[nodiscard]] bool is_canonical() const { return canonical_rec(root_.get()); }

    // Bindings in ascending key order.
    [[nodiscard]] std::vector<binding_t> bindings() const {
        std::vector<binding_t> out;
        collect(root_.get(), 0, 0, out);
        std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        return out;
    }

    [[nodiscard]] std::size_t size() const { return count_values(root_.get()); }
    [[nodiscard]] std::size_t node_count() const { return count_nodes(root_.get()); }

    friend bool operator==(const PTrie& a, const PTrie& b)
        requires std::equality_comparable<V>
    {
        return equal_rec(std::equal_to<V>{}, a.root_.get(), b.root_.get(), nullptr);
    }

    [[nodiscard]] static PTrie from_bindings(const std::vector<binding_t>& bs) {
        PTrie t;
        for (const auto& [k, v] : bs) {
            t = t.set(k, v);
        }
        return t;
    }

  private:
    static NodePtr make(NodePtr l, std::optional<V> v, NodePtr r, ShareStats* stats) {
        if (!l && !v && !r) {
            return nullptr;
        }
        if (stats) {
            ++stats->nodes_allocated;
        }
        return std::make_shared<const Node>(Node{std::move(l), std::move(v), std::move(r)});
    }

    static bool same_value(const std::optional<V>& a, const std::optional<V>& b) {
        if constexpr (std::equality_comparable<V>) {
            return a == b;
        } else {
            return !a && !b;
        }
    }

    static NodePtr set_rec(const NodePtr& n, Key k, V v, ShareStats* stats) {
        NodePtr l = n ? n->left : nullptr;
        NodePtr r = n ? n->right : nullptr;
        if (k == 1) {
            return make(std::move(l), std::move(v), std::move(r), stats);
        }
        std::optional<V> here = n ? n->value : std::optional<V>{};
        if (k & 1) {
            return make(std::move(l), std::move(here), set_rec(r, k >> 1, std::move(v), stats), stats);
        }
        return make(set_rec(l, k >> 1, std::move(v), stats), std::move(here), std::move(r), stats);
    }

    static NodePtr remove_rec(const NodePtr& n, Key k, ShareStats* stats) {
        if (!n) {
            return n;
        }
        if (k == 1) {
            if (!n->value) {
                return n;
            }
            return make(n->left, std::nullopt, n->right, stats);
        }
        if (k & 1) {
            NodePtr r = remove_rec(n->right, k >> 1, stats);
            return r == n->right ? n : make(n->left, n->value, std::move(r), stats);
        }
        NodePtr l = remove_rec(n->left, k >> 1, stats);
        return l == n->left ? n : make(std::move(l), n->value, n->right, stats);
    }

    template <typename F>
    struct Combiner {
        F& f;
        const CombineOptions& opts;
        ShareStats* stats;

        NodePtr run(const NodePtr& a, const NodePtr& b) {
            if (stats) {
                ++stats->nodes_visited;
            }
            if (!a && !b) {
                return nullptr;
            }
            if (opts.shortcuts) {
                if (opts.idempotent && a == b) {
                    if (stats) {
                        ++stats->shortcut_hits;
                    }
                    return a;
                }
                if (!a || !b) {
                    switch (opts.absent) {
                    case AbsentRule::absorbing: return nullptr;
                    case AbsentRule::neutral: return a ? a : b;
                    case AbsentRule::general: break;
                    }
                }
            }
            static const NodePtr none;
            static const std::optional<V> no_value;
            const NodePtr& al = a ? a->left : none;
            const NodePtr& ar = a ? a->right : none;
            const NodePtr& bl = b ? b->left : none;
            const NodePtr& br = b ? b->right : none;
            const std::optional<V>& av = a ? a->value : no_value;
            const std::optional<V>& bv = b ? b->value : no_value;

            std::optional<V> v = (av || bv) ? f(av, bv) : std::nullopt;
            NodePtr l = run(al, bl);
            NodePtr r = run(ar, br);
            if (opts.shortcuts) {
                if (a && l == a->left && r == a->right && same_value(v, a->value)) {
                    return a;
                }
                if (b && l == b->left && r == b->right && same_value(v, b->value)) {
                    return b;
                }
            }
            return make(std::move(l), std::move(v), std::move(r), stats);
        }
    };

    static bool all_values(const Node* n, const OneSided<V>& side, ShareStats* stats) {
        if (n == nullptr) {
            return true;
        }
        if (side.constant) {
            return *side.constant;
        }
        if (stats) {
            ++stats->nodes_visited;
        }
        if (n->value && !side.test(*n->value)) {
            return false;
        }
        return all_values(n->left.get(), side, stats) && all_values(n->right.get(), side, stats);
    }

    static bool leq_rec(const LeqPolicy<V>& p, const Node* a, const Node* b, ShareStats* stats) {
        if (stats) {
            ++stats->nodes_visited;
        }
        if (a == b) {
            if (a != nullptr && stats) {
                ++stats->shortcut_hits;
            }
            return true;
        }
        if (a == nullptr) {
            return all_values(b, p.right_only, stats);
        }
        if (b == nullptr) {
            return all_values(a, p.left_only, stats);
        }
        if (a->value && b->value) {
            if (!p.both(*a->value, *b->value)) {
                return false;
            }
        } else if (a->value) {
            if (!(p.left_only.constant ? *p.left_only.constant : p.left_only.test(*a->value))) {
                return false;
            }
        } else if (b->value) {
            if (!(p.right_only.constant ? *p.right_only.constant : p.right_only.test(*b->value))) {
                return false;
            }
        }
        return leq_rec(p, a->left.get(), b->left.get(), stats) && leq_rec(p, a->right.get(), b->right.get(), stats);
    }

    template <typename Eq>
    static bool equal_rec(const Eq& eq, const Node* a, const Node* b, ShareStats* stats) {
        if (stats) {
            ++stats->nodes_visited;
        }
        if (a == b) {
            if (a != nullptr && stats) {
                ++stats->shortcut_hits;
            }
            return true;
        }
        if (a == nullptr || b == nullptr) {
            return false; // canonical: a non-empty subtree binds at least one key
        }
        if (a->value.has_value() != b->value.has_value()) {
            return false;
        }
        if (a->value && !eq(*a->value, *b->value)) {
            return false;
        }
        return equal_rec(eq, a->left.get(), b->left.get(), stats) &&
               equal_rec(eq, a->right.get(), b->right.get(), stats);
    }

    static bool canonical_rec(const Node* n) {
        if (n == nullptr) {
            return true;
        }
        if (!n->left && !n->value && !n->right) {
            return false;
        }
        return canonical_rec(n->left.get()) && canonical_rec(n->right.get());
    }

    static void collect(const Node* n, int depth, std::uint64_t path, std::vector<binding_t>& out) {
        if (n == nullptr) {
            return;
        }
        if (n->value) {
            out.emplace_back(static_cast<Key>((std::uint64_t{1} << depth) | path), *n->value);
        }
        collect(n->left.get(), depth + 1, path, out);
        collect(n->right.get(), depth + 1, path | (std::uint64_t{1} << depth), out);
    }

    static std::size_t count_values(const Node* n) {
        return n == nullptr ? 0 : (n->value ? 1 : 0) + count_values(n->left.get()) + count_values(n->right.get());
    }

    static std::size_t count_nodes(const Node* n) {
        return n == nullptr ? 0 : 1 + count_nodes(n->left.get()) + count_nodes(n->right.get());
    }
};

} // namespace chamois
