// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Hash-consing arena.
 *
 * An Arena is the only factory for nodes of an interned type: interning a
 * shape returns the existing handle when an equal shape was interned before,
 * and a fresh dense id otherwise. Within one arena, handle equality is
 * therefore equivalent to structural equality, in both directions.
 *
 * Arenas are phase-local. Nothing is ever reclaimed; dropping (or resetting)
 * the arena drops every handle it issued. Handles carry the serial number of
 * their arena so that handing one to another arena is caught.
 ******************************************************************************/

#include <algorithm>
#include <atomic>
#include <compare>
#include <concepts>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "chamois/common.hpp"

namespace chamois {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return mix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

struct Handle {
    std::uint32_t arena = 0; // serial of the issuing arena; 0 is never issued
    std::uint32_t id = 0;

    friend bool operator==(Handle, Handle) = default;
    friend auto operator<=>(Handle, Handle) = default;
};

template <typename S>
concept InternShape = std::equality_comparable<S> && std::copy_constructible<S> && requires(const S& s) {
    { s.hash() } -> std::convertible_to<std::uint64_t>;
    s.for_each_child([](Handle) {});
};

struct ArenaStats {
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::size_t memo_hits = 0;
    std::size_t memo_misses = 0;
};

template <InternShape Shape>
class Arena {
  public:
    Arena() : serial_(next_serial()) { buckets_.assign(64, none); }

    Arena(const Arena&) = delete;
    Arena& operator=(const Arena&) = delete;
    Arena(Arena&&) noexcept = default;
    Arena& operator=(Arena&&) noexcept = default;

    Handle intern(const Shape& shape) {
        shape.for_each_child([this](Handle c) { check_owned(c); });
        const std::uint64_t h = shape.hash();
        for (std::uint32_t i = buckets_[bucket_of(h)]; i != none; i = next_[i]) {
            if (hashes_[i] == h && nodes_[i] == shape) {
                ++stats_.hits;
                return Handle{serial_, i};
            }
        }
        ++stats_.misses;
        const auto id = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(shape);
        hashes_.push_back(h);
        next_.push_back(buckets_[bucket_of(h)]);
        buckets_[bucket_of(h)] = id;
        if (nodes_.size() > buckets_.size()) {
            rehash(buckets_.size() * 2);
        }
        return Handle{serial_, id};
    }

    [[nodiscard]] const Shape& node(Handle h) const {
        check_owned(h);
        return nodes_[h.id];
    }

    [[nodiscard]] bool owns(Handle h) const { return h.arena == serial_ && h.id < nodes_.size(); }

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const ArenaStats& stats() const { return stats_; }
    [[nodiscard]] std::uint32_t serial() const { return serial_; }

    // Drops every node and memo entry. Handles issued before are foreign afterwards.
    void reset() {
        serial_ = next_serial();
        nodes_.clear();
        hashes_.clear();
        next_.clear();
        buckets_.assign(64, none);
        memo_.clear();
        stats_ = {};
    }

    [[nodiscard]] std::optional<std::uint64_t> memo_lookup(std::uint32_t op, Handle a, Handle b) {
        check_owned(a);
        check_owned(b);
        auto it = memo_.find(MemoKey{op, a.id, b.id});
        if (it == memo_.end()) {
            ++stats_.memo_misses;
            return std::nullopt;
        }
        ++stats_.memo_hits;
        return it->second;
    }

    void memo_store(std::uint32_t op, Handle a, Handle b, std::uint64_t result) {
        check_owned(a);
        check_owned(b);
        memo_[MemoKey{op, a.id, b.id}] = result;
    }

    [[nodiscard]] std::size_t memo_size() const { return memo_.size(); }

    // Debug scans.
    [[nodiscard]] bool check_unique() const {
        // Equal shapes have equal hashes, so only runs of equal hashes need pairwise checks.
        std::vector<std::uint32_t> order(nodes_.size());
        std::iota(order.begin(), order.end(), 0u);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return hashes_[a] < hashes_[b]; });
        for (std::size_t i = 0; i < order.size(); ++i) {
            for (std::size_t j = i + 1; j < order.size() && hashes_[order[j]] == hashes_[order[i]]; ++j) {
                if (nodes_[order[i]] == nodes_[order[j]]) {
                    return false;
                }
            }
        }
        return true;
    }

    [[nodiscard]] bool check_acyclic() const {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            bool ok = true;
            nodes_[i].for_each_child([&](Handle c) { ok = ok && c.id < i; });
            if (!ok) {
                return false;
            }
        }
        return true;
    }

  private:
    static constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

    struct MemoKey {
        std::uint32_t op;
        std::uint32_t a;
        std::uint32_t b;
        friend bool operator==(const MemoKey&, const MemoKey&) = default;
    };
    struct MemoHash {
        std::size_t operator()(const MemoKey& k) const {
            return hash_combine(hash_combine(mix64(k.op), k.a), k.b);
        }
    };

    static std::uint32_t next_serial() {
        static std::atomic<std::uint32_t> counter{0};
        return ++counter;
    }

    void check_owned(Handle h) const {
        if (!owns(h)) {
            throw UsageError("handle " + std::to_string(h.id) + " does not belong to this arena");
        }
    }

    [[nodiscard]] std::size_t bucket_of(std::uint64_t h) const { return h & (buckets_.size() - 1); }

    void rehash(std::size_t n) {
        buckets_.assign(n, none);
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
            next_[i] = buckets_[bucket_of(hashes_[i])];
            buckets_[bucket_of(hashes_[i])] = i;
        }
    }

    std::uint32_t serial_;
    std::vector<Shape> nodes_;
    std::vector<std::uint64_t> hashes_;
    std::vector<std::uint32_t> next_;    // bucket chains
    std::vector<std::uint32_t> buckets_; // power-of-two sized
    std::unordered_map<MemoKey, std::uint64_t, MemoHash> memo_;
    ArenaStats stats_;
};

} // namespace chamois
