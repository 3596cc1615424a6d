// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Interval abstract domain over unbounded integers.
 *
 * An abstract state is either Bottom (unreachable) or an environment mapping
 * registers to intervals, where an unbound register stands for the full
 * range. The full range is never stored, so environments stay small and
 * canonical, and the empty interval never appears: infeasibility is Bottom.
 ******************************************************************************/

#include <algorithm>
#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chamois/ir.hpp"
#include "chamois/ptrie.hpp"

namespace chamois {

class Bound {
  public:
    enum class Kind : std::uint8_t { neg_inf, finite, pos_inf };

    Bound(Int v) : kind_(Kind::finite), value_(std::move(v)) {} // NOLINT(implicit)
    Bound(long long v) : kind_(Kind::finite), value_(v) {}      // NOLINT(implicit)

    static Bound minus_infinity() { return Bound(Kind::neg_inf); }
    static Bound plus_infinity() { return Bound(Kind::pos_inf); }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] bool is_finite() const { return kind_ == Kind::finite; }
    [[nodiscard]] const Int& value() const { return value_; }

    friend bool operator==(const Bound& a, const Bound& b) {
        return a.kind_ == b.kind_ && (a.kind_ != Kind::finite || a.value_ == b.value_);
    }

    friend std::strong_ordering operator<=>(const Bound& a, const Bound& b) {
        if (a.kind_ != b.kind_ || a.kind_ != Kind::finite) {
            return a.kind_ <=> b.kind_;
        }
        return a.value_ == b.value_ ? std::strong_ordering::equal
               : a.value_ < b.value_ ? std::strong_ordering::less
                                     : std::strong_ordering::greater;
    }

    // Only called where the result is defined (never +inf + -inf).
    friend Bound operator+(const Bound& a, const Bound& b) {
        if (!a.is_finite()) {
            return a;
        }
        if (!b.is_finite()) {
            return b;
        }
        return Bound(a.value_ + b.value_);
    }

    friend Bound operator-(const Bound& a) {
        switch (a.kind_) {
        case Kind::neg_inf: return plus_infinity();
        case Kind::pos_inf: return minus_infinity();
        case Kind::finite: break;
        }
        return Bound(Int(-a.value_));
    }

    // Products of bounds of concrete values: 0 times an infinite bound is 0.
    friend Bound operator*(const Bound& a, const Bound& b) {
        if (a.is_finite() && b.is_finite()) {
            return Bound(Int(a.value_ * b.value_));
        }
        const int sa = a.sign();
        const int sb = b.sign();
        if (sa == 0 || sb == 0) {
            return Bound(0);
        }
        return sa * sb > 0 ? plus_infinity() : minus_infinity();
    }

    [[nodiscard]] int sign() const {
        switch (kind_) {
        case Kind::neg_inf: return -1;
        case Kind::pos_inf: return 1;
        case Kind::finite: break;
        }
        return value_.sign();
    }

    [[nodiscard]] std::string to_string() const {
        switch (kind_) {
        case Kind::neg_inf: return "-inf";
        case Kind::pos_inf: return "+inf";
        case Kind::finite: break;
        }
        return value_.str();
    }

  private:
    explicit Bound(Kind k) : kind_(k), value_(0) {}

    Kind kind_;
    Int value_;
};

class Interval {
  public:
    Interval(Bound lo, Bound hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_ > hi_ || lo_ == Bound::plus_infinity() || hi_ == Bound::minus_infinity()) {
            throw UsageError("empty interval [" + lo_.to_string() + ", " + hi_.to_string() + "]");
        }
    }

    static Interval top() { return {Bound::minus_infinity(), Bound::plus_infinity()}; }
    static Interval constant(const Int& c) { return {Bound(c), Bound(c)}; }

    [[nodiscard]] const Bound& lo() const { return lo_; }
    [[nodiscard]] const Bound& hi() const { return hi_; }

    [[nodiscard]] bool is_top() const { return !lo_.is_finite() && !hi_.is_finite(); }
    [[nodiscard]] bool is_singleton() const { return lo_.is_finite() && lo_ == hi_; }
    [[nodiscard]] bool contains(const Int& v) const { return lo_ <= Bound(v) && Bound(v) <= hi_; }
    [[nodiscard]] bool contains_zero() const { return lo_.sign() <= 0 && hi_.sign() >= 0; }

    [[nodiscard]] bool leq(const Interval& o) const { return o.lo_ <= lo_ && hi_ <= o.hi_; }

    [[nodiscard]] Interval hull(const Interval& o) const {
        return {std::min(lo_, o.lo_), std::max(hi_, o.hi_)};
    }

    // Bounds that moved since `this` jump to infinity.
    [[nodiscard]] Interval widen(const Interval& next) const {
        return {next.lo_ < lo_ ? Bound::minus_infinity() : lo_, next.hi_ > hi_ ? Bound::plus_infinity() : hi_};
    }

    [[nodiscard]] std::optional<Interval> meet(const Interval& o) const {
        Bound lo = std::max(lo_, o.lo_);
        Bound hi = std::min(hi_, o.hi_);
        if (lo > hi) {
            return std::nullopt;
        }
        return Interval(std::move(lo), std::move(hi));
    }

    friend bool operator==(const Interval&, const Interval&) = default;

    [[nodiscard]] std::string to_string() const { return "[" + lo_.to_string() + ", " + hi_.to_string() + "]"; }

  private:
    Bound lo_;
    Bound hi_;
};

inline std::optional<Interval> meet_interval(const Interval& a, const Interval& b) { return a.meet(b); }

// Sound forward transfer of a binary operator.
inline Interval fwd_op(BinOp op, const Interval& a, const Interval& b) {
    auto corners = [](const std::vector<Bound>& xs) {
        return Interval(*std::min_element(xs.begin(), xs.end()), *std::max_element(xs.begin(), xs.end()));
    };
    switch (op) {
    case BinOp::add: return {a.lo() + b.lo(), a.hi() + b.hi()};
    case BinOp::sub: return {a.lo() + -b.hi(), a.hi() + -b.lo()};
    case BinOp::mul: return corners({a.lo() * b.lo(), a.lo() * b.hi(), a.hi() * b.lo(), a.hi() * b.hi()});
    case BinOp::div: {
        // With a divisor of constant sign and finite bounds the truncated
        // quotient is monotone in each argument, so the corners bound it.
        if (b.contains_zero() || !a.lo().is_finite() || !a.hi().is_finite() || !b.lo().is_finite() ||
            !b.hi().is_finite()) {
            return Interval::top();
        }
        const Int &al = a.lo().value(), &ah = a.hi().value(), &bl = b.lo().value(), &bh = b.hi().value();
        return corners({Bound(Int(al / bl)), Bound(Int(al / bh)), Bound(Int(ah / bl)), Bound(Int(ah / bh))});
    }
    }
    return Interval::top();
}

// Narrows both operands under the assumption that `a cmp b` holds (taken) or
// fails (not taken). nullopt: no concrete pair satisfies the assumption.
inline std::optional<std::pair<Interval, Interval>> refine(Cmp cmp, bool taken, const Interval& a, const Interval& b) {
    const Cmp c = taken ? cmp : negate(cmp);
    const Bound one(1);
    switch (c) {
    case Cmp::eq: {
        auto m = a.meet(b);
        if (!m) {
            return std::nullopt;
        }
        return std::pair{*m, *m};
    }
    case Cmp::ne: {
        if (a.is_singleton() && b.is_singleton() && a == b) {
            return std::nullopt;
        }
        auto shave = [&](const Interval& x, const Interval& y) -> Interval {
            if (!y.is_singleton()) {
                return x;
            }
            Bound lo = x.lo() == y.lo() ? x.lo() + one : x.lo();
            Bound hi = x.hi() == y.lo() ? x.hi() + -one : x.hi();
            return {lo, hi};
        };
        return std::pair{shave(a, b), shave(b, a)};
    }
    case Cmp::lt:
    case Cmp::le: {
        // a <= b - d with d = 1 for lt, 0 for le.
        const Bound d = c == Cmp::lt ? one : Bound(0);
        Bound ahi = std::min(a.hi(), b.hi() + -d);
        Bound blo = std::max(b.lo(), a.lo() + d);
        if (a.lo() > ahi || blo > b.hi()) {
            return std::nullopt;
        }
        return std::pair{Interval(a.lo(), ahi), Interval(blo, b.hi())};
    }
    case Cmp::gt:
    case Cmp::ge: {
        auto r = refine(swap_operands(c), true, b, a);
        if (!r) {
            return std::nullopt;
        }
        return std::pair{r->second, r->first};
    }
    }
    return std::pair{a, b};
}

class AbsState {
  public:
    using Env = PTrie<Interval>;

    static AbsState bottom() { return AbsState(); }
    static AbsState top() { return AbsState(Env{}); }
    static AbsState from_env(Env env) { return AbsState(std::move(env)); }

    [[nodiscard]] bool is_bottom() const { return !env_.has_value(); }
    [[nodiscard]] const Env& env() const {
        if (!env_) {
            throw UsageError("bottom has no environment");
        }
        return *env_;
    }

    [[nodiscard]] Interval get(Reg r) const {
        const Interval* i = env().find(r);
        return i ? *i : Interval::top();
    }

    // Storing the full range unbinds the register.
    [[nodiscard]] AbsState set(Reg r, const Interval& i, ShareStats* stats = nullptr) const {
        return AbsState(i.is_top() ? env().remove(r, stats) : env().set(r, i, stats));
    }

    friend bool operator==(const AbsState& a, const AbsState& b) { return a.env_ == b.env_; }

    [[nodiscard]] std::string to_string() const {
        if (is_bottom()) {
            return "bottom";
        }
        std::string out = "{";
        bool first = true;
        for (const auto& [r, i] : env_->bindings()) {
            out += (first ? "" : ", ") + reg_name(r) + ": " + i.to_string();
            first = false;
        }
        return out + "}";
    }

  private:
    AbsState() = default;
    explicit AbsState(Env env) : env_(std::move(env)) {}

    std::optional<Env> env_;
};

struct JoinOptions {
    bool naive = false;
    ShareStats* stats = nullptr;
};

inline AbsState join(const AbsState& a, const AbsState& b, const JoinOptions& opts = {}) {
    if (a.is_bottom()) {
        return b;
    }
    if (b.is_bottom()) {
        return a;
    }
    auto hull = [](const std::optional<Interval>& x, const std::optional<Interval>& y) -> std::optional<Interval> {
        if (!x || !y) {
            return std::nullopt; // unbound is the full range
        }
        Interval h = x->hull(*y);
        return h.is_top() ? std::nullopt : std::optional<Interval>(h);
    };
    CombineOptions co{.idempotent = true, .absent = AbsentRule::absorbing, .shortcuts = !opts.naive};
    return AbsState::from_env(AbsState::Env::combine(hull, a.env(), b.env(), co, opts.stats));
}

inline AbsState widen(const AbsState& old_state, const AbsState& next) {
    if (old_state.is_bottom()) {
        return next;
    }
    if (next.is_bottom()) {
        return old_state;
    }
    auto w = [](const std::optional<Interval>& x, const std::optional<Interval>& y) -> std::optional<Interval> {
        if (!x || !y) {
            return std::nullopt;
        }
        Interval h = x->widen(*y);
        return h.is_top() ? std::nullopt : std::optional<Interval>(h);
    };
    CombineOptions co{.idempotent = true, .absent = AbsentRule::absorbing, .shortcuts = true};
    return AbsState::from_env(AbsState::Env::combine(w, old_state.env(), next.env(), co));
}

inline bool leq(const AbsState& a, const AbsState& b, ShareStats* stats = nullptr) {
    if (a.is_bottom()) {
        return true;
    }
    if (b.is_bottom()) {
        return false;
    }
    // Unbound on the right is the full range: anything fits. Unbound on the
    // left is the full range, and bound intervals are never the full range.
    static const LeqPolicy<Interval> policy{
        [](const Interval& x, const Interval& y) { return x.leq(y); },
        OneSided<Interval>::always(true),
        OneSided<Interval>::always(false),
    };
    return AbsState::Env::leq(policy, a.env(), b.env(), stats);
}

// Per-successor abstract post of one instruction.
inline std::vector<std::pair<Loc, AbsState>> transfer(const Instr& ins, const AbsState& s) {
    std::vector<std::pair<Loc, AbsState>> out;
    if (s.is_bottom()) {
        return out;
    }
    std::visit(overloaded{
                   [&](const instr::Nop& x) { out.emplace_back(x.succ, s); },
                   [&](const instr::Const& x) { out.emplace_back(x.succ, s.set(x.dst, Interval::constant(x.value))); },
                   [&](const instr::Move& x) { out.emplace_back(x.succ, s.set(x.dst, s.get(x.src))); },
                   [&](const instr::Op& x) {
                       out.emplace_back(x.succ, s.set(x.dst, fwd_op(x.op, s.get(x.src1), s.get(x.src2))));
                   },
                   [&](const instr::Branch& x) {
                       if (x.src1 == x.src2) {
                           out.emplace_back(x.if_true, s);
                           out.emplace_back(x.if_false, s);
                           return;
                       }
                       for (bool taken : {true, false}) {
                           auto r = refine(x.cmp, taken, s.get(x.src1), s.get(x.src2));
                           if (r) {
                               out.emplace_back(taken ? x.if_true : x.if_false,
                                                s.set(x.src1, r->first).set(x.src2, r->second));
                           }
                       }
                   },
                   [&](const instr::Return&) {},
               },
               ins);
    return out;
}

// Hooks for the fixpoint engine.
struct IntervalDomain {
    using State = AbsState;

    JoinOptions join_options;

    [[nodiscard]] State bottom() const { return AbsState::bottom(); }
    [[nodiscard]] bool is_bottom(const State& s) const { return s.is_bottom(); }
    [[nodiscard]] std::vector<std::pair<Loc, State>> transfer(const Instr& i, const State& s) const {
        return chamois::transfer(i, s);
    }
    [[nodiscard]] State join(const State& a, const State& b) const { return chamois::join(a, b, join_options); }
    [[nodiscard]] State widen(const State& a, const State& b) const { return chamois::widen(a, b); }
    [[nodiscard]] bool leq(const State& a, const State& b) const { return chamois::leq(a, b); }
};

} // namespace chamois
