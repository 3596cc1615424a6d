// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

/*******************************************************************************
 * Constraint-only convex polyhedra over exact rationals.
 *
 * A Farkas certificate for "P entails c" is a vector of nonnegative
 * multipliers, one per constraint of P, whose combination has the
 * coefficients of c and a bound no larger than c's. Checking one is a few
 * exact multiply-adds; finding one is the oracle's problem. `fm_project` is
 * such an oracle: Fourier-Motzkin elimination that records, for each output
 * constraint, the combination that produced it.
 ******************************************************************************/

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "chamois/common.hpp"

namespace chamois {

using Rational = boost::multiprecision::cpp_rational;
using Var = Key;

inline std::string var_name(Var v) { return "x" + std::to_string(v); }

// sum(coeffs[v] * v) <= bound. Zero coefficients are never stored.
class Constraint {
  public:
    Constraint() = default;
    Constraint(std::map<Var, Rational> coeffs, Rational bound) : coeffs_(std::move(coeffs)), bound_(std::move(bound)) {
        std::erase_if(coeffs_, [](const auto& kv) { return kv.second == 0; });
        for (const auto& [v, _] : coeffs_) {
            check_key(v);
        }
    }

    [[nodiscard]] const std::map<Var, Rational>& coeffs() const { return coeffs_; }
    [[nodiscard]] const Rational& bound() const { return bound_; }

    [[nodiscard]] Rational coeff(Var v) const {
        auto it = coeffs_.find(v);
        return it == coeffs_.end() ? Rational(0) : it->second;
    }

    [[nodiscard]] bool holds_at(const std::map<Var, Rational>& point) const {
        Rational lhs = 0;
        for (const auto& [v, a] : coeffs_) {
            auto it = point.find(v);
            if (it != point.end()) {
                lhs += a * it->second;
            }
        }
        return lhs <= bound_;
    }

    [[nodiscard]] std::string to_string() const {
        std::string out;
        for (const auto& [v, a] : coeffs_) {
            if (!out.empty()) {
                out += a < 0 ? " - " : " + ";
            } else if (a < 0) {
                out += "-";
            }
            const Rational m = abs(a);
            if (m != 1) {
                out += m.str() + "*";
            }
            out += var_name(v);
        }
        return (out.empty() ? "0" : out) + " <= " + bound_.str();
    }

    friend bool operator==(const Constraint&, const Constraint&) = default;

  private:
    std::map<Var, Rational> coeffs_;
    Rational bound_ = 0;
};

struct Polyhedron {
    std::vector<Constraint> constraints;

    [[nodiscard]] std::set<Var> variables() const {
        std::set<Var> out;
        for (const auto& c : constraints) {
            for (const auto& [v, _] : c.coeffs()) {
                out.insert(v);
            }
        }
        return out;
    }

    friend bool operator==(const Polyhedron&, const Polyhedron&) = default;
};

struct FarkasCert {
    std::map<std::size_t, Rational> lambdas; // constraint index -> multiplier

    static FarkasCert unit(std::size_t i) { return FarkasCert{{{i, Rational(1)}}}; }

    friend bool operator==(const FarkasCert&, const FarkasCert&) = default;
};

// Accepts iff all multipliers are nonnegative, the combination has exactly
// c's coefficients, and its bound is at most c's bound.
inline bool check_entailment(const Polyhedron& p, const Constraint& c, const FarkasCert& cert) {
    std::map<Var, Rational> sum;
    Rational bound = 0;
    for (const auto& [i, lambda] : cert.lambdas) {
        if (i >= p.constraints.size()) {
            throw UsageError("certificate index " + std::to_string(i) + " out of range (" +
                             std::to_string(p.constraints.size()) + " constraints)");
        }
        if (lambda < 0) {
            return false;
        }
        const Constraint& ci = p.constraints[i];
        for (const auto& [v, a] : ci.coeffs()) {
            sum[v] += lambda * a;
        }
        bound += lambda * ci.bound();
    }
    std::erase_if(sum, [](const auto& kv) { return kv.second == 0; });
    return sum == c.coeffs() && bound <= c.bound();
}

// p is included in q when every constraint of q is entailed by p. One
// certificate per constraint of q; a count mismatch is a rejection.
inline bool check_inclusion(const Polyhedron& p, const Polyhedron& q, const std::vector<FarkasCert>& certs) {
    if (certs.size() != q.constraints.size()) {
        return false;
    }
    for (std::size_t i = 0; i < certs.size(); ++i) {
        if (!check_entailment(p, q.constraints[i], certs[i])) {
            return false;
        }
    }
    return true;
}

struct Projection {
    Polyhedron result;
    std::vector<FarkasCert> certs; // certs[i] justifies result.constraints[i] from the input
};

// Eliminates v. Constraints without v come first, in input order, with unit
// certificates; then one constraint per (positive, negative) pair, with the
// multipliers that cancel v and sum to 1.
inline Projection fm_project(const Polyhedron& p, Var v) {
    check_key(v);
    Projection out;
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        const Rational a = p.constraints[i].coeff(v);
        if (a == 0) {
            out.result.constraints.push_back(p.constraints[i]);
            out.certs.push_back(FarkasCert::unit(i));
        } else {
            (a > 0 ? pos : neg).push_back(i);
        }
    }
    for (std::size_t i : pos) {
        for (std::size_t j : neg) {
            const Constraint& ci = p.constraints[i];
            const Constraint& cj = p.constraints[j];
            const Rational a = ci.coeff(v);
            const Rational b = -cj.coeff(v);
            const Rational li = b / (a + b);
            const Rational lj = a / (a + b);
            std::map<Var, Rational> coeffs;
            for (const auto& [w, x] : ci.coeffs()) {
                coeffs[w] += li * x;
            }
            for (const auto& [w, x] : cj.coeffs()) {
                coeffs[w] += lj * x;
            }
            coeffs.erase(v);
            out.result.constraints.emplace_back(std::move(coeffs), li * ci.bound() + lj * cj.bound());
            out.certs.push_back(FarkasCert{{{i, li}, {j, lj}}});
        }
    }
    return out;
}

using GridBox = std::map<Var, std::pair<std::int64_t, std::int64_t>>;

namespace detail {

// Constraint scaled to integer coefficients over a dense variable order.
template <typename T>
struct ScaledConstraint {
    std::vector<T> coeffs;
    T bound;
};

inline Int lcm_of_denominators(const Constraint& c) {
    Int l = denominator(c.bound());
    for (const auto& [_, a] : c.coeffs()) {
        l = boost::multiprecision::lcm(l, Int(denominator(a)));
    }
    return l;
}

template <typename T>
std::vector<ScaledConstraint<T>> scale_all(const Polyhedron& p, const std::vector<Var>& vars) {
    std::vector<ScaledConstraint<T>> out;
    for (const auto& c : p.constraints) {
        const Int l = lcm_of_denominators(c);
        ScaledConstraint<T> s{std::vector<T>(vars.size(), T(0)), T(0)};
        for (const auto& [v, a] : c.coeffs()) {
            const auto idx = static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
            s.coeffs[idx] = static_cast<T>(Int(numerator(a) * (l / denominator(a))));
        }
        s.bound = static_cast<T>(Int(numerator(c.bound()) * (l / denominator(c.bound()))));
        out.push_back(std::move(s));
    }
    return out;
}

// Odometer over the box keeping every constraint's left-hand side up to date,
// so each step costs one add per constraint.
template <typename T>
bool grid_scan(const Polyhedron& p, const Polyhedron& q, const std::vector<Var>& vars,
               const std::vector<std::pair<std::int64_t, std::int64_t>>& range) {
    const auto sp = scale_all<T>(p, vars);
    const auto sq = scale_all<T>(q, vars);
    const std::size_t n = vars.size();
    std::vector<std::int64_t> x(n);
    std::vector<T> lp(sp.size(), T(0));
    std::vector<T> lq(sq.size(), T(0));
    for (std::size_t k = 0; k < n; ++k) {
        if (range[k].first > range[k].second) {
            return true;
        }
        x[k] = range[k].first;
        for (std::size_t c = 0; c < sp.size(); ++c) {
            lp[c] += sp[c].coeffs[k] * T(x[k]);
        }
        for (std::size_t c = 0; c < sq.size(); ++c) {
            lq[c] += sq[c].coeffs[k] * T(x[k]);
        }
    }
    while (true) {
        bool in_p = true;
        for (std::size_t c = 0; c < sp.size() && in_p; ++c) {
            in_p = lp[c] <= sp[c].bound;
        }
        if (in_p) {
            for (std::size_t c = 0; c < sq.size(); ++c) {
                if (lq[c] > sq[c].bound) {
                    return false;
                }
            }
        }
        std::size_t k = 0;
        for (; k < n; ++k) {
            if (x[k] < range[k].second) {
                ++x[k];
                for (std::size_t c = 0; c < sp.size(); ++c) {
                    lp[c] += sp[c].coeffs[k];
                }
                for (std::size_t c = 0; c < sq.size(); ++c) {
                    lq[c] += sq[c].coeffs[k];
                }
                break;
            }
            const T span(range[k].second - range[k].first);
            x[k] = range[k].first;
            for (std::size_t c = 0; c < sp.size(); ++c) {
                lp[c] -= sp[c].coeffs[k] * span;
            }
            for (std::size_t c = 0; c < sq.size(); ++c) {
                lq[c] -= sq[c].coeffs[k] * span;
            }
        }
        if (k == n) {
            return true;
        }
    }
}

// Whether every partial sum of the scaled constraints fits in 62 bits.
inline bool fits_machine_words(const Polyhedron& p, const std::vector<std::pair<std::int64_t, std::int64_t>>& range) {
    const Int limit = Int(1) << 62;
    Int reach = 1;
    for (const auto& [lo, hi] : range) {
        reach = std::max(reach, Int(std::max(lo < 0 ? -Int(lo) : Int(lo), hi < 0 ? -Int(hi) : Int(hi))));
    }
    for (const auto& c : p.constraints) {
        const Int l = lcm_of_denominators(c);
        Int total = abs(Int(numerator(c.bound()) * (l / denominator(c.bound()))));
        for (const auto& [_, a] : c.coeffs()) {
            total += abs(Int(numerator(a) * (l / denominator(a)))) * reach;
        }
        if (total >= limit) {
            return false;
        }
    }
    return true;
}

} // namespace detail

// Brute force: every integer point of the box satisfying p satisfies q.
// Variables of p or q missing from the box are an error.
inline bool grid_check(const Polyhedron& p, const Polyhedron& q, const GridBox& box) {
    std::set<Var> used = p.variables();
    used.merge(q.variables());
    const std::vector<Var> vars(used.begin(), used.end());
    std::vector<std::pair<std::int64_t, std::int64_t>> range;
    for (Var v : vars) {
        auto it = box.find(v);
        if (it == box.end()) {
            throw UsageError("grid box has no range for " + var_name(v));
        }
        range.push_back(it->second);
    }
    if (detail::fits_machine_words(p, range) && detail::fits_machine_words(q, range)) {
        return detail::grid_scan<std::int64_t>(p, q, vars, range);
    }
    return detail::grid_scan<Int>(p, q, vars, range);
}

// Same range [lo, hi] for every variable.
inline bool grid_check(const Polyhedron& p, const Polyhedron& q, std::int64_t lo, std::int64_t hi) {
    GridBox box;
    for (Var v : p.variables()) {
        box[v] = {lo, hi};
    }
    for (Var v : q.variables()) {
        box[v] = {lo, hi};
    }
    return grid_check(p, q, box);
}

} // namespace chamois
