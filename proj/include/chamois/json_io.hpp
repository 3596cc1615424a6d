// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

// JSON encodings of invariants, fact tables, polyhedra and certificates.
//
// Finite interval bounds are JSON integers when they fit in 64 bits and
// decimal strings otherwise; infinities are "-inf" and "+inf". Unreached
// locations are null. Rationals are "p/q" strings (plain integers accepted on
// input). Anything malformed raises FormatError.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "chamois/facts.hpp"
#include "chamois/interval.hpp"
#include "chamois/ir.hpp"
#include "chamois/polycert.hpp"

namespace chamois {

using json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Key parse_positive(std::string_view text, std::string_view what) {
    Key v = 0;
    if (text.empty() || text.size() > 18) {
        throw FormatError("bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    for (char c : text) {
        if (c < '0' || c > '9') {
            throw FormatError("bad " + std::string(what) + " '" + std::string(text) + "'");
        }
        v = v * 10 + (c - '0');
    }
    if (v < 1) {
        throw FormatError("bad " + std::string(what) + " '" + std::string(text) + "'");
    }
    return v;
}

inline Int parse_int(std::string_view text) {
    std::size_t i = text.starts_with('-') ? 1 : 0;
    if (i == text.size()) {
        throw FormatError("bad integer '" + std::string(text) + "'");
    }
    for (std::size_t j = i; j < text.size(); ++j) {
        if (text[j] < '0' || text[j] > '9') {
            throw FormatError("bad integer '" + std::string(text) + "'");
        }
    }
    return Int(std::string(text));
}

inline std::string_view expect_string(const json& j, std::string_view what) {
    if (!j.is_string()) {
        throw FormatError("expected a string for " + std::string(what) + ", got " + j.dump());
    }
    return j.get_ref<const std::string&>();
}

inline const json& member(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw FormatError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

} // namespace detail

inline Reg reg_from_name(std::string_view name) {
    if (!name.starts_with('r')) {
        throw FormatError("bad register name '" + std::string(name) + "'");
    }
    return detail::parse_positive(name.substr(1), "register name");
}

inline Var var_from_name(std::string_view name) {
    if (!name.starts_with('x')) {
        throw FormatError("bad variable name '" + std::string(name) + "'");
    }
    return detail::parse_positive(name.substr(1), "variable name");
}

// --- intervals ------------------------------------------------------------

inline json to_json(const Bound& b) {
    if (!b.is_finite()) {
        return b.to_string();
    }
    const Int& v = b.value();
    if (v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max()) {
        return static_cast<std::int64_t>(v);
    }
    return v.str();
}

inline Bound bound_from_json(const json& j) {
    if (j.is_number_integer()) {
        return Bound(static_cast<long long>(j.get<std::int64_t>()));
    }
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "-inf") {
            return Bound::minus_infinity();
        }
        if (s == "+inf") {
            return Bound::plus_infinity();
        }
        return Bound(detail::parse_int(s));
    }
    throw FormatError("bad bound " + j.dump());
}

inline json to_json(const Interval& i) { return json::array({to_json(i.lo()), to_json(i.hi())}); }

inline Interval interval_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw FormatError("expected [lo, hi], got " + j.dump());
    }
    Bound lo = bound_from_json(j[0]);
    Bound hi = bound_from_json(j[1]);
    if (lo > hi || lo == Bound::plus_infinity() || hi == Bound::minus_infinity()) {
        throw FormatError("empty interval " + j.dump());
    }
    return {lo, hi};
}

inline json to_json(const AbsState& s) {
    if (s.is_bottom()) {
        return nullptr;
    }
    json out = json::object();
    for (const auto& [r, i] : s.env().bindings()) {
        out[reg_name(r)] = to_json(i);
    }
    return out;
}

inline AbsState abs_state_from_json(const json& j) {
    if (j.is_null()) {
        return AbsState::bottom();
    }
    if (!j.is_object()) {
        throw FormatError("expected an object of register intervals, got " + j.dump());
    }
    AbsState s = AbsState::top();
    for (const auto& [name, i] : j.items()) {
        s = s.set(reg_from_name(name), interval_from_json(i));
    }
    return s;
}

// --- invariant files --------------------------------------------------------

struct IntervalInvariantFile {
    std::string function;
    AbsState entry_state = AbsState::top();
    Invariant<AbsState> states;
};

inline json interval_invariant_to_json(const std::string& function, const AbsState& entry_state,
                                       const Invariant<AbsState>& inv) {
    json states = json::object();
    for (const auto& [l, s] : inv.bindings()) {
        states[std::to_string(l)] = to_json(s);
    }
    return json{{"function", function}, {"kind", "interval"}, {"entry_state", to_json(entry_state)}, {"states", states}};
}

inline IntervalInvariantFile interval_invariant_from_json(const json& j) {
    if (detail::expect_string(detail::member(j, "kind"), "kind") != "interval") {
        throw FormatError("not an interval invariant");
    }
    IntervalInvariantFile out;
    out.function = std::string(detail::expect_string(detail::member(j, "function"), "function"));
    if (j.contains("entry_state")) {
        out.entry_state = abs_state_from_json(j.at("entry_state"));
    }
    const json& states = detail::member(j, "states");
    if (!states.is_object()) {
        throw FormatError("'states' must be an object");
    }
    for (const auto& [loc, s] : states.items()) {
        out.states = out.states.set(detail::parse_positive(loc, "location"), abs_state_from_json(s));
    }
    return out;
}

inline json to_json(const Fact& f) {
    return json{{"dst", reg_name(f.dst)},
                {"op", std::string(to_string(f.op))},
                {"src1", reg_name(f.src1)},
                {"src2", reg_name(f.src2)}};
}

inline Fact fact_from_json(const json& j) {
    const auto op = binop_from_string(detail::expect_string(detail::member(j, "op"), "op"));
    if (!op) {
        throw FormatError("unknown operator in fact " + j.dump());
    }
    return Fact{reg_from_name(detail::expect_string(detail::member(j, "dst"), "dst")), *op,
                reg_from_name(detail::expect_string(detail::member(j, "src1"), "src1")),
                reg_from_name(detail::expect_string(detail::member(j, "src2"), "src2"))};
}

// Fact states as plain index lists, independent of any arena.
struct FactInvariantFile {
    std::string function;
    std::vector<Fact> by_index;                              // index i at position i - 1
    std::map<Loc, std::optional<std::vector<Key>>> states;  // nullopt: unreached

    [[nodiscard]] Invariant<FactState> build(SetArena& arena) const {
        Invariant<FactState> inv;
        for (const auto& [l, s] : states) {
            inv = inv.set(l, s ? FactState::known(arena.from_elements(*s)) : FactState::unreached());
        }
        return inv;
    }
};

inline json fact_invariant_to_json(const std::string& function, const std::vector<Fact>& by_index,
                                   const Invariant<FactState>& inv, const SetArena& arena) {
    json states = json::object();
    for (const auto& [l, s] : inv.bindings()) {
        states[std::to_string(l)] = s.is_unreached() ? json(nullptr) : json{{"facts", arena.elements(s.facts())}};
    }
    json table = json::object();
    for (std::size_t i = 0; i < by_index.size(); ++i) {
        table[std::to_string(i + 1)] = to_json(by_index[i]);
    }
    return json{{"function", function},
                {"kind", "facts"},
                {"entry_state", json{{"facts", json::array()}}},
                {"states", states},
                {"fact_table", table}};
}

// Any "kill" section is ignored: the checker rebuilds kill sets itself.
inline FactInvariantFile fact_invariant_from_json(const json& j) {
    if (detail::expect_string(detail::member(j, "kind"), "kind") != "facts") {
        throw FormatError("not a facts invariant");
    }
    FactInvariantFile out;
    out.function = std::string(detail::expect_string(detail::member(j, "function"), "function"));
    const json& table = j.contains("fact_table") ? j.at("fact_table") : json::object();
    if (!table.is_object()) {
        throw FormatError("'fact_table' must be an object");
    }
    std::map<Key, Fact> facts;
    for (const auto& [index, f] : table.items()) {
        facts.emplace(detail::parse_positive(index, "fact index"), fact_from_json(f));
    }
    for (const auto& [index, f] : facts) {
        if (index != static_cast<Key>(out.by_index.size() + 1)) {
            throw FormatError("fact indices must be 1.." + std::to_string(facts.size()));
        }
        out.by_index.push_back(f);
    }
    const json& states = detail::member(j, "states");
    if (!states.is_object()) {
        throw FormatError("'states' must be an object");
    }
    for (const auto& [loc, s] : states.items()) {
        const Loc l = detail::parse_positive(loc, "location");
        if (s.is_null()) {
            out.states[l] = std::nullopt;
            continue;
        }
        const json& list = detail::member(s, "facts");
        if (!list.is_array()) {
            throw FormatError("'facts' must be an array at location " + std::string(loc));
        }
        std::vector<Key> keys;
        for (const auto& k : list) {
            if (!k.is_number_integer() || k.get<std::int64_t>() < 1) {
                throw FormatError("bad fact index " + k.dump());
            }
            keys.push_back(k.get<std::int64_t>());
        }
        out.states[l] = std::move(keys);
    }
    return out;
}

// --- polyhedra --------------------------------------------------------------

inline json to_json(const Rational& q) { return q.str(); }

inline Rational rational_from_json(const json& j) {
    if (j.is_number_integer()) {
        return Rational(j.get<std::int64_t>());
    }
    const std::string_view s = detail::expect_string(j, "rational");
    const auto slash = s.find('/');
    if (slash == std::string_view::npos) {
        return Rational(detail::parse_int(s));
    }
    const Int num = detail::parse_int(s.substr(0, slash));
    const Int den = detail::parse_int(s.substr(slash + 1));
    if (den == 0) {
        throw FormatError("zero denominator in '" + std::string(s) + "'");
    }
    return Rational(num, den);
}

inline json to_json(const Constraint& c) {
    json coeffs = json::object();
    for (const auto& [v, a] : c.coeffs()) {
        coeffs[var_name(v)] = to_json(a);
    }
    return json{{"coeffs", coeffs}, {"bound", to_json(c.bound())}};
}

inline Constraint constraint_from_json(const json& j) {
    const json& coeffs = detail::member(j, "coeffs");
    if (!coeffs.is_object()) {
        throw FormatError("'coeffs' must be an object");
    }
    std::map<Var, Rational> m;
    for (const auto& [name, q] : coeffs.items()) {
        m[var_from_name(name)] = rational_from_json(q);
    }
    return Constraint(std::move(m), rational_from_json(detail::member(j, "bound")));
}

inline json to_json(const Polyhedron& p) {
    json out = json::array();
    for (const auto& c : p.constraints) {
        out.push_back(to_json(c));
    }
    return out;
}

inline Polyhedron polyhedron_from_json(const json& j) {
    if (!j.is_array()) {
        throw FormatError("a polyhedron is an array of constraints");
    }
    Polyhedron p;
    for (const auto& c : j) {
        p.constraints.push_back(constraint_from_json(c));
    }
    return p;
}

inline json to_json(const FarkasCert& cert) {
    json lambdas = json::object();
    for (const auto& [i, l] : cert.lambdas) {
        lambdas[std::to_string(i)] = to_json(l);
    }
    return json{{"lambdas", lambdas}};
}

inline FarkasCert cert_from_json(const json& j) {
    const json& lambdas = detail::member(j, "lambdas");
    if (!lambdas.is_object()) {
        throw FormatError("'lambdas' must be an object");
    }
    FarkasCert cert;
    for (const auto& [index, l] : lambdas.items()) {
        std::size_t i = 0;
        for (char c : index) {
            if (c < '0' || c > '9' || index.size() > 9) {
                throw FormatError("bad constraint index '" + index + "'");
            }
            i = i * 10 + static_cast<std::size_t>(c - '0');
        }
        if (index.empty()) {
            throw FormatError("empty constraint index");
        }
        cert.lambdas[i] = rational_from_json(l);
    }
    return cert;
}

inline json to_json(const std::vector<FarkasCert>& certs) {
    json out = json::array();
    for (const auto& c : certs) {
        out.push_back(to_json(c));
    }
    return out;
}

inline std::vector<FarkasCert> certs_from_json(const json& j) {
    if (!j.is_array()) {
        throw FormatError("expected an array of certificates");
    }
    std::vector<FarkasCert> out;
    for (const auto& c : j) {
        out.push_back(cert_from_json(c));
    }
    return out;
}

} // namespace chamois
