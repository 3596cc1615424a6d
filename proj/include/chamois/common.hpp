// Copyright (c) chamois-lite contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace chamois {

// Unbounded integers: program values, interval bounds.
using Int = boost::multiprecision::cpp_int;

// Positive integer key used for trie paths, registers, locations and fact indices.
using Key = std::int64_t;

// Raised when a caller breaks an operation's precondition (bad key, foreign
// handle, reading an undefined register...). Rejections that are normal
// outcomes (a failed check, an out-of-fuel solve) are returned as values.
class UsageError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

inline void check_key(Key k) {
    if (k < 1) {
        throw UsageError("invalid key " + std::to_string(k) + ": keys must be positive");
    }
}

inline int bit_length(Key k) {
    int n = 0;
    for (auto u = static_cast<std::uint64_t>(k); u != 0; u >>= 1) {
        ++n;
    }
    return n;
}

} // namespace chamois
