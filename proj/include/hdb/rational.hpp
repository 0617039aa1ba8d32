// Exact rational scalars and Bernoulli numbers.
//
// All arithmetic in this library is exact over Q; there is no floating
// point anywhere. Rationals are kept in canonical form (gcd(|p|,q)=1, q>0)
// by the underlying boost representation.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>
#include <vector>

namespace hdb {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// Parse "p/q" or "p"; q must be nonzero. Throws std::invalid_argument on
// malformed input.
Rat rat_parse(const std::string& s);

// Serialize in canonical form: "p/q" with q > 1, otherwise "p".
std::string rat_str(const Rat& r);

Int binomial(unsigned n, unsigned k);
Int factorial(unsigned n);

// First Bernoulli sequence B_n = B_n(0): B_0=1, B_1=-1/2, B_2=1/6, ...
// Computed from B_0 = 1 and sum_{k=0}^{i-1} B_k * C(i,k) = 0 for i >= 2,
// cached and grown on demand. Thread safe for concurrent callers.
const Rat& bernoulli_first(unsigned n);

// Second sequence B_n(1) = (-1)^n B_n.
Rat bernoulli_second(unsigned n);

// Checks sum_{k=0}^{i-1} B_k * C(i,k) = 0 exactly (i >= 2).
bool bernoulli_identity_check(unsigned i);

}  // namespace hdb
