#include "hdb/rational.hpp"

#include <mutex>
#include <stdexcept>

namespace hdb {

Rat rat_parse(const std::string& s) {
  auto bad = [&] { throw std::invalid_argument("bad rational: '" + s + "'"); };
  if (s.empty()) bad();
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(Int(s));
    Int p(s.substr(0, slash));
    Int q(s.substr(slash + 1));
    if (q == 0) bad();
    if (q < 0) {
      p = -p;
      q = -q;
    }
    return Rat(p, q);
  } catch (const std::runtime_error&) {
    bad();
  }
  return Rat(0);  // unreachable
}

std::string rat_str(const Rat& r) {
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

Int binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  Int r = 1;
  for (unsigned i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

Int factorial(unsigned n) {
  Int r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

namespace {
std::mutex bernoulli_mutex;
// Guarded by bernoulli_mutex; entries never change once written.
std::vector<Rat>& bernoulli_cache() {
  static std::vector<Rat> cache{Rat(1)};
  return cache;
}
}  // namespace

const Rat& bernoulli_first(unsigned n) {
  std::lock_guard<std::mutex> lock(bernoulli_mutex);
  auto& cache = bernoulli_cache();
  while (cache.size() <= n) {
    // sum_{k=0}^{i-1} B_k C(i,k) = 0  =>  B_{i-1} = -sum_{k<i-1} B_k C(i,k) / i
    unsigned i = static_cast<unsigned>(cache.size()) + 1;
    Rat acc = 0;
    for (unsigned k = 0; k + 1 < i; ++k) acc += cache[k] * Rat(binomial(i, k));
    cache.push_back(-acc / Rat(Int(i)));
  }
  return cache[n];
}

Rat bernoulli_second(unsigned n) {
  const Rat& b = bernoulli_first(n);
  return (n % 2 == 0) ? b : -b;
}

bool bernoulli_identity_check(unsigned i) {
  if (i < 2) throw std::invalid_argument("bernoulli_identity_check needs i >= 2");
  Rat acc = 0;
  for (unsigned k = 0; k < i; ++k) acc += bernoulli_first(k) * Rat(binomial(i, k));
  return acc == 0;
}

}  // namespace hdb
