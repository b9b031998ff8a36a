#pragma once

#include <cstdint>
#include <vector>

namespace fourbar {

// First-kind Chebyshev polynomial by the three-term recurrence; valid for any
// real argument (arguments may leave [-1,1] slightly after affine scaling).
inline double cheb_t(int n, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int k = 2; k <= n; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

// One bivariate basis term: the plain product T_m(p) T_n(q), or the
// symmetric/antisymmetric combination with its mirror.
struct ChebTerm {
  enum class Kind : std::uint8_t { product, sym, antisym };
  Kind kind = Kind::product;
  int m = 0;
  int n = 0;

  double eval(double p, double q) const {
    const double a = cheb_t(m, p) * cheb_t(n, q);
    if (kind == Kind::product) return a;
    const double b = cheb_t(n, p) * cheb_t(m, q);
    return kind == Kind::sym ? a + b : a - b;
  }

  bool operator==(const ChebTerm&) const = default;
};

// Lowest-total-degree basis of the requested size. Complete degree layers
// enter as plain products; a partially filled top layer enters symmetrized:
// first the symmetric combinations ordered by |m - n|, then the antisymmetric
// ones. For count = 7 this reproduces {T_m T_n : m + n <= 2} plus
// T_2(p)T_1(q) + T_1(p)T_2(q).
inline std::vector<ChebTerm> chebyshev_basis(int count) {
  std::vector<ChebTerm> terms;
  terms.reserve(count);
  for (int d = 0; int(terms.size()) < count; ++d) {
    const int remaining = count - int(terms.size());
    if (remaining >= d + 1) {
      for (int m = d; m >= 0; --m) terms.push_back({ChebTerm::Kind::product, m, d - m});
      continue;
    }
    std::vector<ChebTerm> layer;
    for (int m = (d + 1) / 2; m <= d; ++m) {
      const int n = d - m;
      if (m == n)
        layer.push_back({ChebTerm::Kind::product, m, n});
      else
        layer.push_back({ChebTerm::Kind::sym, m, n});
    }
    for (int m = (d + 1) / 2; m <= d; ++m) {
      const int n = d - m;
      if (m != n) layer.push_back({ChebTerm::Kind::antisym, m, n});
    }
    for (int i = 0; i < remaining; ++i) terms.push_back(layer[i]);
  }
  return terms;
}

}  // namespace fourbar
