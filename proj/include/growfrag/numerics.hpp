#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace growfrag::num {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// e^z - 1 - z without cancellation for small |z|.
double em1l(double z);

// p^q - 1 + q(1-p) for p in (0,1], stable when p is close to 1 or q is small.
double fragment_term(double p, double q);

// Integrals of y^t and y^t log y over (lo, hi] with 0 <= lo. Returns +inf
// when lo == 0 and the integrand is not integrable at the origin.
double power_int(double t, double lo, double hi);
double power_log_int(double t, double lo, double hi);

// Truncated power series in x, coefficient k multiplies x^k.
using Series = std::vector<double>;

inline constexpr std::size_t kSeriesTerms = 64;

Series binom_series(double alpha, std::size_t terms = kSeriesTerms);  // (1-x)^alpha
Series log1m_series(std::size_t terms = kSeriesTerms);                // log(1-x)
Series mul(const Series& a, const Series& b);
Series add(const Series& a, const Series& b, double scale_b = 1.0);
Series monomial(std::size_t k, double coeff, std::size_t terms = kSeriesTerms);

// sum_{k >= kmin} c_k * int_lo^hi x^(k-beta) dx; lower coefficients are taken as zero.
double integrate_series(const Series& c, std::size_t kmin, double beta, double lo, double hi);

// Adaptive Gauss-Kronrod on a finite interval.
double gk(const std::function<double(double)>& f, double a, double b);

// int_lo^hi x^(-beta) h(x) dx where h is analytic at 0: the series is used on
// [lo, min(hi, split)] and quadrature on the remainder.
double integrate_singular(double beta, const Series& h_series, std::size_t kmin,
                          const std::function<double(double)>& h, double lo, double hi,
                          double split = 0.125);

// Bisection for a sign change of f on [lo, hi]; returns the midpoint once the
// bracket is narrower than tol.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace growfrag::num
