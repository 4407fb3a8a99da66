#include "growfrag/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace growfrag::num {

double em1l(double z) {
    if (std::abs(z) < 0.25) {
        // Taylor tail z^2/2! + z^3/3! + ...
        double term = z * z / 2.0;
        double sum = term;
        for (int k = 3; k < 30; ++k) {
            term *= z / k;
            sum += term;
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    }
    return std::expm1(z) - z;
}

double fragment_term(double p, double q) {
    if (p >= 1.0) return 0.0;
    double l = std::log(p);
    return em1l(q * l) - q * em1l(l);
}

double power_int(double t, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    double u = t + 1.0;
    if (lo <= 0.0) {
        if (u <= 0.0) return kInf;
        return std::pow(hi, u) / u;
    }
    double r = std::log(lo / hi);
    if (std::abs(u * r) < 1e-8) {
        // (hi^u - lo^u)/u with hi^u factored out, to second order in u*r.
        return std::pow(hi, u) * (-r) * (1.0 + u * r / 2.0);
    }
    return std::pow(hi, u) * (-std::expm1(u * r)) / u;
}

double power_log_int(double t, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    double u = t + 1.0;
    if (lo <= 0.0) {
        if (u <= 0.0) return -kInf;
        double lh = std::log(hi);
        return std::pow(hi, u) * (lh / u - 1.0 / (u * u));
    }
    double a = std::log(lo), b = std::log(hi);
    if (std::abs(u) * std::max(std::abs(a), std::abs(b)) < 1e-3) {
        return gk([u](double v) { return std::exp(u * v) * v; }, a, b);
    }
    auto F = [u](double y) { return std::pow(y, u) * (std::log(y) / u - 1.0 / (u * u)); };
    return F(hi) - F(lo);
}

Series binom_series(double alpha, std::size_t terms) {
    Series c(terms, 0.0);
    c[0] = 1.0;
    for (std::size_t k = 1; k < terms; ++k) c[k] = c[k - 1] * (static_cast<double>(k) - 1.0 - alpha) / k;
    return c;
}

Series log1m_series(std::size_t terms) {
    Series c(terms, 0.0);
    for (std::size_t k = 1; k < terms; ++k) c[k] = -1.0 / static_cast<double>(k);
    return c;
}

Series mul(const Series& a, const Series& b) {
    std::size_t n = std::min(a.size(), b.size());
    Series c(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; i + j < n; ++j) c[i + j] += a[i] * b[j];
    }
    return c;
}

Series add(const Series& a, const Series& b, double scale_b) {
    Series c(std::max(a.size(), b.size()), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) c[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) c[i] += scale_b * b[i];
    return c;
}

Series monomial(std::size_t k, double coeff, std::size_t terms) {
    Series c(terms, 0.0);
    if (k < terms) c[k] = coeff;
    return c;
}

double integrate_series(const Series& c, std::size_t kmin, double beta, double lo, double hi) {
    double total = 0.0;
    for (std::size_t k = kmin; k < c.size(); ++k) {
        if (c[k] == 0.0) continue;
        double piece = c[k] * power_int(static_cast<double>(k) - beta, lo, hi);
        total += piece;
        if (k > kmin + 4 && std::abs(piece) < 1e-19 * std::max(1.0, std::abs(total))) break;
    }
    return total;
}

double gk(const std::function<double(double)>& f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-14);
}

double integrate_singular(double beta, const Series& h_series, std::size_t kmin,
                          const std::function<double(double)>& h, double lo, double hi,
                          double split) {
    if (!(hi > lo)) return 0.0;
    double total = 0.0;
    double mid = std::min(hi, split);
    if (mid > lo) total += integrate_series(h_series, kmin, beta, lo, mid);
    double start = std::max(lo, split);
    if (hi > start) {
        total += gk([&](double x) { return std::pow(x, -beta) * h(x); }, start, hi);
    }
    return total;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) throw std::invalid_argument("bisect: no sign change");
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace growfrag::num
