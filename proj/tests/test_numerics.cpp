#include <doctest.h>

#include <cmath>

#include "growfrag/numerics.hpp"

using namespace growfrag::num;

namespace {

long double taylor_em1l(long double z) {
    long double term = z * z / 2, sum = 0;
    for (int k = 2; k < 60; ++k) {
        sum += term;
        term *= z / (k + 1);
    }
    return sum;
}

}  // namespace

TEST_CASE("em1l matches a long double Taylor sum") {
    for (double z : {1e-9, -1e-6, 1e-3, 0.1, -0.2, 0.24, 0.5, -2.0, 3.0}) {
        double want = static_cast<double>(taylor_em1l(z));
        CHECK(em1l(z) == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("fragment_term against direct evaluation") {
    for (double p : {0.01, 0.3, 0.5, 0.9}) {
        for (double q : {0.0, 0.25, 1.0, 2.5, 6.0}) {
            long double want = std::pow(static_cast<long double>(p), q) - 1 + q * (1 - static_cast<long double>(p));
            CHECK(fragment_term(p, q) == doctest::Approx(static_cast<double>(want)).epsilon(1e-12).scale(1e-12));
        }
    }
    // Near p = 1 the value is q(q-1)/2 (1-p)^2 to leading order.
    double e = 1e-7;
    CHECK(fragment_term(1 - e, 3.0) == doctest::Approx(3.0 * e * e).epsilon(1e-5));
}

TEST_CASE("power integrals have the elementary antiderivatives") {
    for (double t : {-2.5, -1.0, -0.5, 0.0, 1.5}) {
        double lo = 0.2, hi = 0.9;
        double want = t == -1.0 ? std::log(hi / lo) : (std::pow(hi, t + 1) - std::pow(lo, t + 1)) / (t + 1);
        CHECK(power_int(t, lo, hi) == doctest::Approx(want).epsilon(1e-13));
        // d/dt of y^t is y^t log y
        double h = 1e-5;
        double fd = (power_int(t + h, lo, hi) - power_int(t - h, lo, hi)) / (2 * h);
        CHECK(power_log_int(t, lo, hi) == doctest::Approx(fd).epsilon(1e-8));
    }
    CHECK(power_int(0.5, 0.0, 1.0) == doctest::Approx(2.0 / 3.0));
    CHECK(power_log_int(0.0, 0.0, 1.0) == doctest::Approx(-1.0));
    CHECK(std::isinf(power_int(-1.0, 0.0, 1.0)));
    CHECK(std::isinf(power_int(-1.5, 0.0, 1.0)));
}

TEST_CASE("series helpers reproduce their functions") {
    auto eval = [](const Series& s, double x) {
        double acc = 0, xk = 1;
        for (double c : s) {
            acc += c * xk;
            xk *= x;
        }
        return acc;
    };
    CHECK(eval(binom_series(2.7), 0.2) == doctest::Approx(std::pow(0.8, 2.7)).epsilon(1e-14));
    CHECK(eval(log1m_series(), 0.1) == doctest::Approx(std::log(0.9)).epsilon(1e-14));
    CHECK(eval(mul(binom_series(1.0), binom_series(-1.0)), 0.1) == doctest::Approx(1.0));
    CHECK(eval(add(monomial(2, 3.0), monomial(0, 1.0), 2.0), 0.5) == doctest::Approx(0.75 + 2.0));
}

TEST_CASE("singular integral of x^-1/2 (1 + x)") {
    Series h = add(monomial(0, 1.0), monomial(1, 1.0));
    auto f = [](double x) { return 1 + x; };
    double want = 2 * std::sqrt(0.5) + 2.0 / 3.0 * std::pow(0.5, 1.5);
    CHECK(integrate_singular(0.5, h, 0, f, 0.0, 0.5) == doctest::Approx(want).epsilon(1e-13));
    double part = 2 * std::sqrt(0.5) + 2.0 / 3.0 * std::pow(0.5, 1.5) - 2 * std::sqrt(0.01) - 2.0 / 3.0 * 1e-3;
    CHECK(integrate_singular(0.5, h, 0, f, 0.01, 0.5) == doctest::Approx(part).epsilon(1e-13));
}

TEST_CASE("quadrature and bisection on textbook cases") {
    CHECK(gk([](double x) { return std::sin(x); }, 0.0, 1.0) == doctest::Approx(1 - std::cos(1.0)).epsilon(1e-14));
    CHECK(bisect([](double x) { return x * x - 2; }, 0.0, 2.0, 1e-13) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}
