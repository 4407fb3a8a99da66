#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>

#include "growfrag/levy.hpp"
#include "growfrag/stats.hpp"

using namespace growfrag;

namespace {

// psi(q) with the density integrated directly in y, compensating jumps x > -1.
double oracle_exponent(const LevyExponentParams& p, double q) {
    boost::math::quadrature::tanh_sinh<double> ts;
    double psi = 0.5 * p.gaussian * p.gaussian * q * q + p.center * q;
    for (const auto& j : p.atoms) psi += j.rate * (std::exp(q * j.size) - 1 - (j.size > -1 ? q * j.size : 0.0));
    // Integrate in u = 1 - y so the region near y = 1 keeps full precision.
    const double u1 = 1.0 - std::exp(-1.0);
    for (const auto& d : p.pieces) {
        auto f = [&](double u) {
            if (u < 1e-150) return 0.0;
            double l = std::log1p(-u);
            double bracket = u < u1 ? std::expm1(q * l) - q * l : std::expm1(q * l);
            return d.coeff * std::exp(d.s * l) * std::pow(u, -d.beta) * bracket;
        };
        double a = 1.0 - d.hi, b = 1.0 - d.lo;
        if (a < u1 && b > u1) {
            psi += ts.integrate(f, a, u1) + ts.integrate(f, u1, b);
        } else {
            psi += ts.integrate(f, a, b);
        }
    }
    return psi;
}

LevyExponentParams mixed() {
    LevyExponentParams p;
    p.center = 0.3;
    p.gaussian = 0.4;
    p.atoms = {{1.5, -0.7}, {0.2, -2.0}};
    p.pieces = {{0.8, 0.5, 1.5, 0.5, 1.0}, {1.2, 1.0, 0.0, 0.0, 0.5}};
    p.cutoff = 0.05;
    return p;
}

}  // namespace

TEST_CASE("Levy-Khintchine exponent against direct quadrature") {
    auto p = mixed();
    for (double q : {0.0, 0.3, 1.0, 2.5}) {
        CHECK(laplace_exponent(p, q) == doctest::Approx(oracle_exponent(p, q)).epsilon(1e-9));
    }
}

TEST_CASE("Esscher transform shifts the exponent") {
    auto p = mixed();
    for (double w : {0.5, 2.0}) {
        auto e = esscher(p, w);
        for (double q : {0.1, 1.0, 3.0}) {
            CHECK(laplace_exponent(e, q) == doctest::Approx(laplace_exponent(p, q + w) - laplace_exponent(p, w)).epsilon(1e-11));
        }
    }
}

TEST_CASE("power sampler inverts its distribution function") {
    double t = -0.4, lo = 0.2, hi = 0.9;
    auto cdf = [&](double z) { return (std::pow(z, t + 1) - std::pow(lo, t + 1)) / (std::pow(hi, t + 1) - std::pow(lo, t + 1)); };
    for (double u : {0.01, 0.3, 0.77, 0.999}) CHECK(cdf(levy_detail::sample_power(t, lo, hi, u)) == doctest::Approx(u).epsilon(1e-12));
}

TEST_CASE("piece sampling reproduces the piece mass split") {
    DensityPiece d{1.0, 0.5, 1.5, 0.5, 0.99};
    double mid = 0.8;
    double frac = levy_detail::piece_mass(d, d.lo, mid) / levy_detail::piece_mass(d, d.lo, d.hi);
    Rng rng(17);
    int below = 0, n = 20000;
    for (int i = 0; i < n; ++i) below += levy_detail::piece_sample(d, d.lo, d.hi, rng) <= mid;
    CHECK(std::abs(static_cast<double>(below) / n - frac) < 4 * std::sqrt(frac * (1 - frac) / n));
}

TEST_CASE("simulated paths have exponential moments e^{t psi(q)}") {
    auto p = mixed();
    double t = 1.0;
    for (double q : {0.5, 1.5}) {
        SampleSet s;
        Rng rng(100 + static_cast<std::uint64_t>(q * 10));
        for (int i = 0; i < 20000; ++i) s.add(std::exp(q * simulate_path(p, t, 0.05, rng).terminal()));
        auto m = mean_se(s);
        CHECK(std::abs(m.mean - std::exp(t * laplace_exponent(p, q))) < 4 * m.se);
    }
}

TEST_CASE("path skeleton contains requested times and left limits") {
    LevyExponentParams p;
    p.center = 1.0;
    p.atoms = {{3.0, -0.5}};
    Rng rng(9);
    auto path = simulate_path(p, 2.0, 0.5, rng, {0.3, 1.7});
    CHECK(path.times.back() == 2.0);
    auto at = std::find(path.times.begin(), path.times.end(), 0.3);
    REQUIRE(at != path.times.end());
    CHECK(path.value_at(0.3) == path.values[static_cast<std::size_t>(at - path.times.begin())]);
    for (const auto& j : path.jumps) {
        CHECK(path.value_at(j.time) - path.left_value_at(j.time) == doctest::Approx(j.size));
    }
    // Small atoms are compensated, so the drift between jumps is 1 + 3 * 0.5.
    CHECK(path.terminal() == doctest::Approx(2.5 * 2.0 - 0.5 * static_cast<double>(path.jumps.size())));
}
