#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <map>

#include "growfrag/dislocation.hpp"
#include "growfrag/errors.hpp"

using namespace growfrag;

namespace {

DislocationModel halves(double a = 0.0, double sigma = 0.0) {
    return DislocationModel(a, sigma, FiniteAtomic{{{1.0, MassPartition({0.5, 0.5})}}}, TruncationLadder({0, 1, 2, 3}));
}

DislocationModel density(double beta = 1.5) {
    return DislocationModel(0.0, 0.0, BinaryConservative{1.0, beta}, TruncationLadder({0, 1, 2, 3}));
}

// Direct double-exponential quadrature of the defining integral over x = 1 - p1.
double density_kappa(double q, double beta, double cut) {
    boost::math::quadrature::tanh_sinh<double> ts;
    // The bracket is O(x^2), so tiny x contributes nothing at double precision.
    auto body = [&](double x) {
        if (x < 1e-150) return 0.0;
        return std::pow(x, -beta) * (std::expm1(q * std::log1p(-x)) + q * x);
    };
    auto small = [&](double x) { return std::pow(x, q - beta); };
    double v = ts.integrate(body, 0.0, 0.5);
    if (cut < 0.5) v += ts.integrate(small, cut, 0.5);
    return v;
}

}  // namespace

TEST_CASE("point mass cumulant matches 2^(1-q) - 1 + q/2") {
    auto m = halves();
    for (double q = -1.0; q <= 5.0; q += 0.25) {
        CHECK(cumulant(m, q) == doctest::Approx(std::pow(2.0, 1 - q) - 1 + q / 2).epsilon(1e-14));
        CHECK(cumulant_derivative(m, q) ==
              doctest::Approx(-std::log(2.0) * std::pow(2.0, 1 - q) + 0.5).epsilon(1e-13));
    }
    CHECK(std::abs(cumulant(m, 0) - 1.0) < 1e-12);
    CHECK(std::abs(cumulant(m, 2) - 0.5) < 1e-12);
    // Level 0 (b = 0 < ln 2) drops the second half.
    CHECK(std::abs(cumulant(m, 2, 0) - 0.25) < 1e-12);
    CHECK(cumulant(m, 2, 1) == doctest::Approx(0.5));
}

TEST_CASE("drift and Gaussian terms enter the cumulant") {
    auto m = halves(0.3, 0.7);
    double q = 1.7;
    CHECK(cumulant(m, q) == doctest::Approx(0.3 * q + 0.5 * 0.49 * q * q + std::pow(2.0, 1 - q) - 1 + q / 2));
}

TEST_CASE("critical point of the point mass") {
    auto m = halves();
    double w = omega_bar(m);
    CHECK(std::abs(w * cumulant_derivative(m, w) - cumulant(m, w)) < 1e-10);
    CHECK(w >= 2.40);
    CHECK(w <= 2.45);
}

TEST_CASE("no critical point without dislocations") {
    DislocationModel m(0.1, 1.0, FiniteAtomic{}, TruncationLadder({0, 1}));
    CHECK_THROWS_AS(omega_bar(m), NoCriticalPoint);
}

TEST_CASE("binary density cumulant against tanh-sinh quadrature") {
    for (double beta : {0.5, 1.5}) {
        auto m = density(beta);
        for (double q : {0.75, 1.0, 2.0, 3.5}) {
            CHECK(cumulant(m, q) == doctest::Approx(density_kappa(q, beta, 0.0)).epsilon(1e-9));
            for (int n = 0; n <= 3; ++n) {
                double cut = std::exp(-m.ladder().b(n));
                CHECK(cumulant(m, q, n) == doctest::Approx(density_kappa(q, beta, cut)).epsilon(1e-9));
            }
            double h = 1e-5;
            double fd = (cumulant(m, q + h) - cumulant(m, q - h)) / (2 * h);
            CHECK(cumulant_derivative(m, q) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("binary density domain") {
    auto m = density(1.5);
    CHECK(m.dom_lower() == doctest::Approx(0.5));
    CHECK(std::isinf(cumulant(m, 0.4)));
    CHECK_THROWS_AS(cumulant_derivative(m, 0.5), DomainError);
    // Truncated cumulants are finite everywhere.
    CHECK(std::isfinite(cumulant(m, 0.2, 2)));
    double w = omega_bar(m);
    CHECK(std::abs(w * cumulant_derivative(m, w) - cumulant(m, w)) < 1e-10);
}

TEST_CASE("truncation ladder and k_b") {
    TruncationLadder l({0, 1, 2, 3});
    CHECK(level_of(0.5, l) == 1);
    CHECK(level_of(std::exp(-1.0), l) == 2);
    CHECK(level_of(0.2, l) == 2);
    CHECK(level_of(0.06, l) == 3);
    CHECK_THROWS_AS(level_of(0.01, l), LadderExhausted);
    MassPartition p({0.6, 0.3, 0.05, 0.04});
    CHECK(truncate(p, 3.0) == MassPartition({0.6, 0.3, 0.05}));
    CHECK(truncate(p, 1.0) == MassPartition({0.6}));
    CHECK(truncate(p, 0.0) == MassPartition({0.6}));
    CHECK_THROWS(TruncationLadder({0, 2, 1}));
    CHECK_THROWS(MassPartition({0.3, 0.5}));
    CHECK_THROWS(MassPartition({0.7, 0.6}));
}

TEST_CASE("Esscher identity for both families") {
    for (const auto& m : {halves(0.2, 0.4), density(1.5)}) {
        for (double w : {1.0, 2.0, omega_bar(m)}) {
            auto sp = spine_levy_params(m, w);
            for (int k = 0; k < 20; ++k) {
                double q = 0.1 + 0.2 * k;
                CHECK(std::abs(laplace_exponent(sp, q) - (cumulant(m, q + w) - cumulant(m, w))) < 1e-12);
            }
            for (int n = 0; n <= 3; ++n) {
                auto spn = spine_levy_params(m, w, n);
                CHECK(laplace_exponent(spn, 0.7) ==
                      doctest::Approx(cumulant(m, 0.7 + w, n) - cumulant(m, w, n)).epsilon(1e-11));
            }
        }
    }
}

TEST_CASE("spine weights are a probability vector") {
    FiniteAtomic fa{{{1.0, MassPartition({0.5, 0.3, 0.2})}, {2.0, MassPartition({0.7, 0.3})}}};
    DislocationModel m(0, 0, fa, TruncationLadder({0, 1, 2}));
    auto g = spine_weights(m, 1.5, 0.3);
    CHECK(g[0] == 0.0);
    // Weight-proportional split of y = 0.3 between the two atoms carrying it.
    CHECK(g[1] == doctest::Approx(1.0));
    auto g2 = spine_weights(halves(), 2.0, 0.5);
    CHECK(g2[0] == doctest::Approx(0.5));
    CHECK(g2[1] == doctest::Approx(0.5));
    auto gb = spine_weights(density(), 2.0, 0.2);
    CHECK(gb[1] == 1.0);
}

TEST_CASE("spine rates for the point mass") {
    auto m = halves();
    double w = 2.0;
    CHECK(spine_event_rate(m, w) == doctest::Approx(2 * std::pow(0.5, w)));
    CHECK(immigration_rate(m, w, 0) == 0.0);
    CHECK(immigration_rate(m, w, 1) == doctest::Approx(2 * std::pow(0.5, w)));
    CHECK(spine_kill_rate(m, w, 0) == doctest::Approx(std::pow(0.5, w)));
    CHECK(spine_kill_rate(m, w, 1) == 0.0);
    CHECK(std::isfinite(spine_kill_rate(density(1.5), 0.9, 2)));
    // x^(omega - beta) stops being integrable at the edge of the domain.
    CHECK_THROWS_AS(spine_kill_rate(density(1.5), 0.5, 2), Diverges);
}

TEST_CASE("branch events follow the atom weights") {
    FiniteAtomic fa{{{1.0, MassPartition({0.5, 0.5})}, {3.0, MassPartition({0.6, 0.3, 0.1})}}};
    DislocationModel m(0, 0, fa, TruncationLadder({0, 1, 2, 3}));
    Rng rng(5);
    int heavy = 0, n = 20000;
    for (int i = 0; i < n; ++i) heavy += sample_branch_event(m, 3, rng).size() == 3;
    double f = static_cast<double>(heavy) / n;
    CHECK(std::abs(f - 0.75) < 4 * std::sqrt(0.75 * 0.25 / n));
}

TEST_CASE("spine kernel picks each half equally often") {
    auto m = halves();
    Rng rng(11);
    std::map<int, int> counts;
    int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto mk = spine_kernel(m, 2.0, rng);
        CHECK(mk.y == 0.5);
        ++counts[mk.i];
    }
    CHECK(std::abs(counts[1] - n / 2) < 4 * std::sqrt(n * 0.25));
}

TEST_CASE("binary spine kernel at a level keeps only immigration events") {
    auto m = density(0.5);
    Rng rng(3);
    double thr = m.ladder().threshold(1);
    for (int k = 0; k < 2000; ++k) {
        auto mk = spine_kernel(m, 1.0, rng, 1);
        REQUIRE(mk.p.size() == 2);
        CHECK(mk.p[1] > thr);
        CHECK(mk.p[static_cast<std::size_t>(mk.i - 1)] == mk.y);
    }
}
