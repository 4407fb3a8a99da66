#include <doctest.h>

#include <cmath>
#include <sstream>

#include "growfrag/errors.hpp"
#include "growfrag/martingales.hpp"

using namespace growfrag;

namespace {

DislocationModel multilevel() {
    FiniteAtomic fa{{{0.7, MassPartition({0.6, 0.3, 0.08})}, {0.5, MassPartition({0.5, 0.2})}}};
    return DislocationModel(0.1, 0.3, fa, TruncationLadder({0, 1, 2, 3}));
}

}  // namespace

TEST_CASE("without dislocations W is the exponential martingale of the motion") {
    DislocationModel m(0.2, 0.6, FiniteAtomic{}, TruncationLadder({0}));
    Population pop(m, {}, 4);
    pop.advance_to(1.5);
    auto s = snapshot(pop);
    double z = s.entries[0].position, w = 1.3;
    double psi = 0.2 * w + 0.5 * 0.36 * w * w;
    CHECK(additive(s, m, w) == doctest::Approx(std::exp(w * z - 1.5 * psi)));
}

TEST_CASE("dW is the omega-derivative of W on a fixed snapshot") {
    auto m = multilevel();
    PopulationConfig cfg;
    cfg.level = 3;
    Population pop(m, cfg, 21);
    pop.advance_to(2.0);
    auto s = snapshot(pop);
    for (double w : {0.5, 1.5, 3.0}) {
        double h = 1e-5;
        double fd = (additive(s, m, w + h) - additive(s, m, w - h)) / (2 * h);
        CHECK(derivative(s, m, w) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("stopped derivative needs a matching barrier") {
    auto m = multilevel();
    PopulationConfig cfg;
    cfg.level = 2;
    Population bare(m, cfg, 1);
    bare.advance_to(0.5);
    CHECK_THROWS_AS(stopped_derivative(bare, m, 1.0, 1.0), BarrierNotArmed);

    Tilt tilt = Tilt::at(m, 1.0, 2);
    cfg.barrier = BarrierSpec{1.0, tilt.kappa_prime, 0.01, {1}};
    Population armed(m, cfg, 1);
    armed.advance_to(0.5);
    CHECK_THROWS_AS(stopped_derivative(armed, m, 2.0, 1.0), BarrierNotArmed);
    // A barrier nobody can reach leaves a + t kappa' - Z summed over everyone.
    double far = 1e6;
    auto s = snapshot(armed);
    double want = far * additive(s, tilt) - derivative(s, tilt);
    CHECK(stopped_derivative(armed, tilt, far) == doctest::Approx(want));
}

TEST_CASE("record_traces walks the grid and the CSV marks missing dWa") {
    auto m = multilevel();
    PopulationConfig cfg;
    cfg.level = 3;
    Population pop(m, cfg, 2);
    auto tr = record_traces(pop, {{1.0, std::nullopt, 0}}, {0.5, 1.0, 2.0});
    REQUIRE(tr.size() == 1);
    CHECK(tr[0].times == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(tr[0].count.back() == static_cast<double>(pop.size()));
    std::ostringstream os;
    write_trace_csv(os, tr[0]);
    CHECK(os.str().rfind("time,W,dW,dWa,count,max_pos\r\n", 0) == 0);
    CHECK(os.str().find(",,") != std::string::npos);
}

TEST_CASE("tilt rejects omega outside the domain") {
    DislocationModel m(0, 0, BinaryConservative{1.0, 1.5}, TruncationLadder({0, 1}));
    CHECK_THROWS_AS(Tilt::at(m, 0.3, 1), DomainError);
    CHECK_THROWS_AS(largest(Snapshot{}), Empty);
}
