#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "growfrag/errors.hpp"
#include "growfrag/martingales.hpp"
#include "growfrag/spine.hpp"

using namespace growfrag;

namespace {

DislocationModel halves(double sigma = 0.0) {
    return DislocationModel(0, sigma, FiniteAtomic{{{1.0, MassPartition({0.5, 0.5})}}}, TruncationLadder({0, 1, 2, 3}));
}

DislocationModel multilevel() {
    FiniteAtomic fa{{{0.7, MassPartition({0.6, 0.3, 0.08})}, {0.5, MassPartition({0.5, 0.2})}}};
    return DislocationModel(0.1, 0.3, fa, TruncationLadder({0, 1, 2, 3}));
}

}  // namespace

TEST_CASE("forward populations form a closed genealogy containing the spine") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        ForwardOptions fo;
        fo.level = 3;
        auto out = forward_decorated(multilevel(), 1.2, 2.0, fo, seed);
        std::set<Label> labels;
        for (const auto& p : out.population.particles()) CHECK(labels.insert(p.label).second);
        CHECK(labels.count(out.spine_label) == 1);
        for (const auto& l : labels) {
            if (!l.is_eve()) CHECK(labels.count(l.parent()) == 1);
            CHECK(max_level(l) <= 3);
        }
        CHECK(labels.count(Label{}) == 1);
        // The spine particle sits at the terminal value of xi.
        for (const auto& p : out.population.particles()) {
            if (p.label == out.spine_label) CHECK(p.position == out.xi.terminal());
        }
    }
}

TEST_CASE("level 0 has no immigration") {
    ForwardOptions fo;
    fo.level = 0;
    auto out = forward_decorated(halves(), 2.0, 3.0, fo, 5);
    CHECK(out.immigration.empty());
    CHECK(out.population.size() == 1);
    CHECK(out.spine_label.is_eve());
}

TEST_CASE("lambda has mean a under the forward construction") {
    ForwardOptions fo;
    fo.level = 3;
    fo.barrier_a = 1.0;
    fo.trace_times = {0.5, 1.0, 2.0};
    std::vector<SampleSet> s(3);
    for (std::uint64_t r = 0; r < 4000; ++r) {
        auto out = forward_decorated(halves(0.4), 2.0, 2.0, fo, derive_seed(9, r, Domain::forward));
        for (std::size_t k = 0; k < 3; ++k) s[k].add(out.lambda[k]);
    }
    for (const auto& set : s) {
        auto m = mean_se(set);
        CHECK(std::abs(m.mean - 1.0) < 4 * m.se);
    }
}

TEST_CASE("coupled killing nests across levels") {
    auto m = multilevel();
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        ForwardOptions lo, hi;
        lo.coupled_killing = hi.coupled_killing = true;
        lo.level = 1;
        hi.level = 3;
        auto a = forward_decorated(m, 1.0, 3.0, lo, seed);
        auto b = forward_decorated(m, 1.0, 3.0, hi, seed);
        CHECK(a.xi.values == b.xi.values);
        if (b.kill_time) {
            REQUIRE(a.kill_time);
            CHECK(*a.kill_time <= *b.kill_time);
        }
        if (a.spine_alive) CHECK(b.spine_alive);
    }
}

TEST_CASE("coupled forward runs nest after truncation") {
    auto m = multilevel();
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        ForwardOptions hi;
        hi.coupled_killing = true;
        hi.level = 3;
        auto top = forward_decorated(m, 1.0, 2.0, hi, seed);
        for (int lv = 0; lv < 3; ++lv) {
            ForwardOptions lo = hi;
            lo.level = lv;
            auto direct = forward_decorated(m, 1.0, 2.0, lo, seed);
            CHECK(snapshot(truncate_view(top.population, lv)).entries == snapshot(direct.population).entries);
        }
    }
}

TEST_CASE("branch counts survive truncation") {
    PopulationConfig cfg;
    cfg.level = 3;
    Population pop(multilevel(), cfg, 12);
    pop.advance_to(2.0);
    auto view = pop.truncate_view(1);
    PopulationConfig c1;
    c1.level = 1;
    Population direct(multilevel(), c1, 12);
    direct.advance_to(2.0);
    REQUIRE(view.size() == direct.size());
    for (std::size_t i = 0; i < view.size(); ++i) CHECK(view.particles()[i].branch_count == direct.particles()[i].branch_count);
}

TEST_CASE("coupled killing needs finite activity") {
    DislocationModel m(0, 0, BinaryConservative{1.0, 1.5}, TruncationLadder({0, 1}));
    ForwardOptions fo;
    fo.coupled_killing = true;
    CHECK_THROWS_AS(forward_decorated(m, 1.0, 1.0, fo, 1), InfiniteActivity);
}

TEST_CASE("independent kill time is reported when requested") {
    ForwardOptions fo;
    fo.level = 0;
    fo.report_kill_time = true;
    auto out = forward_decorated(halves(), 2.0, 1.0, fo, 3);
    REQUIRE(out.kill_time);
    CHECK(*out.kill_time > 0.0);
}

TEST_CASE("size-biased pick and full sum estimate the same tilted mean") {
    ReplicaOptions ro;
    ro.level = 3;
    ro.replicas = 4000;
    auto one = backward_tilted_estimate(halves(), 2.0, 1.0, [](const Snapshot&, std::size_t) { return 1.0; }, ro, 4);
    CHECK(one.full_sum.value == doctest::Approx(one.size_biased_pick.value));
    auto pos = backward_tilted_estimate(
        multilevel(), 1.5, 1.0, [](const Snapshot& s, std::size_t u) { return s.entries[u].position; }, ro, 4);
    double se = std::hypot(pos.full_sum.std_error, pos.size_biased_pick.std_error);
    CHECK(std::abs(pos.full_sum.value - pos.size_biased_pick.value) < 4 * se);
    // Under the tilt the spine has mean t * kappa'(omega).
    CHECK(std::abs(pos.full_sum.value - cumulant_derivative(multilevel(), 1.5, 3)) < 4 * pos.full_sum.std_error);
}

TEST_CASE("test functions") {
    CHECK(TestFunction::exponential(2)(0.5) == doctest::Approx(std::exp(1.0)));
    CHECK(TestFunction::above(-1)(-0.5) == 1.0);
    CHECK(TestFunction::below(-1)(-0.5) == 0.0);
    CHECK(TestFunction::poly_exp(2, 1)(2.0) == doctest::Approx(4 * std::exp(2.0)));
    CHECK(TestFunction::exponential(1).closed_form());
    CHECK_FALSE(TestFunction::above(0).closed_form());
}

TEST_CASE("many-to-one panel on the point mass") {
    ReplicaOptions ro;
    ro.level = 3;
    ro.replicas = 4000;
    for (auto f : {TestFunction::exponential(0.5), TestFunction::exponential(3.0), TestFunction::above(-1.0)}) {
        auto rep = many_to_one_check(halves(), 2.0, f, 1.0, ro, 31);
        CHECK(std::abs(rep.tests.at(0).statistic) < 4.0);
    }
}

TEST_CASE("spine CSV has three sections") {
    ForwardOptions fo;
    fo.level = 2;
    auto out = forward_decorated(multilevel(), 1.0, 1.0, fo, 2);
    std::ostringstream os;
    write_spine_csv(os, out);
    std::string t = os.str();
    CHECK(t.rfind("time,xi,lambda\r\n", 0) == 0);
    CHECK(t.find("\r\n\r\ntime,y,i,partners\r\n") != std::string::npos);
    CHECK(t.find("\r\n\r\ntime,label,position,level_mask,k_counters\r\n") != std::string::npos);
}
