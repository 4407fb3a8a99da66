#include <doctest.h>

#include <sstream>

#include "growfrag/errors.hpp"
#include "growfrag/scenario.hpp"

using namespace growfrag;

namespace {

Scenario from_text(const std::string& text) {
    std::istringstream in(text);
    return scenario_from_map(parse_scenario_text(in));
}

}  // namespace

TEST_CASE("a full scenario parses") {
    auto s = from_text(
        "# comment\n"
        "model.a = 0.1\n"
        "model.sigma = 0.5\n"
        "model.nu.kind = finite_atomic\n"
        "model.nu.atoms = 0.7: 0.6,0.3,0.08 ; 0.5:0.5,0.2\n"
        "model.ladder = \"0,1,2,3\"\n"
        "run.omega = auto\n"
        "run.omegas = 1, auto\n"
        "run.t_grid = 0.5,1,2,4\n"
        "run.replicas = 100\n"
        "run.barrier = 1,2\n"
        "run.seed = 18446744073709551615\n");
    CHECK(s.a == 0.1);
    CHECK(s.ladder.size() == 4);
    CHECK(s.resolved_level() == 3);
    CHECK(!s.omega);
    CHECK(s.resolved_omegas().size() == 2);
    CHECK(s.resolved_omega() == doctest::Approx(omega_bar(s.model())));
    CHECK(s.seed == 18446744073709551615ULL);
    CHECK(s.barrier_a == std::vector<double>{1, 2});
    REQUIRE(std::get_if<FiniteAtomic>(&s.nu));
    CHECK(std::get<FiniteAtomic>(s.nu).atoms.size() == 2);
}

TEST_CASE("invalid scenarios are configuration errors") {
    const char* bad[] = {
        "model.nu.kind = point_mass\n",
        "model.nu.kind = point_mass\nmodel.nu.p = 0.5,0.6\n",
        "model.ladder = 0,2,1\n",
        "run.t_grid = 1,0.5\n",
        "run.replicas = lots\n",
        "unknown.key = 1\n",
        "model.nu.kind = binary_conservative\nmodel.nu.c = 1\nmodel.nu.beta = 1.5\nrun.omega = 0.3\n",
        "model.nu.kind = binary_conservative\nmodel.nu.c = 1\nmodel.nu.beta = 2.5\nrun.omega = 1\n",
        "model.nu.kind = point_mass\nmodel.nu.p = 0.5,0.5\nrun.level = 4\n",
        "just text\n",
    };
    for (const char* text : bad) CHECK_THROWS_AS(from_text(text), ConfigError);
}
