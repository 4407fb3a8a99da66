#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "growfrag/dislocation.hpp"

namespace growfrag {

// Flat "key = value" configuration. Lines starting with '#' are comments.
//
//   model.a, model.sigma
//   model.nu.kind       none | point_mass | finite_atomic | binary_conservative
//   model.nu.p          point_mass partition, e.g. "0.5,0.5"
//   model.nu.weight     point_mass rate (default 1)
//   model.nu.atoms      finite_atomic, "w:p1,p2,...; w:p1,..."
//   model.nu.c, model.nu.beta
//   model.ladder        "0,1,2,3"
//   run.omega           number or "auto" (omega_bar)
//   run.omegas          omegas for the martingale suite, "auto" allowed
//   run.t_grid, run.replicas, run.level, run.cap, run.barrier, run.mesh, run.seed, run.out
//   derivative.offset   the second omega is omega_bar + offset
//   kappa.q_grid
//   mto.t, mto.q, mto.thresholds
//   spine.t, spine.perturbation
struct Scenario {
    double a = 0.0;
    double sigma = 0.0;
    DislocationMeasure nu = FiniteAtomic{};
    std::vector<double> ladder{0.0};

    std::optional<double> omega;  // empty means omega_bar
    std::vector<std::optional<double>> omegas;
    std::vector<double> t_grid{0.5, 1.0, 2.0};
    std::size_t replicas = 10000;
    int level = -1;  // -1 selects the top of the ladder
    std::size_t cap = 1'000'000;
    std::vector<double> barrier_a;
    double mesh = 0.01;
    std::uint64_t seed = 1;
    std::string out = ".";

    double derivative_offset = 0.5;
    std::vector<double> q_grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    double mto_t = 1.0;
    std::vector<double> mto_q{0.5, 1.0, 2.0};
    std::vector<double> mto_thresholds{-1.0};
    double spine_t = 1.0;
    double spine_perturbation = 0.1;

    DislocationModel model() const;
    int resolved_level() const;
    double resolved_omega() const;
    std::vector<double> resolved_omegas() const;
};

using ScenarioMap = std::map<std::string, std::string>;

ScenarioMap parse_scenario_text(std::istream& in);
// Builds and validates; throws ConfigError on unknown keys or bad values.
Scenario scenario_from_map(const ScenarioMap& m);
Scenario load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace growfrag
