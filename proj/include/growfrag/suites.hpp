#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "growfrag/martingales.hpp"
#include "growfrag/scenario.hpp"
#include "growfrag/stats.hpp"

namespace growfrag {

// A suite passes when at most one test fails and a single rerun on a fresh
// seed passes fully. The rerun, if any, is attached under details["rerun"].
Report with_rerun_policy(const std::function<Report(std::uint64_t)>& suite, std::uint64_t seed);
bool policy_pass(const Report& r);

// W(omega, t) = 1 and dW(omega, t) = 0 in mean on the omega x t grid; with
// barrier values, dW_a = a in mean at meshes h and h/2, plus a bias check.
Report martingale_suite(const Scenario& sc, unsigned workers, std::uint64_t seed);

Report many_to_one_suite(const Scenario& sc, unsigned workers, std::uint64_t seed);

// Forward/backward panel under the rerun policy plus the perturbed-drift control.
Report spine_suite(const Scenario& sc, unsigned workers, std::uint64_t seed);

struct DerivativeRun {
    double omega_bar;
    double omega_hi;
    ConvergenceReport w_bar;
    ConvergenceReport dw_bar;
    ConvergenceReport dw_hi;
    Report report;
};
DerivativeRun derivative_suite(const Scenario& sc, unsigned workers, std::uint64_t seed);

// One trace per requested omega for each replica.
std::vector<std::vector<MartingaleTrace>> simulate_traces(const Scenario& sc, const std::vector<TraceRequest>& req,
                                                          const std::optional<BarrierSpec>& barrier, unsigned workers,
                                                          std::uint64_t seed);

}  // namespace growfrag
