#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kummer/tolerances.hpp"

namespace kummer {

using OdeRhs = std::function<void(double t, const std::vector<double>& y, std::vector<double>& dydt)>;

struct OdeOptions {
    double abs_tol = tol::ode_abs;
    double rel_tol = tol::ode_rel;
    double h_init = 0.0;   // 0 selects an automatic first step
    double h_max = 0.0;    // 0 means unbounded
    long max_steps = 5'000'000;
};

struct OdeResult {
    std::vector<double> t;                 // output times actually reached
    std::vector<std::vector<double>> y;    // state at each output time
    bool completed = true;
    std::string status = "ok";
    long accepted_steps = 0;
    long rejected_steps = 0;
};

// Adaptive Dormand-Prince 5(4) integration from (t0, y0) that lands exactly on every
// requested output time (ascending, all >= t0). A step whose stages produce non-finite
// values is rejected and retried smaller; if the step size collapses the run stops with
// status "step size underflow" and returns the partial trajectory.
OdeResult integrate_dp45(const OdeRhs& rhs, const std::vector<double>& y0, double t0,
                         const std::vector<double>& times, const OdeOptions& options = {});

} // namespace kummer
