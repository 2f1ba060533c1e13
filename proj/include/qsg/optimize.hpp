#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qsg/ensemble.hpp"

namespace qsg {

struct OptimizerSettings {
    int starts = 16;             // multistart count, drawn from a seeded low-discrepancy sequence
    int max_iterations = 4000;   // per start
    double value_tol = 1e-8;
    double simplex_scale = 0.25;
    bool pin_gamma_zero = false;  // optimize with all gamma fixed at 0
    std::vector<std::vector<double>> warm_starts;  // extra full-dimension starts
};

struct OptimizeResult {
    std::vector<double> gamma, beta;
    double best_value = 0.0;
    int evaluations = 0;
    std::vector<std::pair<std::vector<double>, double>> trace;  // (params, value) per evaluation
    int failed_evaluations = 0;
};

// Derivative-free maximization of f over R^dim: multistart Nelder-Mead with
// starts from a seeded Halton sequence in [-1,1]^dim. Deterministic given seed.
OptimizeResult maximize(const std::function<double(std::span<const double>)>& f, int dim,
                        const OptimizerSettings& settings, std::uint64_t seed);

// Maximize V_p over (gamma, beta) in R^{2p}.
OptimizeResult optimize_vp(int p, const Ensemble& e, const OptimizerSettings& settings,
                           std::uint64_t seed);

}  // namespace qsg
