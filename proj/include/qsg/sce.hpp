#pragma once

#include <cstdint>
#include <vector>

#include "qsg/config.hpp"
#include "qsg/ensemble.hpp"

namespace qsg {

// Solution of W_a = Q_a exp[sum_q q sum_{b_1..b_{q-1}} g_q(c_q Phi_{a b_1..b_{q-1}}) W_{b_1}..W_{b_{q-1}}].
struct SceSolution {
    enum class Method : int { reference = 0, fast = 1 };
    std::vector<cplx> w;
    double residual_inf = 0.0;  // max_a |W_a - Q_a exp(exponent(a))| over the full sum
    int sweeps = 0;
    Method method = Method::fast;
};

inline constexpr std::uint64_t kDefaultSceWorkBudget = std::uint64_t{1} << 26;

// Sequential solve in ascending (rank, lex) order on D over the bar-closed
// predecessor sets; cost O(|A|^{q_max}). Guarded by a work budget.
SceSolution solve_reference(const BasisTables& t, const Ensemble& e,
                            std::uint64_t work_budget = kDefaultSceWorkBudget);

// Rank-synchronous fixed-point iteration W <- T(W) from W = Q. The exponent is
// evaluated for all configurations at once as an XOR convolution, with
// A0-pinning and bar anti-symmetry re-imposed after each sweep; exactly p
// sweeps settle all ranks, then the residual is verified post hoc.
SceSolution solve_fast(const BasisTables& t, const Ensemble& e);

struct MomentReport {
    double v_p = 0.0;
    double v_p_imag_leak = 0.0;
    double second_moment = 0.0;  // equals v_p^2 in the infinite-size limit
    std::vector<double> per_q;   // per_q[q-1] = contribution of the q-body term
};

MomentReport compute_moments(const SceSolution& sol, const BasisTables& t, const Ensemble& e);

// Convenience: build tables, solve (fast), return V_p.
double vp_value(int p, const Ensemble& e, std::span<const double> gamma,
                std::span<const double> beta);

}  // namespace qsg
