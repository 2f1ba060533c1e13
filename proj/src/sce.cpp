#include "qsg/sce.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsg/errors.hpp"
#include "qsg/hypercube.hpp"
#include "qsg/parallel.hpp"

namespace qsg {

namespace {

// Spectra of G_q(x) = g_q(c_q Phi_x), one per active q.
struct GSpectra {
    std::vector<int> qs;                       // active q values (c_q != 0)
    std::vector<std::vector<cplx>> g_hat;      // wht of g_q(c_q Phi)
    std::vector<std::vector<cplx>> gp_hat;     // wht of g_q'(c_q Phi)
};

GSpectra make_spectra(const BasisTables& t, const Ensemble& e, bool with_derivative) {
    GSpectra s;
    const std::size_t n = t.size();
    for (int q = 1; q <= e.q_max; ++q) {
        if (e.c[q - 1] == 0.0) continue;
        s.qs.push_back(q);
        std::vector<cplx> g(n), gp;
        if (with_derivative) gp.resize(n);
        const double cq = e.c[q - 1];
        for (std::size_t x = 0; x < n; ++x) {
            g[x] = g_value(e, q, cq * t.phi[x]);
            if (with_derivative) gp[x] = g_derivative(e, q, cq * t.phi[x]);
        }
        wht_inplace(g);
        s.g_hat.push_back(std::move(g));
        if (with_derivative) {
            wht_inplace(gp);
            s.gp_hat.push_back(std::move(gp));
        }
    }
    return s;
}

// exponent(a) = sum_q q (G_q * W^{*(q-1)})(a) for all a, via the transform.
std::vector<cplx> full_exponent(const std::vector<cplx>& w, const GSpectra& s) {
    const std::size_t n = w.size();
    std::vector<cplx> w_hat(w);
    wht_inplace(w_hat);
    std::vector<cplx> acc(n, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < s.qs.size(); ++i) {
        const int q = s.qs[i];
        parallel_for_chunks(0, n, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) {
                cplx pw{1.0, 0.0};
                for (int r = 0; r < q - 1; ++r) pw *= w_hat[k];
                acc[k] += static_cast<double>(q) * s.g_hat[i][k] * pw;
            }
        });
    }
    wht_inplace(acc);
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& z : acc) z *= scale;
    return acc;
}

double residual_against(const std::vector<cplx>& w, const BasisTables& t, const GSpectra& s) {
    auto expo = full_exponent(w, s);
    double worst = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a)
        worst = std::max(worst, std::abs(w[a] - t.q_amp[a] * std::exp(expo[a])));
    return worst;
}

}  // namespace

SceSolution solve_reference(const BasisTables& t, const Ensemble& e, std::uint64_t work_budget) {
    const std::size_t n = t.size();
    // cost ~ |A|^{q_max} per D element; refuse with an estimate when over budget
    long double cost = static_cast<long double>(t.d_size());
    for (int i = 0; i < e.q_max - 1; ++i) cost *= static_cast<long double>(n);
    if (cost > static_cast<long double>(work_budget))
        throw capacity_error("solve_reference: estimated ~" + std::to_string(static_cast<double>(cost)) +
                             " inner terms exceeds the work budget of " + std::to_string(work_budget) +
                             "; use solve_fast or raise --budget-ops");

    SceSolution sol;
    sol.method = SceSolution::Method::reference;
    sol.w.assign(n, cplx{0.0, 0.0});
    std::vector<std::uint32_t> solved;  // bar-closed predecessor set
    solved.reserve(n);
    for (std::size_t a = 0; a < n; ++a)
        if (t.partition[a] == Partition::A0) {
            sol.w[a] = t.q_amp[a];
            solved.push_back(static_cast<std::uint32_t>(a));
        }

    for (std::uint32_t a : t.order_index) {
        cplx expo{0.0, 0.0};
        for (int q = 1; q <= e.q_max; ++q) {
            const double cq = e.c[q - 1];
            if (cq == 0.0) continue;
            // sum over (q-1)-tuples from the solved set, tracking the running product
            cplx sum{0.0, 0.0};
            const int depth = q - 1;
            if (depth == 0) {
                sum = g_value(e, q, cq * t.phi[a]);
            } else {
                std::vector<std::size_t> idx(depth, 0);
                std::vector<std::uint32_t> prod(depth + 1);
                std::vector<cplx> wprod(depth + 1);
                prod[0] = a;
                wprod[0] = cplx{1.0, 0.0};
                int pos = 0;  // next tuple position whose product needs recomputing
                while (true) {
                    for (; pos < depth; ++pos) {
                        std::uint32_t b = solved[idx[pos]];
                        prod[pos + 1] = prod[pos] ^ b;
                        wprod[pos + 1] = wprod[pos] * sol.w[b];
                    }
                    sum += g_value(e, q, cq * t.phi[prod[depth]]) * wprod[depth];
                    int k = depth - 1;
                    while (k >= 0 && idx[k] + 1 == solved.size()) {
                        idx[k] = 0;
                        --k;
                    }
                    if (k < 0) break;
                    ++idx[k];
                    pos = k;
                }
            }
            expo += static_cast<double>(q) * sum;
        }
        sol.w[a] = t.q_amp[a] * std::exp(expo);
        const std::uint32_t ab = t.bar[a];
        sol.w[ab] = -sol.w[a];
        solved.push_back(a);
        solved.push_back(ab);
        ++sol.sweeps;  // one sequential step per D element
    }

    auto spectra = make_spectra(t, e, false);
    sol.residual_inf = residual_against(sol.w, t, spectra);
    return sol;
}

SceSolution solve_fast(const BasisTables& t, const Ensemble& e) {
    const std::size_t n = t.size();
    auto spectra = make_spectra(t, e, false);

    SceSolution sol;
    sol.method = SceSolution::Method::fast;
    sol.w.assign(t.q_amp.begin(), t.q_amp.end());

    const double tol = 1e-12;
    const int max_sweeps = t.p + 2;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        auto expo = full_exponent(sol.w, spectra);
        parallel_for_chunks(0, n, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t a = lo; a < hi; ++a) sol.w[a] = t.q_amp[a] * std::exp(expo[a]);
        });
        // re-impose A0 pinning and bar anti-symmetry
        for (std::size_t a = 0; a < n; ++a)
            if (t.partition[a] == Partition::A0) sol.w[a] = t.q_amp[a];
        for (std::uint32_t d : t.order_index) {
            const std::uint32_t db = t.bar[d];
            cplx v = 0.5 * (sol.w[d] - sol.w[db]);
            sol.w[d] = v;
            sol.w[db] = -v;
        }
        sol.sweeps = sweep;
        if (sweep >= t.p) {
            sol.residual_inf = residual_against(sol.w, t, spectra);
            if (sol.residual_inf < tol) return sol;
        }
    }
    throw numerical_error("solve_fast: residual " + std::to_string(sol.residual_inf) +
                          " above tolerance after " + std::to_string(max_sweeps) +
                          " sweeps (non-even g or corrupted tables?)");
}

MomentReport compute_moments(const SceSolution& sol, const BasisTables& t, const Ensemble& e) {
    const std::size_t n = t.size();
    if (sol.w.size() != n) throw usage_error("compute_moments: solution/table size mismatch");
    auto spectra = make_spectra(t, e, true);
    std::vector<cplx> w_hat(sol.w);
    wht_inplace(w_hat);

    MomentReport rep;
    rep.per_q.assign(e.q_max, 0.0);
    cplx total{0.0, 0.0};
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < spectra.qs.size(); ++i) {
        const int q = spectra.qs[i];
        // sum_x G_q'(x) M_q(x) = (1/|A|) sum_k Ghat_q'(k) What(k)^q, compensated
        cplx sum{0.0, 0.0}, comp{0.0, 0.0};
        for (std::size_t k = 0; k < n; ++k) {
            cplx pw{1.0, 0.0};
            for (int r = 0; r < q; ++r) pw *= w_hat[k];
            cplx term = spectra.gp_hat[i][k] * pw - comp;
            cplx next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
        cplx contrib = cplx{0.0, -1.0} * e.c[q - 1] * sum * scale;
        rep.per_q[q - 1] = contrib.real();
        total += contrib;
    }
    rep.v_p = total.real();
    rep.v_p_imag_leak = std::abs(total.imag());
    rep.second_moment = rep.v_p * rep.v_p;
    if (rep.v_p_imag_leak > 1e-8)
        throw numerical_error("compute_moments: imaginary leak " +
                              std::to_string(rep.v_p_imag_leak) + " exceeds 1e-8");
    return rep;
}

double vp_value(int p, const Ensemble& e, std::span<const double> gamma,
                std::span<const double> beta) {
    auto t = build_tables(p, gamma, beta);
    auto sol = solve_fast(t, e);
    return compute_moments(sol, t, e).v_p;
}

}  // namespace qsg
