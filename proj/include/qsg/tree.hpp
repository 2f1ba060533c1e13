#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qsg/config.hpp"

namespace qsg {

// Gamma_j for j in {-p..p}: Gamma_j = gamma_j (j>0), Gamma_0 = 0, Gamma_{-j} = -gamma_j.
struct GammaVector {
    int p = 0;
    std::vector<double> v;  // size 2p+1, entry j stored at index j+p

    static GammaVector from_gamma(std::span<const double> gamma);
    double at(int j) const { return v[j + p]; }
};

// State of the large-girth regular-hypergraph iteration in the d->infty limit.
// g_matrices[m] holds G^{(m)}_{j,k} = sum_{a in B} a_j a_k f(a) H^{(m)}(a),
// a (2p+1)x(2p+1) symmetric complex matrix (indices j,k in {-p..p}).
struct TreeIterationState {
    int p = 0;
    int q = 0;
    GammaVector gv;
    std::vector<double> beta;
    std::vector<std::vector<cplx>> g_matrices;  // p+1 matrices, row-major (2p+1)^2

    cplx g_entry(int m, int j, int k) const {
        const int w = 2 * p + 1;
        return g_matrices[m][(j + p) * w + (k + p)];
    }
    // H^{(m)}(a) for a (2p+1)-bit mask (bit j+p holds a_j, bit 1 = spin -1);
    // H^{(0)} == 1, higher m evaluated through G^{(m-1)}.
    cplx h_value(int m, std::uint32_t bmask) const;
};

// Weight f(a) of a (2p+1)-bit configuration: 1/2 times the 2p bracket factors
// <a|e^{+-i beta X}|a'> chained through a_1..a_p, a_0, a_{-p}..a_{-1}.
cplx f_weight(std::uint32_t bmask, int p, std::span<const double> beta);

TreeIterationState iterate_H(int p, int q, const GammaVector& gv, std::span<const double> beta);

// nu = (i/sqrt(2q)) sum_j Gamma_j (G^{(p)}_{0,j})^q; real up to a checked leak.
double nu_value(const TreeIterationState& st);

// Convenience: full pipeline nu_p^{[q]} at (gamma, beta).
double nu_p(int p, int q, std::span<const double> gamma, std::span<const double> beta);

// |V_p(pure Gaussian q-spin; gamma, beta) - sqrt(2) nu_p^{[q]}(sqrt(q) gamma, beta)|.
double check_theorem3(int p, int q, std::span<const double> gamma, std::span<const double> beta);

}  // namespace qsg
