#include "qsg/tree.hpp"

#include <cmath>
#include <string>

#include "qsg/errors.hpp"
#include "qsg/parallel.hpp"
#include "qsg/sce.hpp"

namespace qsg {

GammaVector GammaVector::from_gamma(std::span<const double> gamma) {
    GammaVector g;
    g.p = static_cast<int>(gamma.size());
    g.v.assign(2 * g.p + 1, 0.0);
    for (int r = 1; r <= g.p; ++r) {
        g.v[g.p + r] = gamma[r - 1];
        g.v[g.p - r] = -gamma[r - 1];
    }
    return g;
}

namespace {
inline int bspin(std::uint32_t bmask, int j, int p) {
    return (bmask >> (j + p)) & 1u ? -1 : +1;
}
inline cplx bracket(int x, int y, double b, int sign) {
    // <x|e^{i s b X}|y> = cos b when x = y, else s i sin b
    return x == y ? cplx{std::cos(b), 0.0} : cplx{0.0, sign * std::sin(b)};
}
}  // namespace

cplx f_weight(std::uint32_t bmask, int p, std::span<const double> beta) {
    auto a = [&](int j) { return bspin(bmask, j, p); };
    cplx val{0.5, 0.0};
    for (int r = 1; r < p; ++r) val *= bracket(a(r), a(r + 1), beta[r - 1], +1);
    val *= bracket(a(p), a(0), beta[p - 1], +1);
    val *= bracket(a(0), a(-p), beta[p - 1], -1);
    for (int r = p - 1; r >= 1; --r) val *= bracket(a(-(r + 1)), a(-r), beta[r - 1], -1);
    return val;
}

cplx TreeIterationState::h_value(int m, std::uint32_t bmask) const {
    if (m == 0) return cplx{1.0, 0.0};
    const int w = 2 * p + 1;
    const auto& G = g_matrices[m - 1];
    cplx s{0.0, 0.0};
    for (int j = -p; j <= p; ++j) {
        if (gv.at(j) == 0.0) continue;
        const double uj = gv.at(j) * bspin(bmask, j, p);
        for (int k = -p; k <= p; ++k) {
            if (gv.at(k) == 0.0) continue;
            cplx pw{1.0, 0.0};
            const cplx base = G[(j + p) * w + (k + p)];
            for (int r = 0; r < q - 1; ++r) pw *= base;
            s += uj * gv.at(k) * bspin(bmask, k, p) * pw;
        }
    }
    cplx expo = -0.5 * s;
    if (expo.real() > 700.0)
        throw numerical_error("tree iteration: exp overflow in H^{(m)}");
    return std::exp(expo);
}

TreeIterationState iterate_H(int p, int q, const GammaVector& gv, std::span<const double> beta) {
    if (p < 1) throw capacity_error("iterate_H: p must be >= 1");
    if (p > kDefaultPCap) throw capacity_error("iterate_H: p exceeds the table cap");
    if (gv.p != p || static_cast<int>(beta.size()) != p)
        throw usage_error("iterate_H: angle lengths must match p");

    TreeIterationState st;
    st.p = p;
    st.q = q;
    st.gv = gv;
    st.beta.assign(beta.begin(), beta.end());

    const int w = 2 * p + 1;
    const std::size_t nb = std::size_t{1} << w;
    std::vector<cplx> f(nb);
    for (std::size_t a = 0; a < nb; ++a) f[a] = f_weight(static_cast<std::uint32_t>(a), p, beta);

    // accumulate G^{(m)}_{jk} = sum_a a_j a_k f(a) H^{(m)}(a) with a deterministic
    // per-chunk tree reduction
    auto accumulate_G = [&](int m) {
        auto ranges = chunk_ranges(0, nb, 1u << 12);
        std::vector<std::vector<cplx>> partial(ranges.size(), std::vector<cplx>(w * w, cplx{0, 0}));
        std::vector<std::thread> pool;
        for (std::size_t c = 0; c < ranges.size(); ++c) {
            pool.emplace_back([&, c] {
                auto& acc = partial[c];
                std::vector<double> spins(w);
                for (std::size_t a = ranges[c].first; a < ranges[c].second; ++a) {
                    const auto mask = static_cast<std::uint32_t>(a);
                    cplx fh = f[a] * st.h_value(m, mask);
                    if (fh == cplx{0.0, 0.0}) continue;
                    for (int j = 0; j < w; ++j) spins[j] = bspin(mask, j - p, p);
                    for (int j = 0; j < w; ++j) {
                        const cplx row = spins[j] * fh;
                        for (int k = j; k < w; ++k) acc[j * w + k] += row * spins[k];
                    }
                }
            });
        }
        for (auto& t : pool) t.join();
        std::vector<cplx> G(w * w, cplx{0, 0});
        for (const auto& acc : partial)
            for (int i = 0; i < w * w; ++i) G[i] += acc[i];
        for (int j = 0; j < w; ++j)
            for (int k = 0; k < j; ++k) G[j * w + k] = G[k * w + j];
        return G;
    };

    st.g_matrices.push_back(accumulate_G(0));
    for (int m = 1; m <= p; ++m) st.g_matrices.push_back(accumulate_G(m));
    return st;
}

double nu_value(const TreeIterationState& st) {
    cplx s{0.0, 0.0};
    for (int j = -st.p; j <= st.p; ++j) {
        if (st.gv.at(j) == 0.0) continue;
        cplx vj = st.g_entry(st.p, 0, j);
        cplx pw{1.0, 0.0};
        for (int r = 0; r < st.q; ++r) pw *= vj;
        s += st.gv.at(j) * pw;
    }
    cplx nu = cplx{0.0, 1.0} / std::sqrt(2.0 * st.q) * s;
    if (std::abs(nu.imag()) > 1e-10)
        throw numerical_error("nu_value: imaginary leak " + std::to_string(std::abs(nu.imag())));
    return nu.real();
}

double nu_p(int p, int q, std::span<const double> gamma, std::span<const double> beta) {
    auto gv = GammaVector::from_gamma(gamma);
    auto st = iterate_H(p, q, gv, beta);
    return nu_value(st);
}

double check_theorem3(int p, int q, std::span<const double> gamma, std::span<const double> beta) {
    auto ens = Ensemble::pure_gaussian(q);
    double v = vp_value(p, ens, gamma, beta);
    std::vector<double> scaled(gamma.begin(), gamma.end());
    for (auto& g : scaled) g *= std::sqrt(static_cast<double>(q));
    double nu = nu_p(p, q, scaled, beta);
    return std::abs(v - std::sqrt(2.0) * nu);
}

}  // namespace qsg
