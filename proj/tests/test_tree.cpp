#include <cmath>
#include <random>

#include "doctest.h"
#include "qsg/errors.hpp"
#include "qsg/tree.hpp"

using namespace qsg;

namespace {
constexpr double kPi = 3.14159265358979323846;

// hat contraction: (2p+1)-bit string -> 2p-bit A-config
std::uint32_t hat_of(std::uint32_t bmask, int p) {
    auto bs = [&](int j) { return (bmask >> (j + p)) & 1u ? -1 : 1; };
    std::uint32_t mask = 0;
    for (int r = 1; r <= p; ++r) {
        int fwd = (r < p) ? bs(r) * bs(r + 1) : bs(p) * bs(0);
        int bwd = (r < p) ? bs(-r) * bs(-(r + 1)) : bs(-p) * bs(0);
        if (fwd < 0) mask |= 1u << (r - 1);
        if (bwd < 0) mask |= 1u << (2 * p - r);
    }
    return mask;
}
}  // namespace

#include "qsg/config.hpp"

TEST_CASE("f at p=1 on the all-plus string is cos^2(beta)/2") {
    double b = 0.37;
    CHECK(std::abs(f_weight(0u, 1, std::vector<double>{b}) -
                   cplx{0.5 * std::cos(b) * std::cos(b), 0.0}) < 1e-15);
}

TEST_CASE("f sums to one, is even, and contracts to Q/2") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.2, 1.2);
    for (int p : {1, 2, 3}) {
        std::vector<double> beta(p), gamma(p);
        for (auto& x : beta) x = u(rng);
        for (auto& x : gamma) x = u(rng);
        auto t = build_tables(p, gamma, beta);
        const std::uint32_t nb = 1u << (2 * p + 1);
        cplx total{0.0, 0.0};
        for (std::uint32_t a = 0; a < nb; ++a) {
            cplx f = f_weight(a, p, beta);
            total += f;
            CHECK(std::abs(f - f_weight(~a & (nb - 1), p, beta)) < 1e-15);  // f(a) = f(-a)
            CHECK(std::abs(f - 0.5 * t.q_amp[hat_of(a, p)]) < 1e-14);
        }
        CHECK(std::abs(total - cplx{1.0, 0.0}) < 1e-12);
    }
}

TEST_CASE("H^(0) == 1 and G^(0) is the plain f-correlation matrix") {
    int p = 2, q = 3;
    std::vector<double> gamma{0.3, -0.4}, beta{0.2, 0.6};
    auto gv = GammaVector::from_gamma(gamma);
    CHECK(gv.at(0) == 0.0);
    CHECK(gv.at(-2) == -gv.at(2));
    auto st = iterate_H(p, q, gv, beta);
    CHECK(st.h_value(0, 5u) == cplx{1.0, 0.0});
    const int w = 2 * p + 1;
    const std::uint32_t nb = 1u << w;
    for (int j = -p; j <= p; ++j)
        for (int k = -p; k <= p; ++k) {
            cplx direct{0.0, 0.0};
            for (std::uint32_t a = 0; a < nb; ++a) {
                int aj = (a >> (j + p)) & 1u ? -1 : 1;
                int ak = (a >> (k + p)) & 1u ? -1 : 1;
                direct += static_cast<double>(aj * ak) * f_weight(a, p, beta);
            }
            CHECK(std::abs(direct - st.g_entry(0, j, k)) < 1e-12);
        }
}

TEST_CASE("H is symmetric under global flip, independent of a_0, constant at gamma=0") {
    int p = 2, q = 2;
    std::vector<double> gamma{0.5, 0.1}, beta{0.3, 0.7};
    auto st = iterate_H(p, q, GammaVector::from_gamma(gamma), beta);
    const std::uint32_t nb = 1u << (2 * p + 1);
    for (std::uint32_t a = 0; a < nb; ++a) {
        for (int m = 1; m <= p; ++m) {
            CHECK(std::abs(st.h_value(m, a) - st.h_value(m, ~a & (nb - 1))) < 1e-13);
            CHECK(std::abs(st.h_value(m, a) - st.h_value(m, a ^ (1u << p))) < 1e-13);  // flip a_0
        }
    }
    std::vector<double> zero(p, 0.0);
    auto st0 = iterate_H(p, q, GammaVector::from_gamma(zero), beta);
    for (std::uint32_t a = 0; a < nb; ++a)
        for (int m = 0; m <= p; ++m) CHECK(st0.h_value(m, a) == cplx{1.0, 0.0});
}

TEST_CASE("fixed point: one extra step leaves H unchanged; G rows/cols agree off 0") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int p : {1, 2, 3}) {
        for (int q : {2, 3}) {
            std::vector<double> gamma(p), beta(p);
            for (auto& x : gamma) x = u(rng);
            for (auto& x : beta) x = u(rng);
            auto st = iterate_H(p, q, GammaVector::from_gamma(gamma), beta);
            // H^{(p+1)} from G^{(p)} must equal H^{(p)} from G^{(p-1)}
            const std::uint32_t nb = 1u << (2 * p + 1);
            for (std::uint32_t a = 0; a < nb; ++a)
                CHECK(std::abs(st.h_value(p + 1, a) - st.h_value(p, a)) < 1e-12);
            for (int j = -p; j <= p; ++j)
                for (int k = -p; k <= p; ++k)
                    if (j != 0 && k != 0)
                        CHECK(std::abs(st.g_entry(p, j, k) - st.g_entry(p - 1, j, k)) < 1e-12);
        }
    }
}

TEST_CASE("nu closed form at p=1, q=2 and trivial zeros") {
    double b = kPi / 8;
    for (double gp : {0.2, 0.4, 0.75}) {
        double expect = gp * std::sin(4 * b) * std::exp(-2 * gp * gp);
        CHECK(nu_p(1, 2, std::vector<double>{gp}, std::vector<double>{b}) ==
              doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(nu_p(2, 3, std::vector<double>{0.0, 0.0}, std::vector<double>{0.3, 0.4}) == 0.0);
    CHECK(std::abs(nu_p(2, 2, std::vector<double>{0.3, 0.4}, std::vector<double>{0.0, 0.0})) <
          1e-14);
}

TEST_CASE("theorem-3 identity at pinned and random parameters") {
    CHECK(check_theorem3(1, 2, std::vector<double>{0.25}, std::vector<double>{kPi / 8}) < 1e-10);
    CHECK(check_theorem3(1, 2, std::vector<double>{0.0}, std::vector<double>{0.4}) == 0.0);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> gamma{u(rng), u(rng)}, beta{u(rng), u(rng)};
    CHECK(check_theorem3(2, 4, gamma, beta) < 1e-9);
}
