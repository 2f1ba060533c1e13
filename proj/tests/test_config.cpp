#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qsg/config.hpp"
#include "qsg/errors.hpp"

using namespace qsg;

namespace {

std::uint32_t mask_from_tuple(const std::vector<int>& tuple) {
    // tuple = (a_1..a_p, a_{-p}..a_{-1}); slot t -> bit t-1; -1 -> bit 1
    std::uint32_t m = 0;
    for (std::size_t t = 0; t < tuple.size(); ++t)
        if (tuple[t] < 0) m |= 1u << t;
    return m;
}

// O(p^2) star-product evaluation of Phi, independent of the table recursion.
double phi_brute(std::uint32_t mask, int p, const std::vector<double>& gamma) {
    double phi = 0.0;
    for (int r = 1; r <= p; ++r) {
        int fwd = 1, bwd = 1;
        for (int j = r; j <= p; ++j) fwd *= spin_at(mask, j, p);
        for (int j = r; j <= p; ++j) bwd *= spin_at(mask, -j, p);
        phi += gamma[r - 1] * (fwd - bwd);
    }
    return phi;
}

}  // namespace

TEST_CASE("p=1 Q and Phi match direct substitution") {
    const double g = 0.7, b = 0.35;
    auto t = build_tables(1, std::vector<double>{g}, std::vector<double>{b});
    const double c = std::cos(b), s = std::sin(b);
    // (+,+) = mask 0, (+,-) = a_{-1} negative = bit 1 -> mask 2,
    // (-,+) = bit 0 -> mask 1, (-,-) = mask 3
    CHECK(t.q_amp[0] == cplx{c * c, 0.0});
    CHECK(t.q_amp[3] == cplx{s * s, 0.0});
    CHECK(t.q_amp[2] == cplx{0.0, -s * c});
    CHECK(t.q_amp[1] == cplx{0.0, s * c});
    CHECK(t.phi[0] == 0.0);
    CHECK(t.phi[3] == 0.0);
    CHECK(t.phi[2] == doctest::Approx(2 * g));
    CHECK(t.phi[1] == doctest::Approx(-2 * g));
}

TEST_CASE("xor_product is the bitwise spin product") {
    // (+,-) * (+,-) = (+,+)
    CHECK(xor_product({2u}, {2u}).mask == 0u);
    // (+,-) * (-,+) = (-,-)
    CHECK(xor_product({2u}, {1u}).mask == 3u);
    SpinConfig a{5u};
    CHECK(xor_product(a, a).mask == 0u);
}

TEST_CASE("mirror strings are rank 0 and land in A0") {
    const int p = 3;
    std::vector<int> tup = {1, -1, 1, 1, -1, 1};  // (a1,a2,a3,a3,a2,a1)
    auto m = mask_from_tuple(tup);
    CHECK(rank_of(m, p) == 0);
    CHECK(partition_of(m, p) == Partition::A0);
}

TEST_CASE("rank, bar and D membership on small cases") {
    // p=1: bar((+,-)) = (-,+)
    CHECK(bar_of(2u, 1) == 1u);
    CHECK(bar_of(1u, 1) == 2u);
    // p=2: (+,+,-,+) has a_2 != a_{-2} -> rank 2
    auto m = mask_from_tuple({1, 1, -1, 1});
    CHECK(rank_of(m, 2) == 2);
    // D for p=1 is exactly {(+,-)}: forward-bit product +1
    int d_count = 0;
    for (std::uint32_t x = 0; x < 4; ++x)
        if (partition_of(x, 1) == Partition::D) {
            ++d_count;
            CHECK(x == 2u);
        }
    CHECK(d_count == 1);
}

TEST_CASE("partition completeness and sizes") {
    for (int p = 1; p <= 4; ++p) {
        std::vector<double> ang(p, 0.1);
        auto t = build_tables(p, ang, ang);
        std::size_t a0 = 0, d = 0, dbar = 0;
        for (std::size_t m = 0; m < t.size(); ++m) {
            switch (t.partition[m]) {
                case Partition::A0: ++a0; break;
                case Partition::D: ++d; break;
                case Partition::Dbar: ++dbar; break;
            }
            CHECK(t.rank[m] == rank_of(static_cast<std::uint32_t>(m), p));
            CHECK(bar_of(bar_of(static_cast<std::uint32_t>(m), p), p) == m);
            CHECK(t.rank[t.bar[m]] == t.rank[m]);
        }
        CHECK(a0 == (std::size_t{1} << p));
        CHECK(d == dbar);
        CHECK(d == (t.size() - a0) / 2);
        CHECK(t.order_index.size() == d);
    }
}

TEST_CASE("rank-product law and bar separation, exhaustive") {
    const int p = 3;
    const std::uint32_t n = 1u << (2 * p);
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = 0; b < n; ++b) {
            int ra = rank_of(a, p), rb = rank_of(b, p), rab = rank_of(a ^ b, p);
            CHECK(rab <= std::max(ra, rb));
            if (ra == rb && ra != 0) CHECK(rab < ra);
            if (ra < rb) CHECK(bar_of(a ^ b, p) == (a ^ bar_of(b, p)));
        }
    }
}

TEST_CASE("Q invariants for random angle draws") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
        int p = 1 + static_cast<int>(rng() % 3);
        std::vector<double> gamma(p), beta(p);
        for (auto& v : gamma) v = u(rng);
        for (auto& v : beta) v = u(rng);
        auto t = build_tables(p, gamma, beta);
        double a0_sum = 0.0;
        cplx all_sum{0.0, 0.0};
        for (std::size_t m = 0; m < t.size(); ++m) {
            all_sum += t.q_amp[m];
            if (t.partition[m] == Partition::A0) {
                CHECK(std::abs(t.q_amp[m].imag()) == 0.0);
                CHECK(t.q_amp[m].real() >= 0.0);
                CHECK(t.q_amp[m].real() <= 1.0);
                a0_sum += t.q_amp[m].real();
            } else {
                CHECK(std::abs(t.q_amp[t.bar[m]] + t.q_amp[m]) < 1e-15);
            }
            CHECK(t.phi[m] == doctest::Approx(phi_brute(static_cast<std::uint32_t>(m), p, gamma)).epsilon(1e-12));
        }
        CHECK(a0_sum == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(all_sum - cplx{1.0, 0.0}) < 1e-13);
    }
}

TEST_CASE("beta = 0 gives exact single-config support") {
    auto t = build_tables(2, std::vector<double>{0.3, 0.4}, std::vector<double>{0.0, 0.0});
    for (std::size_t m = 0; m < t.size(); ++m) {
        if (m == 0)
            CHECK(t.q_amp[m] == cplx{1.0, 0.0});
        else
            CHECK(t.q_amp[m] == cplx{0.0, 0.0});
    }
}

TEST_CASE("order on D is rank-then-lex and compare_order rejects non-D input") {
    auto t = build_tables(2, std::vector<double>{0.1, 0.2}, std::vector<double>{0.3, 0.4});
    for (std::size_t k = 1; k < t.order_index.size(); ++k)
        CHECK(compare_order(t.order_index[k - 1], t.order_index[k], 2) < 0);
    // lexical order of the paper: (-1,-1) < (-1,1) < (1,-1) < (1,1)
    CHECK(lex_key(mask_from_tuple({-1, -1, 1, 1}), 2) < lex_key(mask_from_tuple({-1, 1, -1, 1}), 2));
    std::uint32_t a0_mask = 0;  // all +1 is in A0
    CHECK_THROWS_AS(compare_order(a0_mask, t.order_index[0], 2), domain_error);
}

TEST_CASE("capacity guard") {
    std::vector<double> ang(15, 0.1);
    CHECK_THROWS_AS(build_tables(15, ang, ang), capacity_error);
    CHECK_THROWS_AS(build_tables(0, {}, {}), capacity_error);
}

TEST_CASE("binary and json serialization round-trip") {
    auto t = build_tables(2, std::vector<double>{0.25, -0.5}, std::vector<double>{0.4, 0.9});
    std::stringstream ss;
    save_binary(t, ss);
    auto t2 = load_binary(ss);
    CHECK(t2.p == t.p);
    CHECK(t2.gamma == t.gamma);
    CHECK(t2.phi == t.phi);
    CHECK(t2.q_amp == t.q_amp);
    CHECK(t2.bar == t.bar);
    CHECK(t2.order_index == t.order_index);
    auto t3 = tables_from_json(to_json(t));
    CHECK(t3.phi == t.phi);
    CHECK(t3.q_amp == t.q_amp);
    CHECK(t3.order_index == t.order_index);
}
