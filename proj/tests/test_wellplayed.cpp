#include <cmath>
#include <random>

#include "doctest.h"
#include "qsg/errors.hpp"
#include "qsg/sce.hpp"
#include "qsg/wellplayed.hpp"

using namespace qsg;

namespace {
NaturalPolynomial poly_of(std::initializer_list<std::pair<Monomial, cplx>> terms) {
    NaturalPolynomial p;
    for (auto& [m, c] : terms) {
        Monomial key = m;
        std::sort(key.begin(), key.end());
        p.terms[key] += c;
    }
    return p;
}
}  // namespace

TEST_CASE("proper set construction from tables and the toy") {
    auto t = build_tables(2, std::vector<double>{0.3, 0.2}, std::vector<double>{0.4, 0.1});
    auto ps = ProperSet::from_tables(t);
    CHECK(ps.n_elements == 16);
    CHECK(ps.d_order.size() == 6);
    auto toy = ProperSet::toy();
    CHECK(toy.bar_map[1] == 2);
}

TEST_CASE("canonicalize linear and product examples") {
    auto ps = ProperSet::toy();  // ids: 0 = c in A0, 1 = d, 2 = dbar
    // w_d + w_dbar -> tau_d
    auto c1 = canonicalize(poly_of({{{1}, 1.0}, {{2}, 1.0}}), ps);
    REQUIRE(c1.terms.size() == 1);
    CHECK(c1.terms.begin()->first == CanonicalKey{{1}, {}, {}});
    CHECK(std::abs(c1.terms.begin()->second - cplx{1.0, 0.0}) < 1e-15);
    // w_d - w_dbar -> eta_d
    auto c2 = canonicalize(poly_of({{{1}, 1.0}, {{2}, -1.0}}), ps);
    REQUIRE(c2.terms.size() == 1);
    CHECK(c2.terms.begin()->first == CanonicalKey{{}, {1}, {}});
    // w_d * w_c -> (tau_d + eta_d)/2 * nu_c
    auto c3 = canonicalize(poly_of({{{1, 0}, 1.0}}), ps);
    REQUIRE(c3.terms.size() == 2);
    CHECK(std::abs(c3.terms.at(CanonicalKey{{1}, {}, {0}}) - cplx{0.5, 0.0}) < 1e-15);
    CHECK(std::abs(c3.terms.at(CanonicalKey{{}, {1}, {0}}) - cplx{0.5, 0.0}) < 1e-15);
}

TEST_CASE("canonicalize round-trips through natural_form") {
    auto t = build_tables(1, std::vector<double>{0.5}, std::vector<double>{0.3});
    auto ps = ProperSet::from_tables(t);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    NaturalPolynomial p;
    for (int trial = 0; trial < 24; ++trial) {
        Monomial m;
        int deg = 1 + static_cast<int>(rng() % 3);
        for (int i = 0; i < deg; ++i) m.push_back(static_cast<int>(rng() % 4));
        std::sort(m.begin(), m.end());
        p.terms[m] += cplx{u(rng), u(rng)};
    }
    auto back = natural_form(canonicalize(p, ps), ps);
    for (const auto& [mono, coef] : p.terms) {
        auto it = back.terms.find(mono);
        if (it == back.terms.end())
            CHECK(std::abs(coef) < 1e-12);
        else
            CHECK(std::abs(it->second - coef) < 1e-12);
    }
    CHECK(back.terms.size() <= p.terms.size());
}

TEST_CASE("degree cap is enforced") {
    auto ps = ProperSet::toy();
    auto p = poly_of({{{1, 1, 1, 1, 1}, 1.0}});
    CHECK_THROWS_AS(canonicalize(p, ps, 4), capacity_error);
}

TEST_CASE("H_1 with h = lambda^2 and its canonical form") {
    const double g = 0.35;
    auto t = build_tables(1, std::vector<double>{g}, std::vector<double>{0.4});
    auto hq = build_Hq(t, 1, [](double l) { return l * l; });
    // H_1 = 4 g^2 (w_{(+,-)} + w_{(-,+)}) ; masks 2 and 1
    REQUIRE(hq.terms.size() == 2);
    CHECK(std::abs(hq.terms.at({2}) - cplx{4 * g * g, 0.0}) < 1e-14);
    CHECK(std::abs(hq.terms.at({1}) - cplx{4 * g * g, 0.0}) < 1e-14);
    auto ps = ProperSet::from_tables(t);
    auto canon = canonicalize(hq, ps);
    REQUIRE(canon.terms.size() == 1);
    CHECK(canon.terms.begin()->first == CanonicalKey{{2}, {}, {}});  // 4 g^2 tau_d
    CHECK(check_well_played(canon, ps).pass);
}

TEST_CASE("H_q is well-played for even h and fails for a planted odd h") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.2, 0.9);
    for (int p : {1, 2}) {
        std::vector<double> gamma(p), beta(p);
        for (auto& x : gamma) x = u(rng);
        for (auto& x : beta) x = u(rng);
        auto t = build_tables(p, gamma, beta);
        auto ps = ProperSet::from_tables(t);
        for (int q : {2, 3}) {
            auto even = build_Hq(t, q, [](double l) { return -0.5 * l * l; });
            auto rep = check_well_played(canonicalize(even, ps, q), ps);
            CHECK(rep.pass);
            CHECK(rep.max_tau_len >= 1);
            auto cosine = build_Hq(t, q, [](double l) { return std::cos(l) - 1.0; });
            CHECK(check_well_played(canonicalize(cosine, ps, q), ps).pass);
            auto odd = build_Hq(t, q, [](double l) { return l * l * l; });
            auto bad = check_well_played(canonicalize(odd, ps, q), ps);
            CHECK(!bad.pass);
            CHECK(!bad.violations.empty());
        }
    }
}

TEST_CASE("chi and delta identities") {
    auto t = build_tables(2, std::vector<double>{0.45, -0.3}, std::vector<double>{0.2, 0.55});
    auto h = [](double l) { return std::cos(l); };
    const std::uint32_t n = 16;
    // chi with no c-arguments is h(Phi_a)
    for (std::uint32_t a = 0; a < n; ++a)
        CHECK(chi(t, h, a, {}) == doctest::Approx(h(t.phi[a])));
    // delta vanishes when rank(a) >= rank(b); chi vanishes when max rank(c) >= rank(a)
    for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = 0; b < n; ++b) {
            if (t.rank[a] >= t.rank[b]) CHECK(std::abs(delta(t, h, a, b)) < 1e-14);
            std::uint32_t cs[1] = {b};
            if (t.rank[b] >= t.rank[a]) CHECK(std::abs(chi(t, h, a, cs)) < 1e-13);
        }
    // two-argument case, sampled
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        std::uint32_t a = rng() % n, c1 = rng() % n, c2 = rng() % n;
        std::uint32_t cs[2] = {c1, c2};
        if (std::max(t.rank[c1], t.rank[c2]) >= t.rank[a])
            CHECK(std::abs(chi(t, h, a, cs)) < 1e-13);
    }
}

TEST_CASE("generic SCE: toy instance and P = 0") {
    auto ps = ProperSet::toy();
    std::vector<cplx> q_values = {cplx{1.0, 0.0}, cplx{0.0, 0.3}, cplx{0.0, -0.3}};
    CanonicalPolynomial p;
    p.terms[{{1}, {}, {0}}] = cplx{0.5, 0.0};
    auto w = solve_generic_sce(ps, q_values, p);
    CHECK(std::abs(w[1] - cplx{0.0, 0.3} * std::exp(0.5)) < 1e-15);
    CHECK(std::abs(w[2] + w[1]) == 0.0);
    CanonicalPolynomial zero;
    auto w0 = solve_generic_sce(ps, q_values, zero);
    CHECK(w0[0] == q_values[0]);
    CHECK(w0[1] == q_values[1]);
}

TEST_CASE("generic SCE rejects non-well-played input and improper Q") {
    auto ps = ProperSet::toy();
    std::vector<cplx> q_values = {cplx{1.0, 0.0}, cplx{0.0, 0.3}, cplx{0.0, -0.3}};
    CanonicalPolynomial bad;
    bad.terms[{{}, {1}, {0}}] = cplx{1.0, 0.0};  // empty tau word
    CHECK_THROWS_AS(solve_generic_sce(ps, q_values, bad), domain_error);
    CanonicalPolynomial p;
    p.terms[{{1}, {}, {0}}] = cplx{0.5, 0.0};
    std::vector<cplx> bad_q = {cplx{0.9, 0.0}, cplx{0.0, 0.3}, cplx{0.0, -0.3}};
    CHECK_THROWS_AS(solve_generic_sce(ps, bad_q, p), domain_error);
    std::vector<cplx> bad_pair = {cplx{1.0, 0.0}, cplx{0.0, 0.3}, cplx{0.0, 0.3}};
    CHECK_THROWS_AS(solve_generic_sce(ps, bad_pair, p), domain_error);
}

TEST_CASE("natural-route fixed point agrees with the canonical sequential solve") {
    // Lemma-style cross-check: iterate W <- Q exp(dP/dw) from W = Q on the
    // natural form and compare on D.
    const double g = 0.4, b = 0.3;
    auto t = build_tables(1, std::vector<double>{g}, std::vector<double>{b});
    auto ps = ProperSet::from_tables(t);
    auto hq = build_Hq(t, 2, [](double l) { return -0.5 * l * l; });
    auto canon = canonicalize(hq, ps, 2);
    std::vector<cplx> q_values(t.q_amp.begin(), t.q_amp.end());
    auto w_canonical = solve_generic_sce(ps, q_values, canon);

    std::vector<cplx> w(q_values);
    for (int sweep = 0; sweep < 8; ++sweep) {
        std::vector<cplx> next(w.size());
        for (int x = 0; x < ps.n_elements; ++x)
            next[x] = q_values[x] * std::exp(hq.partial_eval(x, w));
        w = next;
        for (int x = 0; x < ps.n_elements; ++x)
            if (ps.label[x] == Partition::A0) w[x] = q_values[x];
        for (int d : ps.d_order) {
            cplx v = 0.5 * (w[d] - w[ps.bar_map[d]]);
            w[d] = v;
            w[ps.bar_map[d]] = -v;
        }
    }
    for (int d : ps.d_order) CHECK(std::abs(w[d] - w_canonical[d]) < 1e-13);

    // and both must match the production SCE solver on D
    auto e = Ensemble::pure_gaussian(2);
    auto sol = solve_fast(t, e);
    for (int d : ps.d_order) CHECK(std::abs(sol.w[d] - w_canonical[d]) < 1e-12);
}

TEST_CASE("finite multinomial sum: toy ladder, constants frozen from the 60-digit oracle") {
    auto ps = ProperSet::toy();
    std::vector<cplx> q_values = {cplx{1.0, 0.0}, cplx{0.0, 0.3}, cplx{0.0, -0.3}};
    NaturalPolynomial p = poly_of({{{0, 1}, 0.5}, {{0, 2}, 0.5}});  // 0.5 (w_d + w_dbar) w_c
    NaturalPolynomial f_eta = poly_of({{{1}, 1.0}, {{2}, -1.0}});
    const cplx limit = 2.0 * cplx{0.0, 0.3} * std::exp(0.5);
    const double expected_err[] = {9.843e-3, 4.934e-3, 2.470e-3, 1.236e-3};
    const std::int64_t ladder[] = {50, 100, 200, 400};
    double prev = 1e9;
    for (int i = 0; i < 4; ++i) {
        cplx v = finite_multinomial_sum(ladder[i], ps, q_values, p, f_eta);
        double err = std::abs(v - limit);
        CHECK(err == doctest::Approx(expected_err[i]).epsilon(0.02));
        CHECK(err < prev);
        prev = err;
    }

    // f == 1 with P = 0 is the plain multinomial theorem: sum == 1 for all n
    NaturalPolynomial one = poly_of({{{}, 1.0}});
    NaturalPolynomial zero;
    for (std::int64_t n : {10, 57, 200})
        CHECK(std::abs(finite_multinomial_sum(n, ps, q_values, zero, one) - cplx{1.0, 0.0}) < 1e-10);

    // f = w_d + w_dbar (a tau word): identically zero at every n
    NaturalPolynomial f_tau = poly_of({{{1}, 1.0}, {{2}, 1.0}});
    for (std::int64_t n : {10, 20, 30})
        CHECK(std::abs(finite_multinomial_sum(n, ps, q_values, p, f_tau)) < 1e-8);
}

TEST_CASE("finite multinomial sum guards") {
    auto ps = ProperSet::toy();
    std::vector<cplx> q_values = {cplx{1.0, 0.0}, cplx{0.0, 0.3}, cplx{0.0, -0.3}};
    NaturalPolynomial p;
    CHECK_THROWS_AS(finite_multinomial_sum(1000000, ps, q_values, p, p, 1000), capacity_error);
}

TEST_CASE("polynomial json round trip") {
    CanonicalPolynomial g;
    g.terms[{{1}, {}, {0}}] = cplx{0.5, -0.25};
    g.terms[{{1, 1}, {1}, {}}] = cplx{0.0, 1.0};
    auto back = canonical_from_json(canonical_to_json(g));
    CHECK(back.terms.size() == g.terms.size());
    for (const auto& [k, v] : g.terms) CHECK(std::abs(back.terms.at(k) - v) < 1e-15);
}
