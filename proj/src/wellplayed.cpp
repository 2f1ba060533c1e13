#include "qsg/wellplayed.hpp"

#include <algorithm>
#include <cmath>

#include "bigfloat.hpp"
#include "json.hpp"
#include "qsg/errors.hpp"
#include "qsg/oracle.hpp"

namespace qsg {

ProperSet ProperSet::from_tables(const BasisTables& t) {
    ProperSet ps;
    ps.n_elements = static_cast<int>(t.size());
    ps.label.assign(t.partition.begin(), t.partition.end());
    ps.bar_map.resize(ps.n_elements);
    for (int i = 0; i < ps.n_elements; ++i) ps.bar_map[i] = static_cast<int>(t.bar[i]);
    ps.d_order.assign(t.order_index.begin(), t.order_index.end());
    ps.d_pos.assign(ps.n_elements, -1);
    for (std::size_t k = 0; k < ps.d_order.size(); ++k) ps.d_pos[ps.d_order[k]] = static_cast<int>(k);
    ps.validate();
    return ps;
}

ProperSet ProperSet::toy() {
    ProperSet ps;
    ps.n_elements = 3;
    ps.label = {Partition::A0, Partition::D, Partition::Dbar};
    ps.bar_map = {0, 2, 1};
    ps.d_order = {1};
    ps.d_pos = {-1, 0, -1};
    ps.validate();
    return ps;
}

void ProperSet::validate() const {
    std::size_t nd = 0, ndbar = 0;
    for (int i = 0; i < n_elements; ++i) {
        switch (label[i]) {
            case Partition::A0:
                if (bar_map[i] != i) throw domain_error("ProperSet: bar must fix A0");
                break;
            case Partition::D:
                ++nd;
                if (label[bar_map[i]] != Partition::Dbar)
                    throw domain_error("ProperSet: bar(D) must land in Dbar");
                if (bar_map[bar_map[i]] != i) throw domain_error("ProperSet: bar not an involution");
                if (d_pos[i] < 0) throw domain_error("ProperSet: D element missing from order");
                break;
            case Partition::Dbar:
                ++ndbar;
                break;
        }
    }
    if (nd != ndbar) throw domain_error("ProperSet: |D| != |Dbar|");
    if (d_order.size() != nd) throw domain_error("ProperSet: order list size mismatch");
}

int NaturalPolynomial::degree() const {
    int d = 0;
    for (const auto& [mono, coef] : terms) d = std::max(d, static_cast<int>(mono.size()));
    return d;
}

cplx NaturalPolynomial::eval(std::span<const cplx> omega) const {
    cplx s{0.0, 0.0};
    for (const auto& [mono, coef] : terms) {
        cplx prod = coef;
        for (int v : mono) prod *= omega[v];
        s += prod;
    }
    return s;
}

cplx NaturalPolynomial::partial_eval(int var, std::span<const cplx> omega) const {
    cplx s{0.0, 0.0};
    for (const auto& [mono, coef] : terms) {
        int mult = static_cast<int>(std::count(mono.begin(), mono.end(), var));
        if (mult == 0) continue;
        cplx prod = coef * static_cast<double>(mult);
        bool skipped = false;
        for (int v : mono) {
            if (v == var && !skipped) {
                skipped = true;
                continue;
            }
            prod *= omega[v];
        }
        s += prod;
    }
    return s;
}

int CanonicalPolynomial::degree() const {
    int d = 0;
    for (const auto& [key, coef] : terms)
        d = std::max(d, static_cast<int>(key.tau.size() + key.eta.size() + key.nu.size()));
    return d;
}

namespace {
void prune(std::map<CanonicalKey, cplx>& terms) {
    double scale = 0.0;
    for (const auto& [k, v] : terms) scale = std::max(scale, std::abs(v));
    const double tol = 1e-13 * std::max(1.0, scale);
    for (auto it = terms.begin(); it != terms.end();)
        it = std::abs(it->second) < tol ? terms.erase(it) : std::next(it);
}
void prune(std::map<Monomial, cplx>& terms) {
    double scale = 0.0;
    for (const auto& [k, v] : terms) scale = std::max(scale, std::abs(v));
    const double tol = 1e-13 * std::max(1.0, scale);
    for (auto it = terms.begin(); it != terms.end();)
        it = std::abs(it->second) < tol ? terms.erase(it) : std::next(it);
}
}  // namespace

CanonicalPolynomial canonicalize(const NaturalPolynomial& f, const ProperSet& ps, int degree_cap) {
    if (f.degree() > degree_cap)
        throw capacity_error("canonicalize: degree " + std::to_string(f.degree()) +
                             " exceeds the cap of " + std::to_string(degree_cap));
    CanonicalPolynomial out;
    for (const auto& [mono, coef] : f.terms) {
        // expand each B factor as w_d = (tau_d + eta_d)/2, w_dbar = (tau_d - eta_d)/2
        struct Slot {
            int d_id;     // representative in D (A0: unused)
            bool is_a0;
            double eta_sign;  // +1 for d, -1 for dbar
        };
        std::vector<Slot> slots;
        slots.reserve(mono.size());
        for (int v : mono) {
            if (ps.label[v] == Partition::A0) {
                slots.push_back({v, true, 0.0});
            } else if (ps.label[v] == Partition::D) {
                slots.push_back({v, false, +1.0});
            } else {
                slots.push_back({ps.bar_map[v], false, -1.0});
            }
        }
        const int nb = static_cast<int>(std::count_if(slots.begin(), slots.end(),
                                                      [](const Slot& s) { return !s.is_a0; }));
        const double half_pow = std::pow(0.5, nb);
        // choice bit per B slot: 0 -> tau, 1 -> eta
        for (std::uint32_t choice = 0; choice < (1u << nb); ++choice) {
            CanonicalKey key;
            double sign = 1.0;
            int bslot = 0;
            for (const Slot& s : slots) {
                if (s.is_a0) {
                    key.nu.push_back(s.d_id);
                } else {
                    if ((choice >> bslot) & 1u) {
                        key.eta.push_back(s.d_id);
                        sign *= s.eta_sign;
                    } else {
                        key.tau.push_back(s.d_id);
                    }
                    ++bslot;
                }
            }
            std::sort(key.tau.begin(), key.tau.end());
            std::sort(key.eta.begin(), key.eta.end());
            std::sort(key.nu.begin(), key.nu.end());
            out.terms[key] += coef * half_pow * sign;
        }
    }
    prune(out.terms);
    return out;
}

NaturalPolynomial natural_form(const CanonicalPolynomial& g, const ProperSet& ps) {
    NaturalPolynomial out;
    for (const auto& [key, coef] : g.terms) {
        // tau_d = w_d + w_dbar and eta_d = w_d - w_dbar expand over 2^k choices
        const int nt = static_cast<int>(key.tau.size());
        const int ne = static_cast<int>(key.eta.size());
        for (std::uint32_t choice = 0; choice < (1u << (nt + ne)); ++choice) {
            Monomial mono;
            double sign = 1.0;
            for (int i = 0; i < nt; ++i) {
                bool barred = (choice >> i) & 1u;
                mono.push_back(barred ? ps.bar_map[key.tau[i]] : key.tau[i]);
            }
            for (int i = 0; i < ne; ++i) {
                bool barred = (choice >> (nt + i)) & 1u;
                mono.push_back(barred ? ps.bar_map[key.eta[i]] : key.eta[i]);
                if (barred) sign = -sign;
            }
            for (int v : key.nu) mono.push_back(v);
            std::sort(mono.begin(), mono.end());
            out.terms[mono] += coef * sign;
        }
    }
    prune(out.terms);
    return out;
}

WellPlayedReport check_well_played(const CanonicalPolynomial& g, const ProperSet& ps) {
    WellPlayedReport rep;
    rep.pass = true;
    for (const auto& [key, coef] : g.terms) {
        rep.max_tau_len = std::max(rep.max_tau_len, static_cast<int>(key.tau.size()));
        rep.max_eta_len = std::max(rep.max_eta_len, static_cast<int>(key.eta.size()));
        rep.max_nu_len = std::max(rep.max_nu_len, static_cast<int>(key.nu.size()));
        if (key.tau.empty()) {
            rep.violations.push_back({key, coef, WellPlayedReport::Reason::empty_tau});
            rep.pass = false;
            continue;
        }
        // max(empty eta) is a bottom element, so the condition holds vacuously
        if (key.eta.empty()) continue;
        int max_tau = 0, max_eta = 0;
        for (int v : key.tau) max_tau = std::max(max_tau, ps.d_pos[v]);
        for (int v : key.eta) max_eta = std::max(max_eta, ps.d_pos[v]);
        if (!(max_tau > max_eta)) {
            rep.violations.push_back({key, coef, WellPlayedReport::Reason::max_order});
            rep.pass = false;
        }
    }
    return rep;
}

NaturalPolynomial build_Hq(const BasisTables& t, int q, const std::function<double(double)>& h,
                           std::uint64_t budget) {
    const std::size_t na = t.size();
    long double cost = 1.0L;
    for (int i = 0; i < q; ++i) cost *= static_cast<long double>(na);
    if (cost > static_cast<long double>(budget))
        throw capacity_error("build_Hq: |A|^q = " + std::to_string(static_cast<double>(cost)) +
                             " exceeds the enumeration budget");
    NaturalPolynomial out;
    std::vector<int> idx(q, 0);
    Monomial mono(q);
    for (;;) {
        std::uint32_t prod = 0;
        for (int i = 0; i < q; ++i) prod ^= static_cast<std::uint32_t>(idx[i]);
        double coef = h(t.phi[prod]);
        if (coef != 0.0) {
            for (int i = 0; i < q; ++i) mono[i] = idx[i];
            std::sort(mono.begin(), mono.end());
            out.terms[mono] += coef;
        }
        int k = q - 1;
        while (k >= 0 && idx[k] + 1 == static_cast<int>(na)) idx[k--] = 0;
        if (k < 0) break;
        ++idx[k];
    }
    prune(out.terms);
    return out;
}

double chi(const BasisTables& t, const std::function<double(double)>& h, std::uint32_t a,
           std::span<const std::uint32_t> cs) {
    const int k = static_cast<int>(cs.size());
    double sum = 0.0;
    for (std::uint32_t choice = 0; choice < (1u << k); ++choice) {
        std::uint32_t prod = a;
        int bars = 0;
        for (int i = 0; i < k; ++i) {
            if ((choice >> i) & 1u) {
                prod ^= t.bar[cs[i]];
                ++bars;
            } else {
                prod ^= cs[i];
            }
        }
        sum += (bars % 2 == 0 ? 1.0 : -1.0) * h(t.phi[prod]);
    }
    return sum;
}

double delta(const BasisTables& t, const std::function<double(double)>& h, std::uint32_t a,
             std::uint32_t b) {
    return 0.5 * (h(t.phi[t.bar[a] ^ b]) - h(t.phi[a ^ b]));
}

std::vector<cplx> solve_generic_sce(const ProperSet& ps, std::span<const cplx> q_values,
                                    const CanonicalPolynomial& p_canonical) {
    if (static_cast<int>(q_values.size()) != ps.n_elements)
        throw domain_error("solve_generic_sce: Q size mismatch");
    {
        auto rep = check_well_played(p_canonical, ps);
        if (!rep.pass)
            throw domain_error("solve_generic_sce: P is not well-played (" +
                               std::to_string(rep.violations.size()) + " violating terms)");
    }
    // properness of Q: real non-negative on A0 summing to 1, anti-symmetric on pairs
    double a0_sum = 0.0;
    for (int i = 0; i < ps.n_elements; ++i) {
        if (ps.label[i] == Partition::A0) {
            if (std::abs(q_values[i].imag()) > 1e-12 || q_values[i].real() < -1e-12)
                throw domain_error("solve_generic_sce: Q must be real non-negative on A0");
            a0_sum += q_values[i].real();
        } else if (ps.label[i] == Partition::D) {
            if (std::abs(q_values[i] + q_values[ps.bar_map[i]]) > 1e-12)
                throw domain_error("solve_generic_sce: Q_bar must equal -Q");
        }
    }
    if (std::abs(a0_sum - 1.0) > 1e-10)
        throw domain_error("solve_generic_sce: Q over A0 must sum to 1");

    std::vector<cplx> w(ps.n_elements, cplx{0.0, 0.0});
    for (int i = 0; i < ps.n_elements; ++i)
        if (ps.label[i] == Partition::A0) w[i] = q_values[i];

    for (int x : ps.d_order) {
        // dP/dtau_x at tau = 0, eta = 2W, nu = Q: single-letter tau words only
        cplx expo{0.0, 0.0};
        for (const auto& [key, coef] : p_canonical.terms) {
            if (key.tau.size() != 1 || key.tau[0] != x) continue;
            cplx prod = coef;
            for (int b : key.eta) prod *= 2.0 * w[b];
            for (int c : key.nu) prod *= q_values[c];
            expo += prod;
        }
        w[x] = q_values[x] * std::exp(expo);
        w[ps.bar_map[x]] = -w[x];
    }
    return w;
}

namespace {

cplx multinomial_sum_double(std::int64_t n, const ProperSet& ps, std::span<const cplx> q_values,
                            const NaturalPolynomial& p_n, const NaturalPolynomial& f_n) {
    std::vector<LogComplex> logq(ps.n_elements);
    for (int i = 0; i < ps.n_elements; ++i) logq[i] = LogComplex::from(q_values[i]);
    std::vector<double> lgam(n + 2);
    for (std::int64_t k = 0; k <= n + 1; ++k) lgam[k] = std::lgamma(static_cast<double>(k) + 1.0);

    LogAccumulator total;
    CompositionCursor cc(ps.n_elements, n);
    std::vector<cplx> m(ps.n_elements);
    bool more = true;
    while (more) {
        LogComplex term = LogComplex::from_log(lgam[n], cplx{1.0, 0.0});
        bool dead = false;
        for (int a = 0; a < ps.n_elements; ++a) {
            const std::int64_t cnt = cc.counts[a];
            if (cnt == 0) continue;
            if (logq[a].is_zero()) {
                dead = true;
                break;
            }
            term = term * logq[a].pow_int(static_cast<std::uint64_t>(cnt));
            term.log_mag -= lgam[cnt];
        }
        if (!dead) {
            for (int a = 0; a < ps.n_elements; ++a)
                m[a] = cplx{static_cast<double>(cc.counts[a]) / static_cast<double>(n), 0.0};
            cplx pval = p_n.eval(m);
            term.log_mag += static_cast<double>(n) * pval.real();
            // n*P may carry an imaginary part for complex-coefficient P; fold
            // it into the phase
            cplx rot = std::exp(cplx{0.0, static_cast<double>(n) * pval.imag()});
            total.add_scaled(term, rot * f_n.eval(m));
        }
        more = cc.next();
    }
    return total.value();
}

cplx multinomial_sum_big(std::int64_t n, const ProperSet& ps, std::span<const cplx> q_values,
                         const NaturalPolynomial& p_n, const NaturalPolynomial& f_n,
                         mpfr_prec_t prec) {
    using detail::Big;
    using detail::BigC;
    const int na = ps.n_elements;

    Big factn(prec), scratch(prec), prodm(prec), tmp(prec), expr(prec), cs(prec), sn(prec);
    mpfr_set_ui(factn.get(), 1, MPFR_RNDN);
    for (std::int64_t k = 2; k <= n; ++k) mpfr_mul_si(factn.get(), factn.get(), k, MPFR_RNDN);
    std::vector<std::vector<BigC>> slot(na);
    for (int a = 0; a < na; ++a) {
        slot[a].assign(n + 1, BigC(prec));
        mpfr_set_ui(slot[a][0].re.get(), 1, MPFR_RNDN);
        BigC qa(prec);
        mpfr_set_d(qa.re.get(), q_values[a].real(), MPFR_RNDN);
        mpfr_set_d(qa.im.get(), q_values[a].imag(), MPFR_RNDN);
        for (std::int64_t k = 1; k <= n; ++k) {
            detail::cmul(slot[a][k], slot[a][k - 1], qa, scratch);
            mpfr_div_si(slot[a][k].re.get(), slot[a][k].re.get(), k, MPFR_RNDN);
            mpfr_div_si(slot[a][k].im.get(), slot[a][k].im.get(), k, MPFR_RNDN);
        }
    }

    std::vector<Big> m(na, Big(prec));
    BigC base(prec), next(prec), pval(prec), fval(prec), phase(prec), total(prec);
    CompositionCursor cc(na, n);
    bool more = true;
    while (more) {
        for (int a = 0; a < na; ++a) {
            mpfr_set_si(m[a].get(), cc.counts[a], MPFR_RNDN);
            mpfr_div_si(m[a].get(), m[a].get(), n, MPFR_RNDN);
        }
        auto eval_poly = [&](const NaturalPolynomial& poly, BigC& out) {
            mpfr_set_zero(out.re.get(), 1);
            mpfr_set_zero(out.im.get(), 1);
            for (const auto& [mono, coef] : poly.terms) {
                mpfr_set_ui(prodm.get(), 1, MPFR_RNDN);
                for (int v : mono) mpfr_mul(prodm.get(), prodm.get(), m[v].get(), MPFR_RNDN);
                mpfr_mul_d(tmp.get(), prodm.get(), coef.real(), MPFR_RNDN);
                mpfr_add(out.re.get(), out.re.get(), tmp.get(), MPFR_RNDN);
                mpfr_mul_d(tmp.get(), prodm.get(), coef.imag(), MPFR_RNDN);
                mpfr_add(out.im.get(), out.im.get(), tmp.get(), MPFR_RNDN);
            }
        };
        eval_poly(p_n, pval);
        eval_poly(f_n, fval);
        // exp(n * P) as magnitude times rotation
        mpfr_mul_si(expr.get(), pval.re.get(), n, MPFR_RNDN);
        mpfr_exp(expr.get(), expr.get(), MPFR_RNDN);
        mpfr_mul_si(tmp.get(), pval.im.get(), n, MPFR_RNDN);
        mpfr_sin_cos(sn.get(), cs.get(), tmp.get(), MPFR_RNDN);
        mpfr_mul(phase.re.get(), cs.get(), expr.get(), MPFR_RNDN);
        mpfr_mul(phase.im.get(), sn.get(), expr.get(), MPFR_RNDN);

        mpfr_set(base.re.get(), factn.get(), MPFR_RNDN);
        mpfr_set_zero(base.im.get(), 1);
        for (int a = 0; a < na; ++a) {
            if (cc.counts[a] == 0) continue;
            detail::cmul(next, base, slot[a][cc.counts[a]], scratch);
            mpfr_swap(base.re.get(), next.re.get());
            mpfr_swap(base.im.get(), next.im.get());
        }
        detail::cmul(next, base, phase, scratch);
        detail::cmul(base, next, fval, scratch);
        detail::cadd(total, base);
        more = cc.next();
    }
    return {total.re.to_double(), total.im.to_double()};
}

}  // namespace

cplx finite_multinomial_sum(std::int64_t n, const ProperSet& ps, std::span<const cplx> q_values,
                            const NaturalPolynomial& p_n, const NaturalPolynomial& f_n,
                            std::uint64_t budget) {
    if (ps.n_elements > kGenericSetCap)
        throw capacity_error("finite_multinomial_sum: |A| > " + std::to_string(kGenericSetCap));
    if (n < 1) throw domain_error("finite_multinomial_sum: n must be >= 1");
    const std::uint64_t count = composition_count(ps.n_elements, n);
    if (count > budget)
        throw capacity_error("finite_multinomial_sum: " + std::to_string(count) +
                             " compositions exceed the budget");
    double sum_q_abs = 0.0;
    for (const auto& z : q_values) sum_q_abs += std::abs(z);
    double p_bound = 0.0;  // |P| <= sum of |coefficients| on the simplex
    for (const auto& [mono, coef] : p_n.terms) p_bound += std::abs(coef);
    const double peak_bits =
        n * (std::log2(std::max(1.0, sum_q_abs)) + p_bound * 1.4426950408889634);
    if (peak_bits <= 20.0) return multinomial_sum_double(n, ps, q_values, p_n, f_n);
    return multinomial_sum_big(n, ps, q_values, p_n, f_n,
                               static_cast<mpfr_prec_t>(peak_bits + 64 + 53));
}

std::string canonical_to_json(const CanonicalPolynomial& g) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [key, coef] : g.terms) {
        nlohmann::json item;
        item["tau"] = key.tau;
        item["eta"] = key.eta;
        item["nu"] = key.nu;
        item["re"] = coef.real();
        item["im"] = coef.imag();
        arr.push_back(std::move(item));
    }
    return arr.dump();
}

CanonicalPolynomial canonical_from_json(const std::string& text) {
    CanonicalPolynomial g;
    auto arr = nlohmann::json::parse(text);
    for (const auto& item : arr) {
        CanonicalKey key;
        key.tau = item.at("tau").get<std::vector<int>>();
        key.eta = item.at("eta").get<std::vector<int>>();
        key.nu = item.at("nu").get<std::vector<int>>();
        g.terms[key] += cplx{item.at("re").get<double>(), item.at("im").get<double>()};
    }
    return g;
}

}  // namespace qsg
