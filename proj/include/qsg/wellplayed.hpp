#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qsg/config.hpp"

namespace qsg {

// A finite set split as A0 | D | Dbar with a bar involution pairing D with
// Dbar and a total order on D. Elements are dense integer ids.
struct ProperSet {
    int n_elements = 0;
    std::vector<Partition> label;
    std::vector<int> bar_map;   // involution; identity on A0
    std::vector<int> d_order;   // D ids, ascending
    std::vector<int> d_pos;     // position of a D id in d_order, -1 otherwise

    static ProperSet from_tables(const BasisTables& t);
    // A0 = {0}, D = {1}, Dbar = {2}.
    static ProperSet toy();
    void validate() const;  // throws domain_error on a malformed structure
    bool in_d(int id) const { return label[id] == Partition::D; }
};

// Monomial over element ids, stored as a sorted multiset; the coefficient of
// a sorted key absorbs the symmetrization over orderings.
using Monomial = std::vector<int>;

struct NaturalPolynomial {
    std::map<Monomial, cplx> terms;
    int degree() const;
    cplx eval(std::span<const cplx> omega) const;
    cplx partial_eval(int var, std::span<const cplx> omega) const;  // d/d omega_var
};

struct CanonicalKey {
    Monomial tau, eta, nu;
    auto operator<=>(const CanonicalKey&) const = default;
};

// Sparse polynomial in (tau_a, eta_b, nu_c) variables.
struct CanonicalPolynomial {
    std::map<CanonicalKey, cplx> terms;
    int degree() const;
};

inline constexpr int kDefaultDegreeCap = 4;

// Exact coefficient-level change of basis tau = w + wbar, eta = w - wbar,
// nu = w; round-trips through natural_form to 1e-12.
CanonicalPolynomial canonicalize(const NaturalPolynomial& f, const ProperSet& ps,
                                 int degree_cap = kDefaultDegreeCap);
NaturalPolynomial natural_form(const CanonicalPolynomial& g, const ProperSet& ps);

struct WellPlayedReport {
    bool pass = false;
    enum class Reason : int { empty_tau = 0, max_order = 1 };
    struct Violation {
        CanonicalKey key;
        cplx psi;
        Reason reason;
    };
    std::vector<Violation> violations;
    // Observed word lengths (the constant L is reported, not enforced).
    int max_tau_len = 0, max_eta_len = 0, max_nu_len = 0;
};

// Every nonzero coefficient must have a nonempty tau word whose maximum
// strictly exceeds the eta word's maximum (empty eta compares as bottom).
WellPlayedReport check_well_played(const CanonicalPolynomial& g, const ProperSet& ps);

inline constexpr std::uint64_t kDefaultHqBudget = std::uint64_t{1} << 24;

// H_q = sum over q-tuples of h(Phi_{a_1...a_q}) w_{a_1}...w_{a_q}, by dense
// enumeration of A^q.
NaturalPolynomial build_Hq(const BasisTables& t, int q, const std::function<double(double)>& h,
                           std::uint64_t budget = kDefaultHqBudget);

// Alternating sums over bar choices, by brute force.
double chi(const BasisTables& t, const std::function<double(double)>& h, std::uint32_t a,
           std::span<const std::uint32_t> cs);
double delta(const BasisTables& t, const std::function<double(double)>& h, std::uint32_t a,
             std::uint32_t b);

// Sequential solve of the canonical self-consistent equation in ascending
// D-order; requires a well-played P and proper Q. Returns W over all ids.
std::vector<cplx> solve_generic_sce(const ProperSet& ps, std::span<const cplx> q_values,
                                    const CanonicalPolynomial& p_canonical);

inline constexpr int kGenericSetCap = 8;

// Exact finite-n sum of the generalized multinomial statement:
// sum over compositions of multinomial * prod Q^{n_a} * exp[n P_n({n_a/n})] * f_n({n_a/n}).
cplx finite_multinomial_sum(std::int64_t n, const ProperSet& ps, std::span<const cplx> q_values,
                            const NaturalPolynomial& p_n, const NaturalPolynomial& f_n,
                            std::uint64_t budget = std::uint64_t{1} << 26);

// JSON list of {tau:[...], eta:[...], nu:[...], re, im}.
std::string canonical_to_json(const CanonicalPolynomial& g);
CanonicalPolynomial canonical_from_json(const std::string& text);

}  // namespace qsg
