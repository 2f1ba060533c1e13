#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qsg {

// A random-COP ensemble: coupling coefficients c_q plus, per q, the limiting
// log-characteristic function g_q of the couplings. Immutable value object.
struct Ensemble {
    enum class Family : int { gaussian = 0, erdos_renyi = 1, custom = 2 };

    struct PerQ {
        Family family = Family::gaussian;
        double d = 0.0;  // ER degree parameter
        std::function<double(double)> g, g_prime;  // custom only
    };

    int q_max = 0;
    std::vector<double> c;      // c[q-1], q = 1..q_max
    std::vector<PerQ> per_q;    // per_q[q-1]

    // Pure q-spin Gaussian model, coefficient cq on the q-body term.
    static Ensemble pure_gaussian(int q, double cq = 1.0);
    // SK normalization preset: c_2 = 1/sqrt(2), Gaussian.
    static Ensemble sk_normalized();
    // Pure q-body Erdos-Renyi Max-q-XORSAT at degree d.
    static Ensemble pure_er(int q, double d, double cq = 1.0);
    static Ensemble mixed_gaussian(std::vector<double> coeffs);

    std::string family_string() const;
};

double g_value(const Ensemble& e, int q, double lambda);
double g_derivative(const Ensemble& e, int q, double lambda);
// Second derivative, needed only by the finite-n oracle; Gaussian and ER only.
double g_second(const Ensemble& e, int q, double lambda);

// True when the finite-n log-characteristic function equals the limit exactly
// (Gaussian and ER families), so the finite-n oracle may reuse g/g'/g''.
bool finite_n_exact(const Ensemble& e);

struct AssumptionReport {
    bool pass = false;
    double max_even_violation = 0.0;  // sup over grid of |g(l) - g(-l)|
    double g_at_zero = 0.0;
    double g_prime_at_zero = 0.0;
    // Characteristic-function positivity is certified analytically for
    // Gaussian/ER; for custom families the check is numerical-only and this
    // flag stays false.
    bool positivity_certified = false;
    std::vector<std::string> notes;
};

// Grid-samples evenness, g(0), g'(0); passes iff all violations < 1e-10.
AssumptionReport validate_assumption(const Ensemble& e);

// Dense coupling tensor over all ordered q-tuples [n]^q, i.i.d. per family.
struct InstanceSample {
    int n = 0;
    int q = 0;
    std::vector<double> couplings;  // n^q entries, row-major over (i_1..i_q)
    std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kDefaultTensorBudget = std::uint64_t{1} << 27;  // entries

// Reproducible for equal seeds; independent tensors for distinct seeds.
InstanceSample sample_instance(const Ensemble& e, int q, int n, std::uint64_t seed,
                               std::uint64_t entry_budget = kDefaultTensorBudget);

// Stream-split a user seed into independent per-task seeds.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qsg
