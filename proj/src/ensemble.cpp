#include "qsg/ensemble.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "qsg/errors.hpp"

namespace qsg {

Ensemble Ensemble::pure_gaussian(int q, double cq) {
    if (q < 1) throw usage_error("pure_gaussian: q must be >= 1");
    Ensemble e;
    e.q_max = q;
    e.c.assign(q, 0.0);
    e.c[q - 1] = cq;
    e.per_q.resize(q);
    return e;
}

Ensemble Ensemble::sk_normalized() { return pure_gaussian(2, 1.0 / std::sqrt(2.0)); }

Ensemble Ensemble::pure_er(int q, double d, double cq) {
    if (q < 1) throw usage_error("pure_er: q must be >= 1");
    if (d <= 0) throw usage_error("pure_er: d must be positive");
    Ensemble e;
    e.q_max = q;
    e.c.assign(q, 0.0);
    e.c[q - 1] = cq;
    e.per_q.resize(q);
    e.per_q[q - 1].family = Family::erdos_renyi;
    e.per_q[q - 1].d = d;
    return e;
}

Ensemble Ensemble::mixed_gaussian(std::vector<double> coeffs) {
    if (coeffs.empty()) throw usage_error("mixed_gaussian: empty coefficient list");
    Ensemble e;
    e.q_max = static_cast<int>(coeffs.size());
    e.c = std::move(coeffs);
    e.per_q.resize(e.q_max);
    bool any = false;
    for (double v : e.c) any = any || v != 0.0;
    if (!any) throw usage_error("mixed_gaussian: at least one c_q must be nonzero");
    return e;
}

std::string Ensemble::family_string() const {
    std::ostringstream os;
    for (int q = 1; q <= q_max; ++q) {
        if (q > 1) os << ",";
        switch (per_q[q - 1].family) {
            case Family::gaussian: os << "gaussian"; break;
            case Family::erdos_renyi: os << "er:" << per_q[q - 1].d; break;
            case Family::custom: os << "custom"; break;
        }
    }
    return os.str();
}

namespace {
const Ensemble::PerQ& per_q_checked(const Ensemble& e, int q) {
    if (q < 1 || q > e.q_max) throw usage_error("ensemble: q out of range");
    return e.per_q[q - 1];
}
double check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw numerical_error(std::string(what) + " returned a non-finite value");
    return v;
}
}  // namespace

double g_value(const Ensemble& e, int q, double lambda) {
    const auto& f = per_q_checked(e, q);
    switch (f.family) {
        case Ensemble::Family::gaussian:
            return -0.5 * lambda * lambda;
        case Ensemble::Family::erdos_renyi: {
            double s = lambda / std::sqrt(f.d);
            return f.d * (std::cos(s) - 1.0);
        }
        case Ensemble::Family::custom:
            return check_finite(f.g(lambda), "custom g");
    }
    return 0.0;
}

double g_derivative(const Ensemble& e, int q, double lambda) {
    const auto& f = per_q_checked(e, q);
    switch (f.family) {
        case Ensemble::Family::gaussian:
            return -lambda;
        case Ensemble::Family::erdos_renyi:
            return -std::sqrt(f.d) * std::sin(lambda / std::sqrt(f.d));
        case Ensemble::Family::custom:
            return check_finite(f.g_prime(lambda), "custom g'");
    }
    return 0.0;
}

double g_second(const Ensemble& e, int q, double lambda) {
    const auto& f = per_q_checked(e, q);
    switch (f.family) {
        case Ensemble::Family::gaussian:
            return -1.0;
        case Ensemble::Family::erdos_renyi:
            return -std::cos(lambda / std::sqrt(f.d));
        case Ensemble::Family::custom:
            throw usage_error("g_second: unsupported for custom families");
    }
    return 0.0;
}

bool finite_n_exact(const Ensemble& e) {
    for (int q = 1; q <= e.q_max; ++q)
        if (e.c[q - 1] != 0.0 && e.per_q[q - 1].family == Ensemble::Family::custom) return false;
    return true;
}

AssumptionReport validate_assumption(const Ensemble& e) {
    AssumptionReport rep;
    rep.positivity_certified = finite_n_exact(e);
    if (!rep.positivity_certified)
        rep.notes.push_back(
            "custom family: g checked real/even numerically; positivity of the underlying "
            "characteristic function is not certified");
    const double tol = 1e-10;
    double worst = 0.0;
    for (int q = 1; q <= e.q_max; ++q) {
        if (e.c[q - 1] == 0.0) continue;
        for (int k = 1; k <= 64; ++k) {
            double lam = -8.0 + 16.0 * k / 64.0;
            double diff = std::abs(g_value(e, q, lam) - g_value(e, q, -lam));
            worst = std::max(worst, diff);
        }
        rep.g_at_zero = std::max(rep.g_at_zero, std::abs(g_value(e, q, 0.0)));
        // one-sided derivative check at 0 falls back to central differences for custom g
        double gp0;
        if (e.per_q[q - 1].family == Ensemble::Family::custom) {
            const double h = 1e-6;
            gp0 = (g_value(e, q, h) - g_value(e, q, -h)) / (2 * h);
        } else {
            gp0 = g_derivative(e, q, 0.0);
        }
        rep.g_prime_at_zero = std::max(rep.g_prime_at_zero, std::abs(gp0));
    }
    rep.max_even_violation = worst;
    rep.pass = worst < tol && rep.g_at_zero < tol && rep.g_prime_at_zero < tol;
    return rep;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

InstanceSample sample_instance(const Ensemble& e, int q, int n, std::uint64_t seed,
                               std::uint64_t entry_budget) {
    const auto& f = per_q_checked(e, q);
    if (f.family == Ensemble::Family::custom)
        throw usage_error("sample_instance: custom families have no sampler");
    if (n < 1) throw usage_error("sample_instance: n must be >= 1");
    std::uint64_t entries = 1;
    for (int i = 0; i < q; ++i) {
        entries *= static_cast<std::uint64_t>(n);
        if (entries > entry_budget)
            throw capacity_error("sample_instance: n^q = " + std::to_string(n) + "^" +
                                 std::to_string(q) + " exceeds the tensor budget of " +
                                 std::to_string(entry_budget) + " entries");
    }
    InstanceSample s;
    s.n = n;
    s.q = q;
    s.seed = seed;
    s.couplings.resize(entries);
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(q) << 32 | static_cast<std::uint64_t>(n)));
    const double nq1 = std::pow(static_cast<double>(n), q - 1);
    if (f.family == Ensemble::Family::gaussian) {
        std::normal_distribution<double> dist(0.0, 1.0 / std::sqrt(nq1));
        for (auto& v : s.couplings) v = dist(rng);
    } else {
        std::poisson_distribution<long> dist(f.d / (2.0 * nq1));
        const double inv_sqrt_d = 1.0 / std::sqrt(f.d);
        for (auto& v : s.couplings) {
            long jp = dist(rng), jm = dist(rng);
            v = (static_cast<double>(jp) - static_cast<double>(jm)) * inv_sqrt_d;
        }
    }
    return s;
}

}  // namespace qsg
