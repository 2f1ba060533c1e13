#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "qsg/config.hpp"
#include "qsg/ensemble.hpp"

namespace qsg {

// z = exp(log_mag) * phase with |phase| = 1 (or 0 for exact zero). Keeps
// multinomial-scale magnitudes out of the double exponent range.
struct LogComplex {
    double log_mag = 0.0;
    cplx phase{1.0, 0.0};

    static LogComplex from(cplx z);
    static LogComplex from_log(double log_mag, cplx unit_phase) { return {log_mag, unit_phase}; }
    static LogComplex zero();
    bool is_zero() const { return phase == cplx{0.0, 0.0}; }
    LogComplex operator*(const LogComplex& o) const;
    // integer power by squaring on the phase, scaling on the log-magnitude
    LogComplex pow_int(std::uint64_t k) const;
    cplx to_complex() const;
};

// Sum of LogComplex terms with running max-log rescaling.
struct LogAccumulator {
    double log_scale = -1e300;
    cplx acc{0.0, 0.0};
    void add(const LogComplex& t);
    void add_scaled(const LogComplex& t, cplx factor);  // t * factor, factor ~ O(1)
    void merge(const LogAccumulator& o);
    cplx value() const;
};

// Odometer over {n_a >= 0 : sum n_a = n} across `slots` slots; visits every
// composition exactly once.
struct CompositionCursor {
    int slots = 0;
    std::int64_t n = 0;
    std::vector<std::int64_t> counts;

    CompositionCursor(int slots_, std::int64_t n_);
    bool next();  // false once all compositions have been visited
};

std::uint64_t composition_count(int slots, std::int64_t n);

enum class Moment { first, second };

inline constexpr std::uint64_t kDefaultCompositionBudget = std::uint64_t{1} << 26;

// Exact evaluation of the pre-limit combinatorial moment sum at finite n.
// Gaussian/ER families only (their finite-n g equals the limit exactly).
cplx exact_moment_sum(std::int64_t n, const BasisTables& t, const Ensemble& e, Moment which,
                      std::uint64_t budget = kDefaultCompositionBudget);

// <gamma,beta|C/n|gamma,beta> by dense statevector simulation, n <= 14 qubits.
double statevector_expectation(const InstanceSample& inst, std::span<const double> gamma,
                               std::span<const double> beta);

struct McMomentResult {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    double var_instances = 0.0;
    int instances = 0;
};

McMomentResult monte_carlo_moment(const Ensemble& e, int q, int n, int p,
                                  std::span<const double> gamma, std::span<const double> beta,
                                  int num_instances, std::uint64_t seed);

}  // namespace qsg
