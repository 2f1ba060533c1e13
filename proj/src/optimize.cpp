#include "qsg/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qsg/sce.hpp"

namespace qsg {

namespace {

double halton(std::uint64_t index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
                           59, 61, 67, 71, 73, 79, 83, 89, 97, 101};

// One Nelder-Mead descent on -f. Returns best point/value found.
struct NmOutcome {
    std::vector<double> x;
    double value;  // maximized
    int evaluations;
};

NmOutcome nelder_mead(const std::function<double(std::span<const double>)>& f,
                      std::vector<double> x0, double scale, int max_iter, double tol,
                      std::vector<std::pair<std::vector<double>, double>>* trace,
                      int* failed) {
    const int dim = static_cast<int>(x0.size());
    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        double v;
        try {
            v = f(x);
            if (!std::isfinite(v)) throw std::runtime_error("non-finite");
        } catch (const std::exception&) {
            if (failed) ++*failed;
            v = -std::numeric_limits<double>::infinity();  // reject, keep going
        }
        if (trace) trace->emplace_back(x, v);
        return v;
    };

    std::vector<std::vector<double>> pts(dim + 1, x0);
    std::vector<double> vals(dim + 1);
    for (int i = 1; i <= dim; ++i) pts[i][i - 1] += scale;
    for (int i = 0; i <= dim; ++i) vals[i] = eval(pts[i]);

    auto order = [&] {
        std::vector<int> idx(dim + 1);
        for (int i = 0; i <= dim; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] > vals[b]; });
        std::vector<std::vector<double>> np(dim + 1);
        std::vector<double> nv(dim + 1);
        for (int i = 0; i <= dim; ++i) {
            np[i] = pts[idx[i]];
            nv[i] = vals[idx[i]];
        }
        pts.swap(np);
        vals.swap(nv);
    };

    for (int it = 0; it < max_iter; ++it) {
        order();
        if (std::abs(vals[0] - vals[dim]) < tol) break;
        std::vector<double> centroid(dim, 0.0);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) centroid[j] += pts[i][j] / dim;
        auto blend = [&](double t) {
            std::vector<double> x(dim);
            for (int j = 0; j < dim; ++j) x[j] = centroid[j] + t * (pts[dim][j] - centroid[j]);
            return x;
        };
        auto xr = blend(-1.0);
        double vr = eval(xr);
        if (vr > vals[0]) {
            auto xe = blend(-2.0);
            double ve = eval(xe);
            if (ve > vr) {
                pts[dim] = xe;
                vals[dim] = ve;
            } else {
                pts[dim] = xr;
                vals[dim] = vr;
            }
        } else if (vr > vals[dim - 1]) {
            pts[dim] = xr;
            vals[dim] = vr;
        } else {
            auto xc = blend(0.5);
            double vc = eval(xc);
            if (vc > vals[dim]) {
                pts[dim] = xc;
                vals[dim] = vc;
            } else {
                for (int i = 1; i <= dim; ++i) {
                    for (int j = 0; j < dim; ++j) pts[i][j] = 0.5 * (pts[i][j] + pts[0][j]);
                    vals[i] = eval(pts[i]);
                }
            }
        }
    }
    order();
    return {pts[0], vals[0], evals};
}

}  // namespace

OptimizeResult maximize(const std::function<double(std::span<const double>)>& f, int dim,
                        const OptimizerSettings& settings, std::uint64_t seed) {
    OptimizeResult res;
    res.best_value = -std::numeric_limits<double>::infinity();
    const std::uint64_t offset = seed % 8191;  // seeded shift of the Halton sequence
    std::vector<std::vector<double>> starts = settings.warm_starts;
    for (int s = 0; s < settings.starts; ++s) {
        std::vector<double> x(dim);
        for (int j = 0; j < dim; ++j)
            x[j] = 2.0 * halton(offset + 1 + s, kPrimes[j % std::size(kPrimes)]) - 1.0;
        starts.push_back(std::move(x));
    }
    for (const auto& x0 : starts) {
        auto out = nelder_mead(f, x0, settings.simplex_scale, settings.max_iterations,
                               settings.value_tol, &res.trace, &res.failed_evaluations);
        res.evaluations += out.evaluations;
        if (out.value > res.best_value) {
            res.best_value = out.value;
            res.gamma = out.x;  // caller splits if needed
        }
    }
    return res;
}

OptimizeResult optimize_vp(int p, const Ensemble& e, const OptimizerSettings& settings,
                           std::uint64_t seed) {
    const int dim = settings.pin_gamma_zero ? p : 2 * p;
    auto objective = [&](std::span<const double> x) {
        std::vector<double> gamma(p, 0.0), beta(p, 0.0);
        if (settings.pin_gamma_zero) {
            for (int i = 0; i < p; ++i) beta[i] = x[i];
        } else {
            for (int i = 0; i < p; ++i) gamma[i] = x[i];
            for (int i = 0; i < p; ++i) beta[i] = x[p + i];
        }
        return vp_value(p, e, gamma, beta);
    };
    OptimizeResult res = maximize(objective, dim, settings, seed);
    std::vector<double> x = res.gamma;
    res.gamma.assign(p, 0.0);
    res.beta.assign(p, 0.0);
    if (settings.pin_gamma_zero) {
        for (int i = 0; i < p; ++i) res.beta[i] = x[i];
    } else {
        for (int i = 0; i < p; ++i) res.gamma[i] = x[i];
        for (int i = 0; i < p; ++i) res.beta[i] = x[p + i];
    }
    return res;
}

}  // namespace qsg
