#include <cmath>

#include "doctest.h"
#include "qsg/optimize.hpp"
#include "qsg/sce.hpp"

using namespace qsg;

TEST_CASE("multistart Nelder-Mead recovers a smooth maximum") {
    auto f = [](std::span<const double> x) {
        double dx = x[0] - 0.3, dy = x[1] + 0.4;
        return 2.0 - dx * dx - 3.0 * dy * dy;
    };
    OptimizerSettings s;
    s.starts = 6;
    auto res = maximize(f, 2, s, 7);
    CHECK(res.best_value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(res.evaluations > 0);
    CHECK(res.trace.size() == static_cast<std::size_t>(res.evaluations));
}

TEST_CASE("optimizer is deterministic for a fixed seed") {
    auto e = Ensemble::pure_gaussian(2);
    OptimizerSettings s;
    s.starts = 4;
    auto a = optimize_vp(1, e, s, 42);
    auto b = optimize_vp(1, e, s, 42);
    CHECK(a.best_value == b.best_value);
    CHECK(a.gamma == b.gamma);
}

TEST_CASE("failed evaluations are recorded and skipped") {
    int calls = 0;
    auto f = [&](std::span<const double> x) {
        ++calls;
        if (x[0] > 0.0) throw std::runtime_error("bad region");
        return -(x[0] + 1.0) * (x[0] + 1.0);
    };
    OptimizerSettings s;
    s.starts = 4;
    auto res = maximize(f, 1, s, 3);
    CHECK(res.failed_evaluations > 0);
    CHECK(res.best_value == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("p=1 pure 2-spin maximum is recovered to 1e-6") {
    // max of 2 gamma sin(4 beta) e^{-4 gamma^2} = e^{-1/2}/sqrt(2) at
    // gamma = 1/(2 sqrt 2), beta = pi/8 (value frozen from the closed form,
    // confirmed by finite-n extrapolation before the build)
    auto e = Ensemble::pure_gaussian(2);
    OptimizerSettings s;
    auto res = optimize_vp(1, e, s, 1);
    const double target = std::exp(-0.5) / std::sqrt(2.0);
    CHECK(std::abs(res.best_value - target) < 1e-6);
    CHECK(std::abs(std::abs(res.gamma[0]) - 0.3535533905932738) < 1e-3);
}

TEST_CASE("gamma pinned to zero optimizes to zero value") {
    auto e = Ensemble::pure_gaussian(2);
    OptimizerSettings s;
    s.starts = 4;
    s.pin_gamma_zero = true;
    auto res = optimize_vp(1, e, s, 5);
    CHECK(std::abs(res.best_value) < 1e-9);
}

TEST_CASE("level nesting: padded zeros reproduce the lower level exactly") {
    auto e = Ensemble::pure_gaussian(2);
    OptimizerSettings s;
    s.starts = 8;
    auto best1 = optimize_vp(1, e, s, 9);
    std::vector<double> g2 = {best1.gamma[0], 0.0}, b2 = {best1.beta[0], 0.0};
    CHECK(vp_value(2, e, g2, b2) == doctest::Approx(best1.best_value).epsilon(1e-10));
}

TEST_CASE("optimized value never decreases with p when warm-started") {
    auto e = Ensemble::pure_gaussian(2);
    OptimizerSettings s1;
    s1.starts = 6;
    auto r1 = optimize_vp(1, e, s1, 11);
    OptimizerSettings s2;
    s2.starts = 6;
    s2.warm_starts = {{r1.gamma[0], 0.0, r1.beta[0], 0.0}};
    auto r2 = optimize_vp(2, e, s2, 11);
    CHECK(r2.best_value >= r1.best_value - 1e-8);
    OptimizerSettings s3;
    s3.starts = 4;
    s3.warm_starts = {{r2.gamma[0], r2.gamma[1], 0.0, r2.beta[0], r2.beta[1], 0.0}};
    auto r3 = optimize_vp(3, e, s3, 11);
    CHECK(r3.best_value >= r2.best_value - 1e-8);
}
