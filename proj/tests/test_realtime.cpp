#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "frtm/realtime.hpp"

using namespace frtm;

namespace {

double shape(double t) {
    return std::exp(-40 * (t - 0.3) * (t - 0.3)) - 0.6 * std::exp(-60 * (t - 0.7) * (t - 0.7)) + 0.2 * t;
}

Curve sampled(Interval d, int n, auto f) {
    Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, d.lo, d.hi);
    return interpolate(t, Eigen::VectorXd(t.unaryExpr(f)));
}

Alignment warp_of(Interval dom, Interval dy, Interval dx, auto h, int n = 51) {
    Alignment a;
    a.template_domain = dy;
    a.obs_domain = dx;
    for (int i = 0; i < n; ++i) {
        const double t = dom.lo + dom.length() * i / (n - 1);
        a.t.push_back(t);
        a.h.push_back(h(t));
    }
    a.warping_domain = dom;
    return a;
}

}  // namespace

TEST(Band, IdenticalWarps) {
    std::vector<Alignment> w(12, warp_of({0, 1}, {0, 1}, {0, 1}, [](double t) { return t * t * 0.5 + 0.5 * t; }));
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(20, 0.05, 1);
    Band band = fit_band(w, 0.01, grid, {0, 1}, {0, 1});
    CompletedWarp cw(w[0]);
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        EXPECT_NEAR(band.lower(g), cw.inverse(grid(g)), 1e-12);
        EXPECT_NEAR(band.upper(g), cw.inverse(grid(g)), 1e-12);
    }
}

TEST(Band, FullLevelGivesMedian) {
    std::vector<Alignment> w;
    std::vector<double> slopes;
    for (int i = 0; i < 11; ++i) {
        const double s = 0.8 + 0.04 * i;
        slopes.push_back(s);
        w.push_back(warp_of({0, 1}, {0, 1}, {0, s}, [s](double t) { return s * t; }));
    }
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(10, 0.05, 0.75);
    Band band = fit_band(w, 1.0, grid, {0, 1}, {0, 1});
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        EXPECT_NEAR(band.lower(g), band.upper(g), 1e-12);
        EXPECT_NEAR(band.lower(g), grid(g) / slopes[5], 1e-9);  // median slope
    }
}

TEST(Band, Errors) {
    std::vector<Alignment> w(9, warp_of({0, 1}, {0, 1}, {0, 1}, [](double t) { return t; }));
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(5, 0.1, 1);
    EXPECT_THROW(fit_band(w, 0.01, grid, {0, 1}, {0, 1}), Error);
    w.resize(10, w[0]);
    EXPECT_THROW(fit_band(w, 0.0, grid, {0, 1}, {0, 1}), Error);
    EXPECT_NO_THROW(fit_band(w, 0.5, grid, {0, 1}, {0, 1}));
}

TEST(Band, LinearWarpCoverage) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.8, 1.25);
    std::vector<Alignment> w;
    for (int i = 0; i < 100; ++i) {
        const double s = u(rng);
        w.push_back(warp_of({0, 1}, {0, 1}, {0, s}, [s](double t) { return s * t; }, 3));
    }
    Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(50, 0.02, 1);
    Band band = fit_band(w, 0.01, grid, {0, 1}, {0, 1});
    for (Eigen::Index g = 1; g < grid.size(); ++g) {
        EXPECT_LE(band.lower(g), band.upper(g));
        EXPECT_GE(band.lower(g), band.lower(g - 1));
        EXPECT_GE(band.upper(g), band.upper(g - 1));
    }
    long inside = 0, total = 0;
    for (int i = 0; i < 2000; ++i) {
        const double s = u(rng);
        for (Eigen::Index g = 0; g < grid.size(); ++g) {
            const double inv = std::min(grid(g) / s, 1.0);
            inside += inv >= band.lower(g) - 1e-12 && inv <= band.upper(g) + 1e-12;
            ++total;
        }
    }
    EXPECT_GE(double(inside) / double(total), 0.99);
}

TEST(Impute, FullCoverageIsIdentity) {
    Curve y = sampled({0, 1}, 60, shape);
    auto q = [](double t) { return t + 0.2 * t * (t - 1); };
    Curve x = sampled({0, 1}, 60, [](double s) { return shape(s); });
    Alignment a = warp_of({0, 1}, {0, 1}, {0, 1}, q);
    CompletedPair c = impute_complete(a, y, x);
    Curve h = a.warping();
    for (int i = 0; i <= 200; ++i) {
        const double t = i / 200.0;
        EXPECT_NEAR(c.warping(t), h(t), 1e-12);
        EXPECT_NEAR(c.registered(t), x(std::min(1.0, h(t))), 1e-12);
    }
}

TEST(Impute, ContinuityAndMonotonicity) {
    Curve y = sampled({0, 1}, 60, shape);
    Curve x = sampled({0, 0.8}, 60, [](double s) { return 1.1 * shape(s + 0.1); });
    Alignment a = warp_of({0.1, 0.85}, {0, 1}, {0, 0.8}, [](double t) { return (t - 0.1) * 0.8 / 0.75 * (1 + 0.1 * (t - 0.85)); });
    CompletedPair c = impute_complete(a, y, x);
    const double eps = 1e-12;
    EXPECT_LT(std::abs(c.registered(0.1 - eps) - c.registered(0.1)), 1e-8);
    EXPECT_LT(std::abs(c.registered(0.85 + eps) - c.registered(0.85)), 1e-8);
    EXPECT_LT(std::abs(c.warping(0.1 - eps) - c.warping(0.1)), 1e-8);
    EXPECT_LT(std::abs(c.warping(0.85 + eps) - c.warping(0.85)), 1e-8);
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        const double w = c.warping(i / 999.0);
        EXPECT_GT(w, prev);
        prev = w;
    }
    const auto& cw = c.warp();
    for (double xv : {-0.1, 0.0, 0.3, 0.8, 0.9}) EXPECT_NEAR(cw(cw.inverse(xv)), xv, 1e-9);
    Alignment bad = a;
    bad.warping_domain = {0.5, 0.5};
    EXPECT_THROW(impute_complete(bad, y, x), Error);
}

TEST(RegisterPartial, TruncatedTemplate) {
    Curve y = sampled({0, 1}, 80, shape);
    Curve part = sampled({0, 0.6}, 60, shape);
    RealtimeParams p;
    auto r = register_partial(y, part, 0.5, 0.7, p, {0.1, 0.1});
    EXPECT_NEAR(r.t_star, 0.6, 0.01 + 1e-9);
    EXPECT_LT(r.alignment.objective, 1e-3);
    EXPECT_NEAR(r.alignment.h.back(), 0.6, 1e-9);
}

TEST(RegisterPartial, KnownWarp) {
    auto q = [](double t) { return t + 0.2 * t * (t - 1); };
    auto qinv = [](double x) { return (-0.8 + std::sqrt(0.64 + 0.8 * x)) / 0.4; };
    Curve y = sampled({0, 1}, 100, shape);
    const double xs = q(0.5);
    Curve part = sampled({0, xs}, 60, [&](double s) { return shape(qinv(s)); });
    RealtimeParams p;
    p.registration.lambda = 0.01;
    auto r = register_partial(y, part, 0.3, 0.7, p, {0.1, 0.1});
    EXPECT_NEAR(r.t_star, 0.5, 0.03);
}

TEST(RegisterPartial, SingletonBand) {
    Curve y = sampled({0, 1}, 80, shape);
    Curve part = sampled({0, 0.5}, 60, shape);
    RealtimeParams p;
    auto r = register_partial(y, part, 0.55, 0.55, p, {0.1, 0.1});
    EXPECT_NEAR(r.t_star, 0.55, 1e-12);
    EXPECT_NEAR(r.alignment.h.back(), 0.5, 1e-9);
    EXPECT_THROW(register_partial(y, part, 0.6, 0.5, p, {0.1, 0.1}), Error);
}

TEST(RegisterPartial, MonotoneProgress) {
    auto qinv = [](double x) {  // inverse of t + 0.15 t (t - 1)
        return (-0.85 + std::sqrt(0.7225 + 0.6 * x)) / 0.3;
    };
    Curve y = sampled({0, 1}, 100, shape);
    Curve full = sampled({0, 1}, 100, [&](double s) { return shape(qinv(s)); });
    RealtimeParams p;
    p.registration.lambda = 0.01;
    double prev = -1;
    for (double xs = 0.2; xs <= 0.95; xs += 0.05) {
        Curve part = sampled({0, xs}, 60, [&](double s) { return full(s); });
        auto r = register_partial(y, part, std::max(0.0, qinv(xs) - 0.15), std::min(1.0, qinv(xs) + 0.15), p,
                                  {0.1, 0.1});
        EXPECT_GE(r.t_star, prev - 1e-12);
        prev = r.t_star;
    }
}

TEST(RegisterPartial, MatchesOfflineAtRightBoundary) {
    Curve y = sampled({0, 1}, 100, shape);
    Curve x = sampled({0, 1}, 100, [](double s) { return shape(s + 0.15 * s * (s - 1)); });
    RealtimeParams p;
    p.registration.lambda = 0.01;
    p.registration.slope_target = 1.0;
    const auto off = oeb_fdtw(y, x, p.registration, {0.1, 0.1}, {0.1, 0.1});
    // base band at the right boundary of the monitoring domain reaches the end of the template domain
    auto on = register_partial(y, x, 0.9, 1.0, p, {0.1, 0.1});
    EXPECT_NEAR(on.alignment.objective, off.objective, 0.05 * off.objective);
}

TEST(AdaptiveBand, LinearHistoryRelaxes) {
    RealtimeParams p;
    const double dx = 0.02;
    RealtimeState st(p, {0, 1}, {0, 1}, dx);
    Band base;
    base.grid = Eigen::VectorXd::LinSpaced(51, 0, 1);
    base.lower = (base.grid.array() - 0.2).max(0.0);
    base.upper = (base.grid.array() + 0.2).min(1.0);
    base.template_domain = {0, 1};
    const double s = 0.8;  // h(t) = s t, so t*(x) = x / s
    int relaxed_from = -1;
    for (int i = 1; i <= 40; ++i) {
        const double x = i * dx;
        auto [lo, hi] = adaptive_band(st, base, x);
        if (st.relaxation_active()) {
            if (relaxed_from < 0) relaxed_from = i;
            const double c = x / s;
            EXPECT_NEAR(lo, std::max(0.0, c - 0.04), 1e-9);
            EXPECT_NEAR(hi, std::min(1.0, c + 0.04), 1e-9);
            EXPECT_LE(hi - lo, 2 * 0.04 + 1e-12);
        } else {
            EXPECT_DOUBLE_EQ(lo, base.lower_at(x));
            EXPECT_DOUBLE_EQ(hi, base.upper_at(x));
        }
        const double ts = x / s;
        st.record(x, ts, CompletedWarp(warp_of({0, ts}, {0, 1}, {0, x}, [s](double t) { return s * t; }, 5)));
    }
    // the window [x - 0.12, x - 0.02] must hold only stable steps; the first step has no predecessor,
    // so the earliest relaxation is at x = 0.16
    EXPECT_EQ(relaxed_from, 8);
}

TEST(AdaptiveBand, ZeroTolerancesNeverRelax) {
    RealtimeParams p;
    p.delta_v = 0;
    p.delta_d = 0;
    const double dx = 0.02;
    RealtimeState st(p, {0, 1}, {0, 1}, dx);
    Band base;
    base.grid = Eigen::VectorXd::LinSpaced(51, 0, 1);
    base.lower = (base.grid.array() - 0.2).max(0.0);
    base.upper = (base.grid.array() + 0.2).min(1.0);
    base.template_domain = {0, 1};
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nz(0, 0.01);
    for (int i = 1; i <= 40; ++i) {
        const double x = i * dx;
        adaptive_band(st, base, x);
        EXPECT_FALSE(st.relaxation_active());
        const double s = 0.8 * (1 + nz(rng)), ts = std::min(x / s, 1.0);
        st.record(x, ts, CompletedWarp(warp_of({0, ts}, {0, 1}, {0, x}, [&](double t) { return x * t / ts; }, 5)));
    }
}
