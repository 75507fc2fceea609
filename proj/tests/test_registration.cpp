#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "frtm/registration.hpp"
#include "frtm/realtime.hpp"
#include "oracles.hpp"

using namespace frtm;

namespace {

constexpr double pi = std::numbers::pi;

Curve sampled(Interval d, int n, auto f) {
    Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, d.lo, d.hi);
    return interpolate(t, Eigen::VectorXd(t.unaryExpr(f)));
}

// bumpy test shape on [0, 1]
double shape(double t) {
    return std::exp(-40 * (t - 0.3) * (t - 0.3)) - 0.6 * std::exp(-60 * (t - 0.7) * (t - 0.7)) + 0.2 * t;
}

RegistrationParams small(int nt, int mx) {
    RegistrationParams p;
    p.n_t = nt;
    p.m_x = mx;
    return p;
}

}  // namespace

TEST(BuildGrid, PinnedSlopeGivesDiagonal) {
    RegistrationParams p = small(10, 5);
    p.s_min = 1;
    p.s_max = 1 + 1e-12;
    auto g = build_grid({0, 1}, {0, 1}, p, {}, {});
    for (Eigen::Index j = 0; j < g.stages(); ++j) {
        EXPECT_NEAR(g.lower(j), g.t(j), 1e-11);
        EXPECT_NEAR(g.upper(j), g.t(j), 1e-11);
    }
}

TEST(BuildGrid, HandDerivedBounds) {
    RegistrationParams p = small(20, 7);
    p.s_min = 0.5;
    p.s_max = 2;
    auto g = build_grid({0, 1}, {0, 1}, p, {}, {});
    for (Eigen::Index j = 0; j < g.stages(); ++j) {
        const double t = g.t(j);
        EXPECT_NEAR(g.lower(j), std::max(0.5 * t, 2 * t - 1), 1e-14);
        EXPECT_NEAR(g.upper(j), std::min(2 * t, 0.5 * t + 0.5), 1e-14);
        EXPECT_DOUBLE_EQ(g.tau(j, 0), g.lower(j));
        EXPECT_DOUBLE_EQ(g.tau(j, 6), g.upper(j));
    }
}

TEST(BuildGrid, StartSlackWidensFirstStage) {
    RegistrationParams p = small(20, 7);
    p.s_min = 0.5;
    p.s_max = 2;
    EXPECT_NEAR(build_grid({0, 1}, {0, 1}, p, {}, {}).upper(0), 0.0, 1e-15);
    EXPECT_NEAR(build_grid({0, 1}, {0, 1}, p, {0, 0.1}, {}).upper(0), 0.1, 1e-15);
}

TEST(BuildGrid, Infeasible) {
    RegistrationParams p = small(10, 4);
    p.s_min = 5;
    p.s_max = 6;
    try {
        build_grid({0, 1}, {0, 1}, p, {}, {});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InfeasibleGrid);
    }
}

TEST(DpAlign, SelfMatchIsIdentity) {
    Curve y = sampled({0, 1}, 60, shape);
    RegistrationParams p = small(40, 5);
    p.s_min = 1;
    p.s_max = 1 + 1e-12;
    auto g = build_grid({0, 1}, {0, 1}, p, {}, {});
    auto a = dp_align(y, y, g, p, 0.5);
    EXPECT_NEAR(a.objective, 0.0, 1e-12);
    ASSERT_EQ(a.t.size(), 41u);
    for (std::size_t i = 0; i < a.t.size(); ++i) EXPECT_NEAR(a.h[i], a.t[i], 1e-12);
}

TEST(DpAlign, HalfSpeedObservation) {
    Curve y = sampled({0, 1}, 80, shape);
    Curve x = sampled({0, 0.5}, 80, [](double s) { return shape(2 * s); });
    RegistrationParams p = small(50, 41);
    p.s_min = 0.4;
    p.s_max = 0.6;
    p.lambda = 100;
    auto g = build_grid({0, 1}, {0, 0.5}, p, {}, {});
    auto a = dp_align(y, x, g, p, 0.5);
    for (std::size_t i = 1; i < a.t.size(); ++i)
        EXPECT_NEAR((a.h[i] - a.h[i - 1]) / (a.t[i] - a.t[i - 1]), 0.5, 0.025);
    // unwarped distance: x read on template time over the shared part of the domains
    auto nz = compute_normalizers(y, {0, 1}, x, {0, 0.5});
    RegistrationParams q = small(100, 2);
    auto ident = build_grid({0, 1}, {0, 1}, q, {}, {});
    std::vector<double> h;
    for (Eigen::Index j = 0; j < ident.stages() && ident.t(j) <= 0.5 + 1e-12; ++j) h.push_back(ident.t(j));
    const double unwarped = oracle::path_objective(y, x, ident, nz, 0.5, 0, 1, 0, 2, 0, h);
    EXPECT_LT(a.objective, unwarped);
}

TEST(DpAlign, MatchesBruteForceOnSmallGrids) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0, 1);
    Curve y = sampled({0, 1}, 40, shape);
    for (int trial = 0; trial < 40; ++trial) {
        const int nt = 2 + trial % 4, mx = 2 + trial % 3;
        const double xe = 0.7 + 0.6 * u(rng);
        Curve x = sampled({0, xe}, 40, [&](double s) { return shape(s / xe) * (1 + 0.1 * std::sin(5 * s)); });
        RegistrationParams p = small(nt, mx);
        p.s_min = 0.2;
        p.s_max = 4;
        p.lambda = u(rng) < 0.5 ? 0.0 : 2 * u(rng);
        const double alpha = std::vector<double>{0, 0.5, 1}[trial % 3];
        Slack ss{0.3 * u(rng), 0.3 * u(rng)}, es{0.3 * u(rng), 0.3 * u(rng)};
        WarpGrid g;
        try {
            g = build_grid({0, 1}, {0, xe}, p, ss, es);
        } catch (const Error&) {
            continue;
        }
        auto nz = compute_normalizers(y, {0, 1}, x, {0, xe});
        LayeredGraph lg;
        lg.t = g.t;
        lg.width = g.width();
        lg.active.resize(g.stages(), g.width());
        for (Eigen::Index j = 0; j < g.stages(); ++j) lg.active.row(j).setConstant(bool(g.feasible(j)));
        lg.start = g.start;
        lg.end = g.end;
        const double target = xe;
        auto cost = [&](Eigen::Index j, Eigen::Index k1, Eigen::Index k2) {
            std::vector<double> h{g.tau(j, k1), g.tau(j + 1, k2)};
            const double avg =
                oracle::path_objective(y, x, g, nz, alpha, p.lambda, target, p.s_min, p.s_max, j, h);
            return avg * (g.t(j + 1) - g.t(j));
        };
        auto best = oracle::enumerate_paths(lg, cost);
        if (best.first < 0) {
            EXPECT_THROW(dp_align(y, x, g, p, alpha), Error);
            continue;
        }
        auto a = dp_align(y, x, g, p, alpha);
        EXPECT_NEAR(a.objective, best.objective, 1e-12) << "trial " << trial;
        if (best.second - best.objective > 1e-9) {
            ASSERT_EQ(a.t.size(), best.nodes.size());
            EXPECT_EQ(a.first_stage, best.first);
        }
    }
}

TEST(DpAlign, ScaleInvariance) {
    Curve y = sampled({0, 1}, 50, shape);
    Curve x = sampled({0, 1.2}, 50, [](double s) { return shape(std::pow(s / 1.2, 1.3)); });
    RegistrationParams p = small(30, 12);
    p.lambda = 0.5;
    auto g = build_grid({0, 1}, {0, 1.2}, p, {0.1, 0.1}, {0.1, 0.1});
    auto a1 = dp_align(y, x, g, p, 0.5);
    auto a2 = dp_align(y.scaled(3.7), x.scaled(3.7), g, p, 0.5);
    EXPECT_NEAR(a1.objective, a2.objective, 1e-12 * std::max(1.0, a1.objective));
}

TEST(DpAlign, ObjectiveMonotoneInLambda) {
    Curve y = sampled({0, 1}, 50, shape);
    Curve x = sampled({0, 1}, 50, [](double s) { return shape(s + 0.25 * s * (s - 1)); });
    RegistrationParams p = small(30, 15);
    auto g = build_grid({0, 1}, {0, 1}, p, {0.1, 0.1}, {0.1, 0.1});
    double prev = -1;
    for (double lam : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0}) {
        p.lambda = lam;
        const double obj = dp_align(y, x, g, p, 0.5).objective;
        EXPECT_GE(obj, prev - 1e-12);
        prev = obj;
    }
}

TEST(DpAlign, QuadraticWorkInWidth) {
    Curve y = sampled({0, 1}, 50, shape);
    RegistrationParams p = small(20, 10);
    DpStats s10, s20, s40;
    dp_align(y, y, build_grid({0, 1}, {0, 1}, p, {}, {}), p, 0.5, &s10);
    p.m_x = 20;
    dp_align(y, y, build_grid({0, 1}, {0, 1}, p, {}, {}), p, 0.5, &s20);
    p.m_x = 40;
    dp_align(y, y, build_grid({0, 1}, {0, 1}, p, {}, {}), p, 0.5, &s40);
    EXPECT_LE(double(s20.relaxations), 4.0 * double(s10.relaxations) * 1.01);
    EXPECT_LE(double(s40.relaxations), 4.0 * double(s20.relaxations) * 1.01);
}

TEST(OebFdtw, SelfAlignment) {
    Curve y = sampled({0, 1}, 60, shape);
    RegistrationParams p;
    p.n_t = 40;
    p.m_x = 20;
    auto a = oeb_fdtw(y, y, p, {}, {});
    EXPECT_LE(a.objective, 1e-6);
    EXPECT_DOUBLE_EQ(a.alpha, 1.0);
}

TEST(OebFdtw, RecoversKnownWarp) {
    auto q = [](double t) { return t + 0.2 * t * (t - 1); };
    auto qinv = [](double x) {  // 0.2 t^2 + 0.8 t - x = 0
        return (-0.8 + std::sqrt(0.64 + 0.8 * x)) / 0.4;
    };
    Curve y = sampled({0, 1}, 120, [](double t) { return std::sin(2 * pi * t); });
    Curve x = sampled({0, 1}, 120, [&](double s) { return std::sin(2 * pi * qinv(s)); });
    RegistrationParams p;
    p.lambda = 0.01;
    auto a = oeb_fdtw(y, x, p, {0.1, 0.1}, {0.1, 0.1});
    Curve h = a.warping();
    double err = 0;
    for (int i = 0; i <= 400; ++i) {
        const double t = a.warping_domain.lo + a.warping_domain.length() * i / 400.0;
        err = std::max(err, std::abs(h(t) - q(t)));
    }
    EXPECT_LT(err, 0.02);
}

TEST(OebFdtw, OpenEndOnTruncatedObservation) {
    Curve y = sampled({0, 1}, 100, shape);
    Curve x = sampled({0, 0.9}, 90, shape);
    RegistrationParams p;
    p.n_t = 60;
    p.m_x = 30;
    auto a = oeb_fdtw(y, x, p, {0.1, 0.1}, {0.15, 0.1});
    EXPECT_LT(a.warping_domain.hi, 1.0);
    EXPECT_NEAR(a.h.back(), 0.9, 0.9 / 29 + 1e-9);
    for (std::size_t i = 1; i < a.h.size(); ++i) EXPECT_GT(a.h[i], a.h[i - 1]);
}

TEST(Acd, SelfSampleIsZeroAndPinnedDominates) {
    Curve y = sampled({0, 1}, 60, shape);
    RegistrationParams p;
    p.n_t = 40;
    p.m_x = 20;
    EXPECT_NEAR(acd(y, {y}, p, {}, {}), 0.0, 1e-6);

    std::vector<Curve> sample;
    for (double b : {-0.3, -0.1, 0.15, 0.3, 0.45})
        sample.push_back(sampled({0, 1}, 60, [&](double s) { return shape(s + b * s * (s - 1)); }));
    Slack sl{0.1, 0.1};
    p.lambda = 0;
    const double a0 = acd(y, sample, p, sl, sl);
    p.lambda = 10;
    const double a10 = acd(y, sample, p, sl, sl);
    const double ainf = acd_pinned(y, sample, p, sl, sl);
    EXPECT_LT(a0, a10);
    EXPECT_LT(a10, ainf);
}

TEST(SelectLambda, TableRules) {
    const std::vector<double> grid{0.1, 1, 10, 100};
    auto flat = select_lambda_from_table(grid, {1, 1, 1, 1}, 1, 1, 0.01);
    EXPECT_TRUE(flat.no_phase_variation);
    EXPECT_DOUBLE_EQ(flat.lambda, 100);
    EXPECT_DOUBLE_EQ(select_lambda_from_table(grid, {1.1, 1.5, 2, 3}, 1, 3, 1.0).lambda, 100);
    // range 2, 1% -> increments up to 0.02 qualify
    EXPECT_DOUBLE_EQ(select_lambda_from_table(grid, {1.005, 1.019, 1.5, 2.5}, 1, 3, 0.01).lambda, 1);
    EXPECT_DOUBLE_EQ(select_lambda_from_table(grid, {1.5, 2, 2.5, 3}, 1, 3, 0.01).lambda, 0.1);
    EXPECT_THROW(select_lambda_from_table(grid, {1, 2, 3, 4}, 1, 4, 0.0), Error);
}

TEST(SelectLambda, AlignedSampleGivesLargestLambda) {
    Curve y = sampled({0, 1}, 60, shape);
    RegistrationParams p;
    p.n_t = 30;
    p.m_x = 12;
    auto sel = select_lambda(y, {y, y}, {0.1, 1, 10}, 0.01, p, {}, {});
    EXPECT_DOUBLE_EQ(sel.lambda, 10);
}

TEST(Procrustes, IdenticalCurves) {
    Curve y = sampled({0, 1}, 60, shape);
    RegistrationParams p;
    p.n_t = 40;
    p.m_x = 15;
    ProcrustesOptions o;
    auto tmpl = procrustes_template({y, y, y}, o, p, {0.05, 0.05}, {0.05, 0.05});
    for (int i = 0; i <= 100; ++i) EXPECT_NEAR(tmpl(i / 100.0), y(i / 100.0), 1e-3);
}

TEST(Procrustes, ImprovesAcd) {
    // the copies also differ in a local feature, which the cross-sectional mean averages out
    auto bump = [](double s) { return 0.3 * std::exp(-80 * (s - 0.5) * (s - 0.5)); };
    Curve a = sampled({0, 1}, 80, [&](double s) { return shape(s + 0.3 * s * (s - 1)) + bump(s); });
    Curve b = sampled({0, 1}, 80, [&](double s) { return shape(s - 0.3 * s * (s - 1)) - bump(s); });
    RegistrationParams p;
    p.n_t = 50;
    p.m_x = 20;
    p.lambda = 0.1;
    Slack sl{0.1, 0.1};
    ProcrustesOptions o;
    o.n_iter = 1;
    o.init = a;
    auto tmpl = procrustes_template({a, b}, o, p, sl, sl);
    EXPECT_LT(acd(tmpl, {a, b}, p, sl, sl), acd(a, {a, b}, p, sl, sl));
}

TEST(Alignment, WarpRespectsSlopeBox) {
    Curve y = sampled({0, 1}, 60, shape);
    Curve x = sampled({0, 1}, 60, [](double s) { return shape(s + 0.4 * s * (s - 1)); });
    RegistrationParams p;
    p.s_min = 0.5;
    p.s_max = 1.8;
    auto a = oeb_fdtw(y, x, p, {0.1, 0.1}, {0.1, 0.1});
    for (std::size_t i = 1; i < a.t.size(); ++i) {
        const double s = (a.h[i] - a.h[i - 1]) / (a.t[i] - a.t[i - 1]);
        EXPECT_GE(s, 0.5 * (1 - 1e-9));
        EXPECT_LE(s, 1.8 * (1 + 1e-9));
    }
}
