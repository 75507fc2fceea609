#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "frtm/simgen.hpp"

using namespace frtm;

TEST(Amplitude, ClosedForm) {
    const double v = amplitude(0.7, 1.0);
    // hand evaluation of the four tails at t = 0.7
    const double tails = -5 * std::exp(-50 * 0.0625) + 6 * std::exp(-100 * 0.16) - 6 * std::exp(-150 * 0.25) +
                         5 * std::exp(-200 * 0.3025);
    EXPECT_NEAR(v, 15 + tails, 1e-12);
    EXPECT_NEAR(v, 14.7803, 1e-4);
    for (double t : {0.0, 0.3, 0.55, 1.0}) {
        EXPECT_EQ(amplitude(t, 0.0), 0.0);
        EXPECT_NEAR(amplitude(t, 2.0), 2 * amplitude(t, 1.0), 1e-14);
    }
}

TEST(WarpInverse, Forms) {
    // b = 0: affine from t_b to t_e
    EXPECT_NEAR(warp_inverse(Scenario::S1, 0, 10, 0.05, 0.95, 0), 0.05, 1e-15);
    EXPECT_NEAR(warp_inverse(Scenario::S1, 5, 10, 0.05, 0.95, 0), 0.5, 1e-15);
    EXPECT_NEAR(warp_inverse(Scenario::S2, 10, 10, 0.05, 0.95, 0), 0.95, 1e-15);
    // S1, b = 0.5 at tau = 0.5: 0.5 + 0.5 * 0.5 * (-0.5)
    EXPECT_NEAR(warp_profile(Scenario::S1, 0.5, 0.5), 0.375, 1e-15);
    EXPECT_NEAR(warp_inverse(Scenario::S1, 5, 10, 0, 1, 0.5), 0.375, 1e-15);
    // S2 with b = 0.3 is strictly increasing
    double prev = warp_profile(Scenario::S2, 0, 0.3);
    for (int i = 1; i < 1000; ++i) {
        const double v = warp_profile(Scenario::S2, i / 999.0, 0.3);
        ASSERT_GT(v, prev);
        prev = v;
    }
    EXPECT_DOUBLE_EQ(b_bound(Scenario::S2), 0.367);
}

TEST(Presets, Table1) {
    GenConfig m1 = preset("S1-M1");
    EXPECT_EQ(m1.scenario, Scenario::S1);
    EXPECT_EQ(m1.sigma_a, 0.15);
    EXPECT_EQ(m1.sigma_b, 0.2);
    EXPECT_EQ(m1.sigma_e, 0.2);
    EXPECT_EQ(m1.sigma_end, 0.25);
    EXPECT_EQ(m1.sigma_be, 0.01);
    EXPECT_EQ(m1.mu_end, 10);
    EXPECT_EQ(m1.mu_a, 1);
    GenConfig m2 = preset("S2-M2");
    EXPECT_EQ(m2.scenario, Scenario::S2);
    EXPECT_EQ(m2.sigma_b, 0.05);
    EXPECT_EQ(m2.sigma_end, 0.0625);
    EXPECT_EQ(m2.sigma_be, 0.0025);
    GenConfig m3 = preset("S1-M3");
    EXPECT_EQ(m3.sigma_b, 0.025);
    EXPECT_EQ(m3.sigma_end, 0.03125);
    EXPECT_EQ(m3.sigma_be, 0.00125);
    GenConfig oc = preset("S1-M1-ShiftB-0.3-0.5");
    EXPECT_EQ(oc.shift, Shift::B);
    EXPECT_EQ(oc.x_star_out, 0.3);
    EXPECT_EQ(oc.d, 0.5);
    EXPECT_EQ(preset_name(oc), "S1-M1-ShiftB-0.3-0.5");
    EXPECT_THROW(preset("S3-M1"), Error);
}

TEST(Presets, Table2) {
    auto a = shift_parameters(Scenario::S1, Shift::A, 0.3, 1);
    EXPECT_EQ(a.delta_g, 0);
    EXPECT_EQ(a.delta_h2, 1);
    EXPECT_EQ(a.delta_end, 2);
    auto b = shift_parameters(Scenario::S2, Shift::B, 0.6, 0.5);
    EXPECT_EQ(b.delta_g, 40);
    EXPECT_EQ(b.delta_h2, 0);
    auto c = shift_parameters(Scenario::S2, Shift::C, 0.6, 0.25);
    EXPECT_EQ(c.delta_g, 10);
    EXPECT_EQ(c.delta_h2, 0.25);
    EXPECT_EQ(c.delta_end, 0.5);
    auto a2 = shift_parameters(Scenario::S2, Shift::A, 0.3, 0.5);
    EXPECT_EQ(a2.delta_h2, 0.75);
    EXPECT_THROW(shift_parameters(Scenario::S1, Shift::A, 0.45, 1), Error);
}

TEST(DrawIc, NoiselessAffine) {
    GenConfig c = preset("S1-M1");
    c.sigma_e = 0;
    c.sigma_b = 0;
    c.sigma_a = 0;
    auto s = draw_ic(c, 3);
    for (const auto& sc : s) {
        EXPECT_EQ(sc.truth.b, 0);
        EXPECT_EQ(sc.truth.a, 1);
        EXPECT_EQ(sc.samples.size(), 100);
        EXPECT_NEAR(sc.samples.abscissae(99), sc.truth.T, 1e-12);
        for (int j = 0; j < 100; ++j) {
            const double x = sc.samples.abscissae(j);
            const double tau = x * (sc.truth.t_e - sc.truth.t_b) / sc.truth.T + sc.truth.t_b;
            EXPECT_NEAR(sc.samples.values(j), amplitude(tau, 1.0), 1e-12);
        }
        EXPECT_NEAR(sc.truth.inverse_warp(0), sc.truth.s, 1e-10);
        EXPECT_NEAR(sc.truth.inverse_warp(sc.truth.T), sc.truth.e, 1e-10);
    }
}

TEST(DrawIc, BoundaryConditions) {
    auto s = draw_ic(preset("S2-M1"), 50);
    for (const auto& sc : s) {
        EXPECT_NEAR(sc.truth.inverse_warp(0), std::clamp(sc.truth.s, 0.0, 1.0), 1e-10);
        EXPECT_NEAR(sc.truth.inverse_warp(sc.truth.T), std::clamp(sc.truth.e, 0.0, 1.0), 1e-10);
        EXPECT_LT(std::abs(sc.truth.b), 0.367);
        EXPECT_TRUE(monotone_scan(sc.truth));
    }
}

TEST(DrawIc, MomentsM1) {
    auto s = draw_ic(preset("S1-M1"), 1000);
    double mt = 0, ma = 0, va = 0;
    for (const auto& sc : s) {
        mt += sc.truth.T / 1000;
        ma += sc.truth.a / 1000;
    }
    for (const auto& sc : s) va += (sc.truth.a - ma) * (sc.truth.a - ma) / 999;
    EXPECT_NEAR(mt, 10, 0.05);
    EXPECT_NEAR(std::sqrt(va), 0.15, 0.02);
    for (const auto& sc : s) EXPECT_TRUE(monotone_scan(sc.truth));
}

TEST(DrawIc, Reproducible) {
    GenConfig c = preset("S1-M2");
    c.seed = 99;
    auto a = draw_ic(c, 20), b = draw_ic(c, 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].samples.values, b[i].samples.values);
        EXPECT_EQ(a[i].samples.abscissae, b[i].samples.abscissae);
    }
    // curve i does not depend on the sample size
    auto c5 = draw_ic(c, 5);
    EXPECT_EQ(c5[4].samples.values, a[4].samples.values);
    c.stream = 1;
    EXPECT_NE(draw_ic(c, 1)[0].samples.values, a[0].samples.values);
}

TEST(DrawOc, ShiftBKeepsWarp) {
    GenConfig ic = preset("S1-M1");
    GenConfig oc = preset("S1-M1-ShiftB-0.3-1");
    auto a = draw_ic(ic, 10);
    auto b = draw_oc(oc, 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].samples.abscissae, b[i].samples.abscissae);
        for (double x = 0; x <= a[i].truth.T; x += 0.37)
            EXPECT_NEAR(b[i].truth.inverse_warp(x), a[i].truth.inverse_warp(x), 1e-12);
        // amplitude ramp only after the onset
        for (int j = 0; j < 100; ++j) {
            const double x = a[i].samples.abscissae(j);
            const double t = a[i].truth.inverse_warp(x);
            const double ramp = t >= b[i].truth.t_out ? 20 * (t - b[i].truth.t_out) : 0.0;
            EXPECT_NEAR(b[i].samples.values(j) - a[i].samples.values(j), ramp, 1e-9);
        }
    }
}

TEST(DrawOc, Continuity) {
    for (const char* name : {"S1-M1-ShiftA-0.3-1", "S2-M1-ShiftC-0.6-1", "S1-M2-ShiftC-0.3-0.75"}) {
        auto s = draw_oc(preset(name), 20);
        for (const auto& sc : s) {
            const auto& t = sc.truth;
            // warp continuity at x_out and amplitude continuity at t_out
            const double eps = 1e-9;
            EXPECT_NEAR(t.inverse_warp(t.x_out - eps), t.inverse_warp(t.x_out), 1e-7) << name;
            EXPECT_NEAR(t.amplitude_at(t.t_out - eps), t.amplitude_at(t.t_out), 1e-6) << name;
            EXPECT_NEAR(t.inverse_warp(t.x_out), t.t_out, 1e-12);
            EXPECT_TRUE(monotone_scan(t)) << name;
            EXPECT_NEAR(sc.samples.abscissae(99), t.T_out, 1e-12);
            EXPECT_NEAR(t.T_out - t.T, t.delta.delta_end, 1e-12);
            ASSERT_TRUE(t.change_point());
            EXPECT_NEAR(*t.change_point(), t.x_out, 0);
        }
    }
}

TEST(DrawOc, VanishingSeverityReproducesIc) {
    auto a = draw_ic(preset("S1-M1"), 5);
    GenConfig oc = preset("S1-M1-ShiftC-0.3-1");
    oc.d = 1e-9;
    auto b = draw_oc(oc, 5);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_LT((a[i].samples.values - b[i].samples.values).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(DrawOc, Validation) {
    GenConfig c = preset("S1-M1");
    EXPECT_THROW(draw_oc(c, 3), Error);
    c.shift = Shift::A;
    EXPECT_THROW(draw_oc(c, 3), Error);  // d = 0 with a shift
    c.d = 0.5;
    c.x_star_out = 0.45;
    EXPECT_THROW(draw_oc(c, 3), Error);
    EXPECT_TRUE(draw_ic(preset("S1-M1"), 0).empty());
}
