#pragma once

// Synthetic IC/OC functional observations: amplitude bumps composed with misaligning inverse warps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frtm/curves.hpp"

namespace frtm {

enum class Scenario { S1, S2 };
enum class Shift { None, A, B, C };

struct GenConfig {
    Scenario scenario = Scenario::S1;
    int model = 1;  // misalignment level M1..M3
    double sigma_a = 0.15;
    double sigma_b = 0.2;
    double sigma_e = 0.2;
    double sigma_end = 0.25;
    double sigma_be = 0.01;
    double mu_end = 10;
    double mu_a = 1;
    Shift shift = Shift::None;
    double d = 0;
    double x_star_out = 0.3;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;  // separates independent samples drawn with one seed
    int n_points = 100;

    void validate() const;
};

/// Standard scenario/misalignment presets; names "S1-M1" .. "S2-M3", optionally followed by "-Shift{A,B,C}-<x*_out>-<d>".
GenConfig preset(const std::string& name);
std::string preset_name(const GenConfig& config);

struct ShiftParameters {
    double delta_g = 0;
    double delta_h2 = 0;
    double delta_end = 0;
};

/// Shift sizes by scenario, shift, x*_out and severity.
ShiftParameters shift_parameters(Scenario scenario, Shift shift, double x_star_out, double d);

/// A_i(t) for the given a_i.
double amplitude(double t, double a);

/// P_i at template coordinate tau = tau_i(x): tau + b tau (tau - 1) [- 0.2 b sin(3 pi tau)^2 for S2].
double warp_profile(Scenario scenario, double tau, double b);
/// h_i^{-1}(x) for the IC model.
double warp_inverse(Scenario scenario, double x, double T, double t_b, double t_e, double b);
/// Largest admissible |b| for strict monotonicity.
double b_bound(Scenario scenario);

/// Generating parameters of one curve.
struct CurveTruth {
    Scenario scenario = Scenario::S1;
    double T = 0, a = 0, b = 0, s = 0, e = 0, t_b = 0, t_e = 0;
    Shift shift = Shift::None;
    ShiftParameters delta;
    double x_star_out = 0;
    double x_out = 0, t_out = 0, T_out = 0;  // OC only

    double domain_end() const { return shift == Shift::None ? T : T_out; }
    /// Generating inverse warp (template time of observed time x), OC correction included.
    double inverse_warp(double x) const;
    /// Noise-free amplitude g_i at template time t.
    double amplitude_at(double t) const;
    /// Observed time at which the OC behaviour starts (absent for IC curves).
    std::optional<double> change_point() const;
};

struct SimulatedCurve {
    SampledCurve samples;
    CurveTruth truth;
};

/// Curve `index` of the sample defined by the config; independent of how many others are drawn.
SimulatedCurve draw_curve(const GenConfig& config, std::uint64_t index);
std::vector<SimulatedCurve> draw_ic(const GenConfig& config, int n);
std::vector<SimulatedCurve> draw_oc(const GenConfig& config, int n);

/// True when the inverse warp increases strictly on a 1000-point scan of its domain.
bool monotone_scan(const CurveTruth& truth, int points = 1000);

}  // namespace frtm
