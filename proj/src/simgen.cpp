#include "frtm/simgen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <regex>

#include "frtm/parallel.hpp"

namespace frtm {

namespace {

constexpr std::uint64_t kStreamTag = 0x5eed'f17e'0000'0001ULL;

struct Table1 {
    double sigma_b, sigma_end, sigma_be;
};

Table1 table1(int model) {
    switch (model) {
        case 1: return {0.2, 0.25, 0.01};
        case 2: return {0.05, 0.0625, 0.0025};
        case 3: return {0.025, 0.03125, 0.00125};
    }
    throw Error(ErrorKind::InvalidInput, "misalignment model must be 1, 2 or 3");
}

// Root of warp_profile(tau) = target on [0, 1]; the profile runs from 0 to 1 monotonically.
double solve_profile(Scenario sc, double b, double target) {
    if (target <= 0) return 0;
    if (target >= 1) return 1;
    double lo = 0, hi = 1;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (warp_profile(sc, mid, b) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

const char* shift_name(Shift s) {
    switch (s) {
        case Shift::None: return "None";
        case Shift::A: return "A";
        case Shift::B: return "B";
        case Shift::C: return "C";
    }
    return "None";
}

}  // namespace

void GenConfig::validate() const {
    for (double v : {sigma_a, sigma_b, sigma_e, sigma_end, sigma_be})
        if (!(v >= 0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "standard deviations must be >= 0");
    if (!(mu_end > 0)) throw Error(ErrorKind::InvalidInput, "mu_end must be positive");
    if (n_points < 4) throw Error(ErrorKind::InvalidInput, "need at least 4 points per curve");
    if (model < 1 || model > 3) throw Error(ErrorKind::InvalidInput, "misalignment model must be 1, 2 or 3");
    if ((shift == Shift::None) != (d == 0))
        throw Error(ErrorKind::InvalidInput, "severity d must be 0 exactly when there is no shift");
    if (shift != Shift::None) {
        if (!(d > 0 && d <= 1)) throw Error(ErrorKind::InvalidInput, "severity d must lie in (0, 1]");
        if (!(x_star_out > 0 && x_star_out < 1)) throw Error(ErrorKind::InvalidInput, "x*_out must lie in (0, 1)");
    }
}

GenConfig preset(const std::string& name) {
    static const std::regex re(R"(S([12])-M([123])(?:-Shift([ABC])-([0-9.]+)(?:-([0-9.]+))?)?)");
    std::smatch m;
    if (!std::regex_match(name, m, re)) throw Error(ErrorKind::InvalidInput, "unknown preset '" + name + "'");
    GenConfig c;
    c.scenario = m[1] == "1" ? Scenario::S1 : Scenario::S2;
    c.model = std::stoi(m[2]);
    const Table1 t = table1(c.model);
    c.sigma_a = 0.15;
    c.sigma_b = t.sigma_b;
    c.sigma_e = 0.2;
    c.sigma_end = t.sigma_end;
    c.sigma_be = t.sigma_be;
    c.mu_end = 10;
    c.mu_a = 1;
    if (m[3].matched) {
        c.shift = m[3] == "A" ? Shift::A : m[3] == "B" ? Shift::B : Shift::C;
        c.x_star_out = std::stod(m[4]);
        c.d = m[5].matched ? std::stod(m[5]) : 1.0;
    }
    return c;
}

std::string preset_name(const GenConfig& c) {
    std::string s = std::string(c.scenario == Scenario::S1 ? "S1" : "S2") + "-M" + std::to_string(c.model);
    if (c.shift != Shift::None) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "-Shift%s-%g-%g", shift_name(c.shift), c.x_star_out, c.d);
        s += buf;
    }
    return s;
}

ShiftParameters shift_parameters(Scenario sc, Shift shift, double xo, double d) {
    if (shift == Shift::None) return {};
    const bool early = std::abs(xo - 0.3) < 1e-12;
    if (!early && std::abs(xo - 0.6) > 1e-12) throw Error(ErrorKind::InvalidInput, "x*_out must be 0.3 or 0.6");
    if (!(d >= 0 && d <= 1)) throw Error(ErrorKind::InvalidInput, "severity d must lie in [0, 1]");
    const bool s1 = sc == Scenario::S1;
    switch (shift) {
        case Shift::A:
            if (early) return {0, (s1 ? 1.0 : 1.5) * d, 2 * d};
            return {0, (s1 ? 1.5 : 2.0) * d, 4 * d};
        case Shift::B: return {(early ? 20.0 : 80.0) * d, 0, 0};
        case Shift::C:
            if (early) return {10 * d, (s1 ? 0.5 : 0.75) * d, d};
            return {40 * d, (s1 ? 0.75 : 1.0) * d, 2 * d};
        case Shift::None: break;
    }
    return {};
}

double amplitude(double t, double a) {
    auto g = [t](double c, double w) { return std::exp(-w * (t - c) * (t - c)); };
    return a * (15 * g(0.7, 20) - 5 * g(0.45, 50) + 6 * g(0.3, 100) - 6 * g(0.2, 150) + 5 * g(0.15, 200));
}

double warp_profile(Scenario sc, double tau, double b) {
    double q = tau * (tau - 1);
    if (sc == Scenario::S2) {
        const double s = std::sin(3 * std::numbers::pi * tau);
        q -= 0.2 * s * s;
    }
    return tau + b * q;
}

double warp_inverse(Scenario sc, double x, double T, double t_b, double t_e, double b) {
    return warp_profile(sc, x * (t_e - t_b) / T + t_b, b);
}

double b_bound(Scenario sc) { return sc == Scenario::S1 ? 1.0 : 0.367; }

double CurveTruth::inverse_warp(double x) const {
    if (shift == Shift::None || x < x_out) return warp_inverse(scenario, x, T, t_b, t_e, b);
    const double tau_out = T * ((x - x_out) / (T_out - x_out) * (1 - x_out / T) + x_out / T);
    const double tau = tau_out * (t_e - t_b) / T + t_b;
    const double to = x_star_out;
    const double h1 = (delta.delta_h2 - delta.delta_h2 * to) / (1 - to * to);
    const double h3 = delta.delta_h2 * to - h1 * to * to;
    return warp_inverse(scenario, tau_out, T, t_b, t_e, b) + tau * tau * h1 - tau * delta.delta_h2 + h3;
}

double CurveTruth::amplitude_at(double t) const {
    double g = amplitude(t, a);
    if (shift != Shift::None && t >= t_out) g += t * delta.delta_g - delta.delta_g * t_out;
    return g;
}

std::optional<double> CurveTruth::change_point() const {
    if (shift == Shift::None) return std::nullopt;
    return x_out;
}

bool monotone_scan(const CurveTruth& truth, int points) {
    const double end = truth.domain_end();
    double prev = truth.inverse_warp(0);
    for (int i = 1; i < points; ++i) {
        const double v = truth.inverse_warp(end * i / (points - 1));
        if (!(v > prev)) return false;
        prev = v;
    }
    return true;
}

SimulatedCurve draw_curve(const GenConfig& c, std::uint64_t index) {
    std::seed_seq seq{std::uint32_t(c.seed), std::uint32_t(c.seed >> 32), std::uint32_t(c.stream),
                      std::uint32_t(c.stream >> 32), std::uint32_t(index), std::uint32_t(index >> 32),
                      std::uint32_t(kStreamTag), std::uint32_t(kStreamTag >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> z(0.0, 1.0);

    CurveTruth t;
    t.scenario = c.scenario;
    t.T = c.mu_end + c.sigma_end * z(rng);
    if (!(t.T > 0)) throw Error(ErrorKind::InvalidInput, "drawn a nonpositive duration");
    t.a = c.mu_a + c.sigma_a * z(rng);
    t.b = c.sigma_b * z(rng);
    const double bound = b_bound(c.scenario);
    auto monotone = [&](double b) {
        double prev = warp_profile(c.scenario, 0, b);
        for (int i = 1; i < 1000; ++i) {
            const double v = warp_profile(c.scenario, i / 999.0, b);
            if (!(v > prev)) return false;
            prev = v;
        }
        return true;
    };
    while (!(std::abs(t.b) < bound && monotone(t.b))) t.b *= 0.95;
    t.s = 0.05 + c.sigma_be * z(rng);
    t.e = 0.95 + c.sigma_be * z(rng);
    t.t_b = solve_profile(c.scenario, t.b, t.s);
    t.t_e = solve_profile(c.scenario, t.b, t.e);
    if (!(t.t_e > t.t_b)) throw Error(ErrorKind::InvalidInput, "drawn t_e <= t_b");

    t.shift = c.shift;
    t.x_star_out = c.x_star_out;
    t.T_out = t.T;
    if (c.shift != Shift::None) {
        t.delta = shift_parameters(c.scenario, c.shift, c.x_star_out, c.d);
        t.x_out = (c.x_star_out - t.t_b) / (t.t_e - t.t_b) * t.T;
        t.t_out = warp_inverse(c.scenario, t.x_out, t.T, t.t_b, t.t_e, t.b);
        t.T_out = t.T + t.delta.delta_end;
    }

    SimulatedCurve out;
    out.truth = t;
    const double end = t.domain_end();
    out.samples.abscissae = Eigen::VectorXd::LinSpaced(c.n_points, 0, end);
    out.samples.values.resize(c.n_points);
    for (int j = 0; j < c.n_points; ++j) {
        const double x = out.samples.abscissae(j);
        out.samples.values(j) = t.amplitude_at(t.inverse_warp(x)) + c.sigma_e * z(rng);
    }
    return out;
}

std::vector<SimulatedCurve> draw_ic(const GenConfig& c, int n) {
    c.validate();
    if (c.shift != Shift::None) throw Error(ErrorKind::InvalidInput, "draw_ic needs shift None");
    std::vector<SimulatedCurve> out(std::size_t(std::max(n, 0)));
    parallel_for(out.size(), [&](std::size_t i) { out[i] = draw_curve(c, i); });
    return out;
}

std::vector<SimulatedCurve> draw_oc(const GenConfig& c, int n) {
    c.validate();
    if (c.shift == Shift::None) throw Error(ErrorKind::InvalidInput, "draw_oc needs a shift");
    std::vector<SimulatedCurve> out(std::size_t(std::max(n, 0)));
    parallel_for(out.size(), [&](std::size_t i) { out[i] = draw_curve(c, i); });
    return out;
}

}  // namespace frtm
