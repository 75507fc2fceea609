#pragma once

// Real-time registration of partially observed curves, band constraints,
// and completion of registered pairs to the template domain.

#include <Eigen/Dense>

#include <vector>

#include "frtm/curves.hpp"
#include "frtm/registration.hpp"

namespace frtm {

/// Warping extended affinely beyond its estimated domain with slope
/// c = |D_X| / |D_h|, continuous at both stitch points.
class CompletedWarp {
public:
    CompletedWarp() = default;
    explicit CompletedWarp(const Alignment& alignment);

    double operator()(double t) const;
    double derivative(double t) const;
    /// Template time at which the warp reaches observed time x.
    double inverse(double x) const;

    Interval estimated_domain() const { return {a_, b_}; }
    double continuation_slope() const { return c_; }
    const Curve& core() const { return core_; }

private:
    Curve core_;
    double a_ = 0, b_ = 1, ha_ = 0, hb_ = 1, c_ = 1;
};

/// Registered curve and warping on the full template domain.
class CompletedPair {
public:
    CompletedPair() = default;
    CompletedPair(const Alignment& alignment, const Curve& tmpl, const Curve& obs);

    Interval domain() const { return domain_; }
    double registered(double t) const;
    double warping(double t) const { return warp_(t); }
    double warping_derivative(double t) const { return warp_.derivative(t); }
    const CompletedWarp& warp() const { return warp_; }

    /// Registered curve sampled on n points and re-interpolated.
    Curve registered_curve(int n = 201) const;
    /// Warping sampled on n points, monotone interpolant.
    Curve warping_curve(int n = 201) const;

private:
    CompletedWarp warp_;
    Curve tmpl_;
    Curve obs_;
    Interval domain_;
    double left_shift_ = 0, right_shift_ = 0;
};

/// X*_{i,c}, h_{i,c}: template-shifted registered curve and affine warp continuation.
CompletedPair impute_complete(const Alignment& alignment, const Curve& tmpl, const Curve& obs);

/// Pointwise quantile envelope of inverse warpings over the monitoring grid.
struct Band {
    Eigen::VectorXd grid;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    double b_level = 0.01;
    Interval template_domain;
    Slack start_slack;  // from the same quantiles at the left boundaries

    double lower_at(double x) const;
    double upper_at(double x) const;
};

/// Empirical type-7 quantile of a sample (p in [0, 1]).
double quantile(std::vector<double> values, double p);

Band fit_band(const std::vector<Alignment>& warpings, double b, const Eigen::VectorXd& monitoring_grid,
              Interval template_domain, Interval monitoring_domain);

struct RealtimeParams {
    RegistrationParams registration;
    bool adaptive = true;
    double delta_Delta = 0.1;
    double delta_v = 0.03;  // relative to |D_m|
    double delta_d = 0.05;
    double delta_c = 0.04;  // relative to |D_Y|
    double slope_window = 0.05;  // left neighbourhood (fraction of the warp domain) for median slopes
};

struct RealtimeStep {
    double x = 0;
    double reached = 0;  // right end of the partial observation, h(t_star)
    double t_star = 0;
    double slope = 0;
    double value_gap = 0;
    double slope_gap = 0;
    bool stable = false;
};

/// Per-curve registration history driving the adaptive band.
class RealtimeState {
public:
    RealtimeState() = default;
    RealtimeState(const RealtimeParams& params, Interval monitoring_domain, Interval template_domain, double dx);

    void record(double x, double t_star, const CompletedWarp& warp);
    void record(double x, double reached, double t_star, const CompletedWarp& warp);
    const std::vector<RealtimeStep>& history() const { return history_; }
    bool relaxation_active() const { return relaxed_; }
    void set_relaxed(bool r) { relaxed_ = r; }
    const RealtimeParams& params() const { return params_; }
    double dx() const { return dx_; }
    Interval monitoring_domain() const { return dm_; }
    Interval template_domain() const { return dy_; }

private:
    RealtimeParams params_;
    Interval dm_, dy_;
    double dx_ = 0;
    std::vector<RealtimeStep> history_;
    bool relaxed_ = false;
};

/// Median of h' over the last `window` fraction of the estimated warp domain.
double terminal_slope(const CompletedWarp& warp, double window);

/// Band limits at x, relaxed around the linear continuation when recent registrations were stable.
std::pair<double, double> adaptive_band(RealtimeState& state, const Band& base, double x);

struct PartialAlignment {
    Alignment alignment;
    double t_star = 0;
};

/// Closed-end alignment of a partial observation (domain [a_x, x*]) to the template
/// truncated at t* in [lower, upper].
PartialAlignment register_partial(const Curve& tmpl, const Curve& partial, double lower, double upper,
                                  const RealtimeParams& params, Slack start_slack, DpStats* stats = nullptr);

}  // namespace frtm
