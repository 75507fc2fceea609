#pragma once

// T2 and SPE control charts over the monitoring grid, KDE control limits and FAR/TDR.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "frtm/curves.hpp"
#include "frtm/mfpca.hpp"
#include "frtm/realtime.hpp"

namespace frtm {

/// Per-chart level 1 - (1 - alpha)^(1/2) for the two charts.
double sidak(double alpha);

double t2(const Eigen::VectorXd& scores, const Eigen::VectorXd& eigenvalues);
double spe(const MixedObservation& z, const MixedObservation& z_hat, const Weights& weights);

/// mFPCA models over a grid of truncation times of the template domain.
struct ModelFamily {
    Eigen::VectorXd times;
    std::vector<MfpcaModel> models;

    /// Largest truncation time not exceeding t (the first one when t precedes them all).
    std::size_t index_for(double t) const;
};

/// Evenly spaced truncation times from a_y + start_fraction |D_Y| to b_y.
Eigen::VectorXd truncation_times(Interval template_domain, int count, double start_fraction = 0.05);
/// Monitoring grid from a_m + start_fraction |D_m| to b_m.
Eigen::VectorXd monitoring_grid(Interval monitoring_domain, int count, double start_fraction = 0.05);

struct ControlLimits {
    double alpha = 0.05;
    double alpha_star = 0;
    Eigen::VectorXd t2;
    Eigen::VectorXd spe;
    std::vector<int> pooled;  // neighbouring grid points merged to reach 20 tuning values
    int bandwidth_fallbacks = 0;
};

/// Pointwise (1 - alpha*) KDE quantiles of tuning statistics; samples[g] holds the values at grid point g.
/// Points with fewer than 20 values pool the nearest grid points until 20 are available.
ControlLimits fit_limits(const std::vector<std::vector<double>>& t2_samples,
                         const std::vector<std::vector<double>>& spe_samples, double alpha);

/// Everything needed to register one curve in real time over the monitoring grid.
struct TrackingSetup {
    Curve tmpl;
    Band band;
    RealtimeParams params;
    Eigen::VectorXd grid;
    Interval monitoring_domain;
    double smoothing = 1.0;  // relative roughness penalty for prefix fits
};

struct TrackStep {
    double x = 0;
    bool observed = false;  // some sample lies at or beyond x
    bool ok = false;
    bool relaxed = false;
    double t_star = 0;
    std::string error;
    std::optional<CompletedPair> pair;
};

/// Real-time registration of the prefixes of a curve at each monitoring grid point.
std::vector<TrackStep> track_curve(const SampledCurve& curve, const TrackingSetup& setup);

struct Statistics {
    double t2 = 0;
    double spe = 0;
    std::size_t model = 0;
};

/// Mixed representation of a completed pair on [a_y, t] for the model grid.
MixedObservation pair_on(const CompletedPair& pair, double t, int quadrature);

Statistics statistics_at(const ModelFamily& family, const CompletedPair& pair, double t_star);

struct ControlScheme {
    Eigen::VectorXd grid;
    ControlLimits limits;
    ModelFamily family;
};

struct ChartPoint {
    double x = 0;
    bool monitorable = false;
    double t_star = 0;
    double t2 = 0, spe = 0;
    double t2_limit = 0, spe_limit = 0;
    bool alarm = false;
    std::string error;
};

struct MonitoringResult {
    std::string curve_id;
    std::vector<ChartPoint> points;  // observed grid points only
    std::optional<double> first_alarm_x;
    std::optional<double> change_point_x;
    double domain_end = 0;  // last observed abscissa of the curve
    std::string error;  // set when the whole curve could not be monitored
};

/// Charts of tracked steps against the scheme.
MonitoringResult chart(const std::vector<TrackStep>& steps, const ControlScheme& scheme);
MonitoringResult monitor(const SampledCurve& curve, const TrackingSetup& setup, const ControlScheme& scheme);

struct FarTdr {
    std::optional<double> far;
    std::optional<double> tdr;
};

/// Mean per-curve flagged fractions before (FAR) and at/after (TDR) the change point. A result's own
/// change_point_x takes precedence over the shared one.
FarTdr far_tdr(const std::vector<MonitoringResult>& results, std::optional<double> change_point_x = std::nullopt);

}  // namespace frtm
