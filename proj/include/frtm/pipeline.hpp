#pragma once

// Phase I estimation (template, lambda, band, per-t mFPCA family, limits) and Phase II monitoring.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "frtm/monitoring.hpp"

namespace frtm {

struct PipelineConfig {
    RealtimeParams realtime;  // registration.lambda is replaced by the ACD choice
    double alpha = 0.05;
    double var_threshold = 0.9;
    double band_b = 0.01;
    double acd_delta = 0.01;
    std::vector<double> lambda_grid{0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1, 3, 10};
    int lambda_subsample = 0;  // curves used for the ACD table; 0 = all training curves
    int procrustes_iterations = 2;
    std::uint64_t seed = 0;
    int models = 50;
    int grid_points = 50;
    double start_fraction = 0.05;
    double slack_fraction = 0.1;
    double penalty_divisor = 1.0;  // median GCV penalty is divided by this for every fit
    int quadrature = kDefaultQuadrature;

    void validate() const;
};

struct Phase1Artifacts {
    PipelineConfig config;
    double smoothing = 1.0;  // relative roughness penalty
    Curve tmpl;
    LambdaSelection lambda;
    double slope_target = 1.0;
    Interval monitoring_domain;
    TrackingSetup setup;
    ControlScheme scheme;
    // tuning statistics per monitoring grid point, as fed to fit_limits
    std::vector<std::vector<double>> tuning_t2;
    std::vector<std::vector<double>> tuning_spe;
    int fallback_pairs = 0;  // training pairs taken from the offline alignment
    int failed_steps = 0;    // training + tuning steps whose registration failed

    /// Throws InvalidInput when the invariants (truncation times in D_Y, grid in D_m) do not hold.
    void validate() const;
};

Phase1Artifacts phase1(const std::vector<SampledCurve>& training, const std::vector<SampledCurve>& tuning,
                       const PipelineConfig& config);

struct Phase2Summary {
    int curves = 0;
    int failed = 0;
    FarTdr rates;
};

struct Phase2Output {
    std::vector<MonitoringResult> results;
    std::optional<Phase2Summary> summary;  // absent for an empty batch
};

/// Monitors every curve; a failure is isolated to its own result.
/// `change_points` (per curve) or `change_point_x` (shared) split FAR and TDR.
Phase2Output phase2(const Phase1Artifacts& artifacts, const std::vector<SampledCurve>& curves,
                    std::optional<double> change_point_x = std::nullopt,
                    const std::vector<std::optional<double>>& change_points = {},
                    const std::vector<std::string>& ids = {});

}  // namespace frtm
