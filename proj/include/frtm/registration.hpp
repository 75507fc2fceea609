#pragma once

// Open-end/open-begin functional dynamic time warping (OEB-FDTW).

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "frtm/curves.hpp"
#include "frtm/path_solver.hpp"

namespace frtm {

struct Slack {
    double t = 0.0;  // template-time mismatch allowed at the boundary
    double x = 0.0;  // observed-time mismatch allowed at the boundary
};

struct RegistrationParams {
    double lambda = 0.0;
    double s_min = 0.01;
    double s_max = 1000.0;
    int n_t = 100;
    int m_x = 50;
    int refinement_rounds = 3;
    std::vector<double> alpha_grid{0.0, 0.5, 1.0};
    std::optional<double> slope_target;  // T_i/T_0; defaults to |D_X| / |D_Y|

    void validate() const;
};

/// Discretized search space for h(t_j).
struct WarpGrid {
    Interval template_domain;
    Interval obs_domain;
    Eigen::VectorXd t;      // n_t + 1 stages
    Eigen::VectorXd lower;  // l_j
    Eigen::VectorXd upper;  // u_j
    Eigen::MatrixXd tau;    // stages x m_x, linearly spaced in [l_j, u_j]
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> start;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> end;
    Eigen::Matrix<bool, Eigen::Dynamic, 1> feasible;  // l_j <= u_j
    Slack start_slack;
    Slack end_slack;
    // Closed-end variant: paths may end only on the top node (h = obs_domain.hi) of these stages,
    // plus anywhere on the last stage when open_end_last is set. Empty = default slack rule.
    std::vector<Eigen::Index> closed_end_stages;
    bool open_end_last = false;

    Eigen::Index stages() const { return t.size(); }
    Eigen::Index width() const { return tau.cols(); }
    /// Re-spaces stage j on [lo, hi] (start/end masks recomputed by the caller if needed).
    void set_stage(Eigen::Index j, double lo, double hi);
};

/// Grid bounds for the slope box [s_min, s_max] and boundary slacks.
WarpGrid build_grid(Interval template_domain, Interval obs_domain, const RegistrationParams& params,
                    Slack start_slack, Slack end_slack);

/// Start/end node sets: paths begin within the start slacks and end within the end slacks
/// (or on the closed-end stages when set).
void apply_boundary_masks(WarpGrid& grid);

/// Sup-norms normalizing the amplitude and derivative terms.
struct Normalizers {
    double y = 1, dy = 1, x = 1, dx = 1;
};

Normalizers compute_normalizers(const Curve& tmpl, Interval template_domain, const Curve& obs,
                                Interval obs_domain);

struct Alignment {
    Interval warping_domain;
    std::vector<double> t;  // knot times t_j
    std::vector<double> h;  // h(t_j), strictly increasing
    double alpha = 1.0;
    double lambda = 0.0;
    double objective = 0.0;   // average of F + lambda R along the path
    double f_average = 0.0;   // average of F alone
    double slope_target = 1.0;
    Interval template_domain;
    Interval obs_domain;
    Eigen::Index first_stage = 0;  // grid stage of t.front()

    /// Monotone (shape-preserving) interpolant of the knots.
    Curve warping() const;
    bool empty() const { return t.size() < 2; }
};

struct DpStats {
    std::uint64_t relaxations = 0;
};

/// One shortest-path solve on a fixed grid and alpha.
Alignment dp_align(const Curve& tmpl, const Curve& obs, const WarpGrid& grid, const RegistrationParams& params,
                   double alpha, DpStats* stats = nullptr);
Alignment dp_align(const Curve& tmpl, const Curve& obs, const WarpGrid& grid, const RegistrationParams& params,
                   double alpha, const Normalizers& norms, DpStats* stats = nullptr);

/// Narrows each stage on the incumbent path to h(t_j) +- one current spacing (clipped to the current bounds).
WarpGrid refine_grid(const WarpGrid& grid, const Alignment& incumbent);

/// Coarse solve plus refinement rounds for every alpha; lowest objective wins (ties go to the larger alpha).
Alignment align_on_grid(const Curve& tmpl, const Curve& obs, const WarpGrid& grid, const RegistrationParams& params,
                        const Normalizers& norms, DpStats* stats = nullptr);

Alignment oeb_fdtw(const Curve& tmpl, const Curve& obs, const RegistrationParams& params, Slack start_slack,
                   Slack end_slack, DpStats* stats = nullptr);

/// Slacks equal to a fraction of |D_Y| (time) and |D_m| (observed time).
Slack fraction_slack(Interval template_domain, Interval monitoring_domain, double fraction = 0.1);

/// Average F-term of the best linear (slope pinned to T_i/T_0) alignment; the lambda -> infinity limit.
Alignment pinned_alignment(const Curve& tmpl, const Curve& obs, const RegistrationParams& params, Slack start_slack,
                           Slack end_slack);

/// Sum over the sample of the average F-term along each fitted warping.
double acd(const Curve& tmpl, const std::vector<Curve>& sample, const RegistrationParams& params, Slack start_slack,
           Slack end_slack);
/// ACD with every warping slope pinned to T_i/T_0.
double acd_pinned(const Curve& tmpl, const std::vector<Curve>& sample, const RegistrationParams& params,
                  Slack start_slack, Slack end_slack);

struct LambdaSelection {
    double lambda = 0.0;
    double acd_zero = 0.0;
    double acd_infinity = 0.0;
    std::vector<double> grid;
    std::vector<double> acd_values;
    bool no_phase_variation = false;
};

/// Largest grid lambda whose ACD increase over ACD(0) is at most delta * (ACD(inf) - ACD(0)).
LambdaSelection select_lambda_from_table(const std::vector<double>& lambda_grid, const std::vector<double>& acd_values,
                                         double acd_zero, double acd_infinity, double delta);

LambdaSelection select_lambda(const Curve& tmpl, const std::vector<Curve>& sample, const std::vector<double>& lambda_grid,
                              double delta, const RegistrationParams& params, Slack start_slack, Slack end_slack);

struct ProcrustesOptions {
    int n_iter = 2;
    std::optional<Curve> init;  // random member when empty
    std::uint64_t seed = 0;
    int mean_grid = 201;
};

/// Template by iterated registration and averaging of the registered, completed sample.
Curve procrustes_template(const std::vector<Curve>& sample, const ProcrustesOptions& options,
                          const RegistrationParams& params, Slack start_slack, Slack end_slack);

}  // namespace frtm
