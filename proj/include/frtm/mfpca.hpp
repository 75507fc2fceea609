#pragma once

// Mixed functional PCA over Z = (X*, v, F0, log(F1 - F0)) with the weighted inner product.
// Functional parts are stored on a uniform quadrature grid and integrated with the trapezoid rule.

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "frtm/curves.hpp"

namespace frtm {

constexpr int kDefaultQuadrature = 201;

/// Trapezoid weights of a uniform grid with q points on `domain`.
Eigen::VectorXd trapezoid_weights(Interval domain, int q);

struct MixedObservation {
    Interval domain;
    Eigen::VectorXd x_star;  // registered curve on the grid
    Eigen::VectorXd v;       // clr of the normalized warping derivative
    double f0 = 0;
    double f1_tilde = 0;

    int points() const { return int(x_star.size()); }
    Eigen::VectorXd grid() const { return uniform_grid(domain, points()); }
};

/// Mixed representation of a (warping, registered) pair on `domain`. The warping derivative is
/// floored at 1e-8 before the log.
MixedObservation to_mixed(const std::function<double(double)>& warping,
                          const std::function<double(double)>& warping_derivative,
                          const std::function<double(double)>& registered, Interval domain,
                          int q = kDefaultQuadrature);
MixedObservation to_mixed(const Curve& warping, const Curve& registered, int q = kDefaultQuadrature);

struct WarpingPair {
    Curve warping;
    Curve registered;
};

/// Inverse map: h* by integrating exp(v), then h = F0 + exp(f1_tilde) h*.
WarpingPair from_mixed(const MixedObservation& z);
/// Warping values on the grid of z.
Eigen::VectorXd warping_values(const MixedObservation& z);

struct Weights {
    Eigen::VectorXd w1, w2;
    double w3 = 1, w4 = 1;
    std::array<double, 4> k{0.5, 0.5 / 3, 0.5 / 3, 0.5 / 3};
    std::array<bool, 4> degenerate{false, false, false, false};  // variance floor applied somewhere
};

constexpr double kVarianceFloor = 1e-10;

Weights fit_weights(const std::vector<MixedObservation>& sample,
                    const std::array<double, 4>& k = {0.5, 0.5 / 3, 0.5 / 3, 0.5 / 3});

/// Weighted inner product of two observations on the same grid.
double inner_product(const MixedObservation& f, const MixedObservation& g, const Weights& w);

struct MfpcaModel {
    double truncation_time = 0;
    Interval domain;
    int points = 0;
    MixedObservation mean;
    std::vector<MixedObservation> components;  // eigenfunctions, orthonormal in the weighted product
    Eigen::VectorXd eigenvalues;               // retained, descending
    Eigen::VectorXd all_eigenvalues;           // every positive eigenvalue
    Weights weights;
    double explained_fraction = 0;
    double total_variance = 0;

    int retained() const { return int(components.size()); }
};

MfpcaModel fit_mfpca(const std::vector<MixedObservation>& sample, const Weights& weights, double var_threshold,
                     int max_components = -1);

Eigen::VectorXd project(const MfpcaModel& model, const MixedObservation& z);
MixedObservation reconstruct(const MfpcaModel& model, const Eigen::VectorXd& scores);

/// ||f - g||_w^2.
double weighted_distance2(const MixedObservation& f, const MixedObservation& g, const Weights& w);

/// Stacked coordinates [x_star; v; f0; f1_tilde] and their quadrature weights.
Eigen::VectorXd stacked(const MixedObservation& z);
MixedObservation unstack(const Eigen::VectorXd& s, Interval domain);
Eigen::VectorXd stacked_weights(const Weights& w, Interval domain);

/// Throws DomainError unless z lives on the model grid.
void check_same_grid(const MixedObservation& a, Interval domain, int points);

}  // namespace frtm
