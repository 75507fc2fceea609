#pragma once

// Cubic B-spline curves: construction, evaluation, penalized smoothing.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "frtm/error.hpp"

namespace frtm {

template <typename Scalar>
struct BasicInterval {
    Scalar lo{0};
    Scalar hi{0};

    Scalar length() const { return hi - lo; }
    bool contains(Scalar t, Scalar tol = Scalar(0)) const { return t >= lo - tol && t <= hi + tol; }
    friend bool operator==(const BasicInterval&, const BasicInterval&) = default;
};

using Interval = BasicInterval<double>;

/// Raw discrete observations of one functional quality characteristic.
template <typename Scalar>
struct BasicSampledCurve {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector abscissae;
    Vector values;

    Eigen::Index size() const { return abscissae.size(); }

    BasicInterval<Scalar> domain() const { return {abscissae(0), abscissae(abscissae.size() - 1)}; }

    void validate() const {
        if (abscissae.size() != values.size())
            throw Error(ErrorKind::InvalidInput, "abscissae and values differ in length");
        if (abscissae.size() < 4)
            throw Error(ErrorKind::InsufficientData,
                        "need at least 4 samples, got " + std::to_string(abscissae.size()));
        for (Eigen::Index i = 0; i < abscissae.size(); ++i) {
            if (!std::isfinite(double(abscissae(i))) || !std::isfinite(double(values(i))))
                throw Error(ErrorKind::InvalidInput, "non-finite sample");
            if (i > 0 && !(abscissae(i) > abscissae(i - 1)))
                throw Error(ErrorKind::InvalidInput, "abscissae must be strictly increasing");
        }
    }

    /// Samples with abscissa <= x (the partial observation up to x).
    BasicSampledCurve prefix(Scalar x) const {
        Eigen::Index n = 0;
        while (n < abscissae.size() && abscissae(n) <= x) ++n;
        return {abscissae.head(n), values.head(n)};
    }
};

using SampledCurve = BasicSampledCurve<double>;

namespace detail {

// Plain B-spline of arbitrary degree evaluated by de Boor's algorithm.
template <typename Scalar>
struct BsplineTerm {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    int degree = 3;
    Vector knots;
    Vector coef;

    Eigen::Index span(Scalar x) const {
        const Eigen::Index n = coef.size();
        const Scalar* begin = knots.data() + degree;
        const Scalar* end = knots.data() + n;
        Eigen::Index k = std::upper_bound(begin, end, x) - knots.data() - 1;
        return std::clamp<Eigen::Index>(k, degree, n - 1);
    }

    Scalar operator()(Scalar x) const {
        if (coef.size() == 0) return Scalar(0);
        const Eigen::Index k = span(x);
        std::array<Scalar, 8> d{};
        for (int j = 0; j <= degree; ++j) d[j] = coef(j + k - degree);
        for (int r = 1; r <= degree; ++r) {
            for (int j = degree; j >= r; --j) {
                const Scalar lo = knots(j + k - degree);
                const Scalar den = knots(j + 1 + k - r) - lo;
                const Scalar a = den > Scalar(0) ? (x - lo) / den : Scalar(0);
                d[j] = (Scalar(1) - a) * d[j - 1] + a * d[j];
            }
        }
        return d[degree];
    }

    BsplineTerm derivative() const {
        BsplineTerm out;
        out.degree = degree - 1;
        const Eigen::Index n = coef.size();
        if (degree == 0 || n < 2) {
            out.degree = std::max(degree - 1, 0);
            out.knots = knots;
            out.coef = Vector::Zero(n);
            return out;
        }
        out.knots = knots.segment(1, knots.size() - 2);
        out.coef.resize(n - 1);
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            const Scalar den = knots(j + degree + 1) - knots(j + 1);
            out.coef(j) = den > Scalar(0) ? Scalar(degree) * (coef(j + 1) - coef(j)) / den : Scalar(0);
        }
        return out;
    }
};

}  // namespace detail

/// Clamped cubic B-spline expansion on a compact interval.
template <typename Scalar>
class CubicSpline {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    static constexpr int kDegree = 3;

    CubicSpline() = default;

    CubicSpline(Vector knots, Vector coefficients) {
        if (knots.size() != coefficients.size() + 4 || coefficients.size() < 4)
            throw Error(ErrorKind::InvalidInput, "cubic spline needs |knots| = |coefficients| + 4 >= 8");
        for (Eigen::Index i = 1; i < knots.size(); ++i)
            if (knots(i) < knots(i - 1)) throw Error(ErrorKind::InvalidInput, "knots must be nondecreasing");
        if (!(knots(3) < knots(knots.size() - 4)))
            throw Error(ErrorKind::InvalidInput, "empty spline domain");
        if (!coefficients.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite coefficients");
        value_ = {kDegree, std::move(knots), std::move(coefficients)};
        first_ = value_.derivative();
        second_ = first_.derivative();
    }

    BasicInterval<Scalar> domain() const {
        return {value_.knots(kDegree), value_.knots(value_.knots.size() - kDegree - 1)};
    }

    const Vector& knots() const { return value_.knots; }
    const Vector& coefficients() const { return value_.coef; }
    bool empty() const { return value_.coef.size() == 0; }

    Scalar operator()(Scalar t) const { return value_(check(t)); }

    Scalar derivative(Scalar t, int order = 1) const {
        t = check(t);
        switch (order) {
            case 0: return value_(t);
            case 1: return first_(t);
            case 2: return second_(t);
            default: return Scalar(0);
        }
    }

    Vector operator()(const Vector& t) const { return t.unaryExpr([this](Scalar s) { return (*this)(s); }); }

    Vector derivative(const Vector& t, int order = 1) const {
        return t.unaryExpr([this, order](Scalar s) { return derivative(s, order); });
    }

    /// Distinct knot values inside the domain.
    std::vector<Scalar> breakpoints() const {
        std::vector<Scalar> out(value_.knots.data(), value_.knots.data() + value_.knots.size());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    CubicSpline scaled(Scalar c) const { return CubicSpline(value_.knots, value_.coef * c); }

private:
    Scalar check(Scalar t) const {
        const auto d = domain();
        const Scalar tol = Scalar(1e-9) * std::max(Scalar(1), d.length());
        if (!(t >= d.lo - tol && t <= d.hi + tol))
            throw Error(ErrorKind::DomainError, "evaluation point " + std::to_string(double(t)) +
                                                    " outside [" + std::to_string(double(d.lo)) + ", " +
                                                    std::to_string(double(d.hi)) + "]");
        return std::clamp(t, d.lo, d.hi);
    }

    detail::BsplineTerm<Scalar> value_;
    detail::BsplineTerm<Scalar> first_;
    detail::BsplineTerm<Scalar> second_;
};

using Curve = CubicSpline<double>;

template <typename Scalar>
Scalar evaluate(const CubicSpline<Scalar>& curve, Scalar t) {
    return curve(t);
}

template <typename Scalar>
Scalar evaluate_derivative(const CubicSpline<Scalar>& curve, Scalar t) {
    return curve.derivative(t, 1);
}

namespace detail {

// Nonzero cubic basis functions and their first two derivatives at x
// (NURBS book, algorithm A2.3). Returns the index of the first nonzero basis.
template <typename Scalar, typename KnotVector>
Eigen::Index cubic_basis_ders(const KnotVector& U, Eigen::Index n_basis, Scalar x,
                              std::array<std::array<Scalar, 4>, 3>& ders) {
    constexpr int p = 3;
    const Scalar* begin = U.data() + p;
    const Scalar* end = U.data() + n_basis;
    Eigen::Index i = std::upper_bound(begin, end, x) - U.data() - 1;
    i = std::clamp<Eigen::Index>(i, p, n_basis - 1);

    Scalar ndu[4][4];
    Scalar left[4], right[4];
    ndu[0][0] = Scalar(1);
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U[i + 1 - j];
        right[j] = U[i + j] - x;
        Scalar saved = 0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const Scalar temp = ndu[j][r] != Scalar(0) ? ndu[r][j - 1] / ndu[j][r] : Scalar(0);
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];

    Scalar a[2][4];
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = Scalar(1);
        for (int k = 1; k <= 2; ++k) {
            Scalar d = 0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                const Scalar den = ndu[pk + 1][rk];
                a[s2][0] = den != Scalar(0) ? a[s1][0] / den : Scalar(0);
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = rk >= -1 ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                const Scalar den = ndu[pk + 1][rk + j];
                a[s2][j] = den != Scalar(0) ? (a[s1][j] - a[s1][j - 1]) / den : Scalar(0);
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                const Scalar den = ndu[pk + 1][r];
                a[s2][k] = den != Scalar(0) ? -a[s1][k - 1] / den : Scalar(0);
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    Scalar factor = p;
    for (int k = 1; k <= 2; ++k) {
        for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
        factor *= Scalar(p - k);
    }
    return i - p;
}

// Clamped knot vector with the given interior knots.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> clamped_knots(Scalar a, Scalar b, const std::vector<Scalar>& interior) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> knots(interior.size() + 8);
    Eigen::Index pos = 0;
    for (int r = 0; r < 4; ++r) knots(pos++) = a;
    for (Scalar k : interior) knots(pos++) = k;
    for (int r = 0; r < 4; ++r) knots(pos++) = b;
    return knots;
}

}  // namespace detail

/// Roughness penalty for fit_smooth: a fixed value or generalized cross-validation.
struct Penalty {
    bool automatic = false;
    double value = 0.0;

    static Penalty fixed(double v) { return {false, v}; }
    static Penalty gcv() { return {true, 0.0}; }
};

/// Penalized least-squares cubic spline system for one set of samples.
template <typename Scalar>
class SmoothingProblem {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    // Not-a-knot placement: one knot per abscissa except the two next to each end,
    // uniformly thinned (by index) beyond max_interior_knots.
    explicit SmoothingProblem(const BasicSampledCurve<Scalar>& samples, int max_interior_knots = 80)
        : samples_(samples) {
        samples_.validate();
        const Eigen::Index n = samples_.size();
        std::vector<Scalar> interior;
        const Eigen::Index candidates = n - 4;
        if (candidates <= max_interior_knots) {
            for (Eigen::Index i = 2; i < n - 2; ++i) interior.push_back(samples_.abscissae(i));
        } else {
            for (int m = 0; m < max_interior_knots; ++m) {
                const double pos = double(m) * double(candidates - 1) / double(max_interior_knots - 1);
                interior.push_back(samples_.abscissae(2 + Eigen::Index(std::lround(pos))));
            }
        }
        const auto dom = samples_.domain();
        knots_ = detail::clamped_knots(dom.lo, dom.hi, interior);
        const Eigen::Index nb = knots_.size() - 4;

        design_ = Matrix::Zero(n, nb);
        std::array<std::array<Scalar, 4>, 3> ders{};
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index first = detail::cubic_basis_ders(knots_, nb, samples_.abscissae(i), ders);
            for (int j = 0; j < 4; ++j) design_(i, first + j) = ders[0][j];
        }
        gram_ = design_.transpose() * design_;
        Matrix lin(n, 2);
        lin.col(0).setOnes();
        lin.col(1) = samples_.abscissae.array() - dom.lo;
        line_ = lin.colPivHouseholderQr().solve(samples_.values);
        line_(0) -= line_(1) * dom.lo;
        residual_ = samples_.values - (line_(0) + line_(1) * samples_.abscissae.array()).matrix();

        // Integrated squared second derivative; B'' is piecewise linear so
        // two-point Gauss quadrature per knot interval is exact.
        penalty_ = Matrix::Zero(nb, nb);
        const Scalar g = Scalar(1) / std::sqrt(Scalar(3));
        for (Eigen::Index m = 3; m < nb; ++m) {
            const Scalar lo = knots_(m), hi = knots_(m + 1);
            if (!(hi > lo)) continue;
            const Scalar mid = (lo + hi) / 2, half = (hi - lo) / 2;
            for (Scalar s : {-g, g}) {
                const Eigen::Index first = detail::cubic_basis_ders(knots_, nb, mid + s * half, ders);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) penalty_(first + a, first + b) += half * ders[2][a] * ders[2][b];
            }
        }
    }

    Eigen::Index basis_size() const { return knots_.size() - 4; }

    /// Scale that makes penalty values comparable across datasets: tr(B'B)/tr(P).
    Scalar penalty_scale() const {
        const Scalar tp = penalty_.trace();
        return tp > Scalar(0) ? gram_.trace() / tp : Scalar(1);
    }

    // The least-squares line lies in the penalty null space and is reproduced
    // exactly, so it is fitted separately; only the residual goes through the
    // (possibly ill-conditioned) penalized system.
    Vector solve(Scalar lambda) const {
        Eigen::LDLT<Matrix> ldlt(gram_ + lambda * penalty_);
        Vector c = ldlt.solve(design_.transpose() * residual_);
        for (Eigen::Index k = 0; k < c.size(); ++k) {
            const Scalar greville = (knots_(k + 1) + knots_(k + 2) + knots_(k + 3)) / 3;
            c(k) += line_(0) + line_(1) * greville;
        }
        return c;
    }

    CubicSpline<Scalar> fit(Scalar lambda) const { return CubicSpline<Scalar>(knots_, solve(lambda)); }

    /// Generalized cross-validation score n*RSS/(n - tr S)^2.
    Scalar gcv(Scalar lambda) const {
        const Matrix a = gram_ + lambda * penalty_;
        Eigen::LDLT<Matrix> ldlt(a);
        const Vector c = ldlt.solve(design_.transpose() * residual_);
        const Scalar trace = ldlt.solve(gram_).trace();
        const Scalar n = Scalar(samples_.size());
        const Scalar rss = (design_ * c - residual_).squaredNorm();
        const Scalar dof = n - trace;
        if (!(dof > Scalar(1e-8) * n)) return std::numeric_limits<Scalar>::infinity();
        return n * rss / (dof * dof);
    }

    /// Penalty minimizing GCV over a log grid relative to penalty_scale().
    Scalar select_gcv() const {
        const Scalar scale = penalty_scale();
        Scalar best_lambda = scale, best = std::numeric_limits<Scalar>::infinity();
        for (int e = -48; e <= 8; ++e) {
            const Scalar lambda = scale * std::pow(Scalar(10), Scalar(e) / Scalar(4));
            const Scalar score = gcv(lambda);
            if (score < best) {
                best = score;
                best_lambda = lambda;
            }
        }
        return best_lambda;
    }

private:
    BasicSampledCurve<Scalar> samples_;
    Vector knots_;
    Matrix design_;
    Matrix gram_;
    Eigen::Matrix<Scalar, 2, 1> line_;
    Vector residual_;
    Matrix penalty_;
};

/// Cubic smoothing spline minimizing RSS + penalty * integral of f''^2.
template <typename Scalar>
CubicSpline<Scalar> fit_smooth(const BasicSampledCurve<Scalar>& samples, Penalty penalty,
                               int max_interior_knots = 80) {
    if (!penalty.automatic && !(penalty.value >= 0.0))
        throw Error(ErrorKind::InvalidInput, "roughness penalty must be nonnegative");
    SmoothingProblem<Scalar> problem(samples, max_interior_knots);
    const Scalar lambda = penalty.automatic ? problem.select_gcv() : Scalar(penalty.value);
    return problem.fit(lambda);
}

template <typename Scalar>
CubicSpline<Scalar> fit_smooth(const BasicSampledCurve<Scalar>& samples, double penalty) {
    return fit_smooth(samples, Penalty::fixed(penalty));
}

/// Penalty expressed relative to penalty_scale(), so one value suits curves of any length or spacing.
template <typename Scalar>
CubicSpline<Scalar> fit_smooth_relative(const BasicSampledCurve<Scalar>& samples, Scalar relative,
                                        int max_interior_knots = 80) {
    if (!(relative >= 0)) throw Error(ErrorKind::InvalidInput, "roughness penalty must be nonnegative");
    SmoothingProblem<Scalar> problem(samples, max_interior_knots);
    return problem.fit(relative * problem.penalty_scale());
}

/// GCV-selected penalty divided by penalty_scale().
template <typename Scalar>
Scalar select_relative_penalty_gcv(const BasicSampledCurve<Scalar>& samples, int max_interior_knots = 80) {
    SmoothingProblem<Scalar> problem(samples, max_interior_knots);
    return problem.select_gcv() / problem.penalty_scale();
}

/// GCV-selected roughness penalty for the samples.
template <typename Scalar>
Scalar select_penalty_gcv(const BasicSampledCurve<Scalar>& samples, int max_interior_knots = 80) {
    return SmoothingProblem<Scalar>(samples, max_interior_knots).select_gcv();
}

/// Not-a-knot cubic interpolant through every sample.
template <typename Derived>
CubicSpline<typename Derived::Scalar> interpolate(const Eigen::MatrixBase<Derived>& x,
                                                  const Eigen::MatrixBase<Derived>& y) {
    using Scalar = typename Derived::Scalar;
    BasicSampledCurve<Scalar> s{x, y};
    return SmoothingProblem<Scalar>(s, std::numeric_limits<int>::max()).fit(Scalar(0));
}

/// Shape-preserving (Fritsch-Carlson) cubic Hermite interpolant, stored as a
/// cubic B-spline with double interior knots. Strictly increasing data give a
/// nondecreasing C1 curve.
template <typename Derived>
CubicSpline<typename Derived::Scalar> monotone_interpolate(const Eigen::MatrixBase<Derived>& x,
                                                           const Eigen::MatrixBase<Derived>& y) {
    using Scalar = typename Derived::Scalar;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = x.size();
    if (n < 2 || y.size() != n) throw Error(ErrorKind::InvalidInput, "monotone_interpolate needs >= 2 points");
    for (Eigen::Index i = 1; i < n; ++i)
        if (!(x(i) > x(i - 1))) throw Error(ErrorKind::InvalidInput, "abscissae must be strictly increasing");

    Vector h(n - 1), delta(n - 1), d(n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        h(i) = x(i + 1) - x(i);
        delta(i) = (y(i + 1) - y(i)) / h(i);
    }
    auto sign = [](Scalar v) { return (v > 0) - (v < 0); };
    if (n == 2) {
        d.setConstant(delta(0));
    } else {
        for (Eigen::Index k = 1; k + 1 < n; ++k) {
            if (delta(k - 1) * delta(k) <= Scalar(0)) {
                d(k) = 0;
            } else {
                const Scalar w1 = 2 * h(k) + h(k - 1), w2 = h(k) + 2 * h(k - 1);
                d(k) = (w1 + w2) / (w1 / delta(k - 1) + w2 / delta(k));
            }
        }
        auto edge = [&](Scalar h0, Scalar h1, Scalar m0, Scalar m1) {
            Scalar e = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
            if (sign(e) != sign(m0)) e = 0;
            else if (sign(m0) != sign(m1) && std::abs(e) > 3 * std::abs(m0)) e = 3 * m0;
            return e;
        };
        d(0) = edge(h(0), h(1), delta(0), delta(1));
        d(n - 1) = edge(h(n - 2), h(n - 3), delta(n - 2), delta(n - 3));
    }

    Vector knots(2 * n + 4), coef(2 * n);
    Eigen::Index pos = 0;
    for (int r = 0; r < 4; ++r) knots(pos++) = x(0);
    for (Eigen::Index k = 1; k + 1 < n; ++k) {
        knots(pos++) = x(k);
        knots(pos++) = x(k);
    }
    for (int r = 0; r < 4; ++r) knots(pos++) = x(n - 1);
    coef(0) = y(0);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        coef(1 + 2 * k) = y(k) + h(k) * d(k) / 3;
        coef(2 + 2 * k) = y(k + 1) - h(k) * d(k + 1) / 3;
    }
    coef(2 * n - 1) = y(n - 1);
    return CubicSpline<Scalar>(knots, coef);
}

/// Maximum of |f| over a 512-point uniform grid of the interval plus the given breakpoints.
template <typename Scalar, typename F>
Scalar sup_norm_of(F&& f, BasicInterval<Scalar> over, const std::vector<Scalar>& breakpoints = {}) {
    Scalar best = 0;
    constexpr int kGrid = 512;
    for (int i = 0; i < kGrid; ++i) {
        const Scalar t = over.lo + over.length() * Scalar(i) / Scalar(kGrid - 1);
        best = std::max(best, Scalar(std::abs(f(t))));
    }
    for (Scalar t : breakpoints)
        if (t >= over.lo && t <= over.hi) best = std::max(best, Scalar(std::abs(f(t))));
    return best;
}

/// Sup-norm of the curve (order 0) or of its derivative over a subinterval.
template <typename Scalar>
Scalar sup_norm(const CubicSpline<Scalar>& curve, BasicInterval<Scalar> over, int order = 0) {
    const Scalar s = sup_norm_of([&](Scalar t) { return curve.derivative(t, order); }, over, curve.breakpoints());
    if (!(s > Scalar(0)))
        throw Error(ErrorKind::DegenerateNorm, order == 0 ? "curve is identically zero"
                                                          : "curve derivative is identically zero");
    return s;
}

template <typename Scalar>
Scalar sup_norm(const CubicSpline<Scalar>& curve) {
    return sup_norm(curve, curve.domain(), 0);
}

/// Uniform grid of n points on an interval.
inline Eigen::VectorXd uniform_grid(Interval over, Eigen::Index n) {
    return Eigen::VectorXd::LinSpaced(n, over.lo, over.hi);
}

}  // namespace frtm
