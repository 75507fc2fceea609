#include "frtm/mfpca.hpp"

#include <cmath>
#include <string>

namespace frtm {

namespace {

constexpr double kDerivativeFloor = 1e-8;

double trapezoid(const Eigen::VectorXd& f, const Eigen::VectorXd& tw) { return tw.dot(f); }

}  // namespace

Eigen::VectorXd trapezoid_weights(Interval domain, int q) {
    if (q < 2) throw Error(ErrorKind::InvalidInput, "quadrature needs at least 2 points");
    const double h = domain.length() / double(q - 1);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(q, h);
    w(0) = w(q - 1) = h / 2;
    return w;
}

MixedObservation to_mixed(const std::function<double(double)>& warping,
                          const std::function<double(double)>& warping_derivative,
                          const std::function<double(double)>& registered, Interval domain, int q) {
    if (!(domain.hi > domain.lo)) throw Error(ErrorKind::InvalidInput, "empty domain");
    const Eigen::VectorXd t = uniform_grid(domain, q);
    const double f0 = warping(domain.lo), f1 = warping(domain.hi);
    if (!(f1 > f0)) throw Error(ErrorKind::InvalidWarping, "warping must satisfy F1 > F0");
    const double span = f1 - f0;

    MixedObservation z;
    z.domain = domain;
    z.f0 = f0;
    z.f1_tilde = std::log(span);
    z.x_star.resize(q);
    z.v.resize(q);
    for (int i = 0; i < q; ++i) {
        const double d = warping_derivative(t(i));
        if (d < 0 || !std::isfinite(d))
            throw Error(ErrorKind::NotMonotone, "warping derivative " + std::to_string(d) + " at t = " +
                                                    std::to_string(t(i)));
        z.v(i) = std::log(std::max(d / span, kDerivativeFloor));
        z.x_star(i) = registered(t(i));
    }
    const Eigen::VectorXd tw = trapezoid_weights(domain, q);
    z.v.array() -= trapezoid(z.v, tw) / domain.length();
    return z;
}

MixedObservation to_mixed(const Curve& warping, const Curve& registered, int q) {
    const Interval d = warping.domain();
    const Interval r = registered.domain();
    const double tol = 1e-9 * std::max(1.0, d.length());
    if (std::abs(d.lo - r.lo) > tol || std::abs(d.hi - r.hi) > tol)
        throw Error(ErrorKind::DomainError, "warping and registered curve must share a domain");
    return to_mixed([&](double t) { return warping(t); }, [&](double t) { return warping.derivative(t); },
                    [&](double t) { return registered(t); }, d, q);
}

Eigen::VectorXd warping_values(const MixedObservation& z) {
    const int q = z.points();
    const double dt = z.domain.length() / double(q - 1);
    const Eigen::VectorXd e = z.v.array().exp();
    Eigen::VectorXd h(q);
    h(0) = 0;
    for (int i = 1; i < q; ++i) h(i) = h(i - 1) + 0.5 * dt * (e(i - 1) + e(i));
    h /= h(q - 1);
    return (z.f0 + std::exp(z.f1_tilde) * h.array()).matrix();
}

WarpingPair from_mixed(const MixedObservation& z) {
    if (z.points() < 4 || z.v.size() != z.x_star.size())
        throw Error(ErrorKind::InvalidInput, "mixed observation needs matching grids of >= 4 points");
    const Eigen::VectorXd t = z.grid();
    return {monotone_interpolate(t, warping_values(z)), interpolate(t, z.x_star)};
}

Weights fit_weights(const std::vector<MixedObservation>& sample, const std::array<double, 4>& k) {
    if (sample.size() < 2) throw Error(ErrorKind::InsufficientData, "weights need at least 2 observations");
    for (double c : k)
        if (!(c > 0)) throw Error(ErrorKind::InvalidInput, "variance-budget constants must be positive");
    const int q = sample.front().points();
    const Interval dom = sample.front().domain;
    for (const auto& z : sample) check_same_grid(z, dom, q);

    const double n = double(sample.size());
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(q), m2 = Eigen::VectorXd::Zero(q);
    double m3 = 0, m4 = 0;
    for (const auto& z : sample) {
        m1 += z.x_star;
        m2 += z.v;
        m3 += z.f0;
        m4 += z.f1_tilde;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(q), s2 = Eigen::VectorXd::Zero(q);
    double s3 = 0, s4 = 0;
    for (const auto& z : sample) {
        s1.array() += (z.x_star - m1).array().square();
        s2.array() += (z.v - m2).array().square();
        s3 += (z.f0 - m3) * (z.f0 - m3);
        s4 += (z.f1_tilde - m4) * (z.f1_tilde - m4);
    }
    s1 /= n - 1;
    s2 /= n - 1;
    s3 /= n - 1;
    s4 /= n - 1;

    Weights w;
    w.k = k;
    auto floor = [&](double v, int block) {
        if (v < kVarianceFloor) {
            w.degenerate[block] = true;
            return kVarianceFloor;
        }
        return v;
    };
    const double len = dom.length();
    w.w1.resize(q);
    w.w2.resize(q);
    for (int i = 0; i < q; ++i) {
        w.w1(i) = k[0] / (floor(s1(i), 0) * len);
        w.w2(i) = k[1] / (floor(s2(i), 1) * len);
    }
    w.w3 = k[2] / floor(s3, 2);
    w.w4 = k[3] / floor(s4, 3);
    return w;
}

Eigen::VectorXd stacked(const MixedObservation& z) {
    const int q = z.points();
    Eigen::VectorXd s(2 * q + 2);
    s << z.x_star, z.v, z.f0, z.f1_tilde;
    return s;
}

MixedObservation unstack(const Eigen::VectorXd& s, Interval domain) {
    const Eigen::Index q = (s.size() - 2) / 2;
    MixedObservation z;
    z.domain = domain;
    z.x_star = s.head(q);
    z.v = s.segment(q, q);
    z.f0 = s(2 * q);
    z.f1_tilde = s(2 * q + 1);
    return z;
}

Eigen::VectorXd stacked_weights(const Weights& w, Interval domain) {
    const int q = int(w.w1.size());
    const Eigen::VectorXd tw = trapezoid_weights(domain, q);
    Eigen::VectorXd out(2 * q + 2);
    out << tw.cwiseProduct(w.w1), tw.cwiseProduct(w.w2), w.w3, w.w4;
    return out;
}

void check_same_grid(const MixedObservation& a, Interval domain, int points) {
    const double tol = 1e-9 * std::max(1.0, domain.length());
    if (a.points() != points || a.v.size() != points || std::abs(a.domain.lo - domain.lo) > tol ||
        std::abs(a.domain.hi - domain.hi) > tol)
        throw Error(ErrorKind::DomainError, "mixed observation on [" + std::to_string(a.domain.lo) + ", " +
                                                std::to_string(a.domain.hi) + "] with " +
                                                std::to_string(a.points()) + " points, expected [" +
                                                std::to_string(domain.lo) + ", " + std::to_string(domain.hi) +
                                                "] with " + std::to_string(points));
}

double inner_product(const MixedObservation& f, const MixedObservation& g, const Weights& w) {
    check_same_grid(g, f.domain, f.points());
    if (w.w1.size() != f.points()) throw Error(ErrorKind::DomainError, "weights on a different grid");
    const Eigen::VectorXd sw = stacked_weights(w, f.domain);
    return stacked(f).cwiseProduct(sw).dot(stacked(g));
}

double weighted_distance2(const MixedObservation& f, const MixedObservation& g, const Weights& w) {
    check_same_grid(g, f.domain, f.points());
    if (w.w1.size() != f.points()) throw Error(ErrorKind::DomainError, "weights on a different grid");
    const Eigen::VectorXd d = stacked(f) - stacked(g);
    return d.cwiseProduct(stacked_weights(w, f.domain)).dot(d);
}

MfpcaModel fit_mfpca(const std::vector<MixedObservation>& sample, const Weights& weights, double var_threshold,
                     int max_components) {
    if (sample.size() < 2) throw Error(ErrorKind::InsufficientData, "mFPCA needs at least 2 observations");
    if (!(var_threshold > 0 && var_threshold <= 1))
        throw Error(ErrorKind::InvalidInput, "variance threshold must lie in (0, 1]");
    const int q = sample.front().points();
    const Interval dom = sample.front().domain;
    for (const auto& z : sample) check_same_grid(z, dom, q);
    if (weights.w1.size() != q || weights.w2.size() != q)
        throw Error(ErrorKind::DomainError, "weights on a different grid");

    const Eigen::Index n = Eigen::Index(sample.size()), p = 2 * q + 2;
    Eigen::MatrixXd y(p, n);
    for (Eigen::Index i = 0; i < n; ++i) y.col(i) = stacked(sample[std::size_t(i)]);
    const Eigen::VectorXd mean = y.rowwise().mean();
    y.colwise() -= mean;
    const Eigen::VectorXd sw = stacked_weights(weights, dom);

    // Thin SVD of W^1/2 Y / sqrt(n - 1): singular values squared are the eigenvalues of the weighted
    // covariance, and psi = W^-1/2 u for the left singular vectors u.
    const Eigen::MatrixXd a = (sw.cwiseSqrt().asDiagonal() * y) / std::sqrt(double(n - 1));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const Eigen::VectorXd sigma = svd.singularValues();
    const Eigen::MatrixXd& vecs = svd.matrixU();
    const Eigen::VectorXd ev = sigma.cwiseAbs2();

    MfpcaModel model;
    model.domain = dom;
    model.points = q;
    model.weights = weights;
    model.mean = unstack(mean, dom);
    model.total_variance = a.squaredNorm();

    const double top = sigma.size() ? sigma(0) : 0.0;
    Eigen::Index rank = 0;
    while (rank < sigma.size() && sigma(rank) > 1e-10 * top) ++rank;
    model.all_eigenvalues = ev.head(rank);
    if (rank == 0) return model;

    Eigen::Index keep = 0;
    double acc = 0;
    const double target = var_threshold * model.total_variance * (1 - 1e-12);
    while (keep < rank) {
        if (var_threshold >= 1) {
            keep = rank;
            break;
        }
        acc += ev(keep++);
        if (acc >= target) break;
    }
    if (max_components > 0) keep = std::min<Eigen::Index>(keep, max_components);

    model.eigenvalues = ev.head(keep);
    model.explained_fraction = model.total_variance > 0 ? model.eigenvalues.sum() / model.total_variance : 1.0;
    for (Eigen::Index k = 0; k < keep; ++k) {
        Eigen::VectorXd psi = vecs.col(k).cwiseQuotient(sw.cwiseSqrt());
        Eigen::Index arg;
        psi.cwiseAbs().maxCoeff(&arg);
        if (psi(arg) < 0) psi = -psi;
        model.components.push_back(unstack(psi, dom));
    }
    return model;
}

Eigen::VectorXd project(const MfpcaModel& model, const MixedObservation& z) {
    check_same_grid(z, model.domain, model.points);
    const Eigen::VectorXd sw = stacked_weights(model.weights, model.domain);
    const Eigen::VectorXd c = (stacked(z) - stacked(model.mean)).cwiseProduct(sw);
    Eigen::VectorXd scores(model.retained());
    for (int k = 0; k < model.retained(); ++k) scores(k) = c.dot(stacked(model.components[std::size_t(k)]));
    return scores;
}

MixedObservation reconstruct(const MfpcaModel& model, const Eigen::VectorXd& scores) {
    if (scores.size() != model.retained())
        throw Error(ErrorKind::InvalidInput, "expected " + std::to_string(model.retained()) + " scores");
    Eigen::VectorXd s = stacked(model.mean);
    for (int k = 0; k < model.retained(); ++k) s += scores(k) * stacked(model.components[std::size_t(k)]);
    return unstack(s, model.domain);
}

}  // namespace frtm
