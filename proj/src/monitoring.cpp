#include "frtm/monitoring.hpp"

#include <algorithm>
#include <cmath>

#include "frtm/kde.hpp"

namespace frtm {

double sidak(double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw Error(ErrorKind::InvalidAlpha, "alpha must lie in (0, 1)");
    return 1 - std::sqrt(1 - alpha);
}

double t2(const Eigen::VectorXd& scores, const Eigen::VectorXd& eigenvalues) {
    if (scores.size() != eigenvalues.size())
        throw Error(ErrorKind::InvalidInput, "scores and eigenvalues differ in length");
    if (eigenvalues.size() && !(eigenvalues.minCoeff() > 0))
        throw Error(ErrorKind::InvalidInput, "eigenvalues must be positive");
    return (scores.array().square() / eigenvalues.array()).sum();
}

double spe(const MixedObservation& z, const MixedObservation& z_hat, const Weights& weights) {
    return weighted_distance2(z, z_hat, weights);
}

std::size_t ModelFamily::index_for(double t) const {
    if (times.size() == 0) throw Error(ErrorKind::InvalidInput, "empty model family");
    const double tol = 1e-9 * std::max(1.0, std::abs(times(times.size() - 1)));
    const auto it = std::upper_bound(times.data(), times.data() + times.size(), t + tol);
    const auto k = it - times.data();
    return k == 0 ? 0 : std::size_t(k - 1);
}

Eigen::VectorXd truncation_times(Interval dy, int count, double start_fraction) {
    if (count < 1) throw Error(ErrorKind::InvalidInput, "need at least one truncation time");
    if (count == 1) return Eigen::VectorXd::Constant(1, dy.hi);
    return Eigen::VectorXd::LinSpaced(count, dy.lo + start_fraction * dy.length(), dy.hi);
}

Eigen::VectorXd monitoring_grid(Interval dm, int count, double start_fraction) {
    return truncation_times(dm, count, start_fraction);
}

ControlLimits fit_limits(const std::vector<std::vector<double>>& t2_samples,
                         const std::vector<std::vector<double>>& spe_samples, double alpha) {
    ControlLimits out;
    out.alpha = alpha;
    out.alpha_star = sidak(alpha);
    if (t2_samples.size() != spe_samples.size())
        throw Error(ErrorKind::InvalidInput, "T2 and SPE samples cover different grids");
    const std::size_t G = t2_samples.size();
    out.t2.resize(Eigen::Index(G));
    out.spe.resize(Eigen::Index(G));
    out.pooled.assign(G, 0);
    constexpr std::size_t kMin = 20;
    auto pooled = [&](const std::vector<std::vector<double>>& s, std::size_t g, int& width) {
        std::vector<double> v = s[g];
        width = 0;
        for (std::size_t r = 1; v.size() < kMin && r < G; ++r) {
            if (g >= r) v.insert(v.end(), s[g - r].begin(), s[g - r].end());
            if (g + r < G) v.insert(v.end(), s[g + r].begin(), s[g + r].end());
            width = int(r);
        }
        return v;
    };
    for (std::size_t g = 0; g < G; ++g) {
        int w1 = 0, w2 = 0;
        const auto a = pooled(t2_samples, g, w1);
        const auto b = pooled(spe_samples, g, w2);
        out.pooled[g] = std::max(w1, w2);
        if (a.size() < kMin || b.size() < kMin)
            throw Error(ErrorKind::InsufficientData, "fewer than 20 tuning statistics over the whole grid");
        const KdeQuantile qa = kde_quantile(a, 1 - out.alpha_star);
        const KdeQuantile qb = kde_quantile(b, 1 - out.alpha_star);
        out.bandwidth_fallbacks += int(qa.fallback) + int(qb.fallback);
        out.t2(Eigen::Index(g)) = qa.value;
        out.spe(Eigen::Index(g)) = qb.value;
    }
    return out;
}

std::vector<TrackStep> track_curve(const SampledCurve& curve, const TrackingSetup& setup) {
    curve.validate();
    const Interval dy = setup.tmpl.domain();
    const double dx = setup.grid.size() > 1 ? setup.grid(1) - setup.grid(0) : setup.monitoring_domain.length();
    RealtimeState state(setup.params, setup.monitoring_domain, dy, dx);
    std::vector<TrackStep> steps;
    const double last = curve.abscissae(curve.size() - 1);
    for (Eigen::Index g = 0; g < setup.grid.size(); ++g) {
        TrackStep step;
        step.x = setup.grid(g);
        step.observed = last >= step.x - 1e-12 * std::max(1.0, std::abs(step.x));
        if (!step.observed) {
            steps.push_back(std::move(step));
            continue;
        }
        try {
            const SampledCurve prefix = curve.prefix(step.x + 1e-12 * std::max(1.0, std::abs(step.x)));
            if (prefix.size() < 4) throw Error(ErrorKind::InsufficientData, "fewer than 4 samples observed");
            const Curve partial = fit_smooth_relative(prefix, setup.smoothing);
            const auto [lo, hi] = adaptive_band(state, setup.band, step.x);
            step.relaxed = state.relaxation_active();
            PartialAlignment pa = register_partial(setup.tmpl, partial, lo, hi, setup.params, setup.band.start_slack);
            CompletedPair pair = impute_complete(pa.alignment, setup.tmpl, partial);
            state.record(step.x, prefix.abscissae(prefix.size() - 1), pa.t_star, pair.warp());
            step.t_star = pa.t_star;
            step.pair = std::move(pair);
            step.ok = true;
        } catch (const Error& e) {
            step.error = e.what();
        }
        steps.push_back(std::move(step));
    }
    return steps;
}

MixedObservation pair_on(const CompletedPair& pair, double t, int quadrature) {
    const Interval d{pair.domain().lo, t};
    return to_mixed([&](double s) { return pair.warping(s); }, [&](double s) { return pair.warping_derivative(s); },
                    [&](double s) { return pair.registered(s); }, d, quadrature);
}

Statistics statistics_at(const ModelFamily& family, const CompletedPair& pair, double t_star) {
    Statistics s;
    s.model = family.index_for(t_star);
    const MfpcaModel& m = family.models[s.model];
    const MixedObservation z = pair_on(pair, m.domain.hi, m.points);
    const Eigen::VectorXd xi = project(m, z);
    s.t2 = t2(xi, m.eigenvalues);
    s.spe = spe(z, reconstruct(m, xi), m.weights);
    return s;
}

MonitoringResult chart(const std::vector<TrackStep>& steps, const ControlScheme& scheme) {
    MonitoringResult r;
    for (std::size_t g = 0; g < steps.size(); ++g) {
        const TrackStep& st = steps[g];
        if (!st.observed) continue;
        ChartPoint p;
        p.x = st.x;
        p.t2_limit = scheme.limits.t2(Eigen::Index(g));
        p.spe_limit = scheme.limits.spe(Eigen::Index(g));
        p.error = st.error;
        if (st.ok) {
            try {
                const Statistics s = statistics_at(scheme.family, *st.pair, st.t_star);
                p.t_star = st.t_star;
                p.t2 = s.t2;
                p.spe = s.spe;
                p.monitorable = true;
                p.alarm = p.t2 > p.t2_limit || p.spe > p.spe_limit;
                if (p.alarm && !r.first_alarm_x) r.first_alarm_x = p.x;
            } catch (const Error& e) {
                p.error = e.what();
            }
        }
        r.points.push_back(std::move(p));
    }
    return r;
}

MonitoringResult monitor(const SampledCurve& curve, const TrackingSetup& setup, const ControlScheme& scheme) {
    MonitoringResult r = chart(track_curve(curve, setup), scheme);
    r.domain_end = curve.abscissae(curve.size() - 1);
    return r;
}

FarTdr far_tdr(const std::vector<MonitoringResult>& results, std::optional<double> change_point_x) {
    double far_sum = 0, tdr_sum = 0;
    int far_n = 0, tdr_n = 0;
    for (const auto& r : results) {
        const std::optional<double> cp = r.change_point_x ? r.change_point_x : change_point_x;
        int ic = 0, ic_flag = 0, oc = 0, oc_flag = 0;
        for (const auto& p : r.points) {
            if (!p.monitorable) continue;
            if (cp && p.x >= *cp) {
                ++oc;
                oc_flag += p.alarm;
            } else {
                ++ic;
                ic_flag += p.alarm;
            }
        }
        if (ic) {
            far_sum += double(ic_flag) / ic;
            ++far_n;
        }
        if (oc) {
            tdr_sum += double(oc_flag) / oc;
            ++tdr_n;
        }
    }
    FarTdr out;
    if (far_n) out.far = far_sum / far_n;
    if (tdr_n) out.tdr = tdr_sum / tdr_n;
    return out;
}

}  // namespace frtm
