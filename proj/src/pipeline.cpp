#include "frtm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "frtm/parallel.hpp"

namespace frtm {

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string("phase1 stage '") + name + "': " + e.what());
    }
}

double median(std::vector<double> v) {
    const std::size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + std::ptrdiff_t(m), v.end());
    if (v.size() % 2) return v[m];
    const double hi = v[m];
    return 0.5 * (*std::max_element(v.begin(), v.begin() + std::ptrdiff_t(m)) + hi);
}

// Pair used for model t_g: the earliest real-time step reaching t_g, else the offline completion.
const CompletedPair& pair_for(const std::vector<TrackStep>& steps, const CompletedPair& offline, double t,
                              bool& fallback) {
    const TrackStep* best = nullptr;
    for (const auto& s : steps)
        if (s.ok && s.t_star >= t - 1e-12 && (!best || s.t_star < best->t_star)) best = &s;
    fallback = best == nullptr;
    return best ? *best->pair : offline;
}

}  // namespace

void PipelineConfig::validate() const {
    realtime.registration.validate();
    sidak(alpha);
    if (!(var_threshold > 0 && var_threshold <= 1))
        throw Error(ErrorKind::InvalidInput, "var_threshold must lie in (0, 1]");
    if (!(band_b > 0 && band_b <= 1)) throw Error(ErrorKind::InvalidInput, "band_b must lie in (0, 1]");
    if (!(acd_delta > 0 && acd_delta <= 1)) throw Error(ErrorKind::InvalidInput, "acd_delta must lie in (0, 1]");
    if (lambda_grid.empty()) throw Error(ErrorKind::InvalidInput, "empty lambda grid");
    if (lambda_subsample < 0) throw Error(ErrorKind::InvalidInput, "lambda_subsample must be >= 0");
    if (procrustes_iterations < 1) throw Error(ErrorKind::InvalidInput, "procrustes_iterations must be >= 1");
    if (models < 1 || grid_points < 1) throw Error(ErrorKind::InvalidInput, "need at least one model and grid point");
    if (!(start_fraction >= 0 && start_fraction < 1))
        throw Error(ErrorKind::InvalidInput, "start_fraction must lie in [0, 1)");
    if (!(slack_fraction >= 0 && slack_fraction <= 1))
        throw Error(ErrorKind::InvalidInput, "slack_fraction must lie in [0, 1]");
    if (!(penalty_divisor > 0)) throw Error(ErrorKind::InvalidInput, "penalty_divisor must be positive");
    if (quadrature < 3) throw Error(ErrorKind::InvalidInput, "quadrature needs at least 3 points");
}

void Phase1Artifacts::validate() const {
    config.validate();
    const Interval dy = tmpl.domain();
    const auto& f = scheme.family;
    if (f.times.size() == 0 || std::size_t(f.times.size()) != f.models.size())
        throw Error(ErrorKind::InvalidInput, "model family is empty or inconsistent");
    for (Eigen::Index g = 0; g < f.times.size(); ++g) {
        if (!dy.contains(f.times(g), 1e-9 * dy.length()))
            throw Error(ErrorKind::InvalidInput, "truncation time outside the template domain");
        if (g > 0 && !(f.times(g) > f.times(g - 1)))
            throw Error(ErrorKind::InvalidInput, "truncation times must increase");
    }
    const Interval dm = monitoring_domain;
    for (Eigen::Index g = 0; g < scheme.grid.size(); ++g)
        if (!dm.contains(scheme.grid(g), 1e-9 * dm.length()))
            throw Error(ErrorKind::InvalidInput, "monitoring grid outside D_m");
    if (scheme.limits.t2.size() != scheme.grid.size() || scheme.limits.spe.size() != scheme.grid.size())
        throw Error(ErrorKind::InvalidInput, "control limits do not match the monitoring grid");
    if (setup.grid.size() != scheme.grid.size()) throw Error(ErrorKind::InvalidInput, "tracking grid mismatch");
}

Phase1Artifacts phase1(const std::vector<SampledCurve>& training, const std::vector<SampledCurve>& tuning,
                       const PipelineConfig& config) {
    stage("config", [&] {
        config.validate();
        if (training.size() < 10) throw Error(ErrorKind::InsufficientData, "need at least 10 training curves");
        if (tuning.empty()) throw Error(ErrorKind::InsufficientData, "empty tuning set");
        for (const auto& c : training) c.validate();
        for (const auto& c : tuning) c.validate();
        return 0;
    });
    Phase1Artifacts art;
    art.config = config;
    const std::size_t n = training.size();

    art.smoothing = stage("smoothing", [&] {
        std::vector<double> rel(n);
        parallel_for(n, [&](std::size_t i) { rel[i] = select_relative_penalty_gcv(training[i]); });
        return median(rel) / config.penalty_divisor;
    });
    std::vector<Curve> smooth(n);
    stage("smoothing", [&] {
        parallel_for(n, [&](std::size_t i) { smooth[i] = fit_smooth_relative(training[i], art.smoothing); });
        return 0;
    });

    Interval dm = training.front().domain();
    for (const auto& c : training) {
        dm.lo = std::min(dm.lo, c.domain().lo);
        dm.hi = std::max(dm.hi, c.domain().hi);
    }
    art.monitoring_domain = dm;

    RegistrationParams reg = config.realtime.registration;
    ProcrustesOptions popt;
    popt.n_iter = config.procrustes_iterations;
    {
        std::mt19937_64 rng(config.seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        popt.init = smooth[pick(rng)];
    }
    const Slack slack = fraction_slack(popt.init->domain(), dm, config.slack_fraction);
    art.tmpl = stage("template", [&] { return procrustes_template(smooth, popt, reg, slack, slack); });
    const Interval dy = art.tmpl.domain();

    art.lambda = stage("lambda", [&] {
        std::vector<Curve> sub = smooth;
        if (config.lambda_subsample > 0 && std::size_t(config.lambda_subsample) < n) {
            std::mt19937_64 rng(config.seed + 1);
            std::shuffle(sub.begin(), sub.end(), rng);
            sub.resize(std::size_t(config.lambda_subsample));
        }
        return select_lambda(art.tmpl, sub, config.lambda_grid, config.acd_delta, reg, slack, slack);
    });
    reg.lambda = art.lambda.lambda;

    std::vector<Alignment> offline(n);
    stage("offline registration", [&] {
        parallel_for(n, [&](std::size_t i) { offline[i] = oeb_fdtw(art.tmpl, smooth[i], reg, slack, slack); });
        return 0;
    });
    double slope = 0;
    for (std::size_t i = 0; i < n; ++i)
        slope += smooth[i].domain().length() / offline[i].warping_domain.length() / double(n);
    art.slope_target = slope;

    const Eigen::VectorXd grid = monitoring_grid(dm, config.grid_points, config.start_fraction);
    art.setup.tmpl = art.tmpl;
    art.setup.band = stage("band", [&] { return fit_band(offline, config.band_b, grid, dy, dm); });
    art.setup.params = config.realtime;
    art.setup.params.registration = reg;
    art.setup.params.registration.slope_target = art.slope_target;
    art.setup.grid = grid;
    art.setup.monitoring_domain = dm;
    art.setup.smoothing = art.smoothing;

    std::vector<std::vector<TrackStep>> tracks(n);
    stage("training registration", [&] {
        parallel_for(n, [&](std::size_t i) { tracks[i] = track_curve(training[i], art.setup); });
        return 0;
    });
    for (const auto& tr : tracks)
        for (const auto& s : tr) art.failed_steps += s.observed && !s.ok;

    ModelFamily& family = art.scheme.family;
    family.times = truncation_times(dy, config.models, config.start_fraction);
    family.models.resize(std::size_t(config.models));
    std::vector<int> fallbacks(std::size_t(config.models), 0);
    stage("mfpca", [&] {
        std::vector<CompletedPair> completed(n);
        for (std::size_t i = 0; i < n; ++i) completed[i] = impute_complete(offline[i], art.tmpl, smooth[i]);
        parallel_for(family.models.size(), [&](std::size_t g) {
            const double t = family.times(Eigen::Index(g));
            std::vector<MixedObservation> sample(n);
            for (std::size_t i = 0; i < n; ++i) {
                bool fb = false;
                sample[i] = pair_on(pair_for(tracks[i], completed[i], t, fb), t, config.quadrature);
                fallbacks[g] += fb;
            }
            family.models[g] = fit_mfpca(sample, fit_weights(sample), config.var_threshold);
            family.models[g].truncation_time = t;
        });
        return 0;
    });
    for (int f : fallbacks) art.fallback_pairs += f;
    tracks.clear();

    art.scheme.grid = grid;
    const std::size_t G = std::size_t(grid.size());
    art.tuning_t2.assign(G, {});
    art.tuning_spe.assign(G, {});
    stage("tuning statistics", [&] {
        std::vector<std::vector<std::optional<Statistics>>> st(tuning.size());
        std::vector<int> failed(tuning.size(), 0);
        parallel_for(tuning.size(), [&](std::size_t i) {
            const auto steps = track_curve(tuning[i], art.setup);
            st[i].resize(steps.size());
            for (std::size_t g = 0; g < steps.size(); ++g) {
                if (!steps[g].ok) continue;
                try {
                    st[i][g] = statistics_at(family, *steps[g].pair, steps[g].t_star);
                } catch (const Error&) {
                }
            }
            for (std::size_t g = 0; g < steps.size(); ++g) failed[i] += steps[g].observed && !st[i][g];
        });
        for (std::size_t i = 0; i < tuning.size(); ++i) {
            art.failed_steps += failed[i];
            for (std::size_t g = 0; g < G; ++g)
                if (st[i][g]) {
                    art.tuning_t2[g].push_back(st[i][g]->t2);
                    art.tuning_spe[g].push_back(st[i][g]->spe);
                }
        }
        return 0;
    });
    art.scheme.limits = stage("limits", [&] { return fit_limits(art.tuning_t2, art.tuning_spe, config.alpha); });
    return art;
}

Phase2Output phase2(const Phase1Artifacts& art, const std::vector<SampledCurve>& curves,
                    std::optional<double> change_point_x, const std::vector<std::optional<double>>& change_points,
                    const std::vector<std::string>& ids) {
    art.validate();
    if (!change_points.empty() && change_points.size() != curves.size())
        throw Error(ErrorKind::InvalidInput, "one change point per curve expected");
    if (!ids.empty() && ids.size() != curves.size()) throw Error(ErrorKind::InvalidInput, "one id per curve expected");
    Phase2Output out;
    out.results.resize(curves.size());
    parallel_for(curves.size(), [&](std::size_t i) {
        MonitoringResult& r = out.results[i];
        try {
            r = monitor(curves[i], art.setup, art.scheme);
        } catch (const Error& e) {
            r = MonitoringResult{};
            r.error = e.what();
            if (curves[i].size()) r.domain_end = curves[i].abscissae(curves[i].size() - 1);
        }
        r.curve_id = ids.empty() ? std::to_string(i) : ids[i];
        r.change_point_x = change_points.empty() ? change_point_x : change_points[i];
    });
    if (curves.empty()) return out;
    Phase2Summary s;
    s.curves = int(curves.size());
    for (const auto& r : out.results) s.failed += !r.error.empty();
    s.rates = far_tdr(out.results, change_point_x);
    out.summary = s;
    return out;
}

}  // namespace frtm
