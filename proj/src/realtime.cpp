#include "frtm/realtime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frtm {

CompletedWarp::CompletedWarp(const Alignment& a) {
    if (a.empty()) throw Error(ErrorKind::InvalidInput, "alignment has fewer than two knots");
    core_ = a.warping();
    a_ = a.t.front();
    b_ = a.t.back();
    ha_ = a.h.front();
    hb_ = a.h.back();
    if (!(b_ > a_)) throw Error(ErrorKind::InvalidInput, "empty warping domain");
    c_ = a.obs_domain.length() / (b_ - a_);
}

double CompletedWarp::operator()(double t) const {
    if (t < a_) return ha_ + c_ * (t - a_);
    if (t > b_) return hb_ + c_ * (t - b_);
    return core_(t);
}

double CompletedWarp::derivative(double t) const {
    if (t < a_ || t > b_) return c_;
    return core_.derivative(t);
}

double CompletedWarp::inverse(double x) const {
    if (x <= ha_) return a_ + (x - ha_) / c_;
    if (x >= hb_) return b_ + (x - hb_) / c_;
    double lo = a_, hi = b_;
    for (int it = 0; it < 80 && hi - lo > 1e-13 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (core_(mid) < x) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

CompletedPair::CompletedPair(const Alignment& a, const Curve& tmpl, const Curve& obs)
    : warp_(a), tmpl_(tmpl), obs_(obs), domain_(tmpl.domain()) {
    const Interval d = warp_.estimated_domain();
    if (d.lo < domain_.lo - 1e-9 * domain_.length() || d.hi > domain_.hi + 1e-9 * domain_.length())
        throw Error(ErrorKind::InvalidInput, "warping domain exceeds the template domain");
    const Interval od = obs.domain();
    left_shift_ = obs_(std::clamp(warp_(d.lo), od.lo, od.hi)) - tmpl_(d.lo);
    right_shift_ = obs_(std::clamp(warp_(d.hi), od.lo, od.hi)) - tmpl_(d.hi);
}

double CompletedPair::registered(double t) const {
    const Interval d = warp_.estimated_domain();
    if (t < d.lo) return tmpl_(t) + left_shift_;
    if (t > d.hi) return tmpl_(t) + right_shift_;
    const Interval od = obs_.domain();
    return obs_(std::clamp(warp_(t), od.lo, od.hi));
}

Curve CompletedPair::registered_curve(int n) const {
    const Eigen::VectorXd g = uniform_grid(domain_, n);
    return interpolate(g, Eigen::VectorXd(g.unaryExpr([this](double t) { return registered(t); })));
}

Curve CompletedPair::warping_curve(int n) const {
    const Eigen::VectorXd g = uniform_grid(domain_, n);
    return monotone_interpolate(g, Eigen::VectorXd(g.unaryExpr([this](double t) { return warp_(t); })));
}

CompletedPair impute_complete(const Alignment& alignment, const Curve& tmpl, const Curve& obs) {
    if (!(alignment.warping_domain.hi > alignment.warping_domain.lo))
        throw Error(ErrorKind::InvalidInput, "b_i <= a_i");
    return CompletedPair(alignment, tmpl, obs);
}

double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw Error(ErrorKind::InsufficientData, "quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double h = (double(v.size()) - 1) * std::clamp(p, 0.0, 1.0);
    const auto lo = std::size_t(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

namespace {

double interp(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double at) {
    const Eigen::Index n = x.size();
    if (at <= x(0)) return y(0);
    if (at >= x(n - 1)) return y(n - 1);
    const Eigen::Index i = std::upper_bound(x.data(), x.data() + n, at) - x.data() - 1;
    const double w = (at - x(i)) / (x(i + 1) - x(i));
    return y(i) + w * (y(i + 1) - y(i));
}

}  // namespace

double Band::lower_at(double x) const { return interp(grid, lower, x); }
double Band::upper_at(double x) const { return interp(grid, upper, x); }

Band fit_band(const std::vector<Alignment>& warpings, double b, const Eigen::VectorXd& grid, Interval dy,
              Interval dm) {
    if (warpings.size() < 10) throw Error(ErrorKind::InsufficientData, "band needs at least 10 warpings");
    if (!(b > 0 && b <= 1)) throw Error(ErrorKind::InvalidInput, "band level b must lie in (0, 1]");
    if (grid.size() < 1) throw Error(ErrorKind::InvalidInput, "empty monitoring grid");
    std::vector<CompletedWarp> w;
    w.reserve(warpings.size());
    for (const auto& a : warpings) w.emplace_back(a);

    Band band;
    band.grid = grid;
    band.b_level = b;
    band.template_domain = dy;
    band.lower.resize(grid.size());
    band.upper.resize(grid.size());
    std::vector<double> v(w.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
        for (std::size_t i = 0; i < w.size(); ++i) v[i] = std::clamp(w[i].inverse(grid(g)), dy.lo, dy.hi);
        band.lower(g) = quantile(v, b / 2);
        band.upper(g) = quantile(v, 1 - b / 2);
        if (g > 0) {
            band.lower(g) = std::max(band.lower(g), band.lower(g - 1));
            band.upper(g) = std::max(band.upper(g), band.upper(g - 1));
        }
    }
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = std::clamp(w[i].inverse(dm.lo), dy.lo, dy.hi);
    band.start_slack.t = std::max(0.0, quantile(v, 1 - b / 2) - dy.lo);
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i](dy.lo);
    band.start_slack.x = std::max(0.0, quantile(v, 1 - b / 2) - dm.lo);
    return band;
}

RealtimeState::RealtimeState(const RealtimeParams& params, Interval dm, Interval dy, double dx)
    : params_(params), dm_(dm), dy_(dy), dx_(dx) {}

double terminal_slope(const CompletedWarp& warp, double window) {
    const Interval d = warp.estimated_domain();
    const double w = std::max(window, 0.0) * d.length();
    std::vector<double> s;
    for (int i = 0; i <= 10; ++i) s.push_back(warp.derivative(d.hi - w * (1.0 - i / 10.0)));
    std::nth_element(s.begin(), s.begin() + 5, s.end());
    return s[5];
}

void RealtimeState::record(double x, double t_star, const CompletedWarp& warp) { record(x, x, t_star, warp); }

void RealtimeState::record(double x, double reached, double t_star, const CompletedWarp& warp) {
    if (!history_.empty() && !(x > history_.back().x))
        throw Error(ErrorKind::InvalidInput, "real-time history must be strictly increasing in x");
    RealtimeStep step;
    step.x = x;
    step.reached = reached;
    step.t_star = t_star;
    step.slope = terminal_slope(warp, params_.slope_window);
    if (!history_.empty()) {
        const RealtimeStep& prev = history_.back();
        step.value_gap = std::abs(prev.reached - warp(prev.t_star));
        step.slope_gap = prev.slope != 0 ? std::abs(prev.slope - step.slope) / std::abs(prev.slope)
                                         : std::numeric_limits<double>::infinity();
        step.stable = step.value_gap <= params_.delta_v * dm_.length() && step.slope_gap <= params_.delta_d;
    }
    history_.push_back(step);
}

std::pair<double, double> adaptive_band(RealtimeState& state, const Band& base, double x) {
    const std::pair<double, double> fallback{base.lower_at(x), base.upper_at(x)};
    const RealtimeParams& p = state.params();
    const auto& hist = state.history();
    state.set_relaxed(false);
    if (!p.adaptive || hist.empty()) return fallback;
    const double dx = state.dx();
    const double delta = p.delta_Delta * state.monitoring_domain().length();
    const double tol = 1e-9 * std::max(1.0, state.monitoring_domain().length());
    const RealtimeStep& last = hist.back();
    if (std::abs(last.x - (x - dx)) > tol + 1e-6 * dx) return fallback;
    const double from = x - delta - dx;
    if (hist.front().x > from + tol) return fallback;
    for (auto it = hist.rbegin(); it != hist.rend() && it->x >= from - tol; ++it)
        if (!it->stable) return fallback;
    if (!(last.slope > 0)) return fallback;
    const double center = last.t_star + (x - last.reached) / last.slope;
    const double half = p.delta_c * state.template_domain().length();
    const Interval dy = state.template_domain();
    const double lo = std::max(dy.lo, center - half), hi = std::min(dy.hi, center + half);
    if (lo > hi) return fallback;
    state.set_relaxed(true);
    return {lo, hi};
}

PartialAlignment register_partial(const Curve& tmpl, const Curve& partial, double lower, double upper,
                                  const RealtimeParams& params, Slack start_slack, DpStats* stats) {
    const Interval dy = tmpl.domain(), dx = partial.domain();
    if (lower > upper) throw Error(ErrorKind::BandInfeasible, "empty band at x*");
    const double et = 1e-9 * dy.length();
    lower = std::clamp(lower, dy.lo, dy.hi);
    upper = std::clamp(upper, dy.lo, dy.hi);

    RegistrationParams p = params.registration;
    const int n_full = p.n_t;
    const double step = dy.length() / n_full;
    const auto jlo = Eigen::Index(std::ceil((lower - dy.lo) / step - 1e-9));
    const auto jhi = Eigen::Index(std::floor((upper - dy.lo) / step + 1e-9));
    double t_max;
    std::vector<Eigen::Index> candidates;
    Eigen::Index stages;
    if (jlo <= jhi && jhi >= 2) {
        t_max = dy.lo + step * double(jhi);
        if (jhi == n_full) t_max = dy.hi;
        stages = jhi + 1;
        for (Eigen::Index j = std::max<Eigen::Index>(jlo, 1); j <= jhi; ++j) candidates.push_back(j);
    } else {
        t_max = std::max(0.5 * (lower + upper), dy.lo + 2 * step);
        stages = std::max<Eigen::Index>(3, Eigen::Index(std::lround((t_max - dy.lo) / step)) + 1);
        candidates.push_back(stages - 1);
    }
    const double t_min = dy.lo + (t_max - dy.lo) * double(candidates.front()) / double(stages - 1);
    p.n_t = int(stages - 1);
    if (!p.slope_target) p.slope_target = dx.length() / (0.5 * (lower + upper) - dy.lo);

    const Interval td{dy.lo, t_max};
    WarpGrid grid = build_grid(td, dx, p, start_slack, Slack{t_max - t_min, 0.0});
    grid.closed_end_stages = candidates;
    grid.open_end_last = upper >= dy.hi - et && t_max >= dy.hi - et;
    apply_boundary_masks(grid);

    const Normalizers nz = compute_normalizers(tmpl, td, partial, dx);
    PartialAlignment out;
    out.alignment = align_on_grid(tmpl, partial, grid, p, nz, stats);
    out.t_star = out.alignment.warping_domain.hi;
    return out;
}

}  // namespace frtm
