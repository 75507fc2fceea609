#include "frtm/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "frtm/parallel.hpp"
#include "frtm/realtime.hpp"

namespace frtm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_domain(Interval d, const char* what) {
    if (!(d.lo < d.hi) || !std::isfinite(d.lo) || !std::isfinite(d.hi))
        throw Error(ErrorKind::InvalidInput, std::string(what) + " domain must be a nonempty compact interval");
}

double slope_target_for(const RegistrationParams& p, Interval tmpl, Interval obs) {
    return p.slope_target ? *p.slope_target : obs.length() / tmpl.length();
}

}  // namespace

void RegistrationParams::validate() const {
    if (!(lambda >= 0)) throw Error(ErrorKind::InvalidInput, "lambda must be nonnegative");
    if (!(s_min > 0 && s_min < s_max)) throw Error(ErrorKind::InvalidInput, "need 0 < s_min < s_max");
    if (n_t < 2 || m_x < 2) throw Error(ErrorKind::InvalidInput, "need n_t >= 2 and m_x >= 2");
    if (refinement_rounds < 0) throw Error(ErrorKind::InvalidInput, "refinement_rounds must be >= 0");
    if (alpha_grid.empty()) throw Error(ErrorKind::InvalidInput, "alpha grid is empty");
    for (double a : alpha_grid)
        if (!(a >= 0 && a <= 1)) throw Error(ErrorKind::InvalidInput, "alpha values must lie in [0, 1]");
}

void WarpGrid::set_stage(Eigen::Index j, double lo, double hi) {
    lower(j) = lo;
    upper(j) = hi;
    feasible(j) = lo <= hi;
    const Eigen::Index m = width();
    for (Eigen::Index k = 0; k < m; ++k) tau(j, k) = m == 1 ? lo : lo + (hi - lo) * double(k) / double(m - 1);
    if (hi - lo <= 0) tau.row(j).setConstant(lo);
}

WarpGrid build_grid(Interval dy, Interval dx, const RegistrationParams& params, Slack ss, Slack es) {
    params.validate();
    check_domain(dy, "template");
    check_domain(dx, "observation");
    if (ss.t < 0 || ss.x < 0 || es.t < 0 || es.x < 0) throw Error(ErrorKind::InvalidInput, "slacks must be nonnegative");

    WarpGrid g;
    g.template_domain = dy;
    g.obs_domain = dx;
    g.start_slack = ss;
    g.end_slack = es;
    const Eigen::Index J = params.n_t + 1, M = params.m_x;
    g.t = Eigen::VectorXd::LinSpaced(J, dy.lo, dy.hi);
    g.lower.resize(J);
    g.upper.resize(J);
    g.feasible.resize(J);
    g.tau.resize(J, M);
    const double smin = params.s_min, smax = params.s_max;
    const double ay = dy.lo, by = dy.hi, ax = dx.lo, bx = dx.hi;
    const double eps = 1e-12 * std::max(1.0, dx.length());
    bool any = false;
    for (Eigen::Index j = 0; j < J; ++j) {
        const double t = g.t(j);
        // the end-slack term reads (b_y - delta_te); see the decisions log
        double l = std::max({smin * t + ax - smin * (ay + ss.t), t * smax + bx - es.x - by * smax, ax});
        double u = std::min({smax * t + ax + ss.x - ay * smax, t * smin + bx - (by - es.t) * smin, bx});
        if (l > u && l - u <= eps) l = u;
        g.set_stage(j, l, u);
        any = any || g.feasible(j);
    }
    if (!any) throw Error(ErrorKind::InfeasibleGrid, "l_j > u_j at every stage");
    apply_boundary_masks(g);
    return g;
}

void apply_boundary_masks(WarpGrid& g) {
    const Eigen::Index J = g.stages(), M = g.width();
    const double ax = g.obs_domain.lo, bx = g.obs_domain.hi, ay = g.template_domain.lo, by = g.template_domain.hi;
    const double ex = 1e-9 * std::max(1.0, g.obs_domain.length());
    const double et = 1e-9 * std::max(1.0, g.template_domain.length());
    g.start.setConstant(J, M, false);
    g.end.setConstant(J, M, false);
    for (Eigen::Index j = 0; j < J; ++j) {
        if (!g.feasible(j)) continue;
        for (Eigen::Index k = 0; k < M; ++k) {
            const double tau = g.tau(j, k);
            const bool low = tau <= ax + g.start_slack.x + ex;
            g.start(j, k) = low && (j == 0 || (k == 0 && g.t(j) <= ay + g.start_slack.t + et));
        }
    }
    if (g.closed_end_stages.empty()) {
        for (Eigen::Index j = 0; j < J; ++j) {
            if (!g.feasible(j)) continue;
            for (Eigen::Index k = 0; k < M; ++k) {
                const bool high = g.tau(j, k) >= bx - g.end_slack.x - ex;
                g.end(j, k) = high && (j == J - 1 || (k == M - 1 && g.t(j) >= by - g.end_slack.t - et));
            }
        }
    } else {
        for (Eigen::Index j : g.closed_end_stages)
            if (j >= 0 && j < J && g.feasible(j) && g.tau(j, M - 1) >= bx - ex) g.end(j, M - 1) = true;
        if (g.open_end_last && g.feasible(J - 1)) g.end.row(J - 1).setConstant(true);
    }
}

Normalizers compute_normalizers(const Curve& tmpl, Interval td, const Curve& obs, Interval od) {
    Normalizers n;
    n.y = sup_norm(tmpl, td, 0);
    n.dy = sup_norm(tmpl, td, 1);
    n.x = sup_norm(obs, od, 0);
    n.dx = sup_norm(obs, od, 1);
    return n;
}

Curve Alignment::warping() const {
    if (empty()) throw Error(ErrorKind::InvalidInput, "alignment has fewer than two knots");
    Eigen::Map<const Eigen::VectorXd> tv(t.data(), Eigen::Index(t.size()));
    Eigen::Map<const Eigen::VectorXd> hv(h.data(), Eigen::Index(h.size()));
    return monotone_interpolate(Eigen::VectorXd(tv), Eigen::VectorXd(hv));
}

Alignment dp_align(const Curve& tmpl, const Curve& obs, const WarpGrid& grid, const RegistrationParams& params,
                   double alpha, DpStats* stats) {
    return dp_align(tmpl, obs, grid, params, alpha,
                    compute_normalizers(tmpl, grid.template_domain, obs, grid.obs_domain), stats);
}

Alignment dp_align(const Curve& tmpl, const Curve& obs, const WarpGrid& grid, const RegistrationParams& params,
                   double alpha, const Normalizers& nz, DpStats* stats) {
    params.validate();
    if (!(alpha >= 0 && alpha <= 1)) throw Error(ErrorKind::InvalidInput, "alpha must lie in [0, 1]");
    const Eigen::Index J = grid.stages(), M = grid.width();
    const double target = slope_target_for(params, grid.template_domain, grid.obs_domain);

    // per-node pieces of F: amplitude difference and normalized obs derivative
    Eigen::MatrixXd amp(J, M), xd(J, M);
    Eigen::VectorXd yd(J);
    for (Eigen::Index j = 0; j < J; ++j) {
        const double y = tmpl(grid.t(j)) / nz.y;
        yd(j) = tmpl.derivative(grid.t(j)) / nz.dy;
        for (Eigen::Index k = 0; k < M; ++k) {
            if (!grid.feasible(j)) {
                amp(j, k) = xd(j, k) = 0;
                continue;
            }
            const double tau = grid.tau(j, k);
            amp(j, k) = y - obs(tau) / nz.x;
            xd(j, k) = obs.derivative(tau) / nz.dx;
        }
    }
    const double a2 = alpha * alpha, b2 = (1 - alpha) * (1 - alpha), lam = params.lambda;
    const double smin = params.s_min * (1 - 1e-9), smax = params.s_max * (1 + 1e-9);

    LayeredGraph g;
    g.t = grid.t;
    g.width = M;
    g.active.resize(J, M);
    for (Eigen::Index j = 0; j < J; ++j) g.active.row(j).setConstant(bool(grid.feasible(j)));
    g.start = grid.start;
    g.end = grid.end;

    std::vector<double> prev(static_cast<std::size_t>(M));
    auto cost = [&](Eigen::Index j, Eigen::Ref<Eigen::MatrixXd> c) {
        const double dt = grid.t(j + 1) - grid.t(j);
        const double ydj = yd(j + 1);
        for (Eigen::Index k = 0; k < M; ++k) prev[std::size_t(k)] = grid.tau(j, k);
        c.setConstant(kInf);
        for (Eigen::Index k2 = 0; k2 < M; ++k2) {
            const double tau2 = grid.tau(j + 1, k2);
            const double f_amp = a2 * amp(j + 1, k2) * amp(j + 1, k2);
            const double x2 = xd(j + 1, k2);
            // candidates are sorted, so the slope box selects a contiguous range of k1
            const auto lo = std::lower_bound(prev.begin(), prev.end(), tau2 - smax * dt * (1 + 1e-12)) - prev.begin();
            const auto hi = std::upper_bound(prev.begin(), prev.end(), tau2 - smin * dt * (1 - 1e-12)) - prev.begin();
            double* col = c.col(k2).data();
            for (Eigen::Index k1 = lo; k1 < hi; ++k1) {
                const double slope = (tau2 - prev[std::size_t(k1)]) / dt;
                const double d = ydj - slope * x2;
                const double u = slope - target;
                const double v = dt * (f_amp + b2 * d * d + lam * u * u);
                col[k1] = (slope > 0 && slope >= smin && slope <= smax) ? v : kInf;
            }
        }
    };
    PathStats ps;
    const PathSolution sol = solve_min_average_path(g, cost, &ps);
    if (stats) stats->relaxations += ps.relaxations;
    if (!sol.found()) throw Error(ErrorKind::NoFeasiblePath, "no finite-cost monotone path");

    Alignment a;
    a.alpha = alpha;
    a.lambda = lam;
    a.slope_target = target;
    a.template_domain = grid.template_domain;
    a.obs_domain = grid.obs_domain;
    a.first_stage = sol.first_stage;
    double f_sum = 0;
    for (std::size_t i = 0; i < sol.nodes.size(); ++i) {
        const Eigen::Index j = sol.first_stage + Eigen::Index(i);
        const Eigen::Index k = sol.nodes[i];
        a.t.push_back(grid.t(j));
        a.h.push_back(grid.tau(j, k));
        if (i > 0) {
            const double dt = a.t[i] - a.t[i - 1];
            const double slope = (a.h[i] - a.h[i - 1]) / dt;
            const double d = yd(j) - slope * xd(j, k);
            f_sum += dt * (a2 * amp(j, k) * amp(j, k) + b2 * d * d);
        }
    }
    a.warping_domain = {a.t.front(), a.t.back()};
    a.objective = sol.objective;
    a.f_average = f_sum / a.warping_domain.length();
    return a;
}

WarpGrid refine_grid(const WarpGrid& grid, const Alignment& inc) {
    WarpGrid g = grid;
    const Eigen::Index M = grid.width();
    for (std::size_t i = 0; i < inc.t.size(); ++i) {
        const Eigen::Index j = inc.first_stage + Eigen::Index(i);
        const double spacing = (grid.upper(j) - grid.lower(j)) / double(M - 1);
        const double lo = std::max(grid.lower(j), inc.h[i] - spacing);
        const double hi = std::min(grid.upper(j), inc.h[i] + spacing);
        g.set_stage(j, lo, hi);
    }
    apply_boundary_masks(g);
    return g;
}

namespace {

// Stage stride at which the candidate spacing resolves slopes to a quarter of the target slope.
Eigen::Index coarse_stride(const WarpGrid& g, double target) {
    const Eigen::Index J = g.stages(), M = g.width();
    double quantum = 0;
    for (Eigen::Index j = 1; j < J; ++j)
        if (g.feasible(j)) quantum = std::max(quantum, (g.upper(j) - g.lower(j)) / double(M - 1) / (g.t(j) - g.t(j - 1)));
    const double want = 0.25 * target;
    if (!(quantum > want)) return 1;
    return std::min<Eigen::Index>(Eigen::Index(std::ceil(quantum / want)), (J - 1) / 4);
}

WarpGrid select_stages(const WarpGrid& g, const std::vector<Eigen::Index>& js) {
    WarpGrid c;
    c.template_domain = g.template_domain;
    c.obs_domain = g.obs_domain;
    c.start_slack = g.start_slack;
    c.end_slack = g.end_slack;
    const auto n = Eigen::Index(js.size()), M = g.width();
    c.t.resize(n);
    c.lower.resize(n);
    c.upper.resize(n);
    c.feasible.resize(n);
    c.tau.resize(n, M);
    c.start.resize(n, M);
    c.end.resize(n, M);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index j = js[std::size_t(i)];
        c.t(i) = g.t(j);
        c.lower(i) = g.lower(j);
        c.upper(i) = g.upper(j);
        c.feasible(i) = g.feasible(j);
        c.tau.row(i) = g.tau.row(j);
        c.start.row(i) = g.start.row(j);
        c.end.row(i) = g.end.row(j);
    }
    return c;
}

// Full grid restricted to centre(t_j) +- width(j), clipped to the original bounds.
template <typename C, typename W>
WarpGrid narrow(const WarpGrid& grid, C centre, W width) {
    WarpGrid g = grid;
    for (Eigen::Index j = 0; j < grid.stages(); ++j) {
        if (!grid.feasible(j)) continue;
        // candidates sit on centre + k*step, shifted inside [l_j, u_j], so a centred path stays representable
        const double c = centre(grid.t(j)), step = 2 * width(j) / double(g.width() - 1);
        const double l = grid.lower(j), u = grid.upper(j), m1 = double(g.width() - 1);
        double k_lo = -std::floor(m1 / 2);
        if (c + k_lo * step < l) k_lo = std::ceil((l - c) / step - 1e-9);
        if (c + (k_lo + m1) * step > u) k_lo = std::max(std::floor((u - c) / step + 1e-9) - m1, std::ceil((l - c) / step - 1e-9));
        const double lo = c + k_lo * step, hi = lo + m1 * step;
        if (lo >= l - 1e-12 && hi <= u + 1e-12 && step > 0) {
            g.set_stage(j, std::max(lo, l), std::min(hi, u));
            continue;
        }
        g.set_stage(j, std::clamp(c - width(j), l, u), std::clamp(c + width(j), l, u));
    }
    apply_boundary_masks(g);
    return g;
}

double spacing(const WarpGrid& g, Eigen::Index j) { return (g.upper(j) - g.lower(j)) / double(g.width() - 1); }

// Path solved on every stride-th stage, then used as the centre of a narrowed full grid.
std::optional<WarpGrid> coarse_to_fine(const Curve& tmpl, const Curve& obs, const WarpGrid& grid,
                                       const RegistrationParams& params, double alpha, const Normalizers& nz,
                                       Eigen::Index stride, double target, DpStats* stats) {
    const Eigen::Index J = grid.stages();
    std::vector<Eigen::Index> js;
    for (Eigen::Index j = 0; j < J - 1; j += stride) js.push_back(j);
    js.push_back(J - 1);
    const WarpGrid coarse = select_stages(grid, js);
    Alignment c;
    try {
        c = dp_align(tmpl, obs, coarse, params, alpha, nz, stats);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoFeasiblePath) throw;
        return std::nullopt;
    }
    const auto first = c.first_stage, last = c.first_stage + Eigen::Index(c.t.size()) - 1;
    auto centre = [&](double t) {
        if (t <= c.t.front()) return c.h.front() + target * (t - c.t.front());
        if (t >= c.t.back()) return c.h.back() + target * (t - c.t.back());
        const auto i = std::size_t(std::upper_bound(c.t.begin(), c.t.end(), t) - c.t.begin());
        return c.h[i - 1] + (t - c.t[i - 1]) / (c.t[i] - c.t[i - 1]) * (c.h[i] - c.h[i - 1]);
    };
    auto width = [&](Eigen::Index j) {
        const double t = grid.t(j);
        Eigen::Index i = first;
        while (i < last && coarse.t(i + 1) <= t) ++i;
        return 1.5 * std::max(spacing(coarse, i), spacing(coarse, std::min(i + 1, last)));
    };
    return narrow(grid, centre, width);
}

// Best straight line of the target slope (the infinite-penalty limit) through the grid, widened to a band.
std::optional<WarpGrid> line_band(const Curve& tmpl, const Curve& obs, const WarpGrid& grid, double alpha,
                                  const Normalizers& nz, double target) {
    const Eigen::Index J = grid.stages(), M = grid.width();
    const Interval dx = grid.obs_domain;
    const double ex = 1e-9 * std::max(1.0, dx.length());
    std::vector<double> yv(static_cast<std::size_t>(J)), ydv(static_cast<std::size_t>(J));
    for (Eigen::Index j = 0; j < J; ++j) {
        yv[std::size_t(j)] = tmpl(grid.t(j)) / nz.y;
        ydv[std::size_t(j)] = tmpl.derivative(grid.t(j)) / nz.dy;
    }
    const double et = 1e-9 * std::max(1.0, grid.template_domain.length());
    auto end_ok = [&](Eigen::Index j, double h) {
        if (grid.closed_end_stages.empty())
            return (j == J - 1 && h >= dx.hi - grid.end_slack.x - ex) ||
                   (grid.t(j) >= grid.template_domain.hi - grid.end_slack.t - et && h >= dx.hi - ex);
        if (grid.open_end_last && j == J - 1) return true;
        return h >= dx.hi - ex &&
               std::find(grid.closed_end_stages.begin(), grid.closed_end_stages.end(), j) != grid.closed_end_stages.end();
    };
    const double a2 = alpha * alpha, b2 = (1 - alpha) * (1 - alpha);
    double best = kInf, best_len = 0, best_t0 = 0, best_h0 = 0;
    bool best_ok = false;
    for (Eigen::Index s = 0; s < J - 1; ++s)
        for (Eigen::Index k = 0; k < M; ++k) {
            if (!grid.start(s, k)) continue;
            const double t0 = grid.t(s), h0 = grid.tau(s, k);
            double acc = 0;
            for (Eigen::Index j = s + 1; j < J; ++j) {
                const double h = h0 + target * (grid.t(j) - t0);
                if (h > dx.hi + ex) break;
                const double hc = std::min(h, dx.hi);
                const double a = yv[std::size_t(j)] - obs(hc) / nz.x;
                const double d = ydv[std::size_t(j)] - target * obs.derivative(hc) / nz.dx;
                acc += (grid.t(j) - grid.t(j - 1)) * (a2 * a * a + b2 * d * d);
                const double len = grid.t(j) - t0, obj = acc / len;
                const bool ok = end_ok(j, h);
                if ((ok && !best_ok) ||
                    (ok == best_ok && (obj < best - 1e-12 || (obj <= best + 1e-12 && len > best_len)))) {
                    best_ok = ok;
                    best = obj;
                    best_len = len;
                    best_t0 = t0;
                    best_h0 = h0;
                }
            }
        }
    if (!(best < kInf)) return std::nullopt;
    return narrow(
        grid, [&](double t) { return best_h0 + target * (t - best_t0); },
        [&](Eigen::Index j) { return 1.5 * spacing(grid, j); });
}

Alignment refine_from(const Curve& tmpl, const Curve& obs, WarpGrid g, const Alignment& initial,
                      const RegistrationParams& params, double alpha, const Normalizers& nz, DpStats* stats) {
    Alignment best = initial;
    Alignment cur = best;
    for (int r = 0; r < params.refinement_rounds; ++r) {
        g = refine_grid(g, cur);
        try {
            cur = dp_align(tmpl, obs, g, params, alpha, nz, stats);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoFeasiblePath) throw;
            break;
        }
        if (cur.objective < best.objective) best = cur;
    }
    return best;
}

}  // namespace

Alignment align_on_grid(const Curve& tmpl, const Curve& obs, const WarpGrid& grid, const RegistrationParams& params,
                        const Normalizers& nz, DpStats* stats) {
    params.validate();
    const double target = slope_target_for(params, grid.template_domain, grid.obs_domain);
    const Eigen::Index stride = coarse_stride(grid, target);
    std::optional<Alignment> best;
    std::vector<double> alphas = params.alpha_grid;
    std::sort(alphas.begin(), alphas.end(), std::greater<>());
    for (double alpha : alphas) {
        // Starting grids: the full grid, and with a slope penalty, grids narrowed around a coarse-stage
        // solution and around the best target-slope line, since the full grid may not resolve slopes near
        // the target at all.
        std::vector<WarpGrid> starts{grid};
        if (params.lambda > 0) {
            if (stride > 1)
                if (auto g = coarse_to_fine(tmpl, obs, grid, params, alpha, nz, stride, target, stats))
                    starts.push_back(std::move(*g));
            if (auto g = line_band(tmpl, obs, grid, alpha, nz, target)) starts.push_back(std::move(*g));
        }
        // only the best starting solution is refined
        std::optional<Alignment> inc;
        const WarpGrid* from = nullptr;
        for (const WarpGrid& g : starts) {
            try {
                Alignment a = dp_align(tmpl, obs, g, params, alpha, nz, stats);
                if (!inc || a.objective < inc->objective) {
                    inc = std::move(a);
                    from = &g;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoFeasiblePath) throw;
            }
        }
        if (!inc) continue;
        inc = refine_from(tmpl, obs, *from, *inc, params, alpha, nz, stats);
        // alphas are visited in decreasing order, so a tie keeps the larger alpha
        if (!best || inc->objective < best->objective - 1e-9) best = inc;
    }
    if (!best) throw Error(ErrorKind::NoFeasiblePath, "no finite-cost path for any alpha");
    return *best;
}

Alignment oeb_fdtw(const Curve& tmpl, const Curve& obs, const RegistrationParams& params, Slack ss, Slack es,
                   DpStats* stats) {
    const WarpGrid grid = build_grid(tmpl.domain(), obs.domain(), params, ss, es);
    const Normalizers nz = compute_normalizers(tmpl, tmpl.domain(), obs, obs.domain());
    return align_on_grid(tmpl, obs, grid, params, nz, stats);
}

Slack fraction_slack(Interval dy, Interval dm, double fraction) {
    return {fraction * dy.length(), fraction * dm.length()};
}

Alignment pinned_alignment(const Curve& tmpl, const Curve& obs, const RegistrationParams& params, Slack ss,
                           Slack es) {
    params.validate();
    const Interval dy = tmpl.domain(), dx = obs.domain();
    const Normalizers nz = compute_normalizers(tmpl, dy, obs, dx);
    const double r = std::clamp(slope_target_for(params, dy, dx), params.s_min, params.s_max);
    const Eigen::Index J = params.n_t + 1, M = params.m_x;
    const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(J, dy.lo, dy.hi);
    const double ex = 1e-9 * std::max(1.0, dx.length()), et = 1e-9 * std::max(1.0, dy.length());

    struct Line {
        Eigen::Index s;
        double h0;
    };
    std::vector<Line> lines;
    const double top = std::min(dx.lo + ss.x, dx.hi);
    for (Eigen::Index k = 0; k < M; ++k) lines.push_back({0, dx.lo + (top - dx.lo) * double(k) / double(M - 1)});
    for (Eigen::Index j = 1; j < J && t(j) <= dy.lo + ss.t + et; ++j) lines.push_back({j, dx.lo});

    Alignment best;
    double best_obj = kInf, best_len = 0;
    bool best_valid = false;
    std::vector<double> yv(J), ydv(J);
    for (Eigen::Index j = 0; j < J; ++j) {
        yv[j] = tmpl(t(j)) / nz.y;
        ydv[j] = tmpl.derivative(t(j)) / nz.dy;
    }
    for (const Line& line : lines) {
        std::vector<double> amp2, der2, dts;
        Eigen::Index e = line.s;
        for (Eigen::Index j = line.s + 1; j < J; ++j) {
            const double h = line.h0 + r * (t(j) - t(line.s));
            if (h > dx.hi + ex) break;
            const double hc = std::min(h, dx.hi);
            const double a = yv[j] - obs(hc) / nz.x;
            const double d = ydv[j] - r * obs.derivative(hc) / nz.dx;
            amp2.push_back(a * a);
            der2.push_back(d * d);
            dts.push_back(t(j) - t(j - 1));
            e = j;
        }
        if (e == line.s) continue;
        for (double alpha : params.alpha_grid) {
            const double a2 = alpha * alpha, b2 = (1 - alpha) * (1 - alpha);
            double acc = 0;
            for (std::size_t i = 0; i < dts.size(); ++i) {
                acc += dts[i] * (a2 * amp2[i] + b2 * der2[i]);
                const Eigen::Index j = line.s + Eigen::Index(i) + 1;
                const double h = std::min(line.h0 + r * (t(j) - t(line.s)), dx.hi);
                const bool valid = (j == J - 1 && h >= dx.hi - es.x - ex) ||
                                   (t(j) >= dy.hi - es.t - et && h >= dx.hi - ex);
                const double len = t(j) - t(line.s);
                const double obj = acc / len;
                const bool better = (valid && !best_valid) ||
                                    (valid == best_valid && (obj < best_obj - 1e-12 ||
                                                             (obj <= best_obj + 1e-12 && len > best_len)));
                if (better) {
                    best_obj = obj;
                    best_len = len;
                    best_valid = valid;
                    best = Alignment{};
                    best.alpha = alpha;
                    best.first_stage = line.s;
                    for (Eigen::Index q = line.s; q <= j; ++q) {
                        best.t.push_back(t(q));
                        best.h.push_back(std::min(line.h0 + r * (t(q) - t(line.s)), dx.hi));
                    }
                }
            }
        }
    }
    if (best.empty()) throw Error(ErrorKind::NoFeasiblePath, "no linear alignment fits the domains");
    best.lambda = kInf;
    best.objective = best_obj;
    best.f_average = best_obj;
    best.slope_target = r;
    best.template_domain = dy;
    best.obs_domain = dx;
    best.warping_domain = {best.t.front(), best.t.back()};
    return best;
}

double acd(const Curve& tmpl, const std::vector<Curve>& sample, const RegistrationParams& params, Slack ss,
           Slack es) {
    std::vector<double> f(sample.size());
    parallel_for(sample.size(), [&](std::size_t i) { f[i] = oeb_fdtw(tmpl, sample[i], params, ss, es).f_average; });
    double s = 0;
    for (double v : f) s += v;
    return s;
}

double acd_pinned(const Curve& tmpl, const std::vector<Curve>& sample, const RegistrationParams& params, Slack ss,
                  Slack es) {
    std::vector<double> f(sample.size());
    parallel_for(sample.size(),
                 [&](std::size_t i) { f[i] = pinned_alignment(tmpl, sample[i], params, ss, es).f_average; });
    double s = 0;
    for (double v : f) s += v;
    return s;
}

LambdaSelection select_lambda_from_table(const std::vector<double>& grid, const std::vector<double>& values,
                                         double acd_zero, double acd_inf, double delta) {
    if (grid.empty() || grid.size() != values.size())
        throw Error(ErrorKind::InvalidInput, "lambda grid and ACD table must be nonempty and of equal length");
    if (!(delta > 0 && delta <= 1)) throw Error(ErrorKind::InvalidInput, "delta must lie in (0, 1]");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::InvalidInput, "lambda grid must be increasing");
    LambdaSelection sel;
    sel.grid = grid;
    sel.acd_values = values;
    sel.acd_zero = acd_zero;
    sel.acd_infinity = acd_inf;
    const double range = acd_inf - acd_zero;
    if (!(range > 1e-12 * std::max(1.0, std::abs(acd_zero)))) {
        sel.no_phase_variation = true;
        sel.lambda = grid.back();
        return sel;
    }
    sel.lambda = grid.front();
    const double tol = 1e-12 * std::max(1.0, std::abs(acd_zero));
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (values[i] - acd_zero <= delta * range + tol) sel.lambda = grid[i];
    return sel;
}

LambdaSelection select_lambda(const Curve& tmpl, const std::vector<Curve>& sample, const std::vector<double>& grid,
                              double delta, const RegistrationParams& params, Slack ss, Slack es) {
    if (sample.empty()) throw Error(ErrorKind::InvalidInput, "empty sample");
    RegistrationParams p = params;
    p.lambda = 0;
    const double a0 = acd(tmpl, sample, p, ss, es);
    std::vector<double> values;
    double top = acd_pinned(tmpl, sample, p, ss, es);
    for (double lam : grid) {
        p.lambda = lam;
        values.push_back(acd(tmpl, sample, p, ss, es));
        top = std::max(top, values.back());
    }
    return select_lambda_from_table(grid, values, a0, top, delta);
}

Curve procrustes_template(const std::vector<Curve>& sample, const ProcrustesOptions& opt,
                          const RegistrationParams& params, Slack ss, Slack es) {
    if (sample.empty()) throw Error(ErrorKind::InvalidInput, "empty sample");
    if (opt.n_iter < 1) throw Error(ErrorKind::InvalidInput, "n_iter must be >= 1");
    Curve tmpl;
    if (opt.init) {
        tmpl = *opt.init;
    } else {
        std::mt19937_64 rng(opt.seed);
        std::uniform_int_distribution<std::size_t> pick(0, sample.size() - 1);
        tmpl = sample[pick(rng)];
    }
    const Interval dy = tmpl.domain();
    const Eigen::VectorXd grid = uniform_grid(dy, opt.mean_grid);
    for (int it = 0; it < opt.n_iter; ++it) {
        std::vector<Eigen::VectorXd> reg(sample.size());
        parallel_for(sample.size(), [&](std::size_t i) {
            const Alignment a = oeb_fdtw(tmpl, sample[i], params, ss, es);
            const CompletedPair pair = impute_complete(a, tmpl, sample[i]);
            reg[i] = grid.unaryExpr([&](double t) { return pair.registered(t); });
        });
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(grid.size());
        for (const auto& r : reg) mean += r;
        mean /= double(sample.size());
        tmpl = interpolate(grid, mean);
    }
    return tmpl;
}

}  // namespace frtm
