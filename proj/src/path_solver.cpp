#include "frtm/path_solver.hpp"

#include <cmath>
#include <limits>

namespace frtm {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Pass {
    // stage-major (index j * M + k)
    std::vector<double> val, raw, len;
    std::vector<int> back, first;
    double best_val = inf, best_raw = 0, best_len = 0;
    Eigen::Index best_e = -1, best_k = -1;
};

bool better(double v, double l, double ref_v, double ref_l) {
    if (!(ref_v < inf)) return v < inf;
    const double tol = 1e-12 * std::max(1.0, std::abs(ref_v));
    return v < ref_v - tol || (v <= ref_v + tol && l > ref_l);
}

// One pass minimizing raw - mu * length; labels carry raw and length so the ratio is recomputed exactly.
// Finite entries of each cost column, as [first, last + 1).
using Ranges = std::vector<std::pair<int, int>>;

void run_pass(const LayeredGraph& g, const std::vector<Eigen::MatrixXd>& cost, const std::vector<Ranges>& ranges,
              double mu, Pass& p, std::uint64_t& relax) {
    const Eigen::Index J = g.stages(), M = g.width;
    const auto n = std::size_t(J * M);
    p.val.assign(n, inf);
    p.raw.assign(n, 0.0);
    p.len.assign(n, 0.0);
    p.back.assign(n, -1);
    p.first.assign(n, -1);
    p.best_val = inf;
    p.best_e = -1;
    std::vector<double> w(static_cast<std::size_t>(M));
    for (Eigen::Index j = 0; j + 1 < J; ++j) {
        double* val = p.val.data() + j * M;
        const double* len = p.len.data() + j * M;
        bool any = false;
        for (Eigen::Index k = 0; k < M; ++k) {
            if (g.start(j, k) && g.active(j, k) && better(0.0, 0.0, val[k], len[k])) {
                val[k] = 0;
                p.raw[std::size_t(j * M + k)] = 0;
                p.len[std::size_t(j * M + k)] = 0;
                p.back[std::size_t(j * M + k)] = -1;
                p.first[std::size_t(j * M + k)] = int(j);
            }
            any = any || val[k] < inf;
        }
        if (!any) continue;
        const Eigen::MatrixXd& c = cost[std::size_t(j)];
        const double dt = g.t(j + 1) - g.t(j), shift = mu * dt;
        const double t_next = g.t(j + 1);
        for (Eigen::Index k2 = 0; k2 < M; ++k2) {
            if (!g.active(j + 1, k2)) continue;
            const double* col = c.col(k2).data();
            const auto [lo, hi] = ranges[std::size_t(j)][std::size_t(k2)];
            double vmin = inf;
            for (int k1 = lo; k1 < hi; ++k1) {
                const double v = val[k1] + (col[k1] - shift);
                w[std::size_t(k1)] = v;
                vmin = v < vmin ? v : vmin;
            }
            relax += std::uint64_t(hi - lo);
            if (!(vmin < inf)) continue;
            // among near-ties keep the longest path, then the smallest k1
            const double tol = 1e-12 * std::max(1.0, std::abs(vmin));
            int arg = -1;
            double best_l = -1;
            for (int k1 = lo; k1 < hi; ++k1)
                if (w[std::size_t(k1)] <= vmin + tol && len[k1] > best_l) {
                    best_l = len[k1];
                    arg = int(k1);
                }
            const auto at = std::size_t((j + 1) * M + k2), from = std::size_t(j * M + arg);
            p.val[at] = w[std::size_t(arg)];
            p.first[at] = p.first[from];
            p.len[at] = t_next - g.t(p.first[from]);
            p.raw[at] = p.raw[from] + col[arg];
            p.back[at] = arg;
            if (g.end(j + 1, k2) && better(p.val[at], p.len[at], p.best_val, p.best_len)) {
                p.best_val = p.val[at];
                p.best_raw = p.raw[at];
                p.best_len = p.len[at];
                p.best_e = j + 1;
                p.best_k = k2;
            }
        }
    }
}

}  // namespace

PathSolution solve_min_average_path(const LayeredGraph& g, const TransitionCost& cost, PathStats* stats) {
    const Eigen::Index J = g.stages(), M = g.width;
    PathSolution best;
    if (J < 2 || M < 1) return best;
    if (!(g.start.array() && g.active.array()).any()) return best;

    std::vector<Eigen::MatrixXd> c(std::size_t(J - 1), Eigen::MatrixXd(M, M));
    std::vector<Ranges> ranges(std::size_t(J - 1), Ranges(std::size_t(M)));
    for (Eigen::Index j = 0; j + 1 < J; ++j) {
        cost(j, c[std::size_t(j)]);
        for (Eigen::Index k2 = 0; k2 < M; ++k2) {
            const double* col = c[std::size_t(j)].col(k2).data();
            int lo = 0, hi = int(M);
            while (lo < hi && !(col[lo] < inf)) ++lo;
            while (hi > lo && !(col[hi - 1] < inf)) --hi;
            ranges[std::size_t(j)][std::size_t(k2)] = {lo, hi};
        }
    }

    // Dinkelbach iteration on the ratio: mu <- raw/len of the current minimizer of raw - mu*len until the
    // minimum reaches zero; the final pass returns the longest path attaining the optimal ratio.
    std::uint64_t relax = 0;
    Pass p;
    double mu = 0;
    run_pass(g, c, ranges, mu, p, relax);
    for (int it = 0; it < 200 && p.best_e >= 0; ++it) {
        const double next = p.best_raw / p.best_len;
        if (!(next < mu - 1e-13 * std::max(1.0, std::abs(mu))) && it > 0) break;
        mu = next;
        run_pass(g, c, ranges, mu, p, relax);
    }
    if (stats) stats->relaxations += relax;
    if (p.best_e < 0) return best;

    const Eigen::Index s = p.first[std::size_t(p.best_e * M + p.best_k)];
    best.first_stage = s;
    best.nodes.assign(std::size_t(p.best_e - s + 1), -1);
    Eigen::Index k = p.best_k;
    for (Eigen::Index j = p.best_e; j >= s; --j) {
        best.nodes[std::size_t(j - s)] = k;
        if (j > s) k = p.back[std::size_t(j * M + k)];
    }
    best.raw_cost = p.best_raw;
    best.objective = p.best_raw / p.best_len;
    return best;
}

}  // namespace frtm
