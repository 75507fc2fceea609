#include "frtm/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "frtm/error.hpp"

namespace frtm {

namespace {

constexpr int kBins = 1000;
constexpr int kCdfPoints = 1000;

double sd(const std::vector<double>& v) {
    const double n = double(v.size());
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / (n - 1));
}

double type7(const std::vector<double>& sorted, double p) {
    const double h = (double(sorted.size()) - 1) * p;
    const auto lo = std::size_t(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

double robust_scale(const std::vector<double>& v) {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    const double iqr = type7(s, 0.75) - type7(s, 0.25);
    const double d = sd(v);
    return iqr > 0 ? std::min(d, iqr / 1.349) : d;
}

struct Binned {
    double d = 0;
    std::vector<double> count;
};

// Counts of pairwise index distances after binning into kBins equal cells.
Binned bin_pairs(const std::vector<double>& x) {
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    const double d = (*mx - *mn) * 1.01 / kBins;
    std::vector<int> idx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) idx[i] = int((x[i] - *mn) / d);
    std::vector<double> cnt(kBins, 0.0);
    std::vector<double> occ(kBins + 1, 0.0);
    for (int i : idx) occ[std::size_t(i)] += 1;
    for (int a = 0; a <= kBins; ++a) {
        if (occ[std::size_t(a)] == 0) continue;
        cnt[0] += occ[std::size_t(a)] * (occ[std::size_t(a)] - 1) / 2;
        for (int b = a + 1; b <= kBins; ++b)
            if (occ[std::size_t(b)] != 0 && b - a < kBins) cnt[std::size_t(b - a)] += occ[std::size_t(a)] * occ[std::size_t(b)];
    }
    return {d, cnt};
}

double phi4(const Binned& b, double n, double h) {
    double sum = 0;
    for (int i = 0; i < kBins; ++i) {
        double delta = i * b.d / h;
        delta *= delta;
        if (delta >= 1000) break;
        sum += std::exp(-delta / 2) * (delta * delta - 6 * delta + 3) * b.count[std::size_t(i)];
    }
    sum = 2 * sum + n * 3;
    return sum / (n * (n - 1) * std::pow(h, 5.0) * std::sqrt(2 * std::numbers::pi));
}

double phi6(const Binned& b, double n, double h) {
    double sum = 0;
    for (int i = 0; i < kBins; ++i) {
        double delta = i * b.d / h;
        delta *= delta;
        if (delta >= 1000) break;
        sum += std::exp(-delta / 2) * (delta * delta * delta - 15 * delta * delta + 45 * delta - 15) *
               b.count[std::size_t(i)];
    }
    sum = 2 * sum - 15 * n;
    return sum / (n * (n - 1) * std::pow(h, 7.0) * std::sqrt(2 * std::numbers::pi));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

double silverman(const std::vector<double>& v) {
    if (v.size() < 2) throw Error(ErrorKind::InsufficientData, "bandwidth needs at least 2 values");
    double s = robust_scale(v);
    if (!(s > 0)) s = sd(v);
    return 0.9 * s * std::pow(double(v.size()), -0.2);
}

Bandwidth sheather_jones(const std::vector<double>& v) {
    if (v.size() < 2) throw Error(ErrorKind::InsufficientData, "bandwidth needs at least 2 values");
    const double n = double(v.size());
    const double scale = robust_scale(v);
    auto fail = [&] { return Bandwidth{silverman(v), true}; };
    if (!(scale > 0)) return fail();
    const Binned b = bin_pairs(v);
    const double a = 1.24 * scale * std::pow(n, -1.0 / 7);
    const double bb = 1.23 * scale * std::pow(n, -1.0 / 9);
    const double c1 = 1 / (2 * std::sqrt(std::numbers::pi) * n);
    const double td = -phi6(b, n, bb);
    if (!std::isfinite(td) || td <= 0) return fail();
    const double alph2 = 1.357 * std::pow(phi4(b, n, a) / td, 1.0 / 7);
    if (!std::isfinite(alph2)) return fail();
    auto f = [&](double h) { return std::pow(c1 / phi4(b, n, alph2 * std::pow(h, 5.0 / 7)), 0.2) - h; };

    const double hmax = 1.144 * scale * std::pow(n, -0.2);
    double lo = 0.1 * hmax, hi = hmax;
    const double tol = 0.1 * lo;
    for (int it = 1; f(lo) * f(hi) > 0; ++it) {
        if (it > 99) return fail();
        if (it % 2) hi *= 1.2;
        else lo /= 1.2;
    }
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-6 * tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (!std::isfinite(fm)) return fail();
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    const double h = 0.5 * (lo + hi);
    if (!(h > 0) || !std::isfinite(h)) return fail();
    return {h, false};
}

KdeQuantile kde_quantile(const std::vector<double>& values, double p) {
    if (!(p > 0 && p < 1)) throw Error(ErrorKind::InvalidInput, "quantile level must lie in (0, 1)");
    if (values.size() < 20) throw Error(ErrorKind::InsufficientData, "KDE quantile needs at least 20 values");
    for (double v : values)
        if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "non-finite value in KDE sample");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    KdeQuantile out;
    if (!(*mx > *mn)) {
        out.value = *mn;
        out.degenerate = true;
        return out;
    }
    const Bandwidth bw = sheather_jones(values);
    out.bandwidth = bw.h;
    out.fallback = bw.fallback;

    const double lo = *mn - 3 * bw.h, hi = *mx + 3 * bw.h;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> grid(kCdfPoints), cdf(kCdfPoints);
    const double n = double(values.size());
    for (int i = 0; i < kCdfPoints; ++i) {
        const double x = lo + (hi - lo) * i / (kCdfPoints - 1);
        double s = 0;
        for (double v : sorted) {
            const double z = (x - v) / bw.h;
            if (z > 8) s += 1;
            else if (z < -8) break;
            else s += normal_cdf(z);
        }
        grid[std::size_t(i)] = x;
        cdf[std::size_t(i)] = s / n;
    }
    if (p <= cdf.front()) {
        out.value = grid.front();
        return out;
    }
    if (p >= cdf.back()) {
        out.value = grid.back();
        return out;
    }
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
    const auto k = std::size_t(it - cdf.begin());
    const double c0 = cdf[k - 1], c1 = cdf[k];
    const double w = c1 > c0 ? (p - c0) / (c1 - c0) : 0.0;
    out.value = grid[k - 1] + w * (grid[k] - grid[k - 1]);
    return out;
}

}  // namespace frtm
