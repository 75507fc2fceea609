#pragma once

// Gaussian kernel density quantiles with Sheather-Jones bandwidths.

#include <vector>

namespace frtm {

struct Bandwidth {
    double h = 0;
    bool fallback = false;  // Silverman's rule replaced a failed Sheather-Jones solve
};

/// Sheather-Jones solve-the-equation bandwidth on pairwise-distance bins (1000 bins).
Bandwidth sheather_jones(const std::vector<double>& values);
double silverman(const std::vector<double>& values);

struct KdeQuantile {
    double value = 0;
    double bandwidth = 0;
    bool degenerate = false;  // zero spread: the common value is returned
    bool fallback = false;
};

/// p-quantile of the KDE: CDF on 1000 points spanning [min - 3h, max + 3h], inverted by linear interpolation.
KdeQuantile kde_quantile(const std::vector<double>& values, double p);

}  // namespace frtm
