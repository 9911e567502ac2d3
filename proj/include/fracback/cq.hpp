#pragma once

#include <vector>

#include "fracback/fem.hpp"

namespace fracback {

/// Backward-Euler convolution quadrature weights of the Caputo derivative,
/// the power-series coefficients of (1 - xi)^alpha.
struct CqWeights {
    double alpha = 0.5;
    int N = 0;
    std::vector<double> w;             // w[0..N]
    std::vector<double> partial_sums;  // s[j] = w[0] + ... + w[j]
};

CqWeights cq_weights(double alpha, int N);

/// tau^{-alpha} * sum_{j=0}^{n} w[n-j] (U^j - U^0) with n = history.size() - 1.
Vector caputo_apply(const CqWeights& w, const std::vector<GridFunction>& history, double tau);

}  // namespace fracback
