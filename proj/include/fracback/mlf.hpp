#pragma once

#include <optional>
#include <vector>

#include "fracback/fem.hpp"
#include "fracback/grid.hpp"

namespace fracback {

struct MlParams {
    double alpha = 1.0;  // (0, 2]
    double beta = 1.0;   // > 0
};

/// E_{alpha,beta}(x) for real x <= 0, relative accuracy ~1e-12 or better
/// (absolute near zeros of oscillating cases such as alpha = 2).
double mittag_leffler(const MlParams& p, double x);
double mittag_leffler(double alpha, double beta, double x);

namespace detail {

/// Individual evaluation routes. Each returns nullopt when it cannot certify
/// its own accuracy at the given point.
std::optional<double> ml_taylor(double alpha, double beta, double x);
std::optional<double> ml_asymptotic(double alpha, double beta, double x);
std::optional<double> ml_integral(double alpha, double beta, double x);
/// Multiprecision power series; always succeeds, precision grows with |x|^{1/alpha}.
double ml_taylor_mpfr(double alpha, double beta, double x);

}  // namespace detail

enum class SpectralDomain { Interval, Square };

/// Truncated expansion in the orthonormal Dirichlet sine basis:
/// sqrt(2) sin(k pi x) on (0,1), 2 sin(k pi x) sin(l pi y) on (0,1)^2.
/// 2D coefficient of (k, l) is stored at (k-1)*K + (l-1).
struct SpectralField {
    SpectralDomain domain = SpectralDomain::Interval;
    int K = 128;
    std::vector<double> coeffs;

    int dim() const { return domain == SpectralDomain::Interval ? 1 : 2; }
    std::size_t size() const { return coeffs.size(); }
    double eigenvalue(std::size_t index) const;
    double& at(int k, int l = 1);
    double at(int k, int l = 1) const;
};

SpectralField make_spectral_field(SpectralDomain domain, int K);

/// c_k -> E_{alpha,1}(-lambda_k T^alpha) c_k
SpectralField spectral_forward_linear(const SpectralField& u0, double alpha, double T);

/// c_k -> c_k / (gamma + E_{alpha,1}(-lambda_k T^alpha))
SpectralField spectral_backward_linear(const SpectralField& g, double alpha, double T, double gamma);

/// Truncated series evaluated at the interior nodes of the mesh.
GridFunction sample_on_mesh(const SpectralField& field, const Mesh& mesh);

/// Sine coefficients of nodal data by the discrete sine transform (trapezoid rule),
/// exact for sine modes below the Nyquist index.
SpectralField sine_coefficients(const Mesh& mesh, const std::vector<double>& node_values, int K);

}  // namespace fracback
