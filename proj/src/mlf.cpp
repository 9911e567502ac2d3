#include "fracback/mlf.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <mpfr.h>

#include <cfloat>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "fracback/error.hpp"

namespace fracback {

namespace {

constexpr double pi = std::numbers::pi;

bool is_integer(double v) { return std::floor(v) == v; }

// 1/Gamma(y), exact zero at the poles
double rgamma(double y) {
    if (y <= 0.0 && is_integer(y)) return 0.0;
    if (y > 0.0) return std::exp(-std::lgamma(y));
    return boost::math::sin_pi(y) * std::exp(std::lgamma(1.0 - y)) / pi;
}

void validate(double alpha, double beta, double x) {
    require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 2.0, ErrorKind::InvalidArgument,
            "Mittag-Leffler alpha must lie in (0, 2]");
    require(std::isfinite(beta) && beta > 0.0, ErrorKind::InvalidArgument, "Mittag-Leffler beta must be positive");
    require(!std::isnan(x), ErrorKind::InvalidArgument, "Mittag-Leffler argument is NaN");
    require(x <= 0.0, ErrorKind::UnsupportedDomain, "Mittag-Leffler is only evaluated for x <= 0");
}

// Neumaier summation
struct Compensated {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v))
            c += (sum - t) + v;
        else
            c += (v - t) + sum;
        sum = t;
    }
    double value() const { return sum + c; }
};

// RAII holder for an mpfr_t
struct Mp {
    mpfr_t v;
    explicit Mp(mpfr_prec_t prec) { mpfr_init2(v, prec); }
    ~Mp() { mpfr_clear(v); }
    Mp(const Mp&) = delete;
    Mp& operator=(const Mp&) = delete;
};

}  // namespace

namespace detail {

std::optional<double> ml_taylor(double alpha, double beta, double x) {
    const double z = -x;
    if (z == 0.0) return rgamma(beta);
    const double log_z = std::log(z);
    const double peak = std::pow(z, 1.0 / alpha) / alpha + 2.0;
    Compensated sum;
    double sum_abs = 0.0;
    double previous = INFINITY;
    for (int k = 0; k < 2000; ++k) {
        const double magnitude = std::exp(k * log_z - std::lgamma(alpha * k + beta));
        const double term = (k % 2 == 0) ? magnitude : -magnitude;
        sum.add(term);
        sum_abs += magnitude;
        if (k > peak && magnitude < previous && magnitude <= 1e-18 * sum_abs) {
            const double value = sum.value();
            // each term carries a few ulps from exp/lgamma; cancellation amplifies them
            if (sum_abs <= 1e3 * std::abs(value)) return value;
            return std::nullopt;
        }
        previous = magnitude;
    }
    return std::nullopt;
}

std::optional<double> ml_asymptotic(double alpha, double beta, double x) {
    const double z = -x;
    if (z == 0.0) return std::nullopt;
    const double log_z = std::log(z);
    const bool exact = is_integer(alpha) && is_integer(beta);

    // contribution of the singularities of the Laplace transform (alpha >= 1 only)
    double exponential = 0.0;
    double doubt = 0.0;
    if (alpha >= 1.0) {
        const double log_r = log_z / alpha;
        const double r = std::exp(log_r);
        const double theta = pi / alpha;
        const double log_mag = (1.0 - beta) * log_r + r * std::cos(theta);
        if (alpha == 1.0) {
            if (is_integer(beta))
                exponential = std::pow(x, 1.0 - beta) * std::exp(x);
            else
                doubt = std::exp(log_mag);
        } else {
            const double phase = (1.0 - beta) * theta + r * std::sin(theta);
            exponential = (2.0 / alpha) * std::exp(log_mag) * std::cos(phase);
            // close to the Stokes line the switch-on of these terms is smooth, not abrupt
            if (!exact && std::sqrt(r) * (pi - theta) < 6.0) doubt = (2.0 / alpha) * std::exp(log_mag);
        }
    }

    Compensated sum;
    double best = INFINITY;
    double error = 0.0;
    bool truncated = false;
    for (int k = 1; k <= 500; ++k) {
        const double y = beta - alpha * k;
        // 1/|Gamma(y)| <= Gamma(1-y)/pi for y < 1, a bound that is smooth across the poles
        const double lg = y >= 1.0 ? -std::lgamma(y) : std::lgamma(1.0 - y) - std::log(pi);
        const double envelope = std::exp(lg - k * log_z);
        if (!exact && k > 1 && envelope >= best) {
            error = best;
            truncated = true;
            break;
        }
        best = std::min(best, envelope);
        const double power = std::exp(-k * log_z);
        const double term = -(k % 2 == 0 ? 1.0 : -1.0) * power * rgamma(y);
        sum.add(term);
        if (exact && y <= 0.0) {
            truncated = true;  // every further coefficient 1/Gamma(y) vanishes
            break;
        }
    }
    if (!truncated) error = best;
    const double value = sum.value() + exponential;
    if (!std::isfinite(value)) return std::nullopt;
    if (error + doubt <= 1e-15 * std::abs(value)) return value;
    return std::nullopt;
}

std::optional<double> ml_integral(double alpha, double beta, double x) {
    const double z = -x;
    if (!(alpha < 1.0 && beta < 1.0 + alpha) || z == 0.0) return std::nullopt;
    const double sb = std::sin(pi * beta);
    const double sab = boost::math::sin_pi(alpha - beta);
    const double ca = std::cos(pi * alpha);
    auto integrand = [=](double r) {
        if (r <= 0.0) return 0.0;
        const double ra = std::pow(r, alpha);
        const double num = ra * sb - z * sab;
        const double den = ra * ra + 2.0 * z * ra * ca + z * z;
        return std::exp(-r) * std::pow(r, alpha - beta) * num / den / pi;
    };
    // the denominator is smallest where r^alpha = -z cos(pi alpha)
    double split = std::pow(z * std::abs(ca), 1.0 / alpha);
    if (!(split > 0.0) || !std::isfinite(split)) split = std::min(1.0, std::pow(z, 1.0 / alpha));
    split = std::min(split, 700.0);

    boost::math::quadrature::tanh_sinh<double> inner;
    boost::math::quadrature::exp_sinh<double> outer;
    double err_a = 0.0, err_b = 0.0, l1_a = 0.0, l1_b = 0.0;
    double a = 0.0, b = 0.0;
    try {
        a = inner.integrate(integrand, 0.0, split, 1e-15, &err_a, &l1_a);
        b = outer.integrate(integrand, split, INFINITY, 1e-15, &err_b, &l1_b);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    const double value = a + b;
    const double l1 = l1_a + l1_b;
    if (!std::isfinite(value) || value == 0.0) return std::nullopt;
    const double estimate = err_a * std::abs(a) + err_b * std::abs(b) + 1e-16 * l1;
    if (estimate <= 1e-12 * std::abs(value) && l1 <= 1e3 * std::abs(value)) return value;
    return std::nullopt;
}

double ml_taylor_mpfr(double alpha, double beta, double x) {
    const double z = -x;
    if (z == 0.0) return rgamma(beta);
    const double r = std::pow(z, 1.0 / alpha);
    // terms reach ~e^r; for alpha >= 1 the result may itself be ~e^-r
    const double lost = std::log2(std::exp(1.0)) * r * (alpha >= 1.0 ? 2.0 : 1.0);
    const auto prec = static_cast<mpfr_prec_t>(96 + std::ceil(lost) + 4 * std::ceil(std::log2(r + 2.0)));
    require(prec < 200000, ErrorKind::UnsupportedDomain, "Mittag-Leffler argument too large for series evaluation");

    Mp power(prec), gamma(prec), arg(prec), term(prec), sum(prec), xm(prec);
    mpfr_set_d(xm.v, x, MPFR_RNDN);
    mpfr_set_ui(power.v, 1, MPFR_RNDN);
    mpfr_set_zero(sum.v, 1);
    const double peak = r / alpha + 2.0;
    for (long k = 0; k < 1000000; ++k) {
        mpfr_set_d(arg.v, alpha, MPFR_RNDN);
        mpfr_mul_si(arg.v, arg.v, k, MPFR_RNDN);
        mpfr_add_d(arg.v, arg.v, beta, MPFR_RNDN);
        mpfr_gamma(gamma.v, arg.v, MPFR_RNDN);
        mpfr_div(term.v, power.v, gamma.v, MPFR_RNDN);
        mpfr_add(sum.v, sum.v, term.v, MPFR_RNDN);
        if (k > peak && !mpfr_zero_p(term.v)) {
            const long floor_exp = mpfr_zero_p(sum.v) ? -static_cast<long>(prec) : mpfr_get_exp(sum.v);
            if (mpfr_get_exp(term.v) < floor_exp - 60) break;
        }
        mpfr_mul(power.v, power.v, xm.v, MPFR_RNDN);
    }
    return mpfr_get_d(sum.v, MPFR_RNDN);
}

}  // namespace detail

double mittag_leffler(double alpha, double beta, double x) {
    validate(alpha, beta, x);
    if (x == 0.0) return rgamma(beta);
    const double r = std::pow(-x, 1.0 / alpha);
    if (r <= 8.0) {
        if (auto v = detail::ml_taylor(alpha, beta, x)) return *v;
    }
    if (auto v = detail::ml_asymptotic(alpha, beta, x)) return *v;
    if (auto v = detail::ml_integral(alpha, beta, x)) return *v;
    return detail::ml_taylor_mpfr(alpha, beta, x);
}

double mittag_leffler(const MlParams& p, double x) { return mittag_leffler(p.alpha, p.beta, x); }

// spectral fields

double SpectralField::eigenvalue(std::size_t index) const {
    if (domain == SpectralDomain::Interval) {
        const double k = static_cast<double>(index + 1);
        return k * k * pi * pi;
    }
    const double k = static_cast<double>(index / K + 1);
    const double l = static_cast<double>(index % K + 1);
    return (k * k + l * l) * pi * pi;
}

double& SpectralField::at(int k, int l) {
    return coeffs.at(domain == SpectralDomain::Interval ? k - 1 : (k - 1) * K + (l - 1));
}

double SpectralField::at(int k, int l) const {
    return coeffs.at(domain == SpectralDomain::Interval ? k - 1 : (k - 1) * K + (l - 1));
}

SpectralField make_spectral_field(SpectralDomain domain, int K) {
    require(K >= 1, ErrorKind::InvalidArgument, "spectral cutoff must be positive");
    SpectralField f;
    f.domain = domain;
    f.K = K;
    f.coeffs.assign(domain == SpectralDomain::Interval ? K : static_cast<std::size_t>(K) * K, 0.0);
    return f;
}

namespace {

// E_{alpha,1}(-lambda T^alpha) per coefficient; 2D eigenvalues repeat, so cache by k^2 + l^2
std::vector<double> decay_factors(const SpectralField& field, double alpha, double T) {
    require(alpha > 0.0 && alpha < 1.0, ErrorKind::InvalidArgument, "alpha must lie in (0,1)");
    require(T > 0.0, ErrorKind::InvalidArgument, "T must be positive");
    const double scale = std::pow(T, alpha);
    std::map<long, double> cache;
    std::vector<double> out(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) {
        const long key = std::lround(field.eigenvalue(i) / (pi * pi));
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, mittag_leffler(alpha, 1.0, -field.eigenvalue(i) * scale)).first;
        out[i] = it->second;
    }
    return out;
}

// sin(k pi x_i) for lattice points i = 0..n and k = 1..K
Eigen::MatrixXd sine_table(int n, int K) {
    Eigen::MatrixXd s(n + 1, K);
    for (int i = 0; i <= n; ++i)
        for (int k = 1; k <= K; ++k) s(i, k - 1) = boost::math::sin_pi(static_cast<double>(k) * i / n);
    return s;
}

void check_domain(const SpectralField& field, const Mesh& mesh) {
    require(field.dim() == mesh.dim, ErrorKind::InvalidArgument, "spectral field and mesh dimensions differ");
}

}  // namespace

SpectralField spectral_forward_linear(const SpectralField& u0, double alpha, double T) {
    const auto factors = decay_factors(u0, alpha, T);
    SpectralField out = u0;
    for (std::size_t i = 0; i < out.size(); ++i) out.coeffs[i] *= factors[i];
    return out;
}

SpectralField spectral_backward_linear(const SpectralField& g, double alpha, double T, double gamma) {
    require(gamma >= 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "gamma must be non-negative");
    const auto factors = decay_factors(g, alpha, T);
    SpectralField out = g;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double denom = gamma + factors[i];
        require(std::abs(denom) >= DBL_MIN, ErrorKind::IllPosedDivision,
                "forward factor underflows for mode " + std::to_string(i) + " with gamma = 0");
        out.coeffs[i] /= denom;
    }
    return out;
}

GridFunction sample_on_mesh(const SpectralField& field, const Mesh& mesh) {
    check_domain(field, mesh);
    const int n = mesh.n;
    const Eigen::MatrixXd s = sine_table(n, field.K);
    Eigen::MatrixXd values;  // (i, j) lattice values, j = 0 in 1D
    if (field.dim() == 1) {
        const Eigen::Map<const Eigen::VectorXd> c(field.coeffs.data(), field.K);
        values = std::sqrt(2.0) * (s * c);
    } else {
        const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
            field.coeffs.data(), field.K, field.K);
        values = 2.0 * (s * c * s.transpose());  // rows: x index, cols: y index
    }
    GridFunction out(mesh.num_interior());
    for (std::size_t d = 0; d < mesh.num_interior(); ++d) {
        const int node = mesh.interior_nodes[d];
        const int i = mesh.dim == 1 ? node : node % (n + 1);
        const int j = mesh.dim == 1 ? 0 : node / (n + 1);
        out[d] = values(i, j);
    }
    return out;
}

SpectralField sine_coefficients(const Mesh& mesh, const std::vector<double>& node_values, int K) {
    require(node_values.size() == mesh.num_nodes(), ErrorKind::InvalidArgument, "node value count mismatch");
    const int n = mesh.n;
    const double h = mesh.h();
    const Eigen::MatrixXd s = sine_table(n, K);
    SpectralField out = make_spectral_field(mesh.dim == 1 ? SpectralDomain::Interval : SpectralDomain::Square, K);
    if (mesh.dim == 1) {
        const Eigen::Map<const Eigen::VectorXd> v(node_values.data(), n + 1);
        const Eigen::VectorXd c = std::sqrt(2.0) * h * (s.transpose() * v);
        for (int k = 0; k < K; ++k) out.coeffs[k] = c[k];
    } else {
        // node (i, j) sits at j*(n+1) + i, so a column-major (n+1)x(n+1) map has rows i, cols j
        const Eigen::Map<const Eigen::MatrixXd> v(node_values.data(), n + 1, n + 1);
        const Eigen::MatrixXd c = 2.0 * h * h * (s.transpose() * v * s);
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < K; ++l) out.coeffs[static_cast<std::size_t>(k) * K + l] = c(k, l);
    }
    return out;
}

}  // namespace fracback
