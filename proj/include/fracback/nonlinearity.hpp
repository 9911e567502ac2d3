#pragma once

#include <functional>
#include <string>
#include <vector>

namespace fracback {

/// Pointwise source term f(u) of the semilinear problem.
struct Nonlinearity {
    std::string name;
    std::function<double(double)> f;
    double lipschitz_hint = 0.0;

    double operator()(double u) const { return f(u); }
    bool is_zero() const { return name == "zero"; }
};

/// Registry lookup. `scale` multiplies the function; only `L_sqrt1pu2` uses it
/// by default (L * sqrt(1 + u^2)), the others require scale == 1.
///
/// Known names: zero, sqrt1pu2, one_minus_u3, L_sqrt1pu2, allen_cahn, identity.
Nonlinearity make_nonlinearity(const std::string& name, double scale = 1.0);

std::vector<std::string> nonlinearity_names();

}  // namespace fracback
