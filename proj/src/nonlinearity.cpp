#include "fracback/nonlinearity.hpp"

#include <cmath>

#include "fracback/error.hpp"

namespace fracback {

Nonlinearity make_nonlinearity(const std::string& name, double scale) {
    require(std::isfinite(scale), ErrorKind::InvalidArgument, "nonlinearity scale must be finite");
    if (name != "L_sqrt1pu2")
        require(scale == 1.0, ErrorKind::InvalidArgument, "only L_sqrt1pu2 takes a scale, got one for " + name);

    if (name == "zero") return {name, [](double) { return 0.0; }, 0.0};
    if (name == "sqrt1pu2") return {name, [](double u) { return std::hypot(1.0, u); }, 1.0};
    if (name == "L_sqrt1pu2")
        return {name, [scale](double u) { return scale * std::hypot(1.0, u); }, std::abs(scale)};
    // not globally Lipschitz; the hint is the constant on [-1, 1]
    if (name == "one_minus_u3") return {name, [](double u) { return 1.0 - u * u * u; }, 3.0};
    if (name == "allen_cahn") return {name, [](double u) { return u - u * u * u; }, 2.0};
    if (name == "identity") return {name, [](double u) { return u; }, 1.0};
    throw Error(ErrorKind::InvalidArgument, "unknown nonlinearity '" + name + "'");
}

std::vector<std::string> nonlinearity_names() {
    return {"zero", "sqrt1pu2", "one_minus_u3", "L_sqrt1pu2", "allen_cahn", "identity"};
}

}  // namespace fracback
