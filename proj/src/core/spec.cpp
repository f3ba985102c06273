#include "core/spec.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace pucci {

void OperatorSpec::validate() const {
    if (!(lambda_lo > 0.0) || !std::isfinite(lambda_lo) || !std::isfinite(lambda_hi))
        fail_invalid("operator spec: ellipticity constants must be positive and finite");
    if (lambda_lo > lambda_hi)
        fail_invalid("operator spec: lambda_lo must not exceed lambda_hi");
    if (dim < 3) fail_invalid("operator spec: dimension must be at least 3");
    // Both effective dimensions must exceed 2; only the Plus one can fail.
    if (dimension_like(*this, Branch::Plus) <= 2.0)
        fail_invalid("operator spec: effective dimension for the Plus branch is <= 2 "
                     "(lambda_hi/lambda_lo too large for this N)");
}

double dimension_like(const OperatorSpec& spec, Branch branch) {
    const double ratio = branch == Branch::Minus ? spec.lambda_hi / spec.lambda_lo
                                                 : spec.lambda_lo / spec.lambda_hi;
    return ratio * (spec.dim - 1) + 1.0;
}

double dimension_like(const OperatorSpec& spec) { return dimension_like(spec, spec.branch); }

double sobolev_exponent(int dim) {
    if (dim < 3) fail_invalid("sobolev_exponent: dimension must be at least 3");
    return double(dim + 2) / double(dim - 2);
}

double eigenvalue_weight(const OperatorSpec& spec, double q) {
    if (q < 0.0) return spec.branch == Branch::Minus ? spec.lambda_hi : spec.lambda_lo;
    return spec.branch == Branch::Minus ? spec.lambda_lo : spec.lambda_hi;
}

double pucci_radial_value(const OperatorSpec& spec, double ddu, double du_over_r) {
    return eigenvalue_weight(spec, ddu) * ddu +
           (spec.dim - 1) * eigenvalue_weight(spec, du_over_r) * du_over_r;
}

double signed_power(double u, double p) {
    if (u == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(u), p), u);
}

double resolve_second_derivative(const OperatorSpec& spec, double r, double u, double du,
                                 double p) {
    if (!(r > 0.0)) fail_invalid("resolve_second_derivative: r must be positive");
    const double q = du / r;
    const double xi = -(spec.dim - 1) * eigenvalue_weight(spec, q) * q - signed_power(u, p);
    return xi / eigenvalue_weight(spec, xi);
}

double concave_weight(const OperatorSpec& spec) {
    return spec.branch == Branch::Minus ? spec.lambda_hi : spec.lambda_lo;
}

double convex_weight(const OperatorSpec& spec) {
    return spec.branch == Branch::Minus ? spec.lambda_lo : spec.lambda_hi;
}

SignRegime sign_regime(double u, double du) {
    USign us = u > 0.0 ? USign::Positive : (u < 0.0 ? USign::Negative : USign::Zero);
    DuSign ds = du < 0.0 ? DuSign::Negative : DuSign::NonNegative;
    return SignRegime{us, ds};
}

const char* to_string(Branch b) { return b == Branch::Minus ? "minus" : "plus"; }

Branch branch_from_string(const std::string& s) {
    if (s == "minus" || s == "Minus" || s == "-") return Branch::Minus;
    if (s == "plus" || s == "Plus" || s == "+") return Branch::Plus;
    fail_invalid("unknown operator branch '" + s + "' (expected minus|plus)");
}

}  // namespace pucci
