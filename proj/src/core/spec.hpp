#pragma once

#include <string>

namespace pucci {

/// Which extremal operator drives the equation.
enum class Branch { Minus, Plus };

/// Problem parameters: ellipticity pair (lambda_lo <= lambda_hi), spatial
/// dimension and operator branch.  Everything downstream is a pure function
/// of one of these plus the exponent p.
struct OperatorSpec {
    double lambda_lo = 1.0;  ///< lower ellipticity constant
    double lambda_hi = 1.0;  ///< upper ellipticity constant
    int dim = 3;             ///< spatial dimension N >= 3
    Branch branch = Branch::Minus;

    /// Throws InvalidArgument unless 0 < lambda_lo <= lambda_hi, dim >= 3 and
    /// both effective dimensions stay above 2.  Equal ellipticities are
    /// allowed (Laplacian limit).
    void validate() const;

    OperatorSpec with_branch(Branch b) const {
        OperatorSpec s = *this;
        s.branch = b;
        return s;
    }
    OperatorSpec flipped() const {
        return with_branch(branch == Branch::Minus ? Branch::Plus : Branch::Minus);
    }

    bool operator==(const OperatorSpec&) const = default;
};

/// Effective dimension of the radial operator for an explicit branch:
/// (hi/lo)(N-1)+1 for Minus, (lo/hi)(N-1)+1 for Plus.
double dimension_like(const OperatorSpec& spec, Branch branch);

/// Effective dimension for spec.branch.
double dimension_like(const OperatorSpec& spec);

/// (N+2)/(N-2); rejects N < 3.
double sobolev_exponent(int dim);

/// Weight the branch's extremal rule assigns to a Hessian eigenvalue with the
/// sign of q: Minus picks lambda_lo on positive and lambda_hi on negative
/// eigenvalues, Plus the reverse.  The value at q == 0 is immaterial (the
/// eigenvalue contributes nothing); the positive-side weight is returned.
double eigenvalue_weight(const OperatorSpec& spec, double q);

/// Operator value on the radial Hessian with eigenvalues ddu (simple) and
/// du_over_r (multiplicity N-1).
double pucci_radial_value(const OperatorSpec& spec, double ddu, double du_over_r);

/// The unique u'' solving -F(D^2 u) = |u|^{p-1} u at radius r > 0 with the
/// given (u, u').  Piecewise inversion: the map u'' -> weight(u'')*u'' is
/// strictly increasing, so the ellipticity constant is selected by the sign
/// of the residual it must match.  Valid across sign changes of u; the
/// nonlinearity is sign(u)|u|^p throughout.
double resolve_second_derivative(const OperatorSpec& spec, double r, double u, double du,
                                 double p);

/// Ellipticity constant multiplying u'' where u'' < 0 (lambda_hi for Minus,
/// lambda_lo for Plus); this is the constant in the origin series.
double concave_weight(const OperatorSpec& spec);

/// Ellipticity constant multiplying u'' where u'' > 0.
double convex_weight(const OperatorSpec& spec);

/// sign(u) * |u|^p, computed without taking logs of negative numbers.
double signed_power(double u, double p);

enum class USign { Positive, Negative, Zero };
enum class DuSign { NonNegative, Negative };

/// Pure sign classification of a state; total over all inputs.
struct SignRegime {
    USign u_sign;
    DuSign du_sign;
};

SignRegime sign_regime(double u, double du);

const char* to_string(Branch b);
Branch branch_from_string(const std::string& s);

}  // namespace pucci
