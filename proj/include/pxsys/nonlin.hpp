#pragma once

#include <tuple>

#include "pxsys/exponent.hpp"
#include "pxsys/field.hpp"
#include "pxsys/params.hpp"

namespace pxsys {

/// Logarithmic right-hand side -gamma log(|w|+eps) + theta * power term.
struct RhsSpec {
    double gamma = 1.0;
    double theta = 1.0;
    const ExponentField* exponent = nullptr;  // alpha or beta
    RhsFlavor flavor = RhsFlavor::Section4;
    double eps = 0.0;

    void check() const;
};

/// Scalar evaluation at one node.
double eval_rhs_at(const RhsSpec& spec, int node, double w);

/// Nodal evaluation over the whole field.
ScalarField eval_rhs(const RhsSpec& spec, const ScalarField& w);

/// Constant C with |log x| <= x^{-alpha} + C x^{theta} for x > 0, obtained by
/// inflated grid maximization.
double log_bound_constant(double alpha, double theta);

/// Constant C with |log(x+eps)| <= x^{theta} + C for x >= 0.
double log_shift_bound_constant(double theta, double eps);

struct ScalarMin {
    double x0 = 0.0;
    double fmin = 0.0;
    bool positive = false;
};

/// Global minimum of f(x) = theta x^delta - gamma log x over x > 0:
/// x0 = (gamma/(theta delta))^{1/delta}, fmin = (gamma/delta)(1 - log(gamma/(theta delta))),
/// positive iff delta > gamma/(theta e).
ScalarMin scalar_min_f(double gamma, double theta, double delta);

}  // namespace pxsys
