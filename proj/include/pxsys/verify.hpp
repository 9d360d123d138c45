#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include <json.hpp>

#include "pxsys/exponent.hpp"
#include "pxsys/field.hpp"
#include "pxsys/system.hpp"

namespace pxsys {

struct CheckReport {
    std::string id;
    bool pass = false;
    double worst_margin = 0.0;
    int worst_index = -1;
    double tolerance = 0.0;
    nlohmann::json aux = nlohmann::json::object();

    nlohmann::json to_json() const;
};

/// Worst of min(u - lo) and min(hi - u) over nodes, against -tol.
CheckReport check_ordering(const ScalarField& u, const ScalarField& lo, const ScalarField& hi,
                           double tol);

/// c = min over interior nodes of u(x)/d(x); pass iff c > 0.
std::pair<double, CheckReport> fit_positivity_constant(const ScalarField& u);

/// Sampled monotonicity of the principal operator: min over random pairs of
/// <A(u)-A(v), u-v>, pass iff >= -1e-12.
CheckReport check_monotonicity(const ExponentField& p, int n_samples, double lo, double hi,
                               std::uint64_t seed);

struct EigenOptions {
    int max_iter = 5000;
    double tol = 1e-12;  // relative Rayleigh-quotient change
};

/// First eigenpair of the constant-exponent p-Laplacian via projected descent
/// on the Rayleigh quotient (gradient preconditioned by the p=2 stiffness).
std::pair<double, ScalarField> first_eigenpair(double p_const, const Mesh& mesh,
                                               const EigenOptions& opts = {});

/// Quadrature value of int |u| / wdenom^delta with barycentric sampling that
/// avoids boundary nodes; the fitted constant against the gradient Luxemburg
/// norm of u (exponent p_norm) is reported.
std::pair<double, CheckReport> hardy_sobolev_ratio(const ScalarField& u, const ScalarField& wdenom,
                                                   double delta, const ExponentField& p_norm);

/// Smallest C with ||u||^{p^-} <= C ||u|| (1+||v||)^{alpha^+} + C (1+||u||)
/// plus the (q, beta) analogue; diagnostic, fails only on non-finite norms.
std::pair<std::array<double, 2>, CheckReport> a_priori_check(const ScalarField& u,
                                                             const ScalarField& v,
                                                             const SystemParams& params);

/// Dense Newton with random restarts inside the box on meshes of <= 17 nodes;
/// fully independent assembly. Throws OracleFailure when no in-box root is
/// found.
std::pair<ScalarField, ScalarField> brute_force_coupled(const SystemParams& params,
                                                        const TruncationSpec& spec, double eps,
                                                        std::uint64_t seed = 0);

/// Generic-rhs variant used by the decoupled presets.
std::pair<ScalarField, ScalarField> brute_force_coupled_hg(const ExponentField& p,
                                                           const ExponentField& q,
                                                           const NodalRhs& H, const NodalRhs& G,
                                                           const TruncationSpec& spec,
                                                           std::uint64_t seed = 0);

}  // namespace pxsys
