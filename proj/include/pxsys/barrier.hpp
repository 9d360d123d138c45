#pragma once

#include <string>
#include <utility>

#include <json.hpp>

#include "pxsys/field.hpp"
#include "pxsys/params.hpp"
#include "pxsys/pxlap.hpp"

namespace pxsys {

struct BarrierParams {
    double lambda = 2.0;   // tuning parameter, > 1
    double sigma = 1.0;    // power in the supersolution solve
    double tau = 0.5;      // layer barrier exponent perturbation
    double tau1 = 0.5;     // diagnostics for the lower supersolution bound
    double tau2 = 0.5;
    double delta = 0.0;    // barrier layer width
    Regime regime = Regime::I;

    nlohmann::json to_json() const;
};

struct FittedConstants {
    double k0 = 0.0;        // k0 d(x) <= min(u_lo, v_lo)
    double K1 = 0.0;        // u_lo <= K1 lambda^{-1/(p^- - 1)}
    double K2 = 0.0;        // v_lo <= K2 lambda^{-1/(q^- - 1)}
    double C0 = 0.0;        // u_hi >= C0 lambda^{sigma/(p^+ -1+tau1)} min(delta, dist~)
    double C0p = 0.0;
    double C1 = 0.0;        // u_hi <= C1 lambda^{sigma/(p^- - 1)}
    double C1p = 0.0;
    double c2 = 0.0;        // u_hi <= c2 lambda^{sigma/(p^+ - 1)}
    double c2p = 0.0;
    double c0_strong = 0.0; // c0 dist~(x) <= min(u_hi, v_hi) on the grown domain

    nlohmann::json to_json() const;
};

/// Ordered sub/supersolution quadruple on the base domain with its fitted
/// constants and the eps range the certificate covers.
struct BarrierBox {
    ScalarField u_lo, u_hi, v_lo, v_hi;
    FittedConstants constants;
    double eps0 = 0.5;
    double lambda = 0.0;
};

struct BoxCertificate {
    bool certified = false;
    double lambda = 0.0;
    int doublings = 0;
    double margin_sub_u = 0.0;    // -gamma log(v_lo + eps0) - lambda^{-1}, worst point
    double margin_sub_v = 0.0;
    double margin_super_u = 0.0;  // lambda^sigma - rhs(v_hi at eps = 0), worst point
    double margin_super_v = 0.0;
    double margin_order = 0.0;    // min(u_hi - u_lo, v_hi - v_lo)
    std::string failed;           // which inequality blocked certification

    nlohmann::json to_json() const;
};

struct BoxResult {
    BarrierBox box;
    BarrierParams params;
    BoxCertificate certificate;
    Mesh omega_tilde;
    ScalarField u_hi_tilde, v_hi_tilde;  // supersolutions on the grown domain
};

/// Piecewise barrier: linear layer xi*d up to delta, saturating integral layer
/// up to 2*delta, constant beyond; xi = c0 * eta^{1/(p^+ - 1 + tau)}.
ScalarField yy_barrier(const ExponentField& p_tilde, double eta, double delta, double tau,
                       double c0);

/// Torsion-type solve -Delta_{p(x)} u = lambda^sigma.
std::pair<ScalarField, SolveReport> solve_power_rhs(const ExponentField& p, double lambda,
                                                    double sigma, const SolverOptions& opts = {});

/// Fits (k0, K1, K2, C0, C1, ...) from solved box fields; throws Certification
/// when a constant degenerates.
FittedConstants fit_constants(const ScalarField& u_lo, const ScalarField& u_hi,
                              const ScalarField& v_lo, const ScalarField& v_hi,
                              const BarrierParams& bp, const ExponentField& p,
                              const ExponentField& q, double margin);

/// Builds and certifies a box for the given regime by doubling lambda until
/// both discrete inequality certificates hold. Throws Certification if lambda
/// exceeds 2^60.
BoxResult construct_box(const SystemParams& params, Regime regime, double eps0,
                        const SolverOptions& opts = {});

struct SubSuperCertificate {
    bool pass = false;
    double worst_sub_u = 0.0;    // max residual of u_lo against H(u_lo, v_lo); needs <= tol
    double worst_sub_v = 0.0;
    double worst_super_u = 0.0;  // min residual of u_hi against H(u_hi, v_hi); needs >= -tol
    double worst_super_v = 0.0;
    double tol = 1e-9;

    nlohmann::json to_json() const;
};

/// Discrete residual-sign check of the four sub/supersolution inequalities at
/// a given eps in the box validity range.
SubSuperCertificate check_sub_super(const BarrierBox& box, const SystemParams& params, double eps);

}  // namespace pxsys
