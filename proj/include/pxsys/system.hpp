#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pxsys/barrier.hpp"
#include "pxsys/field.hpp"
#include "pxsys/nonlin.hpp"
#include "pxsys/params.hpp"
#include "pxsys/pxlap.hpp"

namespace pxsys {

struct TruncationSpec {
    const BarrierBox* box = nullptr;
    double l = 0.5;  // requires min(p^-, q^-) > 1 + l

    static TruncationSpec make(const BarrierBox& box, const SystemParams& params);
};

/// Generic nodal right-hand side H(x_i, s, t).
using NodalRhs = std::function<double(int, double, double)>;

struct CoupledState {
    ScalarField u, v;
    double res_u = 0.0;
    double res_v = 0.0;
    bool within_box = false;
    SolveReport report;

    nlohmann::json summary() const;
};

struct CoupledOptions : SolverOptions {
    std::optional<std::pair<ScalarField, ScalarField>> initial;

    CoupledOptions() = default;
    CoupledOptions(const SolverOptions& base) : SolverOptions(base) {}
};

/// Cut function -((lower - s)_+)^l + ((s - upper)_+)^l.
double gamma_cut(double l, double lower, double upper, double s);

/// Clamped+penalized right-hand sides of the auxiliary system. H clamps into
/// the box and evaluates -gamma log(t+eps) + theta t^{alpha(x)}; G is the
/// transpose analogue acting on s with beta.
double truncate_rhs_H(const SystemParams& params, const TruncationSpec& spec, int node, double s,
                      double t, double eps);
double truncate_rhs_G(const SystemParams& params, const TruncationSpec& spec, int node, double s,
                      double t, double eps);

/// Coupled solve of the truncated auxiliary system with generic H, G.
/// dH_ds/dH_dt are optional analytic derivatives; omitted entries fall back to
/// one-sided finite differences.
CoupledState solve_truncated_hg(const ExponentField& p, const ExponentField& q, const NodalRhs& H,
                                const NodalRhs& G, const TruncationSpec& spec,
                                const CoupledOptions& opts);

/// The paper-specific instantiation at regularization eps.
CoupledState solve_truncated(const SystemParams& params, const TruncationSpec& spec, double eps,
                             const CoupledOptions& opts = {});

/// Box construction (or reuse) followed by the truncated solve; the state
/// solves the untruncated regularized system because it stays inside the box.
CoupledState solve_regularized(const SystemParams& params, double eps, Regime regime,
                               const CoupledOptions& opts = {}, const BoxResult* prebuilt = nullptr);

struct ContinuationResult {
    std::vector<CoupledState> states;
    std::vector<double> eps_schedule;
    std::vector<double> diffs;           // successive sup-norm state differences
    std::vector<double> warm_residuals;  // residual of previous state at each new eps
    bool converged = false;              // last diff <= cauchy_tol
    double eps0_residual_u = 0.0;        // limit state vs the unregularized rhs
    double eps0_residual_v = 0.0;

    const CoupledState& limit() const { return states.back(); }
    nlohmann::json to_json() const;
};

ContinuationResult epsilon_continuation(const SystemParams& params,
                                        const std::vector<double>& schedule, Regime regime,
                                        const CoupledOptions& opts = {},
                                        const BoxResult* prebuilt = nullptr);

/// Decoupled solution operator of the frozen-data system: two independent
/// Dirichlet solves with Section5-flavor right-hand sides scaled by lambda.
std::pair<ScalarField, ScalarField> solution_operator_T(double lambda, const ScalarField& f,
                                                        const ScalarField& g, double eps,
                                                        const SystemParams& params,
                                                        const SolverOptions& opts = {});

struct LambdaStep {
    double lambda = 0.0;
    ScalarField u, v;
    int iterations = 0;
    double update_norm = 0.0;
    double positivity_margin_u = 0.0;  // min(u - w1) with -Delta_p w1 = lambda m1
    double positivity_margin_v = 0.0;
    double apriori_C1 = 0.0;
    double apriori_C2 = 0.0;

    nlohmann::json summary() const;
};

struct BranchRecord {
    std::vector<LambdaStep> steps;
    double m1 = 0.0;  // min over the two one-variable minima at alpha^-/alpha^+
    double m2 = 0.0;
    bool complete = false;
    double max_apriori_C1 = 0.0;
    double max_apriori_C2 = 0.0;

    nlohmann::json to_json() const;
};

/// Damped fixed-point continuation (u,v) <- T(lambda,u,v) along an increasing
/// lambda grid ending at 1. Requires (H2') to pass.
BranchRecord lambda_continuation(const SystemParams& params, double eps,
                                 const std::vector<double>& lambda_grid,
                                 const SolverOptions& opts = {});

}  // namespace pxsys
