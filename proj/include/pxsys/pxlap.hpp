#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <json.hpp>

#include "pxsys/errors.hpp"
#include "pxsys/exponent.hpp"
#include "pxsys/field.hpp"

namespace pxsys {

struct SolverOptions {
    double tol = 1e-10;          // sup residual, relative to sup|f|
    int max_iter = 200;
    double mu = 1e-10;           // Jacobian regularization only
    double armijo_factor = 0.5;
    double armijo_c = 1e-4;
    double min_step = 9.5367431640625e-7;  // 2^-20
    int stall_limit = 3;         // consecutive stalls before Picard fallback
    int gs_max_sweeps = 500;     // Gauss-Seidel fallback for coupled solves
    double gs_relax = 0.5;
    double cauchy_tol = 1e-4;    // epsilon-continuation convergence
    double fp_tol = 1e-9;        // lambda-continuation fixed-point update
    int fp_max_iter = 300;
    double fp_relax = 0.5;

    nlohmann::json to_json() const;
};

struct SolveReport {
    int iterations = 0;
    double residual_norm = 0.0;   // sup over interior test functions
    double initial_residual = 0.0;
    int damping_events = 0;
    bool fallback_used = false;
    bool converged = false;
    double wall_time_s = 0.0;

    nlohmann::json to_json(bool with_time = false) const;
};

class SolveDivergedError : public Error {
  public:
    SolveDivergedError(const std::string& msg, SolveReport rep)
        : Error(ErrorKind::Diverged, msg), report(std::move(rep)) {}
    SolveReport report;
};

/// Weak residual r_i = sum_e m_e |grad u|^{p-2} grad u . grad phi_i
///                     - sum_e m_e f(bary) phi_i(bary),  interior i only.
ScalarField residual(const ExponentField& p, const ScalarField& u, const ScalarField& f);

/// Principal part only (no load); used by monotonicity checks.
ScalarField principal_residual(const ExponentField& p, const ScalarField& u);

/// Residual with an elementwise right-hand side (one value per element,
/// sampled away from the boundary); used for the eps = 0 diagnostics.
ScalarField residual_elem_rhs(const ExponentField& p, const ScalarField& u,
                              const std::vector<double>& f_elem);

/// Load vector of the one-point barycentric rule, interior entries only.
std::vector<double> load_vector(const Mesh& mesh, const ScalarField& f);

/// Newton linearization on interior dofs; the degenerate factor is replaced by
/// (|grad u|^2 + mu)^{(p-2)/2} inside the derivative only.
Eigen::SparseMatrix<double> jacobian(const ExponentField& p, const ScalarField& u, double mu);

/// Dirichlet solve -Delta_{p(x)} u = f, u = 0 on the boundary. Damped Newton
/// with Picard fallback; throws Diverged on failure.
std::pair<ScalarField, SolveReport> solve_dirichlet(const ExponentField& p, const ScalarField& f,
                                                    const SolverOptions& opts = {});

}  // namespace pxsys
