#include "pxsys/pxlap.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <vector>

#include "pxsys/errors.hpp"

namespace pxsys {

nlohmann::json SolverOptions::to_json() const {
    return {{"tol", tol},
            {"max_iter", max_iter},
            {"mu", mu},
            {"armijo_factor", armijo_factor},
            {"armijo_c", armijo_c},
            {"min_step", min_step},
            {"stall_limit", stall_limit},
            {"gs_max_sweeps", gs_max_sweeps},
            {"gs_relax", gs_relax},
            {"cauchy_tol", cauchy_tol},
            {"fp_tol", fp_tol},
            {"fp_max_iter", fp_max_iter},
            {"fp_relax", fp_relax}};
}

nlohmann::json SolveReport::to_json(bool with_time) const {
    nlohmann::json j{{"iterations", iterations},
                     {"residual_norm", residual_norm},
                     {"initial_residual", initial_residual},
                     {"damping_events", damping_events},
                     {"fallback_used", fallback_used},
                     {"converged", converged}};
    if (with_time) j["wall_time_s"] = wall_time_s;
    return j;
}

namespace detail {

// per-element P1 geometry: gradients of the vertex hat functions
struct ElemGeom {
    std::array<std::array<double, 2>, 3> grad;
    int nv;
};

ElemGeom elem_geometry(const Mesh& m, int e) {
    ElemGeom g;
    const auto& el = m.elements[e];
    if (m.dim == 1) {
        const double h = m.nodes[el[1]][0] - m.nodes[el[0]][0];
        g.nv = 2;
        g.grad[0] = {-1.0 / h, 0.0};
        g.grad[1] = {1.0 / h, 0.0};
        g.grad[2] = {0.0, 0.0};
    } else {
        const auto &a = m.nodes[el[0]], &b = m.nodes[el[1]], &c = m.nodes[el[2]];
        const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        g.nv = 3;
        g.grad[1] = {(c[1] - a[1]) / det, (a[0] - c[0]) / det};
        g.grad[2] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
        g.grad[0] = {-g.grad[1][0] - g.grad[2][0], -g.grad[1][1] - g.grad[2][1]};
    }
    return g;
}

std::array<double, 2> elem_gradient(const Mesh& m, int e, const ElemGeom& g,
                                    const std::vector<double>& u) {
    std::array<double, 2> gu{0.0, 0.0};
    for (int k = 0; k < g.nv; ++k) {
        gu[0] += u[m.elements[e][k]] * g.grad[k][0];
        gu[1] += u[m.elements[e][k]] * g.grad[k][1];
    }
    return gu;
}

}  // namespace detail

using detail::elem_geometry;
using detail::elem_gradient;

namespace {

void require_shared_mesh(const ExponentField& p, const ScalarField& u) {
    if (p.mesh != u.mesh)
        throw Error(ErrorKind::MeshMismatch, "exponent and field live on different meshes");
}

std::vector<double> assemble_principal(const ExponentField& p, const ScalarField& u) {
    const Mesh& m = *p.mesh;
    std::vector<double> r(m.n_nodes(), 0.0);
    for (int e = 0; e < m.n_elements(); ++e) {
        const auto geom = elem_geometry(m, e);
        const auto gu = elem_gradient(m, e, geom, u.values);
        const double mag = std::hypot(gu[0], gu[1]);
        if (mag == 0.0) continue;
        const double coef = std::pow(mag, p.at_barycenter(e) - 2.0);
        for (int k = 0; k < geom.nv; ++k) {
            r[m.elements[e][k]] +=
                m.measure[e] * coef * (gu[0] * geom.grad[k][0] + gu[1] * geom.grad[k][1]);
        }
    }
    for (int b : m.boundary) r[b] = 0.0;
    return r;
}

}  // namespace

std::vector<double> load_vector(const Mesh& m, const ScalarField& f) {
    std::vector<double> load(m.n_nodes(), 0.0);
    const int nv = m.verts_per_elem();
    for (int e = 0; e < m.n_elements(); ++e) {
        const double fb = f.at_barycenter(e);
        const double contrib = m.measure[e] * fb / nv;  // phi_k(barycenter) = 1/nv
        for (int k = 0; k < nv; ++k) load[m.elements[e][k]] += contrib;
    }
    for (int b : m.boundary) load[b] = 0.0;
    return load;
}

ScalarField principal_residual(const ExponentField& p, const ScalarField& u) {
    require_shared_mesh(p, u);
    return ScalarField(*p.mesh, assemble_principal(p, u));
}

ScalarField residual(const ExponentField& p, const ScalarField& u, const ScalarField& f) {
    require_shared_mesh(p, u);
    require_shared_mesh(p, f);
    std::vector<double> r = assemble_principal(p, u);
    const std::vector<double> load = load_vector(*p.mesh, f);
    for (size_t i = 0; i < r.size(); ++i) r[i] -= load[i];
    for (int b : p.mesh->boundary) r[b] = 0.0;
    return ScalarField(*p.mesh, std::move(r));
}

ScalarField residual_elem_rhs(const ExponentField& p, const ScalarField& u,
                              const std::vector<double>& f_elem) {
    require_shared_mesh(p, u);
    const Mesh& m = *p.mesh;
    if (static_cast<int>(f_elem.size()) != m.n_elements())
        throw Error(ErrorKind::InvalidParam, "elementwise rhs size mismatch");
    std::vector<double> r = assemble_principal(p, u);
    const int nv = m.verts_per_elem();
    for (int e = 0; e < m.n_elements(); ++e) {
        const double contrib = m.measure[e] * f_elem[e] / nv;
        for (int k = 0; k < nv; ++k) r[m.elements[e][k]] -= contrib;
    }
    for (int b : m.boundary) r[b] = 0.0;
    return ScalarField(m, std::move(r));
}

Eigen::SparseMatrix<double> jacobian(const ExponentField& p, const ScalarField& u, double mu) {
    require_shared_mesh(p, u);
    if (mu < 0.0) throw Error(ErrorKind::InvalidParam, "jacobian needs mu >= 0");
    const Mesh& m = *p.mesh;
    std::vector<int> dof(m.n_nodes(), -1);
    for (size_t i = 0; i < m.interior.size(); ++i) dof[m.interior[i]] = static_cast<int>(i);
    const int n = static_cast<int>(m.interior.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(m.n_elements()) * 9);
    for (int e = 0; e < m.n_elements(); ++e) {
        const auto geom = elem_geometry(m, e);
        const auto gu = elem_gradient(m, e, geom, u.values);
        const double s = gu[0] * gu[0] + gu[1] * gu[1] + mu;
        const double pe = p.at_barycenter(e);
        double c1, c2;
        if (s <= 0.0) {
            if (pe != 2.0) continue;  // degenerate factor vanishes (p > 2) or blows up (p < 2)
            c1 = 1.0;
            c2 = 0.0;
        } else {
            c1 = std::pow(s, 0.5 * (pe - 2.0));
            c2 = (pe - 2.0) * std::pow(s, 0.5 * (pe - 4.0));
        }
        for (int k = 0; k < geom.nv; ++k) {
            const int gi = dof[m.elements[e][k]];
            if (gi < 0) continue;
            for (int l = 0; l < geom.nv; ++l) {
                const int gj = dof[m.elements[e][l]];
                if (gj < 0) continue;
                const double gg =
                    geom.grad[k][0] * geom.grad[l][0] + geom.grad[k][1] * geom.grad[l][1];
                const double gk = gu[0] * geom.grad[k][0] + gu[1] * geom.grad[k][1];
                const double gl = gu[0] * geom.grad[l][0] + gu[1] * geom.grad[l][1];
                trip.emplace_back(gi, gj, m.measure[e] * (c1 * gg + c2 * gk * gl));
            }
        }
    }
    Eigen::SparseMatrix<double> J(n, n);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

namespace {

double interior_sup(const Mesh& m, const std::vector<double>& r) {
    double s = 0.0;
    for (int i : m.interior) s = std::max(s, std::abs(r[i]));
    return s;
}

// linear solve of -div(w grad u) = load with elementwise weights w
std::vector<double> weighted_linear_solve(const Mesh& m, const std::vector<double>& w,
                                          const std::vector<double>& load) {
    std::vector<int> dof(m.n_nodes(), -1);
    for (size_t i = 0; i < m.interior.size(); ++i) dof[m.interior[i]] = static_cast<int>(i);
    const int n = static_cast<int>(m.interior.size());
    std::vector<Eigen::Triplet<double>> trip;
    for (int e = 0; e < m.n_elements(); ++e) {
        const auto geom = elem_geometry(m, e);
        for (int k = 0; k < geom.nv; ++k) {
            const int gi = dof[m.elements[e][k]];
            if (gi < 0) continue;
            for (int l = 0; l < geom.nv; ++l) {
                const int gj = dof[m.elements[e][l]];
                if (gj < 0) continue;
                trip.emplace_back(gi, gj,
                                  m.measure[e] * w[e] *
                                      (geom.grad[k][0] * geom.grad[l][0] +
                                       geom.grad[k][1] * geom.grad[l][1]));
            }
        }
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = load[m.interior[i]];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(K);
    if (chol.info() != Eigen::Success)
        throw Error(ErrorKind::Diverged, "weighted stiffness factorization failed");
    const Eigen::VectorXd x = chol.solve(b);
    std::vector<double> u(m.n_nodes(), 0.0);
    for (int i = 0; i < n; ++i) u[m.interior[i]] = x[i];
    return u;
}

}  // namespace

std::pair<ScalarField, SolveReport> solve_dirichlet(const ExponentField& p, const ScalarField& f,
                                                    const SolverOptions& opts) {
    require_shared_mesh(p, f);
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh& m = *p.mesh;
    SolveReport rep;

    double fsup = 0.0;
    for (double v : f.values) fsup = std::max(fsup, std::abs(v));
    const double tol_abs = opts.tol * (fsup > 0.0 ? fsup : 1.0);

    const std::vector<double> load = load_vector(m, f);

    // initial iterate: the p = 2 solve with the same load
    std::vector<double> ones(m.n_elements(), 1.0);
    ScalarField u(m, weighted_linear_solve(m, ones, load), true);

    auto residual_of = [&](const ScalarField& w) {
        std::vector<double> r = assemble_principal(p, w);
        for (size_t i = 0; i < r.size(); ++i) r[i] -= load[i];
        return r;
    };

    std::vector<double> r = residual_of(u);
    double rnorm = interior_sup(m, r);
    rep.initial_residual = rnorm;
    int stalls = 0;
    bool picard = false;

    for (rep.iterations = 0; rep.iterations < opts.max_iter; ++rep.iterations) {
        if (rnorm <= tol_abs) {
            rep.converged = true;
            break;
        }
        ScalarField trial = u;
        bool accepted = false;
        if (!picard) {
            Eigen::SparseMatrix<double> J = jacobian(p, u, opts.mu);
            Eigen::VectorXd rhs(static_cast<int>(m.interior.size()));
            for (size_t i = 0; i < m.interior.size(); ++i) rhs[static_cast<int>(i)] = -r[m.interior[i]];
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
            Eigen::VectorXd step;
            if (lu.info() == Eigen::Success) step = lu.solve(rhs);
            if (lu.info() == Eigen::Success && step.allFinite()) {
                double t = 1.0;
                while (t >= opts.min_step) {
                    for (size_t i = 0; i < m.interior.size(); ++i)
                        trial.values[m.interior[i]] = u.values[m.interior[i]] + t * step[static_cast<int>(i)];
                    const std::vector<double> rt = residual_of(trial);
                    const double tn = interior_sup(m, rt);
                    if (tn <= (1.0 - opts.armijo_c * t) * rnorm) {
                        u = trial;
                        r = rt;
                        rnorm = tn;
                        accepted = true;
                        break;
                    }
                    t *= opts.armijo_factor;
                    ++rep.damping_events;
                }
            }
            if (accepted) {
                stalls = 0;
            } else if (++stalls >= opts.stall_limit) {
                picard = true;
                rep.fallback_used = true;
            }
        } else {
            // Picard: lagged |grad u|^{p-2} coefficient with the Jacobian floor
            std::vector<double> w(m.n_elements());
            for (int e = 0; e < m.n_elements(); ++e) {
                const auto geom = elem_geometry(m, e);
                const auto gu = elem_gradient(m, e, geom, u.values);
                const double s = gu[0] * gu[0] + gu[1] * gu[1] + std::max(opts.mu, 1e-14);
                w[e] = std::pow(s, 0.5 * (p.at_barycenter(e) - 2.0));
            }
            const std::vector<double> unew = weighted_linear_solve(m, w, load);
            double t = 1.0;
            while (t >= opts.min_step) {
                for (int i : m.interior)
                    trial.values[i] = (1.0 - t) * u.values[i] + t * unew[i];
                const std::vector<double> rt = residual_of(trial);
                const double tn = interior_sup(m, rt);
                if (tn < rnorm) {
                    u = trial;
                    r = rt;
                    rnorm = tn;
                    accepted = true;
                    break;
                }
                t *= opts.armijo_factor;
                ++rep.damping_events;
            }
            if (!accepted) break;  // no progress in either mode
        }
    }
    if (!rep.converged && rnorm <= tol_abs) rep.converged = true;
    rep.residual_norm = rnorm;
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rep.converged) {
        throw SolveDivergedError("solve_dirichlet did not converge: residual " +
                                     std::to_string(rnorm) + " > " + std::to_string(tol_abs),
                                 rep);
    }
    return {u, rep};
}

}  // namespace pxsys
