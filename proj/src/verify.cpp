#include "pxsys/verify.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "pxsys/errors.hpp"
#include "pxsys/pxlap.hpp"

namespace pxsys {

nlohmann::json CheckReport::to_json() const {
    return {{"id", id},
            {"pass", pass},
            {"worst_margin", worst_margin},
            {"worst_index", worst_index},
            {"tolerance", tolerance},
            {"aux", aux}};
}

CheckReport check_ordering(const ScalarField& u, const ScalarField& lo, const ScalarField& hi,
                           double tol) {
    if (u.mesh != lo.mesh || u.mesh != hi.mesh)
        throw Error(ErrorKind::MeshMismatch, "check_ordering: fields on different meshes");
    CheckReport rep;
    rep.id = "ordering";
    rep.tolerance = tol;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < u.values.size(); ++i) {
        const double m = std::min(u.values[i] - lo.values[i], hi.values[i] - u.values[i]);
        if (m < rep.worst_margin) {
            rep.worst_margin = m;
            rep.worst_index = static_cast<int>(i);
        }
    }
    rep.pass = rep.worst_margin >= -tol;
    return rep;
}

std::pair<double, CheckReport> fit_positivity_constant(const ScalarField& u) {
    const Mesh& m = *u.mesh;
    CheckReport rep;
    rep.id = "positivity-constant";
    rep.tolerance = 0.0;
    double c = std::numeric_limits<double>::infinity();
    rep.worst_index = -1;
    for (int i : m.interior) {
        const double r = u.values[i] / m.dist[i];
        if (r < c) {
            c = r;
            rep.worst_index = i;
        }
    }
    if (m.interior.empty()) c = 0.0;
    rep.worst_margin = c;
    rep.pass = c > 0.0;
    rep.aux["c"] = c;
    return {c, rep};
}

CheckReport check_monotonicity(const ExponentField& p, int n_samples, double lo, double hi,
                               std::uint64_t seed) {
    if (n_samples < 1) throw Error(ErrorKind::InvalidParam, "check_monotonicity needs n_samples >= 1");
    const Mesh& m = *p.mesh;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    CheckReport rep;
    rep.id = "monotonicity";
    rep.tolerance = 1e-12;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    ScalarField u(m, 0.0, true), v(m, 0.0, true);
    for (int s = 0; s < n_samples; ++s) {
        for (int i : m.interior) {
            u.values[i] = dist(rng);
            v.values[i] = dist(rng);
        }
        const ScalarField Au = principal_residual(p, u);
        const ScalarField Av = principal_residual(p, v);
        double inner = 0.0;
        for (int i : m.interior)
            inner += (Au.values[i] - Av.values[i]) * (u.values[i] - v.values[i]);
        if (inner < rep.worst_margin) {
            rep.worst_margin = inner;
            rep.worst_index = s;
        }
    }
    rep.pass = rep.worst_margin >= -1e-12;
    return rep;
}

std::pair<double, ScalarField> first_eigenpair(double p_const, const Mesh& mesh,
                                               const EigenOptions& opts) {
    if (p_const <= 1.0) throw Error(ErrorKind::InvalidParam, "first_eigenpair needs p > 1");
    const ExponentField p = ExponentField::constant(mesh, p_const);
    const int mi = static_cast<int>(mesh.interior.size());
    if (mi == 0) throw Error(ErrorKind::InvalidMesh, "mesh has no interior nodes");

    // p = 2 stiffness as descent preconditioner
    std::vector<int> dof(mesh.n_nodes(), -1);
    for (int i = 0; i < mi; ++i) dof[mesh.interior[i]] = i;
    const ExponentField p2 = ExponentField::constant(mesh, 2.0);
    ScalarField zero(mesh, 0.0, true);
    Eigen::SparseMatrix<double> K2 = jacobian(p2, zero, 0.0);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol(K2);
    if (chol.info() != Eigen::Success)
        throw Error(ErrorKind::Diverged, "eigen preconditioner factorization failed");

    auto mod = [&](const ScalarField& f) { return modular(p, f); };
    auto energy = [&](const ScalarField& f) { return gradient_modular(p, f); };

    ScalarField phi(mesh, mesh.dist, true);
    auto normalize = [&](ScalarField& f) {
        const double mv = mod(f);
        const double s = std::pow(mv, 1.0 / p_const);
        for (double& x : f.values) x /= s;
    };
    normalize(phi);
    double ray = energy(phi);

    double step_scale = 1.0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        // gradient of the Rayleigh quotient at the normalized iterate
        const ScalarField dE = principal_residual(p, phi);
        std::vector<double> g(mesh.n_nodes(), 0.0);
        const int nv = mesh.verts_per_elem();
        for (int e = 0; e < mesh.n_elements(); ++e) {
            const double fb = phi.at_barycenter(e);
            if (fb == 0.0) continue;
            const double w = mesh.measure[e] * std::pow(std::abs(fb), p_const - 2.0) * fb / nv;
            for (int k = 0; k < nv; ++k) g[mesh.elements[e][k]] += w;
        }
        Eigen::VectorXd gv(mi);
        for (int i = 0; i < mi; ++i) {
            const int n = mesh.interior[i];
            gv[i] = dE.values[n] - ray * g[n];
        }
        const Eigen::VectorXd dir = chol.solve(gv);
        double gnorm = 0.0;
        for (int i = 0; i < mi; ++i) gnorm = std::max(gnorm, std::abs(gv[i]));

        bool accepted = false;
        double t = step_scale;
        for (int back = 0; back < 60; ++back) {
            ScalarField trial = phi;
            for (int i = 0; i < mi; ++i) trial.values[mesh.interior[i]] -= t * dir[i];
            for (double& x : trial.values) x = std::abs(x);
            const double mv = mod(trial);
            if (mv > 0.0) {
                normalize(trial);
                const double r_new = energy(trial);
                if (r_new < ray) {
                    phi = trial;
                    const double drop = ray - r_new;
                    ray = r_new;
                    accepted = true;
                    step_scale = std::min(4.0, t * 1.5);
                    if (drop <= opts.tol * std::max(ray, 1e-300)) it = opts.max_iter;  // converged
                    break;
                }
            }
            t *= 0.5;
        }
        if (!accepted) break;  // no descent direction left at this resolution
    }

    for (int i : mesh.interior)
        if (!(phi.values[i] > 0.0))
            throw Error(ErrorKind::Diverged, "eigenfunction lost interior positivity");
    return {ray, phi};
}

std::pair<double, CheckReport> hardy_sobolev_ratio(const ScalarField& u, const ScalarField& wdenom,
                                                   double delta, const ExponentField& p_norm) {
    if (u.mesh != wdenom.mesh)
        throw Error(ErrorKind::MeshMismatch, "hardy_sobolev_ratio: meshes differ");
    if (delta <= 0.0 || delta >= 1.0)
        throw Error(ErrorKind::InvalidParam, "hardy_sobolev_ratio needs delta in (0,1)");
    const Mesh& m = *u.mesh;
    for (int i : m.interior)
        if (!(wdenom.values[i] > 0.0))
            throw Error(ErrorKind::InvalidParam, "hardy_sobolev_ratio: denominator not positive at an interior node");
    double value = 0.0;
    for (int e = 0; e < m.n_elements(); ++e) {
        const double ub = std::abs(u.at_barycenter(e));
        if (ub == 0.0) continue;  // integrand vanishes with u
        const double wb = wdenom.at_barycenter(e);
        value += wb > 0.0 ? m.measure[e] * ub / std::pow(wb, delta)
                          : std::numeric_limits<double>::infinity();
    }
    CheckReport rep;
    rep.id = "hardy-sobolev";
    rep.tolerance = 0.0;
    const double gn = gradient_luxemburg_norm(p_norm, u);
    const double fitted = gn > 0.0 ? value / gn : 0.0;
    rep.aux["value"] = value;
    rep.aux["gradient_norm"] = gn;
    rep.aux["fitted_C"] = fitted;
    rep.worst_margin = value;
    rep.pass = std::isfinite(value);
    return {value, rep};
}

std::pair<std::array<double, 2>, CheckReport> a_priori_check(const ScalarField& u,
                                                             const ScalarField& v,
                                                             const SystemParams& params) {
    const double nu = luxemburg_norm(params.p, u) + gradient_luxemburg_norm(params.p, u);
    const double nv = luxemburg_norm(params.q, v) + gradient_luxemburg_norm(params.q, v);
    const double C1 =
        std::pow(nu, params.p.min_value) /
        (nu * std::pow(1.0 + nv, params.alpha.max_value) + (1.0 + nu));
    const double C2 =
        std::pow(nv, params.q.min_value) /
        (nv * std::pow(1.0 + nu, params.beta.max_value) + (1.0 + nv));
    CheckReport rep;
    rep.id = "a-priori";
    rep.tolerance = 0.0;
    rep.aux["norm_u"] = nu;
    rep.aux["norm_v"] = nv;
    rep.aux["C1"] = C1;
    rep.aux["C2"] = C2;
    rep.worst_margin = std::min(C1, C2);
    rep.pass = std::isfinite(nu) && std::isfinite(nv) && std::isfinite(C1) && std::isfinite(C2);
    return {{C1, C2}, rep};
}

namespace {

// Self-contained dense assembly of the truncated coupled system: independent
// of the pxlap/system code paths on purpose.
struct DenseOracle {
    const Mesh& m;
    const ExponentField& p;
    const ExponentField& q;
    const TruncationSpec& spec;
    NodalRhs H, G;  // raw right-hand sides

    double h2(int i, double s, double t) const {
        const BarrierBox& b = *spec.box;
        const double cs = std::min(std::max(s, b.u_lo.values[i]), b.u_hi.values[i]);
        const double ct = std::min(std::max(t, b.v_lo.values[i]), b.v_hi.values[i]);
        double cut = 0.0;
        if (b.u_lo.values[i] - s > 0.0) cut -= std::pow(b.u_lo.values[i] - s, spec.l);
        if (s - b.u_hi.values[i] > 0.0) cut += std::pow(s - b.u_hi.values[i], spec.l);
        return H(i, cs, ct) - cut;
    }
    double g2(int i, double s, double t) const {
        const BarrierBox& b = *spec.box;
        const double cs = std::min(std::max(s, b.u_lo.values[i]), b.u_hi.values[i]);
        const double ct = std::min(std::max(t, b.v_lo.values[i]), b.v_hi.values[i]);
        double cut = 0.0;
        if (b.v_lo.values[i] - t > 0.0) cut -= std::pow(b.v_lo.values[i] - t, spec.l);
        if (t - b.v_hi.values[i] > 0.0) cut += std::pow(t - b.v_hi.values[i], spec.l);
        return G(i, cs, ct) - cut;
    }

    // stacked residual on interior dofs, assembled by direct loops
    Eigen::VectorXd residual(const Eigen::VectorXd& x) const {
        const int mi = static_cast<int>(m.interior.size());
        std::vector<double> uu(m.n_nodes(), 0.0), vv(m.n_nodes(), 0.0);
        for (int i = 0; i < mi; ++i) {
            uu[m.interior[i]] = x[i];
            vv[m.interior[i]] = x[i + mi];
        }
        Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * mi);
        const int nv = m.verts_per_elem();
        for (int e = 0; e < m.n_elements(); ++e) {
            const auto& el = m.elements[e];
            double gradu[2] = {0, 0}, gradv[2] = {0, 0};
            double gphi[3][2];
            if (m.dim == 1) {
                const double h = m.nodes[el[1]][0] - m.nodes[el[0]][0];
                gphi[0][0] = -1.0 / h;
                gphi[0][1] = 0.0;
                gphi[1][0] = 1.0 / h;
                gphi[1][1] = 0.0;
            } else {
                const auto &a = m.nodes[el[0]], &b = m.nodes[el[1]], &c = m.nodes[el[2]];
                const double det =
                    (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                gphi[1][0] = (c[1] - a[1]) / det;
                gphi[1][1] = (a[0] - c[0]) / det;
                gphi[2][0] = (a[1] - b[1]) / det;
                gphi[2][1] = (b[0] - a[0]) / det;
                gphi[0][0] = -gphi[1][0] - gphi[2][0];
                gphi[0][1] = -gphi[1][1] - gphi[2][1];
            }
            double pe = 0.0, qe = 0.0, mh = 0.0, mg = 0.0;
            for (int k = 0; k < nv; ++k) {
                gradu[0] += uu[el[k]] * gphi[k][0];
                gradu[1] += uu[el[k]] * gphi[k][1];
                gradv[0] += vv[el[k]] * gphi[k][0];
                gradv[1] += vv[el[k]] * gphi[k][1];
                pe += p.values[el[k]];
                qe += q.values[el[k]];
                mh += h2(el[k], uu[el[k]], vv[el[k]]);
                mg += g2(el[k], uu[el[k]], vv[el[k]]);
            }
            pe /= nv;
            qe /= nv;
            mh /= nv;
            mg /= nv;
            const double magu = std::hypot(gradu[0], gradu[1]);
            const double magv = std::hypot(gradv[0], gradv[1]);
            const double cu = magu > 0.0 ? std::pow(magu, pe - 2.0) : 0.0;
            const double cv = magv > 0.0 ? std::pow(magv, qe - 2.0) : 0.0;
            for (int k = 0; k < nv; ++k) {
                const int i = el[k];
                if (m.is_boundary[i]) continue;
                int gi = -1;
                for (int d = 0; d < mi; ++d)
                    if (m.interior[d] == i) {
                        gi = d;
                        break;
                    }
                r[gi] += m.measure[e] *
                         (cu * (gradu[0] * gphi[k][0] + gradu[1] * gphi[k][1]) - mh / nv);
                r[gi + mi] += m.measure[e] *
                              (cv * (gradv[0] * gphi[k][0] + gradv[1] * gphi[k][1]) - mg / nv);
            }
        }
        return r;
    }
};

}  // namespace

std::pair<ScalarField, ScalarField> brute_force_coupled_hg(const ExponentField& p,
                                                           const ExponentField& q,
                                                           const NodalRhs& H, const NodalRhs& G,
                                                           const TruncationSpec& spec,
                                                           std::uint64_t seed) {
    const Mesh& m = *p.mesh;
    if (m.n_nodes() > 17)
        throw Error(ErrorKind::InvalidParam, "brute-force oracle is limited to meshes of <= 17 nodes");
    if (!spec.box) throw Error(ErrorKind::InvalidParam, "truncation spec has no box");
    const BarrierBox& box = *spec.box;
    const int mi = static_cast<int>(m.interior.size());
    DenseOracle oracle{m, p, q, spec, H, G};

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    double best_res = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best;
    constexpr int kRestarts = 64;
    for (int restart = 0; restart < kRestarts; ++restart) {
        Eigen::VectorXd x(2 * mi);
        for (int i = 0; i < mi; ++i) {
            const int n = m.interior[i];
            x[i] = box.u_lo.values[n] + unit(rng) * (box.u_hi.values[n] - box.u_lo.values[n]);
            x[i + mi] = box.v_lo.values[n] + unit(rng) * (box.v_hi.values[n] - box.v_lo.values[n]);
        }
        Eigen::VectorXd r = oracle.residual(x);
        double rn = r.lpNorm<Eigen::Infinity>();
        for (int it = 0; it < 100 && rn > 1e-13; ++it) {
            Eigen::MatrixXd J(2 * mi, 2 * mi);
            for (int j = 0; j < 2 * mi; ++j) {
                const double h = 1e-7 * (1.0 + std::abs(x[j]));
                Eigen::VectorXd xp = x;
                xp[j] += h;
                J.col(j) = (oracle.residual(xp) - r) / h;
            }
            const Eigen::VectorXd step = J.fullPivLu().solve(-r);
            if (!step.allFinite()) break;
            double t = 1.0;
            bool accepted = false;
            for (int back = 0; back < 50; ++back) {
                const Eigen::VectorXd xt = x + t * step;
                const Eigen::VectorXd rt = oracle.residual(xt);
                const double tn = rt.lpNorm<Eigen::Infinity>();
                if (tn < rn) {
                    x = xt;
                    r = rt;
                    rn = tn;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) break;
        }
        if (rn > 1e-12) continue;
        // must land inside the box
        bool inside = true;
        for (int i = 0; i < mi && inside; ++i) {
            const int n = m.interior[i];
            inside = x[i] >= box.u_lo.values[n] - 1e-8 && x[i] <= box.u_hi.values[n] + 1e-8 &&
                     x[i + mi] >= box.v_lo.values[n] - 1e-8 &&
                     x[i + mi] <= box.v_hi.values[n] + 1e-8;
        }
        if (inside && rn < best_res) {
            best_res = rn;
            best = x;
        }
    }
    if (!std::isfinite(best_res))
        throw Error(ErrorKind::OracleFailure, "no within-box root found by the dense oracle");
    ScalarField u(m, 0.0, true), v(m, 0.0, true);
    for (int i = 0; i < mi; ++i) {
        u.values[m.interior[i]] = best[i];
        v.values[m.interior[i]] = best[i + mi];
    }
    return {u, v};
}

namespace {

std::uint64_t scenario_hash(const SystemParams& params, const TruncationSpec& spec, double eps) {
    auto mix = [](std::uint64_t h, double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    };
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = mix(h, params.gamma);
    h = mix(h, params.theta);
    h = mix(h, params.p.min_value);
    h = mix(h, params.q.max_value);
    h = mix(h, params.alpha.min_value);
    h = mix(h, params.beta.max_value);
    h = mix(h, spec.l);
    h = mix(h, eps);
    h = mix(h, static_cast<double>(params.mesh().n_nodes()));
    return h;
}

}  // namespace

std::pair<ScalarField, ScalarField> brute_force_coupled(const SystemParams& params,
                                                        const TruncationSpec& spec, double eps,
                                                        std::uint64_t seed) {
    params.check_consistent();
    if (!(eps > 0.0) || (spec.box && eps > spec.box->eps0))
        throw Error(ErrorKind::InvalidParam, "eps outside the box validity range");
    if (seed == 0) seed = scenario_hash(params, spec, eps);
    const SystemParams* pp = &params;
    const double e = eps;
    NodalRhs H = [pp, e](int i, double, double t) {
        RhsSpec s{pp->gamma, pp->theta, &pp->alpha, pp->flavor, e};
        return eval_rhs_at(s, i, t);
    };
    NodalRhs G = [pp, e](int i, double s_, double) {
        RhsSpec s{pp->gamma, pp->theta, &pp->beta, pp->flavor, e};
        return eval_rhs_at(s, i, s_);
    };
    return brute_force_coupled_hg(params.p, params.q, H, G, spec, seed);
}

}  // namespace pxsys
