#include "pxsys/system.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "pxsys/errors.hpp"
#include "pxsys/verify.hpp"

namespace pxsys {

namespace {
constexpr double kWithinBoxTol = 1e-8;
constexpr double kDerivCap = 1e6;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }
}  // namespace

TruncationSpec TruncationSpec::make(const BarrierBox& box, const SystemParams& params) {
    TruncationSpec spec;
    spec.box = &box;
    spec.l = std::min(0.5, 0.5 * (std::min(params.p.min_value, params.q.min_value) - 1.0));
    return spec;
}

double gamma_cut(double l, double lower, double upper, double s) {
    if (lower > upper) throw Error(ErrorKind::InvalidParam, "gamma_cut needs lower <= upper");
    const double below = lower - s, above = s - upper;
    double v = 0.0;
    if (below > 0.0) v -= std::pow(below, l);
    if (above > 0.0) v += std::pow(above, l);
    return v;
}

namespace {

double gamma_cut_slope(double l, double lower, double upper, double s) {
    double v = 0.0;
    if (lower - s > 0.0) v += l * std::pow(lower - s, l - 1.0);
    if (s - upper > 0.0) v += l * std::pow(s - upper, l - 1.0);
    return std::min(v, kDerivCap);
}

struct PaperRhs {
    const SystemParams* params;
    double eps;

    double H(int node, double t) const {
        RhsSpec s{params->gamma, params->theta, &params->alpha, params->flavor, eps};
        return eval_rhs_at(s, node, t);
    }
    double G(int node, double s_) const {
        RhsSpec s{params->gamma, params->theta, &params->beta, params->flavor, eps};
        return eval_rhs_at(s, node, s_);
    }
    // d/dw of -gamma log(|w|+eps) + theta * power(w), on w >= 0
    double slope(int node, double w, const ExponentField& a) const {
        const double an = a.at_node(node);
        const double power_slope = params->flavor == RhsFlavor::Section4
                                       ? params->theta * an * std::pow(w, an - 1.0)
                                       : params->theta * an * std::pow(w + eps, an - 1.0);
        double v = -params->gamma / (w + eps) + power_slope;
        return clamp(v, -kDerivCap, kDerivCap);
    }
};

}  // namespace

double truncate_rhs_H(const SystemParams& params, const TruncationSpec& spec, int node, double s,
                      double t, double eps) {
    const BarrierBox& b = *spec.box;
    const double cs = clamp(s, b.u_lo.values[node], b.u_hi.values[node]);
    const double ct = clamp(t, b.v_lo.values[node], b.v_hi.values[node]);
    (void)cs;  // the u-equation rhs depends on the partner variable only
    PaperRhs rhs{&params, eps};
    return rhs.H(node, ct) - gamma_cut(spec.l, b.u_lo.values[node], b.u_hi.values[node], s);
}

double truncate_rhs_G(const SystemParams& params, const TruncationSpec& spec, int node, double s,
                      double t, double eps) {
    const BarrierBox& b = *spec.box;
    const double cs = clamp(s, b.u_lo.values[node], b.u_hi.values[node]);
    PaperRhs rhs{&params, eps};
    return rhs.G(node, cs) - gamma_cut(spec.l, b.v_lo.values[node], b.v_hi.values[node], t);
}

nlohmann::json CoupledState::summary() const {
    return {{"res_u", res_u},
            {"res_v", res_v},
            {"within_box", within_box},
            {"sup_u", sup_norm(u)},
            {"sup_v", sup_norm(v)},
            {"report", report.to_json()}};
}

namespace {

using NodalDeriv = std::function<double(int, double, double)>;

struct CoupledProblem {
    const ExponentField* p = nullptr;
    const ExponentField* q = nullptr;
    NodalRhs H2, G2;                        // truncated right-hand sides
    NodalDeriv dHds, dHdt, dGds, dGdt;      // partials of H2/G2
    const BarrierBox* box = nullptr;        // for initial iterate and confinement
};

// barycentric-rule load: load_i = sum_e m_e/nv * mean_k f_k
void add_load(const Mesh& m, const std::vector<double>& f, std::vector<double>& out, double sign) {
    const int nv = m.verts_per_elem();
    for (int e = 0; e < m.n_elements(); ++e) {
        double mean = 0.0;
        for (int k = 0; k < nv; ++k) mean += f[m.elements[e][k]];
        mean /= nv;
        const double contrib = sign * m.measure[e] * mean / nv;
        for (int k = 0; k < nv; ++k) out[m.elements[e][k]] += contrib;
    }
}

struct JointResidual {
    std::vector<double> ru, rv;
    double sup = 0.0;
};

JointResidual joint_residual(const CoupledProblem& prob, const ScalarField& u,
                             const ScalarField& v) {
    const Mesh& m = *prob.p->mesh;
    JointResidual R;
    const ScalarField Au = principal_residual(*prob.p, u);
    const ScalarField Av = principal_residual(*prob.q, v);
    R.ru = Au.values;
    R.rv = Av.values;
    std::vector<double> fH(m.n_nodes()), fG(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) {
        fH[i] = prob.H2(i, u.values[i], v.values[i]);
        fG[i] = prob.G2(i, u.values[i], v.values[i]);
    }
    add_load(m, fH, R.ru, -1.0);
    add_load(m, fG, R.rv, -1.0);
    for (int b : m.boundary) {
        R.ru[b] = 0.0;
        R.rv[b] = 0.0;
    }
    for (int i : m.interior) R.sup = std::max(R.sup, std::max(std::abs(R.ru[i]), std::abs(R.rv[i])));
    return R;
}

bool state_within_box(const BarrierBox& box, const ScalarField& u, const ScalarField& v) {
    for (size_t i = 0; i < u.values.size(); ++i) {
        if (u.values[i] < box.u_lo.values[i] - kWithinBoxTol) return false;
        if (u.values[i] > box.u_hi.values[i] + kWithinBoxTol) return false;
        if (v.values[i] < box.v_lo.values[i] - kWithinBoxTol) return false;
        if (v.values[i] > box.v_hi.values[i] + kWithinBoxTol) return false;
    }
    return true;
}

CoupledState solve_coupled(const CoupledProblem& prob, const CoupledOptions& opts) {
    const Mesh& m = *prob.p->mesh;
    const auto t0 = std::chrono::steady_clock::now();
    const int mi = static_cast<int>(m.interior.size());
    std::vector<int> dof(m.n_nodes(), -1);
    for (int i = 0; i < mi; ++i) dof[m.interior[i]] = i;

    ScalarField u, v;
    if (opts.initial) {
        u = opts.initial->first;
        v = opts.initial->second;
        if (u.mesh != &m || v.mesh != &m)
            throw Error(ErrorKind::MeshMismatch, "initial state lives on a different mesh");
    } else if (prob.box) {
        std::vector<double> u0(m.n_nodes()), v0(m.n_nodes());
        for (int i = 0; i < m.n_nodes(); ++i) {
            u0[i] = 0.5 * (prob.box->u_lo.values[i] + prob.box->u_hi.values[i]);
            v0[i] = 0.5 * (prob.box->v_lo.values[i] + prob.box->v_hi.values[i]);
        }
        u = ScalarField(m, std::move(u0), true);
        v = ScalarField(m, std::move(v0), true);
    } else {
        u = ScalarField(m, 0.0, true);
        v = ScalarField(m, 0.0, true);
    }
    u.zero_boundary = v.zero_boundary = true;
    for (int b : m.boundary) u.values[b] = v.values[b] = 0.0;

    CoupledState state;
    JointResidual R = joint_residual(prob, u, v);
    state.report.initial_residual = R.sup;

    double scale = 1.0;
    for (int i = 0; i < m.n_nodes(); ++i) {
        scale = std::max(scale, std::abs(prob.H2(i, u.values[i], v.values[i])));
        scale = std::max(scale, std::abs(prob.G2(i, u.values[i], v.values[i])));
    }
    const double tol_abs = opts.tol * scale;

    int stalls = 0;
    bool gauss_seidel = false;
    int gs_sweeps = 0;
    auto& rep = state.report;

    while (rep.iterations < opts.max_iter + opts.gs_max_sweeps) {
        if (R.sup <= tol_abs) {
            rep.converged = true;
            break;
        }
        ++rep.iterations;
        if (!gauss_seidel) {
            // joint Newton step
            std::vector<Eigen::Triplet<double>> trip;
            const Eigen::SparseMatrix<double> Ku = jacobian(*prob.p, u, opts.mu);
            const Eigen::SparseMatrix<double> Kv = jacobian(*prob.q, v, opts.mu);
            for (int k = 0; k < Ku.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(Ku, k); it; ++it)
                    trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                      it.value());
            for (int k = 0; k < Kv.outerSize(); ++k)
                for (Eigen::SparseMatrix<double>::InnerIterator it(Kv, k); it; ++it)
                    trip.emplace_back(static_cast<int>(it.row()) + mi,
                                      static_cast<int>(it.col()) + mi, it.value());
            const int nv = m.verts_per_elem();
            for (int e = 0; e < m.n_elements(); ++e) {
                const double w = m.measure[e] / (nv * nv);
                for (int k = 0; k < nv; ++k) {
                    const int gi = dof[m.elements[e][k]];
                    if (gi < 0) continue;
                    for (int l = 0; l < nv; ++l) {
                        const int j = m.elements[e][l];
                        const int gj = dof[j];
                        if (gj < 0) continue;
                        const double su = u.values[j], sv = v.values[j];
                        trip.emplace_back(gi, gj, -w * prob.dHds(j, su, sv));
                        trip.emplace_back(gi, gj + mi, -w * prob.dHdt(j, su, sv));
                        trip.emplace_back(gi + mi, gj, -w * prob.dGds(j, su, sv));
                        trip.emplace_back(gi + mi, gj + mi, -w * prob.dGdt(j, su, sv));
                    }
                }
            }
            Eigen::SparseMatrix<double> J(2 * mi, 2 * mi);
            J.setFromTriplets(trip.begin(), trip.end());
            Eigen::VectorXd rhs(2 * mi);
            for (int i = 0; i < mi; ++i) {
                rhs[i] = -R.ru[m.interior[i]];
                rhs[i + mi] = -R.rv[m.interior[i]];
            }
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(J);
            bool accepted = false;
            if (lu.info() == Eigen::Success) {
                const Eigen::VectorXd step = lu.solve(rhs);
                if (step.allFinite()) {
                    double t = 1.0;
                    ScalarField ut = u, vt = v;
                    while (t >= opts.min_step) {
                        for (int i = 0; i < mi; ++i) {
                            ut.values[m.interior[i]] = u.values[m.interior[i]] + t * step[i];
                            vt.values[m.interior[i]] = v.values[m.interior[i]] + t * step[i + mi];
                        }
                        const JointResidual Rt = joint_residual(prob, ut, vt);
                        if (Rt.sup <= (1.0 - opts.armijo_c * t) * R.sup) {
                            u = ut;
                            v = vt;
                            R = Rt;
                            accepted = true;
                            break;
                        }
                        t *= opts.armijo_factor;
                        ++rep.damping_events;
                    }
                }
            }
            if (accepted) {
                stalls = 0;
            } else if (++stalls >= opts.stall_limit) {
                gauss_seidel = true;
                rep.fallback_used = true;
            }
        } else {
            // relaxed Gauss-Seidel sweep with frozen partners
            if (++gs_sweeps > opts.gs_max_sweeps) break;
            std::vector<double> fH(m.n_nodes()), fG(m.n_nodes());
            for (int i = 0; i < m.n_nodes(); ++i) fH[i] = prob.H2(i, u.values[i], v.values[i]);
            SolverOptions inner = opts;
            inner.tol = std::max(opts.tol, 1e-12);
            auto [u_new, rep_u] = solve_dirichlet(*prob.p, ScalarField(m, fH), inner);
            for (int i : m.interior)
                u.values[i] = (1.0 - opts.gs_relax) * u.values[i] + opts.gs_relax * u_new.values[i];
            for (int i = 0; i < m.n_nodes(); ++i) fG[i] = prob.G2(i, u.values[i], v.values[i]);
            auto [v_new, rep_v] = solve_dirichlet(*prob.q, ScalarField(m, fG), inner);
            for (int i : m.interior)
                v.values[i] = (1.0 - opts.gs_relax) * v.values[i] + opts.gs_relax * v_new.values[i];
            R = joint_residual(prob, u, v);
        }
    }
    if (!rep.converged && R.sup <= tol_abs) rep.converged = true;
    rep.residual_norm = R.sup;
    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rep.converged)
        throw SolveDivergedError("coupled solve did not converge: residual " +
                                     std::to_string(R.sup) + " > " + std::to_string(tol_abs),
                                 rep);

    state.u = u;
    state.v = v;
    double ru = 0.0, rv = 0.0;
    for (int i : m.interior) {
        ru = std::max(ru, std::abs(R.ru[i]));
        rv = std::max(rv, std::abs(R.rv[i]));
    }
    state.res_u = ru;
    state.res_v = rv;
    state.within_box = prob.box ? state_within_box(*prob.box, u, v) : true;
    return state;
}

}  // namespace

CoupledState solve_truncated_hg(const ExponentField& p, const ExponentField& q, const NodalRhs& H,
                                const NodalRhs& G, const TruncationSpec& spec,
                                const CoupledOptions& opts) {
    if (!spec.box) throw Error(ErrorKind::InvalidParam, "truncation spec has no box");
    const BarrierBox& b = *spec.box;
    CoupledProblem prob;
    prob.p = &p;
    prob.q = &q;
    prob.box = &b;
    const double l = spec.l;
    prob.H2 = [&b, &H, l](int i, double s, double t) {
        const double cs = clamp(s, b.u_lo.values[i], b.u_hi.values[i]);
        const double ct = clamp(t, b.v_lo.values[i], b.v_hi.values[i]);
        return H(i, cs, ct) - gamma_cut(l, b.u_lo.values[i], b.u_hi.values[i], s);
    };
    prob.G2 = [&b, &G, l](int i, double s, double t) {
        const double cs = clamp(s, b.u_lo.values[i], b.u_hi.values[i]);
        const double ct = clamp(t, b.v_lo.values[i], b.v_hi.values[i]);
        return G(i, cs, ct) - gamma_cut(l, b.v_lo.values[i], b.v_hi.values[i], t);
    };
    // one-sided finite differences for generic right-hand sides
    auto fd = [](const NodalRhs& F, int which) {
        return [&F, which](int i, double s, double t) {
            const double h = 1e-7 * (1.0 + std::abs(which == 0 ? s : t));
            const double base = F(i, s, t);
            const double bumped = which == 0 ? F(i, s + h, t) : F(i, s, t + h);
            return clamp((bumped - base) / h, -kDerivCap, kDerivCap);
        };
    };
    const NodalRhs& H2 = prob.H2;
    const NodalRhs& G2 = prob.G2;
    prob.dHds = fd(H2, 0);
    prob.dHdt = fd(H2, 1);
    prob.dGds = fd(G2, 0);
    prob.dGdt = fd(G2, 1);
    return solve_coupled(prob, opts);
}

CoupledState solve_truncated(const SystemParams& params, const TruncationSpec& spec, double eps,
                             const CoupledOptions& opts) {
    params.check_consistent();
    if (!spec.box) throw Error(ErrorKind::InvalidParam, "truncation spec has no box");
    if (!(eps > 0.0) || eps > spec.box->eps0)
        throw Error(ErrorKind::InvalidParam, "eps outside the box validity range");
    const BarrierBox& b = *spec.box;
    const double l = spec.l;
    if (std::min(params.p.min_value, params.q.min_value) <= 1.0 + l)
        throw Error(ErrorKind::InvalidParam, "truncation exponent l violates min(p-,q-) > 1+l");

    CoupledProblem prob;
    prob.p = &params.p;
    prob.q = &params.q;
    prob.box = &b;
    PaperRhs rhs{&params, eps};
    prob.H2 = [&params, &spec, eps](int i, double s, double t) {
        return truncate_rhs_H(params, spec, i, s, t, eps);
    };
    prob.G2 = [&params, &spec, eps](int i, double s, double t) {
        return truncate_rhs_G(params, spec, i, s, t, eps);
    };
    prob.dHds = [&b, l](int i, double s, double) {
        return -gamma_cut_slope(l, b.u_lo.values[i], b.u_hi.values[i], s);
    };
    prob.dHdt = [&b, rhs, &params](int i, double, double t) {
        if (t <= b.v_lo.values[i] || t >= b.v_hi.values[i]) return 0.0;
        return rhs.slope(i, t, params.alpha);
    };
    prob.dGdt = [&b, l](int i, double, double t) {
        return -gamma_cut_slope(l, b.v_lo.values[i], b.v_hi.values[i], t);
    };
    prob.dGds = [&b, rhs, &params](int i, double s, double) {
        if (s <= b.u_lo.values[i] || s >= b.u_hi.values[i]) return 0.0;
        return rhs.slope(i, s, params.beta);
    };

    CoupledState state = solve_coupled(prob, opts);
    if (!state.within_box)
        throw Error(ErrorKind::BoxViolation,
                    "converged state escaped the certified box; certificate or mesh too coarse");
    return state;
}

CoupledState solve_regularized(const SystemParams& params, double eps, Regime regime,
                               const CoupledOptions& opts, const BoxResult* prebuilt) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidParam, "solve_regularized needs eps > 0");
    BoxResult local;
    const BoxResult* box = prebuilt;
    if (!box) {
        if (eps > 0.5)
            throw Error(ErrorKind::InvalidParam, "solve_regularized needs eps <= 1/2");
        local = construct_box(params, regime, std::min(0.5, std::max(eps, 0.25)), opts);
        box = &local;
    }
    if (eps > box->box.eps0)
        throw Error(ErrorKind::InvalidParam, "eps outside the box validity range");
    const TruncationSpec spec = TruncationSpec::make(box->box, params);
    return solve_truncated(params, spec, eps, opts);
}

nlohmann::json ContinuationResult::to_json() const {
    nlohmann::json steps = nlohmann::json::array();
    for (size_t k = 0; k < states.size(); ++k) {
        nlohmann::json s = states[k].summary();
        s["eps"] = eps_schedule[k];
        s["warm_residual"] = warm_residuals[k];
        if (k > 0) s["diff"] = diffs[k - 1];
        steps.push_back(std::move(s));
    }
    return {{"steps", std::move(steps)},
            {"diffs", diffs},
            {"converged", converged},
            {"eps0_residual_u", eps0_residual_u},
            {"eps0_residual_v", eps0_residual_v}};
}

ContinuationResult epsilon_continuation(const SystemParams& params,
                                        const std::vector<double>& schedule, Regime regime,
                                        const CoupledOptions& opts, const BoxResult* prebuilt) {
    if (schedule.empty())
        throw Error(ErrorKind::InvalidParam, "epsilon schedule must be non-empty");
    for (size_t k = 0; k < schedule.size(); ++k) {
        if (schedule[k] <= 0.0 || (k > 0 && schedule[k] >= schedule[k - 1]))
            throw Error(ErrorKind::InvalidParam, "epsilon schedule must be strictly decreasing and positive");
    }
    BoxResult local;
    const BoxResult* box = prebuilt;
    if (!box) {
        local = construct_box(params, regime, std::min(0.5, schedule.front()), opts);
        box = &local;
    }
    if (schedule.front() > box->box.eps0)
        throw Error(ErrorKind::InvalidParam, "epsilon schedule exceeds the box validity range");
    const TruncationSpec spec = TruncationSpec::make(box->box, params);

    ContinuationResult out;
    out.eps_schedule = schedule;
    CoupledOptions step_opts = opts;
    for (size_t k = 0; k < schedule.size(); ++k) {
        if (k > 0) step_opts.initial = std::make_pair(out.states.back().u, out.states.back().v);
        CoupledState st = solve_truncated(params, spec, schedule[k], step_opts);
        out.warm_residuals.push_back(st.report.initial_residual);
        if (k > 0)
            out.diffs.push_back(std::max(sup_diff(st.u, out.states.back().u),
                                         sup_diff(st.v, out.states.back().v)));
        out.states.push_back(std::move(st));
    }
    out.converged = out.diffs.empty() || out.diffs.back() <= opts.cauchy_tol;

    // residual of the limit state against the unregularized right-hand side,
    // sampled at element barycenters to stay away from the boundary zeros
    const Mesh& m = params.mesh();
    const CoupledState& lim = out.states.back();
    std::vector<double> fu(m.n_elements()), fv(m.n_elements());
    for (int e = 0; e < m.n_elements(); ++e) {
        const double vb = lim.v.at_barycenter(e), ub = lim.u.at_barycenter(e);
        fu[e] = vb > 0.0 ? -params.gamma * std::log(vb) +
                               params.theta * std::pow(vb, params.alpha.at_barycenter(e))
                         : std::numeric_limits<double>::infinity();
        fv[e] = ub > 0.0 ? -params.gamma * std::log(ub) +
                               params.theta * std::pow(ub, params.beta.at_barycenter(e))
                         : std::numeric_limits<double>::infinity();
    }
    const ScalarField r0u = residual_elem_rhs(params.p, lim.u, fu);
    const ScalarField r0v = residual_elem_rhs(params.q, lim.v, fv);
    double su = 0.0, sv = 0.0;
    for (int i : m.interior) {
        su = std::max(su, std::abs(r0u.values[i]));
        sv = std::max(sv, std::abs(r0v.values[i]));
    }
    out.eps0_residual_u = su;
    out.eps0_residual_v = sv;
    return out;
}

std::pair<ScalarField, ScalarField> solution_operator_T(double lambda, const ScalarField& f,
                                                        const ScalarField& g, double eps,
                                                        const SystemParams& params,
                                                        const SolverOptions& opts) {
    params.check_consistent();
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidParam, "solution operator needs eps > 0");
    if (lambda < 0.0) throw Error(ErrorKind::InvalidParam, "solution operator needs lambda >= 0");
    const Mesh& m = params.mesh();
    if (lambda == 0.0)
        return {ScalarField(m, 0.0, true), ScalarField(m, 0.0, true)};
    RhsSpec spec_u{params.gamma, params.theta, &params.alpha, RhsFlavor::Section5, eps};
    RhsSpec spec_v{params.gamma, params.theta, &params.beta, RhsFlavor::Section5, eps};
    std::vector<double> rhs_u(m.n_nodes()), rhs_v(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) {
        rhs_u[i] = lambda * eval_rhs_at(spec_u, i, g.values[i]);
        rhs_v[i] = lambda * eval_rhs_at(spec_v, i, f.values[i]);
    }
    auto [u, ru] = solve_dirichlet(params.p, ScalarField(m, std::move(rhs_u)), opts);
    auto [v, rv] = solve_dirichlet(params.q, ScalarField(m, std::move(rhs_v)), opts);
    return {std::move(u), std::move(v)};
}

nlohmann::json LambdaStep::summary() const {
    return {{"lambda", lambda},
            {"iterations", iterations},
            {"update_norm", update_norm},
            {"sup_u", sup_norm(u)},
            {"sup_v", sup_norm(v)},
            {"positivity_margin_u", positivity_margin_u},
            {"positivity_margin_v", positivity_margin_v},
            {"apriori_C1", apriori_C1},
            {"apriori_C2", apriori_C2}};
}

nlohmann::json BranchRecord::to_json() const {
    nlohmann::json step_list = nlohmann::json::array();
    for (const auto& s : steps) step_list.push_back(s.summary());
    return {{"steps", std::move(step_list)},
            {"m1", m1},
            {"m2", m2},
            {"complete", complete},
            {"max_apriori_C1", max_apriori_C1},
            {"max_apriori_C2", max_apriori_C2}};
}

BranchRecord lambda_continuation(const SystemParams& params, double eps,
                                 const std::vector<double>& lambda_grid,
                                 const SolverOptions& opts) {
    params.check_consistent();
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidParam, "lambda continuation needs eps > 0");
    if (lambda_grid.empty() || std::abs(lambda_grid.back() - 1.0) > 1e-12)
        throw Error(ErrorKind::InvalidParam, "lambda grid must end at 1");
    for (size_t k = 0; k + 1 < lambda_grid.size(); ++k)
        if (!(lambda_grid[k] < lambda_grid[k + 1]))
            throw Error(ErrorKind::InvalidParam, "lambda grid must be increasing");
    {
        const HypothesisReport hyp = validate(params, Hypothesis::H2Prime);
        if (!hyp.pass)
            throw Error(ErrorKind::Hypothesis, "lambda continuation requires hypothesis H2'");
    }

    BranchRecord rec;
    rec.m1 = std::min(scalar_min_f(params.gamma, params.theta, params.alpha.min_value).fmin,
                      scalar_min_f(params.gamma, params.theta, params.alpha.max_value).fmin);
    rec.m2 = std::min(scalar_min_f(params.gamma, params.theta, params.beta.min_value).fmin,
                      scalar_min_f(params.gamma, params.theta, params.beta.max_value).fmin);
    if (!(rec.m1 > 0.0) || !(rec.m2 > 0.0))
        throw Error(ErrorKind::InvalidParam, "lower-bound constants are not positive under H2'");

    const Mesh& m = params.mesh();
    ScalarField u(m, 0.0, true), v(m, 0.0, true);
    for (double lam : lambda_grid) {
        LambdaStep step;
        step.lambda = lam;
        bool converged = false;
        for (int it = 1; it <= opts.fp_max_iter; ++it) {
            auto [Tu, Tv] = solution_operator_T(lam, u, v, eps, params, opts);
            double upd = 0.0;
            for (int i : m.interior) {
                const double nu = u.values[i] + opts.fp_relax * (Tu.values[i] - u.values[i]);
                const double nv = v.values[i] + opts.fp_relax * (Tv.values[i] - v.values[i]);
                upd = std::max(upd, std::max(std::abs(nu - u.values[i]), std::abs(nv - v.values[i])));
                u.values[i] = nu;
                v.values[i] = nv;
            }
            step.iterations = it;
            step.update_norm = upd;
            if (!std::isfinite(upd) || sup_norm(u) > 1e12)
                throw Error(ErrorKind::BranchTruncated,
                            "fixed point diverged at lambda = " + std::to_string(lam) +
                                "; last good lambda = " +
                                (rec.steps.empty() ? std::string("none")
                                                   : std::to_string(rec.steps.back().lambda)));
            if (upd <= opts.fp_tol) {
                converged = true;
                break;
            }
        }
        if (!converged)
            throw Error(ErrorKind::BranchTruncated,
                        "fixed point stalled at lambda = " + std::to_string(lam) +
                            "; last good lambda = " +
                            (rec.steps.empty() ? std::string("none")
                                               : std::to_string(rec.steps.back().lambda)));
        step.u = u;
        step.v = v;
        if (lam > 0.0) {
            auto [w1, r1] = solve_dirichlet(params.p, ScalarField(m, lam * rec.m1), opts);
            auto [w2, r2] = solve_dirichlet(params.q, ScalarField(m, lam * rec.m2), opts);
            double mu = std::numeric_limits<double>::infinity();
            double mv = mu;
            for (int i = 0; i < m.n_nodes(); ++i) {
                mu = std::min(mu, u.values[i] - w1.values[i]);
                mv = std::min(mv, v.values[i] - w2.values[i]);
            }
            step.positivity_margin_u = mu;
            step.positivity_margin_v = mv;
        }
        const auto [cs, rep] = a_priori_check(u, v, params);
        step.apriori_C1 = cs[0];
        step.apriori_C2 = cs[1];
        rec.max_apriori_C1 = std::max(rec.max_apriori_C1, cs[0]);
        rec.max_apriori_C2 = std::max(rec.max_apriori_C2, cs[1]);
        rec.steps.push_back(std::move(step));
    }
    rec.complete = true;
    return rec;
}

}  // namespace pxsys
