#include "pxsys/barrier.hpp"

#include <cmath>
#include <limits>

#include "pxsys/errors.hpp"
#include "pxsys/nonlin.hpp"

namespace pxsys {

nlohmann::json BarrierParams::to_json() const {
    return {{"lambda", lambda}, {"sigma", sigma},   {"tau", tau},
            {"tau1", tau1},     {"tau2", tau2},     {"delta", delta},
            {"regime", regime_name(regime)}};
}

nlohmann::json FittedConstants::to_json() const {
    return {{"k0", k0}, {"K1", K1},   {"K2", K2},   {"C0", C0},
            {"C0p", C0p}, {"C1", C1}, {"C1p", C1p}, {"c2", c2},
            {"c2p", c2p}, {"c0_strong", c0_strong}};
}

nlohmann::json BoxCertificate::to_json() const {
    return {{"certified", certified},
            {"lambda", lambda},
            {"doublings", doublings},
            {"margin_sub_u", margin_sub_u},
            {"margin_sub_v", margin_sub_v},
            {"margin_super_u", margin_super_u},
            {"margin_super_v", margin_super_v},
            {"margin_order", margin_order},
            {"failed", failed}};
}

nlohmann::json SubSuperCertificate::to_json() const {
    return {{"pass", pass},
            {"worst_sub_u", worst_sub_u},
            {"worst_sub_v", worst_sub_v},
            {"worst_super_u", worst_super_u},
            {"worst_super_v", worst_super_v},
            {"tol", tol}};
}

ScalarField yy_barrier(const ExponentField& p_tilde, double eta, double delta, double tau,
                       double c0) {
    const Mesh& m = *p_tilde.mesh;
    if (eta <= 0.0 || c0 <= 0.0 || tau <= 0.0 || tau >= 1.0)
        throw Error(ErrorKind::InvalidParam, "yy_barrier needs eta, c0 > 0 and tau in (0,1)");
    if (delta <= 0.0 || delta >= 0.5 * m.inradius())
        throw Error(ErrorKind::InvalidParam, "yy_barrier layer width must stay below half the inradius");
    const double xi = c0 * std::pow(eta, 1.0 / (p_tilde.max_value - 1.0 + tau));
    const double mexp = 2.0 / (p_tilde.min_value - 1.0);
    std::vector<double> w(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i) {
        const double t = m.dist[i];
        if (t < delta) {
            w[i] = xi * t;
        } else if (t < 2.0 * delta) {
            const double tail = std::pow((2.0 * delta - t) / delta, mexp + 1.0);
            w[i] = xi * delta + xi * delta / (mexp + 1.0) * (1.0 - tail);
        } else {
            w[i] = xi * delta + xi * delta / (mexp + 1.0);
        }
    }
    return ScalarField(m, std::move(w), true);
}

std::pair<ScalarField, SolveReport> solve_power_rhs(const ExponentField& p, double lambda,
                                                    double sigma, const SolverOptions& opts) {
    if (lambda <= 1.0) throw Error(ErrorKind::InvalidParam, "solve_power_rhs needs lambda > 1");
    return solve_dirichlet(p, ScalarField(*p.mesh, std::pow(lambda, sigma)), opts);
}

namespace {

double positive_or_throw(double c, const char* name) {
    if (!(c > 0.0) || !std::isfinite(c))
        throw Error(ErrorKind::Certification,
                    std::string("fitted constant ") + name + " is not positive and finite");
    return c;
}

}  // namespace

FittedConstants fit_constants(const ScalarField& u_lo, const ScalarField& u_hi,
                              const ScalarField& v_lo, const ScalarField& v_hi,
                              const BarrierParams& bp, const ExponentField& p,
                              const ExponentField& q, double margin) {
    const Mesh& m = *u_lo.mesh;
    const double inf = std::numeric_limits<double>::infinity();
    double k0 = inf, C0 = inf, C0p = inf, c0s = inf;
    double maxu_lo = 0.0, maxv_lo = 0.0, maxu_hi = 0.0, maxv_hi = 0.0;
    for (int i : m.interior)
        k0 = std::min(k0, std::min(u_lo.values[i], v_lo.values[i]) / m.dist[i]);
    for (int i = 0; i < m.n_nodes(); ++i) {
        maxu_lo = std::max(maxu_lo, u_lo.values[i]);
        maxv_lo = std::max(maxv_lo, v_lo.values[i]);
        maxu_hi = std::max(maxu_hi, u_hi.values[i]);
        maxv_hi = std::max(maxv_hi, v_hi.values[i]);
        const double dt = m.dist[i] + margin;  // distance to the grown boundary
        const double layer = std::min(bp.delta, dt);
        C0 = std::min(C0, u_hi.values[i] /
                              (std::pow(bp.lambda, bp.sigma / (p.max_value - 1.0 + bp.tau1)) * layer));
        C0p = std::min(C0p, v_hi.values[i] /
                                (std::pow(bp.lambda, bp.sigma / (q.max_value - 1.0 + bp.tau2)) * layer));
        c0s = std::min(c0s, std::min(u_hi.values[i], v_hi.values[i]) / dt);
    }
    FittedConstants c;
    c.k0 = positive_or_throw(k0, "k0");
    c.K1 = positive_or_throw(maxu_lo / std::pow(bp.lambda, -1.0 / (p.min_value - 1.0)), "K1");
    c.K2 = positive_or_throw(maxv_lo / std::pow(bp.lambda, -1.0 / (q.min_value - 1.0)), "K2");
    c.C0 = positive_or_throw(C0, "C0");
    c.C0p = positive_or_throw(C0p, "C0'");
    c.C1 = positive_or_throw(maxu_hi / std::pow(bp.lambda, bp.sigma / (p.min_value - 1.0)), "C1");
    c.C1p = positive_or_throw(maxv_hi / std::pow(bp.lambda, bp.sigma / (q.min_value - 1.0)), "C1'");
    c.c2 = positive_or_throw(maxu_hi / std::pow(bp.lambda, bp.sigma / (p.max_value - 1.0)), "c2");
    c.c2p = positive_or_throw(maxv_hi / std::pow(bp.lambda, bp.sigma / (q.max_value - 1.0)), "c2'");
    c.c0_strong = positive_or_throw(c0s, "c0");
    return c;
}

namespace {

// worst margin of  value(point) >= 0  over nodes and element barycenters
struct MarginScan {
    double worst = std::numeric_limits<double>::infinity();
    void feed(double margin) { worst = std::min(worst, margin); }
};

double rhs_eps0(double gamma, double theta, double w, double a) {
    // -gamma log(w) + theta w^a, the eps -> 0 worst case on positive w
    if (w <= 0.0) return std::numeric_limits<double>::infinity();
    return -gamma * std::log(w) + theta * std::pow(w, a);
}

}  // namespace

BoxResult construct_box(const SystemParams& params, Regime regime, double eps0,
                        const SolverOptions& opts) {
    params.check_consistent();
    if (!(eps0 > 0.0) || eps0 > 0.5)
        throw Error(ErrorKind::InvalidParam, "construct_box needs eps0 in (0, 1/2]");
    {
        const HypothesisReport hyp = validate(params, regime_hypothesis(regime));
        if (!hyp.pass)
            throw Error(ErrorKind::Hypothesis, "regime " + regime_name(regime) +
                                                   " requires hypothesis " +
                                                   hypothesis_name(hyp.which));
    }
    const Mesh& mesh = params.mesh();
    const double margin = 0.5 * mesh.inradius();

    BoxResult res;
    res.omega_tilde = enlarge_domain(mesh, margin);
    const ExponentField p_t = params.p.materialize_on(res.omega_tilde);
    const ExponentField q_t = params.q.materialize_on(res.omega_tilde);

    BarrierParams bp;
    bp.regime = regime;
    bp.sigma = (regime == Regime::II || regime == Regime::III) ? -0.5 : 1.0;
    bp.delta = 0.5 * margin;
    bp.lambda = 2.0;

    const double gamma = params.gamma, theta = params.theta;
    BoxCertificate cert;
    const double lambda_cap = std::pow(2.0, 60);

    while (true) {
        const double lam = bp.lambda;
        auto [u_lo, rep_ul] = solve_power_rhs(params.p, lam, -1.0, opts);
        auto [v_lo, rep_vl] = solve_power_rhs(params.q, lam, -1.0, opts);
        auto [u_ht, rep_uh] = solve_power_rhs(p_t, lam, bp.sigma, opts);
        auto [v_ht, rep_vh] = solve_power_rhs(q_t, lam, bp.sigma, opts);
        ScalarField u_hi = restrict_field(u_ht, mesh, res.omega_tilde);
        ScalarField v_hi = restrict_field(v_ht, mesh, res.omega_tilde);

        const double lam_inv = 1.0 / lam;
        const double lam_sig = std::pow(lam, bp.sigma);
        MarginScan sub_u, sub_v, super_u, super_v, order;
        for (int i = 0; i < mesh.n_nodes(); ++i) {
            sub_u.feed(-gamma * std::log(v_lo.values[i] + eps0) - lam_inv);
            sub_v.feed(-gamma * std::log(u_lo.values[i] + eps0) - lam_inv);
            super_u.feed(lam_sig -
                         rhs_eps0(gamma, theta, v_hi.values[i], params.alpha.at_node(i)));
            super_v.feed(lam_sig - rhs_eps0(gamma, theta, u_hi.values[i], params.beta.at_node(i)));
            order.feed(std::min(u_hi.values[i] - u_lo.values[i], v_hi.values[i] - v_lo.values[i]));
        }
        for (int e = 0; e < mesh.n_elements(); ++e) {
            sub_u.feed(-gamma * std::log(v_lo.at_barycenter(e) + eps0) - lam_inv);
            sub_v.feed(-gamma * std::log(u_lo.at_barycenter(e) + eps0) - lam_inv);
            super_u.feed(lam_sig - rhs_eps0(gamma, theta, v_hi.at_barycenter(e),
                                            params.alpha.at_barycenter(e)));
            super_v.feed(lam_sig - rhs_eps0(gamma, theta, u_hi.at_barycenter(e),
                                            params.beta.at_barycenter(e)));
        }

        cert.lambda = lam;
        cert.margin_sub_u = sub_u.worst;
        cert.margin_sub_v = sub_v.worst;
        cert.margin_super_u = super_u.worst;
        cert.margin_super_v = super_v.worst;
        cert.margin_order = order.worst;
        cert.certified = sub_u.worst >= 0.0 && sub_v.worst >= 0.0 && super_u.worst >= 0.0 &&
                         super_v.worst >= 0.0 && order.worst >= 0.0;
        if (cert.certified) {
            bp.lambda = lam;
            res.params = bp;
            res.certificate = cert;
            res.u_hi_tilde = u_ht;
            res.v_hi_tilde = v_ht;
            res.box.u_lo = u_lo;
            res.box.u_hi = u_hi;
            res.box.v_lo = v_lo;
            res.box.v_hi = v_hi;
            res.box.eps0 = eps0;
            res.box.lambda = lam;
            res.box.constants =
                fit_constants(u_lo, u_hi, v_lo, v_hi, bp, params.p, params.q, margin);
            return res;
        }
        if (sub_u.worst < 0.0 || sub_v.worst < 0.0)
            cert.failed = "subsolution";
        else if (super_u.worst < 0.0 || super_v.worst < 0.0)
            cert.failed = "supersolution";
        else
            cert.failed = "ordering";
        ++cert.doublings;
        bp.lambda *= 2.0;
        if (bp.lambda > lambda_cap) {
            const double worst =
                std::min(std::min(cert.margin_sub_u, cert.margin_sub_v),
                         std::min(cert.margin_super_u, cert.margin_super_v));
            throw Error(ErrorKind::Certification,
                        "barrier certification failed up to lambda = 2^60; blocking inequality: " +
                            cert.failed + ", worst margin " + std::to_string(worst));
        }
    }
}

SubSuperCertificate check_sub_super(const BarrierBox& box, const SystemParams& params, double eps) {
    if (!(eps > 0.0) || eps > box.eps0)
        throw Error(ErrorKind::InvalidParam, "check_sub_super needs eps in the box validity range");
    const Mesh& m = *box.u_lo.mesh;
    RhsSpec rhs_u{params.gamma, params.theta, &params.alpha, params.flavor, eps};
    RhsSpec rhs_v{params.gamma, params.theta, &params.beta, params.flavor, eps};

    const ScalarField H_lo = eval_rhs(rhs_u, box.v_lo);
    const ScalarField H_hi = eval_rhs(rhs_u, box.v_hi);
    const ScalarField G_lo = eval_rhs(rhs_v, box.u_lo);
    const ScalarField G_hi = eval_rhs(rhs_v, box.u_hi);

    const ScalarField r_sub_u = residual(params.p, box.u_lo, H_lo);
    const ScalarField r_super_u = residual(params.p, box.u_hi, H_hi);
    const ScalarField r_sub_v = residual(params.q, box.v_lo, G_lo);
    const ScalarField r_super_v = residual(params.q, box.v_hi, G_hi);

    SubSuperCertificate cert;
    double su = -std::numeric_limits<double>::infinity();
    double sv = su;
    double pu = std::numeric_limits<double>::infinity();
    double pv = pu;
    for (int i : m.interior) {
        su = std::max(su, r_sub_u.values[i]);
        sv = std::max(sv, r_sub_v.values[i]);
        pu = std::min(pu, r_super_u.values[i]);
        pv = std::min(pv, r_super_v.values[i]);
    }
    cert.worst_sub_u = su;
    cert.worst_sub_v = sv;
    cert.worst_super_u = pu;
    cert.worst_super_v = pv;
    double order = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m.n_nodes(); ++i)
        order = std::min(order, std::min(box.u_hi.values[i] - box.u_lo.values[i],
                                         box.v_hi.values[i] - box.v_lo.values[i]));
    cert.pass = su <= cert.tol && sv <= cert.tol && pu >= -cert.tol && pv >= -cert.tol &&
                order >= -cert.tol;
    return cert;
}

}  // namespace pxsys
