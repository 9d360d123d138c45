#include "pxsys/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pxsys/errors.hpp"
#include "pxsys/params.hpp"

namespace pxsys {

namespace {

void cache_extrema(ExponentField& f) {
    f.min_value = *std::min_element(f.values.begin(), f.values.end());
    f.max_value = *std::max_element(f.values.begin(), f.values.end());
    if (f.min_value <= 0.0)
        throw Error(ErrorKind::InvalidParam, "exponent field must be positive");
}

}  // namespace

ExponentField ExponentField::constant(const Mesh& m, double value) {
    ExponentField f;
    f.mesh = &m;
    f.values.assign(m.n_nodes(), value);
    f.affine_spec = std::array<double, 3>{value, 0.0, 0.0};
    cache_extrema(f);
    return f;
}

ExponentField ExponentField::affine(const Mesh& m, double c0, double cx, double cy) {
    ExponentField f;
    f.mesh = &m;
    f.values.resize(m.n_nodes());
    for (int i = 0; i < m.n_nodes(); ++i)
        f.values[i] = c0 + cx * m.nodes[i][0] + cy * m.nodes[i][1];
    f.affine_spec = std::array<double, 3>{c0, cx, cy};
    cache_extrema(f);
    return f;
}

ExponentField ExponentField::nodal(const Mesh& m, std::vector<double> vals) {
    ExponentField f;
    f.mesh = &m;
    f.values = std::move(vals);
    if (static_cast<int>(f.values.size()) != m.n_nodes())
        throw Error(ErrorKind::InvalidParam, "exponent value count does not match node count");
    cache_extrema(f);
    return f;
}

double ExponentField::at_barycenter(int e) const {
    const int nv = mesh->verts_per_elem();
    double s = 0.0;
    for (int k = 0; k < nv; ++k) s += values[mesh->elements[e][k]];
    return s / nv;
}

ExponentField ExponentField::materialize_on(const Mesh& other) const {
    if (!affine_spec)
        throw Error(ErrorKind::InvalidParam,
                    "exponent field has no analytic spec; cannot rebuild on another mesh");
    const auto& c = *affine_spec;
    return affine(other, c[0], c[1], c[2]);
}

ExponentField conjugate(const ExponentField& field) {
    if (field.min_value <= 1.0)
        throw Error(ErrorKind::ConjugateUndefined, "conjugate needs exponent > 1 everywhere");
    ExponentField f;
    f.mesh = field.mesh;
    f.values.resize(field.values.size());
    for (size_t i = 0; i < field.values.size(); ++i)
        f.values[i] = field.values[i] / (field.values[i] - 1.0);
    if (field.affine_spec && (*field.affine_spec)[1] == 0.0 && (*field.affine_spec)[2] == 0.0)
        f.affine_spec = std::array<double, 3>{f.values[0], 0.0, 0.0};
    cache_extrema(f);
    return f;
}

ExponentField critical(const ExponentField& field, int N) {
    if (N < 2 || field.max_value >= static_cast<double>(N))
        throw Error(ErrorKind::CriticalUndefined, "critical exponent needs N >= 2 and sup p < N");
    ExponentField f;
    f.mesh = field.mesh;
    f.values.resize(field.values.size());
    for (size_t i = 0; i < field.values.size(); ++i)
        f.values[i] = N * field.values[i] / (N - field.values[i]);
    cache_extrema(f);
    return f;
}

namespace {

void require_same_mesh(const ExponentField& field, const ScalarField& u) {
    if (field.mesh != u.mesh)
        throw Error(ErrorKind::MeshMismatch, "exponent field and argument live on different meshes");
}

double modular_of(const ExponentField& field, const std::function<double(int)>& val_at_elem) {
    const Mesh& m = *field.mesh;
    double s = 0.0;
    for (int e = 0; e < m.n_elements(); ++e) {
        const double w = std::abs(val_at_elem(e));
        if (w == 0.0) continue;
        s += m.measure[e] * std::pow(w, field.at_barycenter(e));
    }
    return s;
}

double luxemburg_of(const ExponentField& field, const std::function<double(int)>& val_at_elem) {
    auto mod_scaled = [&](double lambda) {
        const Mesh& m = *field.mesh;
        double s = 0.0;
        for (int e = 0; e < m.n_elements(); ++e) {
            const double w = std::abs(val_at_elem(e));
            if (w == 0.0) continue;
            s += m.measure[e] * std::pow(w / lambda, field.at_barycenter(e));
            if (!std::isfinite(s)) return std::numeric_limits<double>::infinity();
        }
        return s;
    };
    if (mod_scaled(1.0) == 0.0) return 0.0;
    double hi = 1.0;
    while (mod_scaled(hi) > 1.0) {
        hi *= 2.0;
        if (hi > 1e300) throw Error(ErrorKind::InvalidParam, "luxemburg norm overflow");
    }
    double lo = hi;
    while (mod_scaled(lo) <= 1.0) {
        lo *= 0.5;
        if (lo < 1e-300) return 0.0;
    }
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mod_scaled(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double gradient_magnitude(const ScalarField& u, int e) {
    const Mesh& m = *u.mesh;
    const auto& el = m.elements[e];
    if (m.dim == 1) {
        const double h = m.nodes[el[1]][0] - m.nodes[el[0]][0];
        return std::abs((u.values[el[1]] - u.values[el[0]]) / h);
    }
    const auto &a = m.nodes[el[0]], &b = m.nodes[el[1]], &c = m.nodes[el[2]];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    const double ua = u.values[el[0]], ub = u.values[el[1]], uc = u.values[el[2]];
    const double gx = ((ub - ua) * (c[1] - a[1]) - (uc - ua) * (b[1] - a[1])) / det;
    const double gy = ((uc - ua) * (b[0] - a[0]) - (ub - ua) * (c[0] - a[0])) / det;
    return std::hypot(gx, gy);
}

}  // namespace

double modular(const ExponentField& field, const ScalarField& u) {
    require_same_mesh(field, u);
    return modular_of(field, [&](int e) { return u.at_barycenter(e); });
}

double luxemburg_norm(const ExponentField& field, const ScalarField& u) {
    require_same_mesh(field, u);
    return luxemburg_of(field, [&](int e) { return u.at_barycenter(e); });
}

double gradient_modular(const ExponentField& field, const ScalarField& u) {
    require_same_mesh(field, u);
    return modular_of(field, [&](int e) { return gradient_magnitude(u, e); });
}

double gradient_luxemburg_norm(const ExponentField& field, const ScalarField& u) {
    require_same_mesh(field, u);
    return luxemburg_of(field, [&](int e) { return gradient_magnitude(u, e); });
}

Hypothesis hypothesis_from_string(const std::string& s) {
    if (s == "H1") return Hypothesis::H1;
    if (s == "H2") return Hypothesis::H2;
    if (s == "hip-superlinear" || s == "superlinear") return Hypothesis::Superlinear;
    if (s == "c" || s == "C") return Hypothesis::C;
    if (s == "H2'" || s == "H2prime") return Hypothesis::H2Prime;
    throw Error(ErrorKind::InvalidParam, "unknown hypothesis id: " + s);
}

std::string hypothesis_name(Hypothesis h) {
    switch (h) {
        case Hypothesis::H1: return "H1";
        case Hypothesis::H2: return "H2";
        case Hypothesis::Superlinear: return "hip-superlinear";
        case Hypothesis::C: return "c";
        case Hypothesis::H2Prime: return "H2'";
    }
    return "?";
}

double HypothesisReport::worst_margin() const {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& [name, m] : margins) w = std::min(w, m);
    return w;
}

nlohmann::json HypothesisReport::to_json() const {
    nlohmann::json j;
    j["hypothesis"] = hypothesis_name(which);
    j["pass"] = pass;
    auto& mj = j["margins"] = nlohmann::json::object();
    for (const auto& [name, m] : margins) mj[name] = m;
    return j;
}

HypothesisReport validate(const SystemParams& params, Hypothesis which) {
    params.check_consistent();
    const ExponentField &p = params.p, &q = params.q, &a = params.alpha, &b = params.beta;
    const Mesh& mesh = params.mesh();
    const int N = mesh.dim;
    HypothesisReport rep;
    rep.which = which;
    auto add = [&](const std::string& name, double margin) { rep.margins.emplace_back(name, margin); };

    switch (which) {
        case Hypothesis::H1: {
            add("p_min_gt_1", p.min_value - 1.0);
            add("q_min_gt_1", q.min_value - 1.0);
            if (N >= 2) {
                add("p_max_lt_N", static_cast<double>(N) - p.max_value);
                add("q_max_lt_N", static_cast<double>(N) - q.max_value);
                if (p.min_value > 1.0 && p.max_value < N && q.min_value > 1.0 && q.max_value < N) {
                    // pointwise p'(x) <= p*(x) at element barycenters
                    double wp = std::numeric_limits<double>::infinity();
                    double wq = wp;
                    for (int e = 0; e < mesh.n_elements(); ++e) {
                        const double pe = p.at_barycenter(e), qe = q.at_barycenter(e);
                        wp = std::min(wp, N * pe / (N - pe) - pe / (pe - 1.0));
                        wq = std::min(wq, N * qe / (N - qe) - qe / (qe - 1.0));
                    }
                    add("p_conj_le_crit", wp);
                    add("q_conj_le_crit", wq);
                }
            }
            break;
        }
        case Hypothesis::H2: {
            add("alpha_min_pos", a.min_value);
            add("alpha_max_lt_qm1", (q.min_value - 1.0) - a.max_value);
            add("beta_min_pos", b.min_value);
            add("beta_max_lt_pm1", (p.min_value - 1.0) - b.max_value);
            break;
        }
        case Hypothesis::Superlinear: {
            add("alpha_min_gt_qp1", a.min_value - (q.max_value - 1.0));
            add("beta_min_gt_pp1", b.min_value - (p.max_value - 1.0));
            break;
        }
        case Hypothesis::C: {
            add("alpha_max_gt_qm1", a.max_value - (q.min_value - 1.0));
            add("beta_max_gt_pm1", b.max_value - (p.min_value - 1.0));
            break;
        }
        case Hypothesis::H2Prime: {
            const double e = std::exp(1.0);
            add("alpha_min_gt_ge", a.min_value - params.gamma / (params.theta * e));
            add("beta_min_gt_ge", b.min_value - params.gamma / (params.theta * e));
            add("alpha_max_lt_pm1", (p.min_value - 1.0) - a.max_value);
            add("beta_max_lt_qm1", (q.min_value - 1.0) - b.max_value);
            // pointwise ratio conditions at element barycenters
            double wa = std::numeric_limits<double>::infinity();
            double wb = wa;
            for (int el = 0; el < mesh.n_elements(); ++el) {
                const double pe = p.at_barycenter(el), qe = q.at_barycenter(el);
                const double pp = pe / (pe - 1.0), qp = qe / (qe - 1.0);
                wa = std::min(wa, qp / pp - a.max_value);
                wb = std::min(wb, pp / qp - b.max_value);
            }
            add("alpha_max_lt_qconj_over_pconj", wa);
            add("beta_max_lt_pconj_over_qconj", wb);
            break;
        }
    }
    rep.pass = true;
    for (const auto& [name, m] : rep.margins)
        if (!(m > 0.0)) rep.pass = false;
    return rep;
}

}  // namespace pxsys
