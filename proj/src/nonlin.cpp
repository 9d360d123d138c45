#include "pxsys/nonlin.hpp"

#include <algorithm>
#include <cmath>

#include "pxsys/errors.hpp"

namespace pxsys {

void RhsSpec::check() const {
    if (gamma <= 0.0 || theta <= 0.0)
        throw Error(ErrorKind::InvalidParam, "rhs spec needs gamma, theta > 0");
    if (!exponent) throw Error(ErrorKind::InvalidParam, "rhs spec missing exponent field");
    if (eps < 0.0) throw Error(ErrorKind::InvalidParam, "rhs spec needs eps >= 0");
}

double eval_rhs_at(const RhsSpec& spec, int node, double w) {
    const double aw = std::abs(w);
    if (spec.eps == 0.0 && aw == 0.0)
        throw Error(ErrorKind::SingularEval, "rhs evaluation at 0 with eps = 0");
    const double a = spec.exponent->at_node(node);
    const double shifted = aw + spec.eps;
    const double power = spec.flavor == RhsFlavor::Section4 ? std::pow(aw, a) : std::pow(shifted, a);
    return -spec.gamma * std::log(shifted) + spec.theta * power;
}

ScalarField eval_rhs(const RhsSpec& spec, const ScalarField& w) {
    spec.check();
    if (spec.exponent->mesh != w.mesh)
        throw Error(ErrorKind::MeshMismatch, "rhs spec exponent and argument mesh differ");
    std::vector<double> vals(w.values.size());
    for (size_t i = 0; i < w.values.size(); ++i)
        vals[i] = eval_rhs_at(spec, static_cast<int>(i), w.values[i]);
    return ScalarField(*w.mesh, std::move(vals));
}

namespace {
constexpr int kGridPoints = 100000;
constexpr double kInflate = 1.01;
}  // namespace

double log_bound_constant(double alpha, double theta) {
    if (alpha <= 0.0 || theta <= 0.0)
        throw Error(ErrorKind::InvalidParam, "log_bound_constant needs alpha, theta > 0");
    const double l0 = std::log(1e-12), l1 = std::log(1e12);
    double worst = 0.0;
    for (int i = 0; i < kGridPoints; ++i) {
        const double x = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (kGridPoints - 1));
        const double excess = std::abs(std::log(x)) - std::pow(x, -alpha);
        if (excess <= 0.0) continue;
        worst = std::max(worst, excess / std::pow(x, theta));
    }
    return kInflate * worst;
}

double log_shift_bound_constant(double theta, double eps) {
    if (theta <= 0.0 || eps <= 0.0)
        throw Error(ErrorKind::InvalidParam, "log_shift_bound_constant needs theta, eps > 0");
    double worst = std::abs(std::log(eps));  // x = 0 case
    const double l0 = std::log(1e-12), l1 = std::log(1e12);
    for (int i = 0; i < kGridPoints; ++i) {
        const double x = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (kGridPoints - 1));
        worst = std::max(worst, std::abs(std::log(x + eps)) - std::pow(x, theta));
    }
    return std::max(0.0, kInflate * worst);
}

ScalarMin scalar_min_f(double gamma, double theta, double delta) {
    if (delta <= 0.0) throw Error(ErrorKind::InvalidParam, "scalar_min_f needs delta > 0");
    if (gamma <= 0.0 || theta <= 0.0)
        throw Error(ErrorKind::InvalidParam, "scalar_min_f needs gamma, theta > 0");
    ScalarMin out;
    const double ratio = gamma / (theta * delta);
    out.x0 = std::pow(ratio, 1.0 / delta);
    out.fmin = (gamma / delta) * (1.0 - std::log(ratio));
    out.positive = delta > gamma / (theta * std::exp(1.0));
    return out;
}

}  // namespace pxsys
