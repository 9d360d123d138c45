#include "pxsys/params.hpp"

#include "pxsys/errors.hpp"

namespace pxsys {

Regime regime_from_string(const std::string& s) {
    if (s == "i" || s == "I") return Regime::I;
    if (s == "ii" || s == "II") return Regime::II;
    if (s == "iii" || s == "III") return Regime::III;
    if (s == "T2" || s == "t2") return Regime::T2;
    throw Error(ErrorKind::Config, "unknown regime: " + s);
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::I: return "i";
        case Regime::II: return "ii";
        case Regime::III: return "iii";
        case Regime::T2: return "T2";
    }
    return "?";
}

Hypothesis regime_hypothesis(Regime r) {
    switch (r) {
        case Regime::I: return Hypothesis::H2;
        case Regime::II: return Hypothesis::Superlinear;
        case Regime::III: return Hypothesis::C;
        case Regime::T2: return Hypothesis::H2Prime;
    }
    return Hypothesis::H2;
}

void SystemParams::check_consistent() const {
    if (gamma <= 0.0 || theta <= 0.0)
        throw Error(ErrorKind::InvalidParam, "system params need gamma, theta > 0");
    const Mesh* m = p.mesh;
    if (!m || q.mesh != m || alpha.mesh != m || beta.mesh != m)
        throw Error(ErrorKind::MeshMismatch, "exponent fields must share one mesh");
    if (p.min_value <= 1.0 || q.min_value <= 1.0)
        throw Error(ErrorKind::InvalidParam, "p and q exponents need inf > 1");
}

}  // namespace pxsys
