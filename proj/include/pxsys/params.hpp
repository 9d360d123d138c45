#pragma once

#include <string>

#include "pxsys/exponent.hpp"
#include "pxsys/mesh.hpp"

namespace pxsys {

/// Right-hand-side flavor: Section4 uses -gamma log(|w|+eps) + theta |w|^a,
/// Section5 uses -gamma log(|w|+eps) + theta (|w|+eps)^a.
enum class RhsFlavor { Section4, Section5 };

enum class Regime { I, II, III, T2 };

Regime regime_from_string(const std::string& s);
std::string regime_name(Regime r);

/// Which hypothesis a regime requires.
Hypothesis regime_hypothesis(Regime r);

struct SystemParams {
    double gamma = 1.0;
    double theta = 1.0;
    ExponentField p, q, alpha, beta;  // all on one mesh
    RhsFlavor flavor = RhsFlavor::Section4;

    const Mesh& mesh() const { return *p.mesh; }
    void check_consistent() const;  // throws on mesh mismatch / bad constants
};

}  // namespace pxsys
