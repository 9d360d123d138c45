#pragma once

#include <vector>

#include "pxsys/mesh.hpp"

namespace pxsys {

/// Nodal P1 function on a Mesh. `zero_boundary` marks fields of W0 type; the
/// mesh is borrowed and must outlive the field.
struct ScalarField {
    const Mesh* mesh = nullptr;
    std::vector<double> values;
    bool zero_boundary = false;

    ScalarField() = default;
    ScalarField(const Mesh& m, double value, bool w0 = false);
    ScalarField(const Mesh& m, std::vector<double> vals, bool w0 = false);

    double at_barycenter(int e) const;
    double operator[](int i) const { return values[i]; }
    double& operator[](int i) { return values[i]; }
};

double sup_norm(const ScalarField& u);
double sup_diff(const ScalarField& u, const ScalarField& v);

/// Values of `field` (living on `super`) at the nodes of `sub`.
ScalarField restrict_field(const ScalarField& field, const Mesh& sub, const Mesh& super);

}  // namespace pxsys
