#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pxsys/field.hpp"
#include "pxsys/mesh.hpp"

namespace pxsys {

/// Variable exponent field (p, q, alpha or beta) stored nodally with cached
/// extrema. Fields created from constant/affine specs remember the spec so
/// they can be rebuilt on an enlarged domain.
struct ExponentField {
    const Mesh* mesh = nullptr;
    std::vector<double> values;
    double min_value = 0.0;
    double max_value = 0.0;
    std::optional<std::array<double, 3>> affine_spec;  // c0 + cx*x + cy*y

    static ExponentField constant(const Mesh& m, double value);
    static ExponentField affine(const Mesh& m, double c0, double cx, double cy = 0.0);
    static ExponentField nodal(const Mesh& m, std::vector<double> vals);

    double at_node(int i) const { return values[i]; }
    /// Mean of vertex values; exact for affine specs.
    double at_barycenter(int e) const;
    bool has_spec() const { return affine_spec.has_value(); }
    ExponentField materialize_on(const Mesh& other) const;
};

/// Hoelder conjugate p/(p-1); requires values > 1 everywhere.
ExponentField conjugate(const ExponentField& field);

/// Critical Sobolev exponent Np/(N-p); requires N >= 2 and sup p < N.
ExponentField critical(const ExponentField& field, int N);

/// Quadrature value of the modular integral of |u|^{p(x)}.
double modular(const ExponentField& field, const ScalarField& u);

/// inf{ lambda > 0 : modular(u/lambda) <= 1 }, bisected to relative 1e-12.
double luxemburg_norm(const ExponentField& field, const ScalarField& u);

/// Same two quantities for the elementwise-constant gradient magnitude of u.
double gradient_modular(const ExponentField& field, const ScalarField& u);
double gradient_luxemburg_norm(const ExponentField& field, const ScalarField& u);

enum class Hypothesis { H1, H2, Superlinear, C, H2Prime };

Hypothesis hypothesis_from_string(const std::string& s);
std::string hypothesis_name(Hypothesis h);

struct HypothesisReport {
    Hypothesis which = Hypothesis::H1;
    bool pass = false;
    std::vector<std::pair<std::string, double>> margins;  // smallest slack per condition

    double worst_margin() const;
    nlohmann::json to_json() const;
};

struct SystemParams;  // params.hpp

HypothesisReport validate(const SystemParams& params, Hypothesis which);

}  // namespace pxsys
