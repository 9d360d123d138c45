#include "pxsys/config.hpp"

#include <fstream>
#include <set>

#include "pxsys/errors.hpp"
#include "pxsys/exponent.hpp"

namespace pxsys {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
    throw Error(ErrorKind::Config, "config error at '" + path + "': " + msg);
}

void expect_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) bad(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) bad(path + "/" + it.key(), "unknown key");
    }
}

double get_num(const json& obj, const std::string& path, const std::string& key, double dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj.at(key).is_number()) bad(path + "/" + key, "expected a number");
    return obj.at(key).get<double>();
}

int get_int(const json& obj, const std::string& path, const std::string& key, int dflt) {
    if (!obj.contains(key)) return dflt;
    if (!obj.at(key).is_number_integer()) bad(path + "/" + key, "expected an integer");
    return obj.at(key).get<int>();
}

ExponentSpecConfig parse_exponent(const json& j, const std::string& path) {
    ExponentSpecConfig spec;
    expect_keys(j, path, {"constant", "affine"});
    if (j.contains("constant") == j.contains("affine"))
        bad(path, "expected exactly one of 'constant' or 'affine'");
    if (j.contains("constant")) {
        spec.is_constant = true;
        spec.constant = get_num(j, path, "constant", 2.0);
    } else {
        spec.is_constant = false;
        if (!j.at("affine").is_array() || j.at("affine").size() < 2 || j.at("affine").size() > 3)
            bad(path + "/affine", "expected [c0, cx] or [c0, cx, cy]");
        spec.affine = j.at("affine").get<std::vector<double>>();
    }
    return spec;
}

}  // namespace

ExponentField ExponentSpecConfig::build(const Mesh& mesh) const {
    if (is_constant) return ExponentField::constant(mesh, constant);
    return ExponentField::affine(mesh, affine[0], affine[1], affine.size() > 2 ? affine[2] : 0.0);
}

nlohmann::json ExponentSpecConfig::to_json() const {
    if (is_constant) return {{"constant", constant}};
    return {{"affine", affine}};
}

Mesh DomainConfig::build() const {
    if (kind == "interval") return build_interval_mesh(a, b, n);
    return build_rectangle_mesh(extent_x, extent_y, nx, ny);
}

nlohmann::json DomainConfig::to_json() const {
    if (kind == "interval") return {{"kind", kind}, {"a", a}, {"b", b}, {"n", n}};
    return {{"kind", kind}, {"extent_x", extent_x}, {"extent_y", extent_y}, {"nx", nx}, {"ny", ny}};
}

nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json j;
    j["name"] = name;
    j["seed"] = seed;
    j["domain"] = domain.to_json();
    j["exponents"] = {{"p", p.to_json()},
                      {"q", q.to_json()},
                      {"alpha", alpha.to_json()},
                      {"beta", beta.to_json()}};
    j["gamma"] = gamma;
    j["theta"] = theta;
    j["regime"] = regime_name(regime);
    if (!eps_schedule.empty()) j["eps_schedule"] = eps_schedule;
    j["eps0"] = eps0;
    if (!lambda_grid.empty()) j["lambda_grid"] = lambda_grid;
    if (regime == Regime::T2) j["eps"] = eps_t2;
    j["solver"] = solver.to_json();
    j["output"] = {{"dir", out_dir}, {"write_fields", write_fields}};
    return j;
}

SystemParams build_params(const ScenarioConfig& cfg, const Mesh& mesh) {
    SystemParams params;
    params.gamma = cfg.gamma;
    params.theta = cfg.theta;
    params.p = cfg.p.build(mesh);
    params.q = cfg.q.build(mesh);
    params.alpha = cfg.alpha.build(mesh);
    params.beta = cfg.beta.build(mesh);
    params.flavor = cfg.regime == Regime::T2 ? RhsFlavor::Section5 : RhsFlavor::Section4;
    params.check_consistent();
    return params;
}

ScenarioConfig parse_config_json(const nlohmann::json& doc) {
    ScenarioConfig cfg;
    expect_keys(doc, "", {"name", "seed", "domain", "exponents", "gamma", "theta", "regime",
                          "eps_schedule", "eps0", "lambda_grid", "eps", "solver", "output"});
    if (doc.contains("name")) cfg.name = doc.at("name").get<std::string>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();

    if (doc.contains("domain")) {
        const json& d = doc.at("domain");
        expect_keys(d, "domain", {"kind", "a", "b", "n", "extent_x", "extent_y", "nx", "ny"});
        cfg.domain.kind = d.value("kind", std::string("interval"));
        if (cfg.domain.kind != "interval" && cfg.domain.kind != "rectangle")
            bad("domain/kind", "expected 'interval' or 'rectangle'");
        cfg.domain.a = get_num(d, "domain", "a", 0.0);
        cfg.domain.b = get_num(d, "domain", "b", 1.0);
        cfg.domain.n = get_int(d, "domain", "n", 16);
        cfg.domain.extent_x = get_num(d, "domain", "extent_x", 1.0);
        cfg.domain.extent_y = get_num(d, "domain", "extent_y", 1.0);
        cfg.domain.nx = get_int(d, "domain", "nx", 8);
        cfg.domain.ny = get_int(d, "domain", "ny", 8);
        if (cfg.domain.kind == "interval" && cfg.domain.n < 2) bad("domain/n", "resolution must be >= 2");
        if (cfg.domain.kind == "rectangle" && (cfg.domain.nx < 2 || cfg.domain.ny < 2))
            bad("domain/nx", "resolutions must be >= 2");
    }
    if (doc.contains("exponents")) {
        const json& e = doc.at("exponents");
        expect_keys(e, "exponents", {"p", "q", "alpha", "beta"});
        if (e.contains("p")) cfg.p = parse_exponent(e.at("p"), "exponents/p");
        if (e.contains("q")) cfg.q = parse_exponent(e.at("q"), "exponents/q");
        if (e.contains("alpha")) cfg.alpha = parse_exponent(e.at("alpha"), "exponents/alpha");
        if (e.contains("beta")) cfg.beta = parse_exponent(e.at("beta"), "exponents/beta");
    }
    cfg.gamma = get_num(doc, "", "gamma", 1.0);
    cfg.theta = get_num(doc, "", "theta", 1.0);
    if (doc.contains("regime")) cfg.regime = regime_from_string(doc.at("regime").get<std::string>());
    if (doc.contains("eps_schedule")) {
        cfg.eps_schedule = doc.at("eps_schedule").get<std::vector<double>>();
        for (size_t k = 0; k < cfg.eps_schedule.size(); ++k)
            if (cfg.eps_schedule[k] <= 0.0 ||
                (k > 0 && cfg.eps_schedule[k] >= cfg.eps_schedule[k - 1]))
                bad("eps_schedule", "must be strictly decreasing and positive");
    }
    cfg.eps0 = get_num(doc, "", "eps0",
                       cfg.eps_schedule.empty() ? 0.5 : std::min(0.5, cfg.eps_schedule.front()));
    if (cfg.eps0 <= 0.0 || cfg.eps0 > 0.5) bad("eps0", "must lie in (0, 1/2]");
    if (doc.contains("lambda_grid")) {
        cfg.lambda_grid = doc.at("lambda_grid").get<std::vector<double>>();
        if (cfg.lambda_grid.empty() || std::abs(cfg.lambda_grid.back() - 1.0) > 1e-12)
            bad("lambda_grid", "must end at 1");
    }
    cfg.eps_t2 = get_num(doc, "", "eps", 1e-3);
    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        expect_keys(s, "solver",
                    {"tol", "max_iter", "mu", "armijo_factor", "armijo_c", "min_step",
                     "stall_limit", "gs_max_sweeps", "gs_relax", "cauchy_tol", "fp_tol",
                     "fp_max_iter", "fp_relax"});
        cfg.solver.tol = get_num(s, "solver", "tol", cfg.solver.tol);
        cfg.solver.max_iter = get_int(s, "solver", "max_iter", cfg.solver.max_iter);
        cfg.solver.mu = get_num(s, "solver", "mu", cfg.solver.mu);
        cfg.solver.armijo_factor = get_num(s, "solver", "armijo_factor", cfg.solver.armijo_factor);
        cfg.solver.armijo_c = get_num(s, "solver", "armijo_c", cfg.solver.armijo_c);
        cfg.solver.min_step = get_num(s, "solver", "min_step", cfg.solver.min_step);
        cfg.solver.stall_limit = get_int(s, "solver", "stall_limit", cfg.solver.stall_limit);
        cfg.solver.gs_max_sweeps = get_int(s, "solver", "gs_max_sweeps", cfg.solver.gs_max_sweeps);
        cfg.solver.gs_relax = get_num(s, "solver", "gs_relax", cfg.solver.gs_relax);
        cfg.solver.cauchy_tol = get_num(s, "solver", "cauchy_tol", cfg.solver.cauchy_tol);
        cfg.solver.fp_tol = get_num(s, "solver", "fp_tol", cfg.solver.fp_tol);
        cfg.solver.fp_max_iter = get_int(s, "solver", "fp_max_iter", cfg.solver.fp_max_iter);
        cfg.solver.fp_relax = get_num(s, "solver", "fp_relax", cfg.solver.fp_relax);
    }
    if (doc.contains("output")) {
        const json& o = doc.at("output");
        expect_keys(o, "output", {"dir", "write_fields"});
        cfg.out_dir = o.value("dir", cfg.out_dir);
        if (o.contains("write_fields")) cfg.write_fields = o.at("write_fields").get<bool>();
    }

    // defaults for the run stage
    if (cfg.regime != Regime::T2 && cfg.eps_schedule.empty())
        cfg.eps_schedule = {0.5, 0.25, 0.125, 0.0625, 0.03125};
    if (cfg.regime == Regime::T2 && cfg.lambda_grid.empty())
        for (int k = 0; k <= 10; ++k) cfg.lambda_grid.push_back(k / 10.0);
    if (!cfg.eps_schedule.empty() && cfg.eps_schedule.front() > cfg.eps0)
        bad("eps_schedule", "entries must stay within (0, eps0]");

    // regime consistency: the matching hypothesis must hold on the actual mesh
    {
        const Mesh mesh = cfg.domain.build();
        const SystemParams params = build_params(cfg, mesh);
        const HypothesisReport rep = validate(params, regime_hypothesis(cfg.regime));
        if (!rep.pass)
            throw Error(ErrorKind::Hypothesis,
                        "config regime " + regime_name(cfg.regime) + " fails hypothesis " +
                            hypothesis_name(rep.which) + " (worst margin " +
                            std::to_string(rep.worst_margin()) + ")");
    }
    return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::Config, std::string("config parse error: ") + e.what());
    }
    return parse_config_json(doc);
}

}  // namespace pxsys
