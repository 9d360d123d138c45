#include "pxsys/runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

#include "pxsys/barrier.hpp"
#include "pxsys/errors.hpp"
#include "pxsys/system.hpp"
#include "pxsys/verify.hpp"

namespace pxsys {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Hypothesis: return 2;
        case ErrorKind::Certification: return 3;
        case ErrorKind::Diverged:
        case ErrorKind::BranchTruncated:
        case ErrorKind::BoxViolation: return 4;
        case ErrorKind::OracleFailure: return 5;
        default: return 1;
    }
}

namespace {

json field_json(const ScalarField& f) { return f.values; }

class StageTimer {
  public:
    explicit StageTimer(json& timings) : timings_(timings) {}
    template <typename F>
    auto stage(const std::string& name, F&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
            auto out = fn();
            timings_[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return out;
        }
    }

  private:
    json& timings_;
};

void add_check(json& verification, const CheckReport& rep, bool required = true) {
    json j = rep.to_json();
    j["required"] = required;
    verification["checks"].push_back(std::move(j));
    if (required && !rep.pass) verification["pass"] = false;
}

void add_flag_check(json& verification, const std::string& id, bool pass, double margin,
                    bool required = true) {
    verification["checks"].push_back(
        {{"id", id}, {"pass", pass}, {"worst_margin", margin}, {"required", required}});
    if (required && !pass) verification["pass"] = false;
}

void run_epsilon_pipeline(const ScenarioConfig& cfg, const SystemParams& params, json& doc,
                          StageTimer& timer) {
    const Mesh& mesh = params.mesh();
    const CoupledOptions opts(cfg.solver);

    const BoxResult box = timer.stage("barrier", [&] {
        return construct_box(params, cfg.regime, cfg.eps0, cfg.solver);
    });
    doc["barrier"] = {{"certificate", box.certificate.to_json()},
                      {"constants", box.box.constants.to_json()},
                      {"params", box.params.to_json()}};

    const ContinuationResult cont = timer.stage("continuation", [&] {
        return epsilon_continuation(params, cfg.eps_schedule, cfg.regime, opts, &box);
    });
    doc["continuation"] = cont.to_json();

    json& verification = doc["verification"];
    verification["pass"] = true;
    verification["checks"] = json::array();
    timer.stage("verification", [&] {
        const CoupledState& lim = cont.limit();
        add_check(verification, check_ordering(lim.u, box.box.u_lo, box.box.u_hi, 1e-8));
        add_check(verification, check_ordering(lim.v, box.box.v_lo, box.box.v_hi, 1e-8));

        auto [cu, rep_cu] = fit_positivity_constant(lim.u);
        auto [cv, rep_cv] = fit_positivity_constant(lim.v);
        add_check(verification, rep_cu);
        add_check(verification, rep_cv);
        const double k0 = box.box.constants.k0;
        add_flag_check(verification, "positivity-factor-u", cu >= 0.9 * k0, cu - 0.9 * k0);
        add_flag_check(verification, "positivity-factor-v", cv >= 0.9 * k0, cv - 0.9 * k0);

        for (double frac : {1.0, 0.5, 0.1}) {
            const SubSuperCertificate ss = check_sub_super(box.box, params, cfg.eps0 * frac);
            json j = ss.to_json();
            j["id"] = "sub-super@" + std::to_string(cfg.eps0 * frac);
            j["required"] = true;
            verification["checks"].push_back(std::move(j));
            if (!ss.pass) verification["pass"] = false;
        }

        bool boxes_ok = true;
        for (const auto& st : cont.states) boxes_ok = boxes_ok && st.within_box;
        add_flag_check(verification, "within-box-all-states", boxes_ok, boxes_ok ? 0.0 : -1.0);
        add_flag_check(verification, "cauchy", cont.converged,
                       cont.diffs.empty() ? 0.0 : cfg.solver.cauchy_tol - cont.diffs.back());

        add_check(verification,
                  check_monotonicity(params.p, 100, -1.0, 1.0, cfg.seed ^ 0x5bd1e995u));

        auto [cs, rep_ap] = a_priori_check(lim.u, lim.v, params);
        add_check(verification, rep_ap);

        if (mesh.n_nodes() <= 17) {
            const TruncationSpec spec = TruncationSpec::make(box.box, params);
            auto [ou, ov] = brute_force_coupled(params, spec, cfg.eps_schedule.back(), cfg.seed);
            const double diff = std::max(sup_diff(ou, lim.u), sup_diff(ov, lim.v));
            add_flag_check(verification, "oracle-match", diff <= 1e-8, 1e-8 - diff);
            doc["oracle"] = {{"enabled", true}, {"diff", diff}};
        }
    });

    if (cfg.write_fields) {
        json fields;
        fields["x"] = json::array();
        fields["y"] = json::array();
        for (const auto& nd : mesh.nodes) {
            fields["x"].push_back(nd[0]);
            fields["y"].push_back(nd[1]);
        }
        fields["d"] = mesh.dist;
        fields["u_lo"] = field_json(box.box.u_lo);
        fields["u_hi"] = field_json(box.box.u_hi);
        fields["v_lo"] = field_json(box.box.v_lo);
        fields["v_hi"] = field_json(box.box.v_hi);
        fields["u"] = field_json(cont.limit().u);
        fields["v"] = field_json(cont.limit().v);
        doc["fields"] = std::move(fields);
    }
}

void run_t2_pipeline(const ScenarioConfig& cfg, const SystemParams& params, json& doc,
                     StageTimer& timer) {
    const Mesh& mesh = params.mesh();
    const BranchRecord branch = timer.stage("continuation", [&] {
        return lambda_continuation(params, cfg.eps_t2, cfg.lambda_grid, cfg.solver);
    });
    doc["branch"] = branch.to_json();

    json& verification = doc["verification"];
    verification["pass"] = true;
    verification["checks"] = json::array();
    timer.stage("verification", [&] {
        add_flag_check(verification, "branch-complete", branch.complete, branch.complete ? 0.0 : -1.0);
        const LambdaStep& first = branch.steps.front();
        add_flag_check(verification, "lambda0-zero",
                       first.lambda > 0.0 || (sup_norm(first.u) == 0.0 && sup_norm(first.v) == 0.0),
                       -(sup_norm(first.u) + sup_norm(first.v)));
        double worst_pos = 0.0;
        for (const auto& st : branch.steps) {
            worst_pos = std::min(worst_pos, st.positivity_margin_u);
            worst_pos = std::min(worst_pos, st.positivity_margin_v);
        }
        add_flag_check(verification, "branch-positivity", worst_pos >= -1e-9, worst_pos + 1e-9);
        add_flag_check(verification, "apriori-finite",
                       std::isfinite(branch.max_apriori_C1) && std::isfinite(branch.max_apriori_C2),
                       0.0);

        const LambdaStep& last = branch.steps.back();
        auto [w2, rep_w2] = solve_dirichlet(params.q, ScalarField(mesh, branch.m2), cfg.solver);
        auto [hs, rep_hs] = hardy_sobolev_ratio(last.u, w2, 0.5, params.p);
        add_check(verification, rep_hs);

        auto [w1, rep_w1] = solve_dirichlet(params.p, ScalarField(mesh, branch.m1), cfg.solver);
        auto [lam1, phi] = first_eigenpair(params.q.min_value, mesh, {});
        double P1 = std::numeric_limits<double>::infinity();
        for (int i : mesh.interior) P1 = std::min(P1, w1.values[i] / phi.values[i]);
        add_flag_check(verification, "eigen-comparison", P1 > 0.0 && std::isfinite(P1), P1);
        doc["eigen"] = {{"lambda1_qminus", lam1}, {"P1", P1}};

        auto [cu, rep_cu] = fit_positivity_constant(last.u);
        add_check(verification, rep_cu);
        if (cfg.write_fields) {
            json fields;
            fields["x"] = json::array();
            fields["y"] = json::array();
            for (const auto& nd : mesh.nodes) {
                fields["x"].push_back(nd[0]);
                fields["y"].push_back(nd[1]);
            }
            fields["d"] = mesh.dist;
            fields["u"] = field_json(last.u);
            fields["v"] = field_json(last.v);
            fields["w1"] = field_json(w1);
            fields["w2"] = field_json(w2);
            doc["fields"] = std::move(fields);
        }
    });
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& cfg) {
    RunReport out;
    json& doc = out.doc;
    doc["config"] = cfg.to_json();
    doc["timings"] = json::object();
    StageTimer timer(doc["timings"]);
    std::string stage = "setup";
    try {
        const Mesh mesh = cfg.domain.build();
        const SystemParams params = build_params(cfg, mesh);

        stage = "hypotheses";
        json hyps;
        for (Hypothesis h : {Hypothesis::H1, Hypothesis::H2, Hypothesis::Superlinear, Hypothesis::C,
                             Hypothesis::H2Prime}) {
            const HypothesisReport rep = validate(params, h);
            hyps[hypothesis_name(h)] = rep.to_json();
        }
        doc["hypotheses"] = std::move(hyps);
        const HypothesisReport required = validate(params, regime_hypothesis(cfg.regime));
        if (!required.pass)
            throw Error(ErrorKind::Hypothesis, "regime " + regime_name(cfg.regime) +
                                                   " fails its hypothesis " +
                                                   hypothesis_name(required.which));

        stage = "pipeline";
        if (cfg.regime == Regime::T2)
            run_t2_pipeline(cfg, params, doc, timer);
        else
            run_epsilon_pipeline(cfg, params, doc, timer);

        const bool verify_ok = doc["verification"]["pass"].get<bool>();
        out.exit_code = verify_ok ? 0 : 5;
        doc["status"] = {{"ok", verify_ok}, {"exit_code", out.exit_code}, {"stage", "done"}};
    } catch (const Error& e) {
        out.exit_code = exit_code_for(e.kind());
        doc["status"] = {{"ok", false},
                         {"exit_code", out.exit_code},
                         {"stage", stage},
                         {"failure", e.what()},
                         {"kind", error_kind_name(e.kind())}};
    } catch (const std::exception& e) {
        out.exit_code = 1;
        doc["status"] = {{"ok", false}, {"exit_code", 1}, {"stage", stage}, {"failure", e.what()}};
    }
    return out;
}

SweepResult sweep(const ScenarioConfig& cfg, const std::string& parameter,
                  const std::vector<double>& values, int jobs) {
    if (parameter != "gamma" && parameter != "theta" && parameter != "resolution")
        throw Error(ErrorKind::Config, "sweep parameter must be gamma, theta or resolution");
    SweepResult out;
    out.runs.resize(values.size());
    jobs = std::max(1, jobs);

    auto run_one = [&](size_t k) {
        ScenarioConfig c = cfg;
        std::ostringstream suffix;
        suffix << "/" << parameter << "_" << k;
        c.name = cfg.name + suffix.str();
        c.out_dir = cfg.out_dir + suffix.str();
        if (parameter == "gamma")
            c.gamma = values[k];
        else if (parameter == "theta")
            c.theta = values[k];
        else {
            c.domain.n = static_cast<int>(values[k]);
            c.domain.nx = c.domain.ny = static_cast<int>(values[k]);
        }
        out.runs[k] = run_scenario(c);
    };
    for (size_t base = 0; base < values.size(); base += static_cast<size_t>(jobs)) {
        std::vector<std::future<void>> batch;
        for (size_t k = base; k < std::min(values.size(), base + jobs); ++k)
            batch.push_back(std::async(std::launch::async, run_one, k));
        for (auto& f : batch) f.get();
    }

    json rows = json::array();
    for (size_t k = 0; k < values.size(); ++k) {
        const json& doc = out.runs[k].doc;
        const bool certified = doc.contains("barrier") &&
                               doc["barrier"]["certificate"]["certified"].get<bool>();
        rows.push_back({{"value", values[k]},
                        {"exit_code", out.runs[k].exit_code},
                        {"certified", certified},
                        {"ok", out.runs[k].exit_code == 0}});
    }
    out.summary = {{"parameter", parameter}, {"rows", std::move(rows)}};
    return out;
}

RunReport run_oracle(const ScenarioConfig& cfg) {
    RunReport out;
    json& doc = out.doc;
    doc["config"] = cfg.to_json();
    try {
        ScenarioConfig tiny = cfg;
        if (tiny.domain.kind != "interval")
            throw Error(ErrorKind::Config, "oracle runs are 1D only");
        tiny.domain.n = std::min(tiny.domain.n, 16);
        const Mesh mesh = tiny.domain.build();
        const SystemParams params = build_params(tiny, mesh);
        const double eps = tiny.eps_schedule.empty() ? 0.25 : tiny.eps_schedule.back();
        const BoxResult box = construct_box(params, tiny.regime, tiny.eps0, tiny.solver);
        const TruncationSpec spec = TruncationSpec::make(box.box, params);
        const CoupledState st = solve_truncated(params, spec, eps, CoupledOptions(tiny.solver));
        auto [ou, ov] = brute_force_coupled(params, spec, eps, tiny.seed);
        const double diff = std::max(sup_diff(ou, st.u), sup_diff(ov, st.v));
        const bool pass = diff <= 1e-8;
        doc["oracle"] = {{"diff", diff}, {"pass", pass}, {"n", tiny.domain.n}, {"eps", eps}};
        out.exit_code = pass ? 0 : 5;
        doc["status"] = {{"ok", pass}, {"exit_code", out.exit_code}, {"stage", "done"}};
    } catch (const Error& e) {
        out.exit_code = exit_code_for(e.kind());
        doc["status"] = {{"ok", false},
                         {"exit_code", out.exit_code},
                         {"failure", e.what()},
                         {"kind", error_kind_name(e.kind())}};
    }
    return out;
}

void write_text_atomic(const std::string& path, const std::string& contents) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw Error(ErrorKind::Config, "cannot write " + tmp.string());
        out << contents;
    }
    fs::rename(tmp, target);
}

namespace {

void write_fields_csv(const json& fields, const std::string& path) {
    std::vector<std::string> cols;
    for (auto it = fields.begin(); it != fields.end(); ++it) cols.push_back(it.key());
    std::ostringstream os;
    os.precision(17);
    for (size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
    os << "\n";
    const size_t n = fields.begin()->size();
    for (size_t i = 0; i < n; ++i) {
        for (size_t c = 0; c < cols.size(); ++c)
            os << (c ? "," : "") << fields[cols[c]][i].get<double>();
        os << "\n";
    }
    write_text_atomic(path, os.str());
}

void write_plot_data(const json& fields, const std::string& dir) {
    std::ostringstream os;
    os.precision(17);
    os << "# x d u_lo u u_hi\n";
    const bool has_box = fields.contains("u_lo");
    const size_t n = fields["x"].size();
    for (size_t i = 0; i < n; ++i) {
        os << fields["x"][i].get<double>() << " " << fields["d"][i].get<double>() << " "
           << (has_box ? fields["u_lo"][i].get<double>() : 0.0) << " "
           << fields["u"][i].get<double>() << " "
           << (has_box ? fields["u_hi"][i].get<double>() : 0.0) << "\n";
    }
    write_text_atomic(dir + "/solution.dat", os.str());
    write_text_atomic(dir + "/plot.py",
                      "#!/usr/bin/env python3\n"
                      "# stub: plot the solution profile emitted next to this script\n"
                      "import matplotlib.pyplot as plt\n"
                      "import numpy as np\n"
                      "x, d, ulo, u, uhi = np.loadtxt('solution.dat').T\n"
                      "plt.plot(x, u, label='u')\n"
                      "for series, name in ((ulo, 'u_lo'), (uhi, 'u_hi')):\n"
                      "    if series.any(): plt.plot(x, series, '--', label=name)\n"
                      "plt.legend(); plt.xlabel('x'); plt.savefig('solution.png', dpi=150)\n");
}

}  // namespace

void write_report_files(const RunReport& report, const ScenarioConfig& cfg) {
    write_text_atomic(cfg.out_dir + "/report.json", report.doc.dump(2) + "\n");
    if (report.doc.contains("fields")) {
        write_fields_csv(report.doc["fields"], cfg.out_dir + "/fields.csv");
        write_plot_data(report.doc["fields"], cfg.out_dir);
    }
}

}  // namespace pxsys
