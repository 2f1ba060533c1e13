#include "qsg/cli_run.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "qsg/errors.hpp"
#include "qsg/optimize.hpp"
#include "qsg/tree.hpp"
#include "qsg/wellplayed.hpp"

namespace qsg {

using nlohmann::json;

namespace {

double now_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

json provenance(const RunConfig& cfg, const Ensemble& e) {
    json j;
    j["tool"] = "qsg";
    j["version"] = kVersion;
    j["command"] = cfg.command;
    j["config"] = json::parse(config_to_json(cfg));
    j["ensemble"] = json::parse(ensemble_to_json(e));
    j["seed"] = cfg.seed;
    return j;
}

struct Emitter {
    std::ostream& fallback;
    std::ofstream file;
    explicit Emitter(const RunConfig& cfg, std::ostream& records) : fallback(records) {
        if (!cfg.out_path.empty()) {
            file.open(cfg.out_path);
            if (!file) throw usage_error("cannot open output path " + cfg.out_path);
        }
    }
    void emit(const json& j) { (file.is_open() ? static_cast<std::ostream&>(file) : fallback) << j.dump() << "\n"; }
};

Ensemble::PerQ per_q_from_family_string(const std::string& fam) {
    Ensemble::PerQ pq;
    if (fam == "gaussian") {
        pq.family = Ensemble::Family::gaussian;
    } else if (fam.rfind("er:", 0) == 0) {
        pq.family = Ensemble::Family::erdos_renyi;
        pq.d = std::stod(fam.substr(3));
        if (pq.d <= 0) throw usage_error("er degree must be positive");
    } else {
        throw usage_error("unknown family '" + fam + "' (expected gaussian or er:<d>)");
    }
    return pq;
}

}  // namespace

Ensemble ensemble_from_json(const std::string& text) {
    auto j = json::parse(text);
    Ensemble e;
    e.q_max = j.at("q_max").get<int>();
    e.c = j.at("c").get<std::vector<double>>();
    if (static_cast<int>(e.c.size()) != e.q_max) throw usage_error("ensemble json: |c| != q_max");
    e.per_q.resize(e.q_max);
    const auto& fam = j.at("family");
    for (int q = 1; q <= e.q_max; ++q) {
        const auto& f = fam.at(q - 1);
        if (f.is_string()) {
            if (f.get<std::string>() != "gaussian")
                throw usage_error("ensemble json: unknown family " + f.get<std::string>());
        } else {
            e.per_q[q - 1].family = Ensemble::Family::erdos_renyi;
            e.per_q[q - 1].d = f.at("er").at("d").get<double>();
        }
    }
    bool any = false;
    for (double v : e.c) any = any || v != 0.0;
    if (!any) throw usage_error("ensemble json: all c_q are zero");
    return e;
}

std::string ensemble_to_json(const Ensemble& e) {
    json j;
    j["q_max"] = e.q_max;
    j["c"] = e.c;
    json fam = json::array();
    for (int q = 1; q <= e.q_max; ++q) {
        switch (e.per_q[q - 1].family) {
            case Ensemble::Family::gaussian: fam.push_back("gaussian"); break;
            case Ensemble::Family::erdos_renyi: fam.push_back(json{{"er", {{"d", e.per_q[q - 1].d}}}}); break;
            case Ensemble::Family::custom: fam.push_back("custom"); break;
        }
    }
    j["family"] = std::move(fam);
    return j.dump();
}

Ensemble ensemble_from_config(const RunConfig& cfg) {
    auto pq = per_q_from_family_string(cfg.family);
    if (cfg.cq.empty()) {
        Ensemble e = Ensemble::pure_gaussian(cfg.q);
        e.per_q[cfg.q - 1] = pq;
        return e;
    }
    int q_max = 0;
    for (const auto& [q, c] : cfg.cq) q_max = std::max(q_max, q);
    if (q_max < 1) throw usage_error("--cq entries must have q >= 1");
    Ensemble e;
    e.q_max = q_max;
    e.c.assign(q_max, 0.0);
    e.per_q.resize(q_max);
    for (const auto& [q, c] : cfg.cq) {
        e.c[q - 1] = c;
        if (c != 0.0) e.per_q[q - 1] = pq;
    }
    return e;
}

RunConfig config_from_json(const std::string& text) {
    auto j = json::parse(text);
    RunConfig cfg;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("command", cfg.command);
    get("p", cfg.p);
    get("q", cfg.q);
    if (j.contains("cq"))
        for (const auto& item : j.at("cq"))
            cfg.cq.emplace_back(item.at(0).get<int>(), item.at(1).get<double>());
    get("family", cfg.family);
    get("gamma", cfg.gamma);
    get("beta", cfg.beta);
    get("optimize", cfg.optimize);
    get("method", cfg.method);
    get("moment", cfg.moment);
    get("d_ladder", cfg.d_ladder);
    get("n_ladder", cfg.n_ladder);
    get("n", cfg.n);
    get("instances", cfg.instances);
    get("starts", cfg.starts);
    get("seed", cfg.seed);
    get("budget_ops", cfg.budget_ops);
    get("out", cfg.out_path);
    get("csv", cfg.csv_path);
    get("h", cfg.h_kind);
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["command"] = cfg.command;
    j["p"] = cfg.p;
    j["q"] = cfg.q;
    json cq = json::array();
    for (const auto& [q, c] : cfg.cq) cq.push_back({q, c});
    j["cq"] = std::move(cq);
    j["family"] = cfg.family;
    j["gamma"] = cfg.gamma;
    j["beta"] = cfg.beta;
    j["optimize"] = cfg.optimize;
    j["method"] = cfg.method;
    j["moment"] = cfg.moment;
    j["d_ladder"] = cfg.d_ladder;
    j["n_ladder"] = cfg.n_ladder;
    j["n"] = cfg.n;
    j["instances"] = cfg.instances;
    j["starts"] = cfg.starts;
    j["seed"] = cfg.seed;
    j["budget_ops"] = cfg.budget_ops;
    j["out"] = cfg.out_path;
    j["csv"] = cfg.csv_path;
    j["h"] = cfg.h_kind;
    return j.dump();
}

namespace {

void require_angles(const RunConfig& cfg) {
    if (static_cast<int>(cfg.gamma.size()) != cfg.p || static_cast<int>(cfg.beta.size()) != cfg.p)
        throw usage_error("--gamma and --beta must each carry p values");
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    if (path.empty()) return;
    std::ofstream os(path);
    if (!os) throw usage_error("cannot open csv path " + path);
    os << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
        os << "\n";
    }
}

int run_vp(const RunConfig& cfg, Emitter& out) {
    require_angles(cfg);
    auto e = ensemble_from_config(cfg);
    auto t0 = std::chrono::steady_clock::now();
    auto tables = build_tables(cfg.p, cfg.gamma, cfg.beta);
    SceSolution sol = cfg.method == "reference"
                          ? solve_reference(tables, e,
                                            cfg.budget_ops ? cfg.budget_ops : kDefaultSceWorkBudget)
                          : solve_fast(tables, e);
    auto rep = compute_moments(sol, tables, e);
    json j = provenance(cfg, e);
    j["p"] = cfg.p;
    j["q_max"] = e.q_max;
    j["c"] = e.c;
    j["family"] = e.family_string();
    j["gamma"] = cfg.gamma;
    j["beta"] = cfg.beta;
    j["v_p"] = rep.v_p;
    j["v_p_imag_leak"] = rep.v_p_imag_leak;
    j["second_moment"] = rep.second_moment;
    j["per_q"] = rep.per_q;
    j["residual"] = sol.residual_inf;
    j["method"] = sol.method == SceSolution::Method::fast ? "fast" : "reference";
    j["sweeps"] = sol.sweeps;
    j["wall_time_ms"] = now_ms(t0);
    out.emit(j);
    return 0;
}

int run_tree(const RunConfig& cfg, Emitter& out) {
    require_angles(cfg);
    auto e = ensemble_from_config(cfg);
    auto t0 = std::chrono::steady_clock::now();
    double nu = nu_p(cfg.p, cfg.q, cfg.gamma, cfg.beta);
    double disc = check_theorem3(cfg.p, cfg.q, cfg.gamma, cfg.beta);
    json j = provenance(cfg, e);
    j["p"] = cfg.p;
    j["q"] = cfg.q;
    j["gamma"] = cfg.gamma;
    j["beta"] = cfg.beta;
    j["nu_p"] = nu;
    j["theorem3_discrepancy"] = disc;
    j["wall_time_ms"] = now_ms(t0);
    out.emit(j);
    return 0;
}

int run_universality(const RunConfig& cfg, Emitter& out) {
    require_angles(cfg);
    auto gauss = Ensemble::pure_gaussian(cfg.q);
    double v_gauss = vp_value(cfg.p, gauss, cfg.gamma, cfg.beta);
    std::vector<std::vector<double>> rows;
    double prev_err = -1.0;
    bool monotone = true;
    for (double d : cfg.d_ladder) {
        auto er = Ensemble::pure_er(cfg.q, d);
        double v = vp_value(cfg.p, er, cfg.gamma, cfg.beta);
        double err = std::abs(v - v_gauss);
        json j = provenance(cfg, er);
        j["d"] = d;
        j["v_p_er"] = v;
        j["v_p_gaussian"] = v_gauss;
        j["abs_err"] = err;
        out.emit(j);
        rows.push_back({d, v, err});
        if (prev_err >= 0 && err > prev_err) monotone = false;
        prev_err = err;
    }
    json summary = provenance(cfg, gauss);
    summary["v_p_gaussian"] = v_gauss;
    summary["monotone_shrinking"] = monotone;
    out.emit(summary);
    write_csv(cfg.csv_path, "d,v_p_er,abs_err", rows);
    return 0;
}

int run_oracle_sum(const RunConfig& cfg, Emitter& out) {
    require_angles(cfg);
    auto e = ensemble_from_config(cfg);
    auto tables = build_tables(cfg.p, cfg.gamma, cfg.beta);
    double limit = 0.0;
    {
        auto sol = solve_fast(tables, e);
        limit = compute_moments(sol, tables, e).v_p;
    }
    Moment which = cfg.moment == "second" ? Moment::second : Moment::first;
    std::vector<std::int64_t> ladder = cfg.n_ladder;
    if (ladder.empty()) ladder = {20, 40, 80, 160};
    std::vector<std::vector<double>> rows;
    for (std::int64_t n : ladder) {
        auto t0 = std::chrono::steady_clock::now();
        cplx v = exact_moment_sum(n, tables, e, which,
                                  cfg.budget_ops ? cfg.budget_ops : kDefaultCompositionBudget);
        json j = provenance(cfg, e);
        j["n"] = n;
        j["moment"] = cfg.moment;
        j["value_re"] = v.real();
        j["value_im"] = v.imag();
        double ref = which == Moment::first ? limit : limit * limit;
        j["abs_error_vs_limit"] = std::abs(v.real() - ref);
        j["v_p_limit"] = limit;
        j["wall_time_ms"] = now_ms(t0);
        out.emit(j);
        rows.push_back({static_cast<double>(n), v.real(), std::abs(v.real() - ref)});
    }
    write_csv(cfg.csv_path, "n,value,abs_error_vs_limit", rows);
    return 0;
}

int run_oracle_sim(const RunConfig& cfg, Emitter& out) {
    require_angles(cfg);
    auto e = ensemble_from_config(cfg);
    auto t0 = std::chrono::steady_clock::now();
    auto mc = monte_carlo_moment(e, cfg.q, cfg.n, cfg.p, cfg.gamma, cfg.beta, cfg.instances, cfg.seed);
    double v_inf = vp_value(cfg.p, e, cfg.gamma, cfg.beta);
    json j = provenance(cfg, e);
    j["n"] = cfg.n;
    j["instances"] = mc.instances;
    j["mean"] = mc.mean;
    j["stderr"] = mc.stderr_of_mean;
    j["var_instances"] = mc.var_instances;
    j["v_p_limit"] = v_inf;
    j["wall_time_ms"] = now_ms(t0);
    out.emit(j);
    return 0;
}

int run_optimize(const RunConfig& cfg, Emitter& out) {
    auto e = ensemble_from_config(cfg);
    OptimizerSettings settings;
    settings.starts = cfg.starts;
    auto t0 = std::chrono::steady_clock::now();
    auto res = optimize_vp(cfg.p, e, settings, cfg.seed);
    for (const auto& [params, value] : res.trace) {
        json j;
        j["tool"] = "qsg";
        j["command"] = "optimize.eval";
        j["params"] = params;
        j["value"] = value;
        out.emit(j);
    }
    json j = provenance(cfg, e);
    j["best_gamma"] = res.gamma;
    j["best_beta"] = res.beta;
    j["best_value"] = res.best_value;
    j["evaluations"] = res.evaluations;
    j["failed_evaluations"] = res.failed_evaluations;
    j["wall_time_ms"] = now_ms(t0);
    out.emit(j);
    return 0;
}

int run_wellplayed(const RunConfig& cfg, Emitter& out) {
    std::vector<double> gamma = cfg.gamma, beta = cfg.beta;
    if (static_cast<int>(gamma.size()) != cfg.p) gamma.assign(cfg.p, 0.4);
    if (static_cast<int>(beta.size()) != cfg.p) beta.assign(cfg.p, 0.3);
    auto e = ensemble_from_config(cfg);
    auto tables = build_tables(cfg.p, gamma, beta);
    auto ps = ProperSet::from_tables(tables);
    std::function<double(double)> h;
    if (cfg.h_kind == "odd")
        h = [](double lam) { return lam * lam * lam; };
    else
        h = [](double lam) { return -0.5 * lam * lam; };
    auto t0 = std::chrono::steady_clock::now();
    auto hq = build_Hq(tables, cfg.q, h);
    auto canon = canonicalize(hq, ps, std::max(kDefaultDegreeCap, cfg.q));
    auto rep = check_well_played(canon, ps);
    json j = provenance(cfg, e);
    j["p"] = cfg.p;
    j["q"] = cfg.q;
    j["h"] = cfg.h_kind;
    j["pass"] = rep.pass;
    j["violations"] = rep.violations.size();
    j["max_tau_len"] = rep.max_tau_len;
    j["max_eta_len"] = rep.max_eta_len;
    j["max_nu_len"] = rep.max_nu_len;
    j["terms"] = canon.terms.size();
    j["wall_time_ms"] = now_ms(t0);
    if (!cfg.csv_path.empty()) {
        std::ofstream os(cfg.csv_path);
        os << canonical_to_json(canon);
    }
    out.emit(j);
    return 0;
}

int run_genmulti(const RunConfig& cfg, Emitter& out) {
    auto ps = ProperSet::toy();
    std::vector<cplx> q_values = {cplx{1.0, 0.0}, cplx{0.0, 0.3}, cplx{0.0, -0.3}};
    // C[P] = 0.5 tau_d nu_c in natural variables; f = w_d - w_dbar
    NaturalPolynomial p_poly, f_poly;
    p_poly.terms[{0, 1}] = cplx{0.5, 0.0};
    p_poly.terms[{0, 2}] = cplx{0.5, 0.0};
    f_poly.terms[{1}] = cplx{1.0, 0.0};
    f_poly.terms[{2}] = cplx{-1.0, 0.0};
    CanonicalPolynomial canon;
    canon.terms[{{1}, {}, {0}}] = cplx{0.5, 0.0};
    auto w = solve_generic_sce(ps, q_values, canon);
    cplx limit = w[1] - w[2];
    std::vector<std::int64_t> ladder = cfg.n_ladder;
    if (ladder.empty()) ladder = {50, 100, 200, 400};
    std::vector<std::vector<double>> rows;
    for (std::int64_t n : ladder) {
        auto t0 = std::chrono::steady_clock::now();
        cplx v = finite_multinomial_sum(n, ps, q_values, p_poly, f_poly);
        auto e = ensemble_from_config(cfg);
        json j = provenance(cfg, e);
        j["n"] = n;
        j["value_re"] = v.real();
        j["value_im"] = v.imag();
        j["limit_re"] = limit.real();
        j["limit_im"] = limit.imag();
        j["abs_error_vs_limit"] = std::abs(v - limit);
        j["wall_time_ms"] = now_ms(t0);
        out.emit(j);
        rows.push_back({static_cast<double>(n), v.imag(), std::abs(v - limit)});
    }
    write_csv(cfg.csv_path, "n,value_im,abs_error_vs_limit", rows);
    return 0;
}

}  // namespace

int run(const RunConfig& cfg, std::ostream& records) {
    Emitter out(cfg, records);
    if (cfg.command == "vp") return run_vp(cfg, out);
    if (cfg.command == "tree") return run_tree(cfg, out);
    if (cfg.command == "universality") return run_universality(cfg, out);
    if (cfg.command == "oracle-sum") return run_oracle_sum(cfg, out);
    if (cfg.command == "oracle-sim") return run_oracle_sim(cfg, out);
    if (cfg.command == "optimize") return run_optimize(cfg, out);
    if (cfg.command == "wellplayed") return run_wellplayed(cfg, out);
    if (cfg.command == "genmulti") return run_genmulti(cfg, out);
    throw usage_error("unknown command '" + cfg.command + "'");
}

}  // namespace qsg
