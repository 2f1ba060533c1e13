#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsg/cli_run.hpp"
#include "qsg/errors.hpp"

namespace {

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
    std::vector<std::int64_t> out;
    for (double v : parse_list(s)) out.push_back(static_cast<std::int64_t>(v));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qsg: infinite-size QAOA performance on random spin-glass ensembles"};
    app.require_subcommand(0, 1);

    qsg::RunConfig flags;
    std::string gamma_s, beta_s, dladder_s, nladder_s, config_path;
    std::vector<std::string> cq_s;
    bool optimize_flag = false;

    CLI::App* active = nullptr;
    for (const char* name : {"vp", "tree", "universality", "oracle-sum", "oracle-sim",
                             "optimize", "wellplayed", "genmulti"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file mirroring the flags");
        sub->add_option("--p", flags.p, "QAOA level");
        sub->add_option("--q", flags.q, "pure q-spin body count");
        sub->add_option("--cq", cq_s, "mixed coefficient q:value (repeatable)");
        sub->add_option("--family", flags.family, "gaussian | er:<d>");
        sub->add_option("--gamma", gamma_s, "comma list of p gamma angles");
        sub->add_option("--beta", beta_s, "comma list of p beta angles");
        sub->add_option("--method", flags.method, "vp solver: fast | reference");
        sub->add_option("--moment", flags.moment, "oracle-sum: first | second");
        sub->add_option("--d-ladder", dladder_s, "comma list of ER degrees");
        sub->add_option("--n-ladder", nladder_s, "comma list of oracle sizes");
        sub->add_option("--n", flags.n, "statevector qubit count");
        sub->add_option("--instances", flags.instances, "Monte Carlo instance count");
        sub->add_option("--starts", flags.starts, "optimizer multistart count");
        sub->add_option("--seed", flags.seed, "RNG seed");
        sub->add_option("--budget-ops", flags.budget_ops, "work budget override");
        sub->add_option("--out", flags.out_path, "JSON-lines output path (default stdout)");
        sub->add_option("--csv", flags.csv_path, "CSV export path for table output");
        sub->add_option("--hfun", flags.h_kind, "wellplayed test function: even | odd");
        sub->add_flag("--optimize", optimize_flag, "optimize (gamma, beta) instead of evaluating");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    for (auto* sub : app.get_subcommands()) active = sub;
    if (!active) {
        std::cerr << app.help() << std::endl;
        return 2;
    }

    try {
        qsg::RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw qsg::usage_error("cannot open config file " + config_path);
            std::stringstream buf;
            buf << is.rdbuf();
            cfg = qsg::config_from_json(buf.str());
        }
        cfg.command = active->get_name();
        auto set = [&](const char* opt) { return active->count(opt) > 0; };
        if (set("--p")) cfg.p = flags.p;
        if (set("--q")) cfg.q = flags.q;
        if (set("--family")) cfg.family = flags.family;
        if (set("--method")) cfg.method = flags.method;
        if (set("--moment")) cfg.moment = flags.moment;
        if (set("--n")) cfg.n = flags.n;
        if (set("--instances")) cfg.instances = flags.instances;
        if (set("--starts")) cfg.starts = flags.starts;
        if (set("--seed")) cfg.seed = flags.seed;
        if (set("--budget-ops")) cfg.budget_ops = flags.budget_ops;
        if (set("--out")) cfg.out_path = flags.out_path;
        if (set("--csv")) cfg.csv_path = flags.csv_path;
        if (set("--hfun")) cfg.h_kind = flags.h_kind;
        if (set("--gamma")) cfg.gamma = parse_list(gamma_s);
        if (set("--beta")) cfg.beta = parse_list(beta_s);
        if (set("--d-ladder")) cfg.d_ladder = parse_list(dladder_s);
        if (set("--n-ladder")) cfg.n_ladder = parse_int_list(nladder_s);
        for (const auto& s : cq_s) {
            auto pos = s.find(':');
            if (pos == std::string::npos) throw qsg::usage_error("--cq expects q:coefficient");
            cfg.cq.emplace_back(std::stoi(s.substr(0, pos)), std::stod(s.substr(pos + 1)));
        }
        if (optimize_flag && cfg.command == "vp") cfg.command = "optimize";
        return qsg::run(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return qsg::exit_code_for(e);
    }
}
