#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qsg/ensemble.hpp"
#include "qsg/oracle.hpp"
#include "qsg/sce.hpp"

namespace qsg {

inline constexpr const char* kVersion = "0.1.0";

// One parsed invocation; mirrors the CLI flags and the JSON config file.
struct RunConfig {
    std::string command;
    int p = 1;
    int q = 2;                       // pure-q shortcut when cq is empty
    std::vector<std::pair<int, double>> cq;  // repeatable q:coefficient pairs
    std::string family = "gaussian";         // gaussian | er:<d>, applied to active q
    std::vector<double> gamma, beta;
    bool optimize = false;
    std::string method = "fast";     // vp: fast | reference
    std::string moment = "first";    // oracle-sum: first | second
    std::vector<double> d_ladder = {1e2, 1e4, 1e6};
    std::vector<std::int64_t> n_ladder;
    int n = 12;
    int instances = 100;
    int starts = 16;
    std::uint64_t seed = 1;
    std::uint64_t budget_ops = 0;    // 0 = module default
    std::string out_path;            // JSON-lines sink; empty = the stream given to run()
    std::string csv_path;            // optional CSV export for table-shaped output
    std::string h_kind = "even";     // wellplayed: even | odd
};

// Parse the {q_max, c:[...], family:[...]} ensemble description.
Ensemble ensemble_from_json(const std::string& text);
std::string ensemble_to_json(const Ensemble& e);

// Build the ensemble implied by a RunConfig's q/cq/family fields.
Ensemble ensemble_from_config(const RunConfig& cfg);

RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg);

// Dispatch a subcommand, emitting JSON-lines records. Returns the process
// exit code (0 ok); errors surface as exceptions mapped by the caller.
int run(const RunConfig& cfg, std::ostream& records);

}  // namespace qsg
