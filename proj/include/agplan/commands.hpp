#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agplan {

/// File-based inputs shared by the CLI subcommands. An attacker profile
/// name resolves to "attacker-<name>.pl" (extra facts) and, when no goals
/// are given, "goals-<name>.txt" next to the first program file; without a
/// profile, goals default to "goals.txt".
struct RunConfig {
    std::vector<std::string> program_paths;
    std::vector<std::string> goal_texts;
    std::string attacker;
    std::string catalog_path;
    std::string repo_path;
    std::string policy_path;
    double budget = 0.0;
    std::vector<double> budgets;
    std::string out_path;
    std::string format = "json";  // json | csv (reports), json | mulval (graphs)
    std::string heuristic = "kth-delta";  // kth-delta | sum-delta
    long trials = 1000;
    unsigned long long seed = 1;
    bool deterministic = false;
};

/// Exit codes: 0 success, 1 usage, 2 parse error, 3 underivable goal,
/// 4 catalog/repo/policy validation error.
int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_match(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_plan(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_baseline(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace agplan
