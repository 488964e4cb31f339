#include <iostream>

#include <CLI11.hpp>

#include "agplan/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Attack-graph countermeasure planner"};
    app.require_subcommand(1);

    agplan::RunConfig config;

    auto add_common = [&](CLI::App* cmd, bool needs_catalog) {
        cmd->add_option("--program", config.program_paths, "Rule program file(s), parsed in order")
            ->required();
        cmd->add_option("--goals", config.goal_texts, "Goal atom(s), e.g. 'dos(attacker, dbServer)'");
        cmd->add_option("--attacker", config.attacker,
                        "Attacker profile: appends attacker-<name>.pl and reads goals-<name>.txt");
        cmd->add_option("--out", config.out_path, "Output path (default: stdout)");
        cmd->add_flag("--deterministic", config.deterministic,
                      "Zero out wall-time fields for byte-reproducible output");
        if (needs_catalog) {
            cmd->add_option("--catalog", config.catalog_path, "Mitigation-action catalog JSON")
                ->required();
        }
        return cmd;
    };
    auto add_repo = [&](CLI::App* cmd) {
        cmd->add_option("--repo", config.repo_path, "Countermeasure repository JSON")->required();
        cmd->add_option("--policy", config.policy_path, "Deny-list of atom patterns (JSON)");
        cmd->add_option("--heuristic", config.heuristic, "kth-delta (default) or sum-delta");
    };

    CLI::App* generate = add_common(app.add_subcommand("generate", "Build the attack graph"), false);
    generate->add_option("--format", config.format, "json (default) or mulval");

    add_common(app.add_subcommand("match", "Match mitigation actions to graph nodes"), true);

    CLI::App* plan = add_common(app.add_subcommand("plan", "Search for the minimal-risk plan"), true);
    add_repo(plan);
    plan->add_option("--budget", config.budget, "Deployment budget")->required();

    CLI::App* sweep = add_common(app.add_subcommand("sweep", "Plan across a list of budgets"), true);
    add_repo(sweep);
    sweep->add_option("--budgets", config.budgets, "Budget list")->required()->delimiter(',');
    sweep->add_option("--format", config.format, "stdout format: json (default) or csv");

    CLI::App* baseline = add_common(
        app.add_subcommand("baseline", "CVSS-severity ordering vs. the planner's plan"), true);
    add_repo(baseline);
    baseline->add_option("--budget", config.budget, "Deployment budget")->required();

    CLI::App* bench = add_common(
        app.add_subcommand("bench", "Equation evaluation vs. graph regeneration timing"), true);
    add_repo(bench);
    bench->add_option("--trials", config.trials, "Number of random deployment sets");
    bench->add_option("--seed", config.seed, "Random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (generate->parsed()) return agplan::cmd_generate(config, std::cout, std::cerr);
    if (app.get_subcommand("match")->parsed()) return agplan::cmd_match(config, std::cout, std::cerr);
    if (plan->parsed()) return agplan::cmd_plan(config, std::cout, std::cerr);
    if (sweep->parsed()) return agplan::cmd_sweep(config, std::cout, std::cerr);
    if (baseline->parsed()) return agplan::cmd_baseline(config, std::cout, std::cerr);
    if (bench->parsed()) return agplan::cmd_bench(config, std::cout, std::cerr);
    return 1;
}
