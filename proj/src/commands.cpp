#include "agplan/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "agplan/errors.hpp"
#include "agplan/graph_io.hpp"
#include "agplan/parser.hpp"
#include "agplan/planner.hpp"
#include "agplan/risk_model.hpp"

namespace agplan {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> resolve_programs(const RunConfig& config) {
    if (config.program_paths.empty()) throw ValidationError("no program file given");
    std::vector<std::string> paths = config.program_paths;
    if (!config.attacker.empty()) {
        fs::path dir = fs::path(paths.front()).parent_path();
        paths.push_back((dir / ("attacker-" + config.attacker + ".pl")).string());
    }
    return paths;
}

std::vector<Atom> resolve_goals(const RunConfig& config) {
    std::vector<Atom> goals;
    if (!config.goal_texts.empty()) {
        for (const std::string& text : config.goal_texts) goals.push_back(parse_atom(text));
        return goals;
    }
    fs::path dir = fs::path(config.program_paths.front()).parent_path();
    std::string name = config.attacker.empty() ? "goals.txt" : "goals-" + config.attacker + ".txt";
    fs::path path = dir / name;
    std::ifstream in(path);
    if (!in) throw ValidationError("no goals given and cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        auto end = line.find_last_not_of(" \t\r");
        goals.push_back(parse_atom(line.substr(begin, end - begin + 1)));
    }
    if (goals.empty()) throw ValidationError("goal file " + path.string() + " is empty");
    return goals;
}

struct Pipeline {
    KnowledgeBase kb;
    std::vector<Atom> goals;
    AttackGraph graph;
    std::vector<MitigationAction> catalog;
    std::vector<Countermeasure> repo;
    std::vector<Atom> policy;
    MatchResult matches;
    ResolvedDeployment resolved;
    RiskModel model;
    PipelineContext context;
};

Pipeline load_pipeline(const RunConfig& config, double budget) {
    Pipeline p;
    p.kb = parse_program_files(resolve_programs(config));
    p.goals = resolve_goals(config);
    p.graph = build_attack_graph(p.kb, p.goals);
    if (config.catalog_path.empty()) throw ValidationError("a catalog file is required");
    if (config.repo_path.empty()) throw ValidationError("a repository file is required");
    p.catalog = load_catalog_file(config.catalog_path);
    p.repo = load_repo_file(config.repo_path, p.catalog);
    if (!config.policy_path.empty()) p.policy = load_policy_file(config.policy_path);
    KnowledgeBase matching_kb = make_matching_kb(p.kb, p.catalog);
    p.matches = match_graph(matching_kb, p.graph);
    p.resolved = resolve_countermeasures(p.graph, p.matches, p.catalog, p.repo, p.policy, budget);
    p.model = build_risk_model(p.graph, p.resolved);
    p.context = {&p.kb, p.goals, &p.catalog, &p.repo, p.policy, budget, {}};
    return p;
}

void emit(const RunConfig& config, const std::string& text, std::ostream& out) {
    if (config.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(config.out_path, std::ios::binary);
    if (!file) throw ValidationError("cannot write '" + config.out_path + "'");
    file << text;
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

HeuristicForm heuristic_form(const RunConfig& config) {
    if (config.heuristic == "kth-delta") return HeuristicForm::KthSmallestDelta;
    if (config.heuristic == "sum-delta") return HeuristicForm::SumSmallestDeltas;
    throw ValidationError("unknown heuristic '" + config.heuristic + "'");
}

json plan_to_json(const RunConfig& config, const Pipeline& pipeline, double budget,
                  const PlanResult& result) {
    std::map<std::string, std::string> products;
    for (const Countermeasure& cm : pipeline.repo) products[cm.id] = cm.product_id;
    json entries = json::array();
    for (const DeployedCm& cm : result.plan) {
        entries.push_back({{"cm_id", cm.cm_id},
                           {"ma_id", cm.ma_id},
                           {"product", products[cm.cm_id]},
                           {"position", cm.position.to_string()},
                           {"cost", cm.cost}});
    }
    json stats = {{"expanded", result.stats.expanded},
                  {"generated", result.stats.generated},
                  {"duplicates_skipped", result.stats.duplicates_skipped},
                  {"wall_time_ms", config.deterministic ? 0.0 : result.stats.wall_ms}};
    return {{"budget", budget},
            {"plan", entries},
            {"total_cost", result.total_cost},
            {"residual_risk", result.residual_risk},
            {"stats", stats}};
}

int run_guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const GoalNotDerivable& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const LogicError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_generate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&]() {
        KnowledgeBase kb = parse_program_files(resolve_programs(config));
        std::vector<Atom> goals = resolve_goals(config);
        AttackGraph graph = build_attack_graph(kb, goals);
        if (!config.out_path.empty()) {
            GraphFormat format =
                config.format == "mulval" ? GraphFormat::MulvalCsv : GraphFormat::NativeJson;
            write_graph_file(graph, config.out_path, format);
        } else {
            out << export_graph_json(graph);
        }
        err << "nodes=" << graph.nodes().size() << " edges=" << graph.edges().size()
            << " goals=" << graph.goals().size() << "\n";
        return 0;
    });
}

int cmd_match(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&]() {
        KnowledgeBase kb = parse_program_files(resolve_programs(config));
        std::vector<Atom> goals = resolve_goals(config);
        AttackGraph graph = build_attack_graph(kb, goals);
        if (config.catalog_path.empty()) throw ValidationError("a catalog file is required");
        std::vector<MitigationAction> catalog = load_catalog_file(config.catalog_path);
        std::map<std::string, const MitigationAction*> by_id;
        for (const MitigationAction& ma : catalog) by_id[ma.id] = &ma;
        KnowledgeBase matching_kb = make_matching_kb(kb, catalog);
        MatchResult matches = match_graph(matching_kb, graph);

        json doc = json::array();
        for (const auto& [node_id, node_matches] : matches) {
            json entry = {{"node", node_id},
                          {"label", graph.node(node_id).label()},
                          {"matches", json::array()}};
            for (const Match& match : node_matches) {
                Position position = extract_position(*by_id.at(match.ma_id), match.trace);
                entry["matches"].push_back(
                    {{"ma_id", match.ma_id}, {"position", position.to_string()}});
            }
            doc.push_back(std::move(entry));
        }
        emit(config, doc.dump(2) + "\n", out);
        return 0;
    });
}

int cmd_plan(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&]() {
        Pipeline pipeline = load_pipeline(config, config.budget);
        PlanningProblem problem{&pipeline.model, pipeline.resolved.initial, config.budget,
                                heuristic_form(config)};
        PlanResult result = astar_plan(problem);
        emit(config, plan_to_json(config, pipeline, config.budget, result).dump(2) + "\n", out);
        return 0;
    });
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&]() {
        if (config.budgets.empty()) throw ValidationError("sweep requires --budgets");
        Pipeline pipeline =
            load_pipeline(config, std::numeric_limits<double>::infinity());
        std::vector<SweepRow> rows =
            budget_sweep(pipeline.model, config.budgets, heuristic_form(config));

        json doc = json::array();
        std::ostringstream csv;
        csv << "budget,residual_risk,total_cost,plan\n";
        for (const SweepRow& row : rows) {
            doc.push_back(plan_to_json(config, pipeline, row.budget, row.result));
            std::string plan_text;
            for (const DeployedCm& cm : row.result.plan) {
                if (!plan_text.empty()) plan_text += ";";
                plan_text += cm.cm_id + "@" + cm.position.to_string();
            }
            csv << format_value(row.budget) << "," << format_value(row.result.residual_risk)
                << "," << format_value(row.result.total_cost) << "," << plan_text << "\n";
        }
        if (config.out_path.empty()) {
            out << (config.format == "csv" ? csv.str() : doc.dump(2) + "\n");
        } else {
            std::ofstream jf(config.out_path + ".json", std::ios::binary);
            std::ofstream cf(config.out_path + ".csv", std::ios::binary);
            if (!jf || !cf) throw ValidationError("cannot write '" + config.out_path + "'");
            jf << doc.dump(2) << "\n";
            cf << csv.str();
        }
        return 0;
    });
}

int cmd_baseline(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&]() {
        Pipeline pipeline = load_pipeline(config, config.budget);
        std::vector<VulnScore> vulns;
        for (const HornRule* fact : pipeline.kb.facts()) {
            const Atom& a = fact->head;
            if (a.predicate == "cvssBase" && a.arity() == 2) {
                vulns.push_back({a.args[0].text, std::stod(a.args[1].text)});
            }
        }
        std::vector<VulnScore> ranked = cvss_baseline_rank(std::move(vulns));

        PlanningProblem problem{&pipeline.model, pipeline.resolved.initial, config.budget,
                                heuristic_form(config)};
        PlanResult result = astar_plan(problem);

        json ordering = json::array();
        for (const VulnScore& v : ranked) ordering.push_back({{"id", v.id}, {"score", v.base_score}});
        json doc = {{"severity_ranking", ordering},
                    {"plan", plan_to_json(config, pipeline, config.budget, result)}};
        emit(config, doc.dump(2) + "\n", out);
        return 0;
    });
}

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&]() {
        if (config.trials < 0) throw ValidationError("--trials must be >= 0");
        if (config.trials == 0) {
            emit(config, json({{"trials", 0}}).dump(2) + "\n", out);
            return 0;
        }
        Pipeline pipeline =
            load_pipeline(config, std::numeric_limits<double>::infinity());
        const std::vector<DeployedCm>& universe = pipeline.model.variables();

        std::mt19937_64 rng(config.seed);
        std::vector<double> eval_us, regen_us;
        double checksum = 0.0;
        long mismatches = 0;
        for (long trial = 0; trial < config.trials; ++trial) {
            std::set<DeployedCm> deployed;
            for (const DeployedCm& cm : universe) {
                if (rng() & 1) deployed.insert(cm);
            }
            auto t0 = std::chrono::steady_clock::now();
            double fast = pipeline.model.evaluate(deployed);
            auto t1 = std::chrono::steady_clock::now();
            double slow =
                rebuild_oracle(pipeline.context, pipeline.graph, pipeline.resolved, deployed);
            auto t2 = std::chrono::steady_clock::now();
            eval_us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
            regen_us.push_back(std::chrono::duration<double, std::micro>(t2 - t1).count());
            checksum += fast;
            if (std::abs(fast - slow) > 1e-9) ++mismatches;
        }

        auto mean = [](const std::vector<double>& v) {
            double sum = 0.0;
            for (double x : v) sum += x;
            return sum / static_cast<double>(v.size());
        };
        auto median = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            size_t mid = v.size() / 2;
            return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
        };

        double eval_mean = mean(eval_us), regen_mean = mean(regen_us);
        json doc = {{"trials", config.trials},
                    {"seed", config.seed},
                    {"countermeasures", universe.size()},
                    {"risk_checksum", checksum},
                    {"mismatches", mismatches},
                    {"equation_mean_us", config.deterministic ? 0.0 : eval_mean},
                    {"equation_median_us", config.deterministic ? 0.0 : median(eval_us)},
                    {"regeneration_mean_us", config.deterministic ? 0.0 : regen_mean},
                    {"regeneration_median_us", config.deterministic ? 0.0 : median(regen_us)},
                    {"speedup_mean", config.deterministic ? 0.0 : regen_mean / eval_mean}};
        emit(config, doc.dump(2) + "\n", out);
        if (!config.deterministic) {
            err << "speedup " << format_value(regen_mean / eval_mean) << "x over "
                << config.trials << " trials\n";
        }
        return 0;
    });
}

}  // namespace agplan
