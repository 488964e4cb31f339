#include "agplan/graph_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "agplan/errors.hpp"
#include "agplan/parser.hpp"

namespace agplan {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

json cvss_to_json(const CvssInfo& info) {
    json out = json::object();
    auto level_name = [](CvssInfo::Level l) -> std::string {
        switch (l) {
            case CvssInfo::Level::Low: return "low";
            case CvssInfo::Level::Medium: return "medium";
            case CvssInfo::Level::High: return "high";
            case CvssInfo::Level::None: return "none";
            case CvssInfo::Level::Required: return "required";
            case CvssInfo::Level::Single: return "single";
            case CvssInfo::Level::Multiple: return "multiple";
        }
        return "?";
    };
    if (info.version) {
        out["version"] = *info.version == CvssInfo::Version::V3 ? "v3" : "v2";
    }
    if (info.attack_complexity) out["ac"] = level_name(*info.attack_complexity);
    if (info.interaction) out["ui_or_au"] = level_name(*info.interaction);
    if (info.explicit_probability) out["probability"] = *info.explicit_probability;
    return out;
}

CvssInfo cvss_from_json(const json& j) {
    CvssInfo info;
    if (j.contains("version")) info.version = CvssInfo::parse_version(j.at("version"));
    if (j.contains("ac")) info.attack_complexity = CvssInfo::parse_level(j.at("ac"));
    if (j.contains("ui_or_au")) info.interaction = CvssInfo::parse_level(j.at("ui_or_au"));
    if (j.contains("probability")) info.explicit_probability = j.at("probability").get<double>();
    return info;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path + "'");
    out << text;
}

// Minimal CSV splitting with double-quote support; MulVAL quotes labels.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

}  // namespace

std::string export_graph_json(const AttackGraph& graph) {
    json doc;
    doc["nodes"] = json::array();
    for (const AgNode& n : graph.nodes()) {
        json node;
        node["id"] = n.id;
        node["kind"] = node_kind_name(n.kind);
        node["label"] = n.label();
        if (n.kind == NodeKind::Derivation) {
            node["rule_id"] = n.rule_id;
            node["rule_label"] = n.rule_label;
        }
        if (n.vuln) node["cvss"] = cvss_to_json(*n.vuln);
        doc["nodes"].push_back(std::move(node));
    }
    doc["edges"] = json::array();
    for (const auto& [from, to] : graph.edges()) doc["edges"].push_back(json::array({from, to}));
    doc["goals"] = graph.goals();
    return doc.dump(2) + "\n";
}

AttackGraph import_graph_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid graph JSON: ") + e.what());
    }
    std::vector<AgNode> nodes;
    for (const json& j : doc.at("nodes")) {
        AgNode n;
        n.id = j.at("id").get<int>();
        n.kind = node_kind_from(j.at("kind").get<std::string>());
        std::string label = j.at("label").get<std::string>();
        if (n.kind == NodeKind::Derivation) {
            n.rule_id = j.value("rule_id", "");
            n.rule_label = j.value("rule_label", "");
        } else {
            n.atom = parse_atom(label);
        }
        if (j.contains("cvss")) n.vuln = cvss_from_json(j.at("cvss"));
        nodes.push_back(std::move(n));
    }
    std::vector<std::pair<int, int>> edges;
    for (const json& j : doc.at("edges")) edges.emplace_back(j.at(0).get<int>(), j.at(1).get<int>());
    std::vector<int> goals = doc.at("goals").get<std::vector<int>>();
    return AttackGraph(std::move(nodes), std::move(edges), std::move(goals));
}

AttackGraph import_graph_mulval(const std::string& path) {
    fs::path dir(path);
    fs::path vertices = dir / "VERTICES.CSV";
    fs::path arcs = dir / "ARCS.CSV";
    if (!fs::exists(vertices) || !fs::exists(arcs)) {
        throw ValidationError("expected VERTICES.CSV and ARCS.CSV under '" + path + "'");
    }

    std::vector<AgNode> nodes;
    std::istringstream vin(read_text(vertices.string()));
    std::string line;
    while (std::getline(vin, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 3) throw ValidationError("malformed vertex line: " + line);
        AgNode n;
        n.id = std::stoi(fields[0]);
        n.kind = node_kind_from(fields[2]);
        if (n.kind == NodeKind::Derivation) {
            n.rule_id = "r" + fields[0];
            n.rule_label = fields[1];
            // MulVAL prints derivation labels as "RULE k (text)".
            auto open = n.rule_label.find('(');
            auto close = n.rule_label.rfind(')');
            if (open != std::string::npos && close != std::string::npos && close > open) {
                n.rule_label = n.rule_label.substr(open + 1, close - open - 1);
            }
        } else {
            n.atom = parse_atom(fields[1]);
        }
        nodes.push_back(std::move(n));
    }
    std::sort(nodes.begin(), nodes.end(), [](const AgNode& a, const AgNode& b) { return a.id < b.id; });

    std::vector<std::pair<int, int>> edges;
    std::istringstream ain(read_text(arcs.string()));
    while (std::getline(ain, line)) {
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (fields.size() < 2) throw ValidationError("malformed arc line: " + line);
        // MulVAL arcs are written (to, from).
        edges.emplace_back(std::stoi(fields[1]), std::stoi(fields[0]));
    }

    // Goals are not marked in the CSV layout: take sink derived facts.
    std::vector<bool> has_out(nodes.size() + 1, false);
    for (const auto& [from, to] : edges) {
        if (from >= 1 && from <= static_cast<int>(nodes.size()))
            has_out[static_cast<size_t>(from)] = true;
    }
    std::vector<int> goals;
    for (const AgNode& n : nodes) {
        if (n.kind == NodeKind::DerivedFact && !has_out[static_cast<size_t>(n.id)]) {
            goals.push_back(n.id);
        }
    }
    return AttackGraph(std::move(nodes), std::move(edges), std::move(goals));
}

void export_graph_mulval(const AttackGraph& graph, const std::string& path) {
    fs::create_directories(path);
    std::ostringstream vout;
    for (const AgNode& n : graph.nodes()) {
        std::string kind = n.kind == NodeKind::Derivation    ? "AND"
                           : n.kind == NodeKind::PrimitiveFact ? "LEAF"
                                                               : "OR";
        std::string label = n.kind == NodeKind::Derivation
                                ? "RULE " + n.rule_id.substr(1) + " (" + n.rule_label + ")"
                                : n.atom.to_string();
        vout << n.id << ",\"" << label << "\"," << kind << ",0\n";
    }
    std::ostringstream aout;
    for (const auto& [from, to] : graph.edges()) aout << to << "," << from << ",-1\n";
    write_text((fs::path(path) / "VERTICES.CSV").string(), vout.str());
    write_text((fs::path(path) / "ARCS.CSV").string(), aout.str());
}

void write_graph_file(const AttackGraph& graph, const std::string& path, GraphFormat format) {
    if (format == GraphFormat::NativeJson) {
        write_text(path, export_graph_json(graph));
    } else {
        export_graph_mulval(graph, path);
    }
}

AttackGraph read_graph_file(const std::string& path, GraphFormat format) {
    if (format == GraphFormat::NativeJson) return import_graph_json(read_text(path));
    return import_graph_mulval(path);
}

}  // namespace agplan
