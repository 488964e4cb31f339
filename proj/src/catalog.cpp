#include "agplan/catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "agplan/errors.hpp"
#include "agplan/parser.hpp"

namespace agplan {

namespace {

using nlohmann::json;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json parse_json(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid ") + what + " JSON: " + e.what());
    }
}

PositionSpec::Kind parse_kind(const std::string& text) {
    if (text == "vulnerable-host") return PositionSpec::Kind::VulnerableHost;
    if (text == "existing-component") return PositionSpec::Kind::ExistingComponent;
    if (text == "inter-subnet") return PositionSpec::Kind::InterSubnet;
    throw ValidationError("unknown position kind '" + text + "'");
}

// The referenced atom must exist and the argument indices must be in range.
void validate_position(const MitigationAction& ma) {
    const PositionSpec& p = ma.position;
    const Atom* target = nullptr;
    if (p.source == PositionSpec::Source::Postcondition) {
        target = &ma.primary_post;
    } else {
        int seen = 0;
        for (const auto& [atom, negated] : ma.preconditions) {
            if (atom.predicate == p.predicate && seen++ == p.occurrence) {
                target = &atom;
                break;
            }
        }
        if (!target) {
            throw ValidationError("mitigation action '" + ma.id + "': position references " +
                                  p.predicate + " occurrence " + std::to_string(p.occurrence) +
                                  " which is not among its preconditions");
        }
    }
    int needed = p.kind == PositionSpec::Kind::InterSubnet ? p.arg_index + 2 : p.arg_index + 1;
    if (p.arg_index < 0 || target->arity() < needed) {
        throw ValidationError("mitigation action '" + ma.id + "': position arg_index " +
                              std::to_string(p.arg_index) + " out of range for " +
                              target->to_string());
    }
}

}  // namespace

std::string Position::to_string() const {
    if (parts.size() == 1) return parts[0];
    std::string out = "(";
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += ",";
        out += parts[i];
    }
    return out + ")";
}

bool known_cm_type(const std::string& tag) {
    static const std::set<std::string> kTags = {"host-firewall", "network-firewall", "host-ips",
                                                "network-ips",   "patch",            "antivirus"};
    return kTags.count(tag) > 0;
}

std::vector<MitigationAction> load_catalog(const std::string& json_text) {
    json doc = parse_json(json_text, "catalog");
    if (!doc.is_array()) throw ValidationError("catalog must be a JSON array");
    std::vector<MitigationAction> catalog;
    std::set<std::string> ids;
    for (const json& j : doc) {
        MitigationAction ma;
        ma.id = j.at("id").get<std::string>();
        if (!ids.insert(ma.id).second) {
            throw ValidationError("duplicate mitigation action id '" + ma.id + "'");
        }
        ma.cm_type = j.at("cm_type").get<std::string>();
        if (!known_cm_type(ma.cm_type)) {
            throw ValidationError("mitigation action '" + ma.id + "': unknown cm_type '" +
                                  ma.cm_type + "'");
        }
        ma.action = j.value("action", "");
        for (const json& pre : j.value("pre", json::array())) {
            ma.preconditions.push_back(parse_literal(pre.get<std::string>()));
        }
        const json& post = j.at("post");
        ma.primary_post = parse_atom(post.at("primary").get<std::string>());
        for (const json& side : post.value("side_effects", json::array())) {
            ma.side_effects.push_back(parse_atom(side.get<std::string>()));
        }
        const json& pos = j.at("position");
        std::string source = pos.at("source").get<std::string>();
        if (source == "postcondition") {
            ma.position.source = PositionSpec::Source::Postcondition;
        } else if (source == "precondition") {
            ma.position.source = PositionSpec::Source::Precondition;
            ma.position.predicate = pos.at("predicate").get<std::string>();
            ma.position.occurrence = pos.value("occurrence", 0);
        } else {
            throw ValidationError("position source must be postcondition or precondition");
        }
        ma.position.arg_index = pos.at("arg_index").get<int>();
        ma.position.kind = parse_kind(pos.at("kind").get<std::string>());
        validate_position(ma);
        catalog.push_back(std::move(ma));
    }
    return catalog;
}

std::vector<MitigationAction> load_catalog_file(const std::string& path) {
    return load_catalog(read_text(path));
}

std::vector<Countermeasure> load_repo(const std::string& json_text,
                                      const std::vector<MitigationAction>& catalog) {
    json doc = parse_json(json_text, "repository");
    if (!doc.is_array()) throw ValidationError("repository must be a JSON array");
    std::set<std::string> known_mas;
    for (const MitigationAction& ma : catalog) known_mas.insert(ma.id);

    std::vector<Countermeasure> repo;
    std::set<std::string> ids;
    std::string coin;
    for (const json& j : doc) {
        Countermeasure cm;
        cm.id = j.at("id").get<std::string>();
        if (!ids.insert(cm.id).second) {
            throw ValidationError("duplicate countermeasure id '" + cm.id + "'");
        }
        cm.manufacturer = j.value("manufacturer", "");
        cm.product_id = j.value("product_id", "");
        cm.deploy_cost = j.at("deploy_cost").get<double>();
        if (cm.deploy_cost < 0) {
            throw ValidationError("countermeasure '" + cm.id + "' has a negative cost");
        }
        cm.coin = j.value("coin", "USD");
        if (coin.empty()) {
            coin = cm.coin;
        } else if (coin != cm.coin) {
            throw ValidationError("mixed currencies in repository: " + coin + " vs " + cm.coin);
        }
        cm.ma_ids = j.at("ma_ids").get<std::vector<std::string>>();
        if (cm.ma_ids.empty()) {
            throw ValidationError("countermeasure '" + cm.id + "' supports no mitigation action");
        }
        for (const std::string& ma : cm.ma_ids) {
            if (!known_mas.count(ma)) {
                throw ValidationError("countermeasure '" + cm.id +
                                      "' references unknown mitigation action '" + ma + "'");
            }
        }
        repo.push_back(std::move(cm));
    }
    return repo;
}

std::vector<Countermeasure> load_repo_file(const std::string& path,
                                           const std::vector<MitigationAction>& catalog) {
    return load_repo(read_text(path), catalog);
}

std::vector<Atom> load_policy(const std::string& json_text) {
    json doc = parse_json(json_text, "policy");
    if (!doc.is_array()) throw ValidationError("policy must be a JSON array");
    std::vector<Atom> patterns;
    for (const json& j : doc) patterns.push_back(parse_atom(j.get<std::string>()));
    return patterns;
}

std::vector<Atom> load_policy_file(const std::string& path) {
    return load_policy(read_text(path));
}

}  // namespace agplan
