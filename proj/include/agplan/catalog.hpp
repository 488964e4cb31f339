#pragma once

#include <string>
#include <vector>

#include "agplan/ast.hpp"

namespace agplan {

/// Where a matched mitigation action is deployed, read from the match
/// trace: a single argument of the primary postcondition or of a named
/// precondition occurrence. Inter-subnet positions read the argument pair
/// (arg_index, arg_index + 1) of the referenced atom.
struct PositionSpec {
    enum class Source { Postcondition, Precondition };
    enum class Kind { VulnerableHost, ExistingComponent, InterSubnet };

    Source source = Source::Postcondition;
    std::string predicate;  // precondition source only
    int occurrence = 0;     // among the preconditions naming `predicate`, authored order
    int arg_index = 0;
    Kind kind = Kind::VulnerableHost;
};

/// A product-agnostic defensive capability. The primary postcondition is the
/// attack-graph fact the action cancels (stored positive); preconditions may
/// be negated ("!isFirewall(...)"). Side-effect postconditions are stored
/// but never executed during a search.
struct MitigationAction {
    std::string id;
    std::string cm_type;
    std::string action;
    std::vector<std::pair<Atom, bool>> preconditions;  // (atom, negated), authored order
    Atom primary_post;
    std::vector<Atom> side_effects;
    PositionSpec position;
};

/// A concrete security product supporting one or more mitigation actions.
struct Countermeasure {
    std::string id;
    std::string manufacturer;
    std::string product_id;
    double deploy_cost = 0.0;
    std::string coin;
    std::vector<std::string> ma_ids;
};

/// Ground deployment position: a host/component name or an ordered subnet
/// pair rendered "(src,dst)".
struct Position {
    std::vector<std::string> parts;
    std::string to_string() const;
    bool operator==(const Position& o) const { return parts == o.parts; }
    bool operator<(const Position& o) const { return parts < o.parts; }
};

/// A countermeasure bound to a concrete network position; the atomic unit
/// of plans and search states. Ordered by (cm_id, ma_id, position).
struct DeployedCm {
    std::string cm_id;
    std::string ma_id;
    Position position;
    double cost = 0.0;

    /// "C{cm_id}@{position}", the variable name used in equation dumps.
    std::string var_name() const { return "C" + cm_id + "@" + position.to_string(); }
    std::string key() const { return cm_id + "|" + ma_id + "|" + position.to_string(); }

    bool operator==(const DeployedCm& o) const {
        return cm_id == o.cm_id && ma_id == o.ma_id && position == o.position;
    }
    bool operator<(const DeployedCm& o) const {
        if (cm_id != o.cm_id) return cm_id < o.cm_id;
        if (ma_id != o.ma_id) return ma_id < o.ma_id;
        return position < o.position;
    }
};

/// Known defense-mechanism tags (DM).
bool known_cm_type(const std::string& tag);

std::vector<MitigationAction> load_catalog(const std::string& json_text);
std::vector<MitigationAction> load_catalog_file(const std::string& path);

/// Validates countermeasures against the catalog: referenced mitigation
/// actions must exist, costs be non-negative and the currency uniform.
std::vector<Countermeasure> load_repo(const std::string& json_text,
                                      const std::vector<MitigationAction>& catalog);
std::vector<Countermeasure> load_repo_file(const std::string& path,
                                           const std::vector<MitigationAction>& catalog);

/// Deny-list of atom patterns (wildcards allowed).
std::vector<Atom> load_policy(const std::string& json_text);
std::vector<Atom> load_policy_file(const std::string& path);

}  // namespace agplan
