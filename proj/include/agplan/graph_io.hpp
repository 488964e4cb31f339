#pragma once

#include <string>

#include "agplan/attack_graph.hpp"

namespace agplan {

enum class GraphFormat { NativeJson, MulvalCsv };

/// Native format: one JSON document
///   {nodes:[{id,kind,label,rule_id?,rule_label?,cvss?}], edges:[[from,to]], goals:[id]}
/// export/import round-trips byte-identically.
std::string export_graph_json(const AttackGraph& graph);
AttackGraph import_graph_json(const std::string& text);

/// MulVAL two-file layout. `path` names a directory holding VERTICES.CSV
/// (id, "label", kind, metric) and ARCS.CSV (to, from[, weight]). Kinds
/// AND/LEAF/OR map onto derivation/primitive-fact/derived-fact. Goals
/// default to the derived facts without outgoing edges.
AttackGraph import_graph_mulval(const std::string& path);
void export_graph_mulval(const AttackGraph& graph, const std::string& path);

/// Format-dispatching file helpers used by the CLI.
void write_graph_file(const AttackGraph& graph, const std::string& path, GraphFormat format);
AttackGraph read_graph_file(const std::string& path, GraphFormat format);

}  // namespace agplan
