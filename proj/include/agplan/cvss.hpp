#pragma once

#include <optional>
#include <string>

namespace agplan {

/// Exploitability inputs for a vulnerability leaf: CVSS version plus the
/// attack-complexity and user-interaction (v3) or authentication (v2)
/// levels, or an explicit probability that overrides the computed value.
struct CvssInfo {
    enum class Version { V2, V3 };
    enum class Level { Low, Medium, High, None, Required, Single, Multiple };

    std::optional<Version> version;
    std::optional<Level> attack_complexity;
    std::optional<Level> interaction;  // UI for v3, Au for v2
    std::optional<double> explicit_probability;

    static Level parse_level(const std::string& text);
    static Version parse_version(const std::string& text);
    std::string to_string() const;
};

/// Exploit probability of a vulnerability leaf, rounded to two decimals:
/// AC x UI (v3) or AC x Au (v2) from the CVSS specification constants.
/// An explicit probability takes precedence.
double cvss_probability(const CvssInfo& info);

}  // namespace agplan
