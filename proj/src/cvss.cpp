#include "agplan/cvss.hpp"

#include <cmath>

#include "agplan/errors.hpp"

namespace agplan {

CvssInfo::Level CvssInfo::parse_level(const std::string& text) {
    if (text == "low") return Level::Low;
    if (text == "medium") return Level::Medium;
    if (text == "high") return Level::High;
    if (text == "none") return Level::None;
    if (text == "required") return Level::Required;
    if (text == "single") return Level::Single;
    if (text == "multiple") return Level::Multiple;
    throw ValidationError("unknown CVSS level '" + text + "'");
}

CvssInfo::Version CvssInfo::parse_version(const std::string& text) {
    if (text == "v2") return Version::V2;
    if (text == "v3") return Version::V3;
    throw ValidationError("unknown CVSS version '" + text + "'");
}

std::string CvssInfo::to_string() const {
    if (explicit_probability) return "p=" + std::to_string(*explicit_probability);
    std::string out = version == Version::V3 ? "v3" : "v2";
    auto name = [](Level l) {
        switch (l) {
            case Level::Low: return "low";
            case Level::Medium: return "medium";
            case Level::High: return "high";
            case Level::None: return "none";
            case Level::Required: return "required";
            case Level::Single: return "single";
            case Level::Multiple: return "multiple";
        }
        return "?";
    };
    if (attack_complexity) out += std::string("/") + name(*attack_complexity);
    if (interaction) out += std::string("/") + name(*interaction);
    return out;
}

namespace {

double ac_value(CvssInfo::Version version, CvssInfo::Level level) {
    using L = CvssInfo::Level;
    if (version == CvssInfo::Version::V3) {
        if (level == L::Low) return 0.77;
        if (level == L::High) return 0.44;
        throw ValidationError("CVSS v3 attack complexity must be low or high");
    }
    if (level == L::Low) return 0.71;
    if (level == L::Medium) return 0.61;
    if (level == L::High) return 0.35;
    throw ValidationError("CVSS v2 access complexity must be low, medium or high");
}

double interaction_value(CvssInfo::Version version, CvssInfo::Level level) {
    using L = CvssInfo::Level;
    if (version == CvssInfo::Version::V3) {
        if (level == L::None) return 0.85;
        if (level == L::Required) return 0.62;
        throw ValidationError("CVSS v3 user interaction must be none or required");
    }
    if (level == L::None) return 0.704;
    if (level == L::Single) return 0.56;
    if (level == L::Multiple) return 0.45;
    throw ValidationError("CVSS v2 authentication must be none, single or multiple");
}

}  // namespace

double cvss_probability(const CvssInfo& info) {
    if (info.explicit_probability) {
        double p = *info.explicit_probability;
        if (p < 0.0 || p > 1.0) throw ValidationError("explicit probability outside [0,1]");
        return p;
    }
    if (!info.version || !info.attack_complexity || !info.interaction) {
        throw ValidationError("incomplete CVSS info");
    }
    double raw = ac_value(*info.version, *info.attack_complexity) *
                 interaction_value(*info.version, *info.interaction);
    return std::round(raw * 100.0) / 100.0;
}

}  // namespace agplan
