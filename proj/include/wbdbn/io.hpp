#pragma once

#include <charconv>
#include <ostream>
#include <span>
#include <string>

#include "wbdbn/decision.hpp"
#include "wbdbn/inference.hpp"

namespace wbdbn {

// Shortest decimal text that reads back as the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

inline void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryPoint> points) {
    out << "event_index,E_w,E_t,P_I_plus,E_wO\n";
    for (const auto& p : points) {
        out << p.event_index << ',' << format_double(p.expected_wellbeing) << ','
            << format_double(p.expected_trust) << ',' << format_double(p.intention_yield) << ','
            << format_double(p.expected_other_wellbeing) << '\n';
    }
}

inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "cost,evidence_var,evidence_value,optimal_action,eu_yield,eu_unyield\n";
    for (const auto& r : rows) {
        out << format_double(r.cost) << ',' << r.evidence_var << ','
            << (r.evidence_value ? std::to_string(*r.evidence_value) : std::string()) << ','
            << to_token(r.decision.action) << ',' << format_double(r.decision.eu_yield) << ','
            << format_double(r.decision.eu_unyield) << '\n';
    }
}

} // namespace wbdbn
