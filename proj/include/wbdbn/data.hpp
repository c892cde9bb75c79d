#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "wbdbn/error.hpp"
#include "wbdbn/model.hpp"
#include "wbdbn/variable.hpp"

namespace wbdbn {

// Maps a 7-point Likert response onto [0, 1].
inline double likert_to_unit(int v) {
    if (v < 1 || v > 7) {
        throw ValidationError("Likert value " + std::to_string(v) + " outside 1..7");
    }
    return (v - 1) / 6.0;
}

// Q1-Q7 feed well-being, Q8 is trust in the AV. Semantic-differential items
// (Q3-Q5) are expected already oriented so that 7 is the positive pole.
struct QuestionnaireResponse {
    std::array<int, 8> q{4, 4, 4, 4, 4, 4, 4, 4};

    friend bool operator==(const QuestionnaireResponse&, const QuestionnaireResponse&) = default;
};

inline double score_wellbeing(const QuestionnaireResponse& r) {
    double total = 0.0;
    for (int k = 0; k < 7; ++k) total += likert_to_unit(r.q[static_cast<std::size_t>(k)]);
    return total / 7.0;
}

inline double score_trust(const QuestionnaireResponse& r) { return likert_to_unit(r.q[7]); }

struct EventRecord {
    std::string participant_id;
    int ride_index = 0;
    int event_index = 0;
    Contributor contributor = Contributor::R;
    std::optional<AvAction> a_R;
    std::optional<OtherAction> a_O;
    std::optional<Alignment> alignment;
    std::optional<Intention> intention;
    QuestionnaireResponse responses;

    friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Event sequences, one per participant, ordered by (ride, event).
struct Dataset {
    std::vector<std::vector<EventRecord>> sequences;
    int n_bins = kDefaultBins;

    std::size_t event_count() const {
        std::size_t n = 0;
        for (const auto& s : sequences) n += s.size();
        return n;
    }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Which slice-k latents an EventInput built from a record should observe.
struct ObservationMask {
    bool wellbeing = true;
    bool trust = true;
    bool intention = true;
};

// Filter inputs for one sequence. a_O of the preceding event, when it was an
// O-contributor event, becomes prev_a_O.
inline std::vector<EventInput> to_event_inputs(const std::vector<EventRecord>& seq, int n_bins,
                                               ObservationMask mask = {}) {
    std::vector<EventInput> out;
    out.reserve(seq.size());
    for (std::size_t k = 0; k < seq.size(); ++k) {
        const auto& r = seq[k];
        EventInput e;
        e.contributor = r.contributor;
        e.a_R = r.a_R;
        e.a_O = r.a_O;
        e.alignment = r.alignment;
        if (k > 0 && seq[k - 1].contributor == Contributor::O) e.prev_a_O = seq[k - 1].a_O;
        if (mask.intention) e.observed_intention = r.intention;
        if (mask.wellbeing) e.observed_wellbeing = discretize(score_wellbeing(r.responses), n_bins).index;
        if (mask.trust) e.observed_trust = discretize(score_trust(r.responses), n_bins).index;
        out.push_back(e);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Event-log CSV
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 16> kCsvHeader{
    "participant_id", "ride", "event", "contributor", "a_R", "a_O", "alignment", "intention",
    "q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8"};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    for (auto& c : cells) {
        c.erase(0, c.find_first_not_of(" \t\r"));
        c.erase(c.find_last_not_of(" \t\r") + 1);
    }
    return cells;
}

template <typename E>
std::optional<E> parse_token(const std::string& cell, std::string_view plus, std::string_view minus, bool& ok) {
    ok = true;
    if (cell.empty()) return std::nullopt;
    if (cell == plus) return static_cast<E>(1);
    if (cell == minus) return static_cast<E>(0);
    ok = false;
    return std::nullopt;
}

inline std::optional<int> parse_int(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::size_t used = 0;
    try {
        int v = std::stoi(s, &used);
        if (used != s.size()) return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace detail

// Checks the per-record regime rules; returns a list of problems.
inline std::vector<std::string> record_problems(const EventRecord& r) {
    std::vector<std::string> out;
    if (r.contributor == Contributor::R) {
        if (!r.a_R) out.push_back("a_R: required for contributor R");
        if (r.a_O) out.push_back("a_O: must be empty for contributor R");
        if (!r.intention) out.push_back("intention: required for contributor R");
        if (r.alignment && r.a_R && r.intention && *r.alignment != alignment_of(*r.intention, *r.a_R)) {
            out.push_back("alignment: inconsistent with intention and a_R");
        }
    } else {
        if (!r.a_O) out.push_back("a_O: required for contributor O");
        if (r.a_R) out.push_back("a_R: must be empty for contributor O");
        if (r.alignment) out.push_back("alignment: must be empty for contributor O");
    }
    for (std::size_t k = 0; k < 8; ++k) {
        if (r.responses.q[k] < 1 || r.responses.q[k] > 7) {
            out.push_back("q" + std::to_string(k + 1) + ": Likert value " + std::to_string(r.responses.q[k]) +
                          " outside 1..7");
        }
    }
    return out;
}

namespace detail {

inline void sort_and_group(std::vector<EventRecord> records, Dataset& ds) {
    std::stable_sort(records.begin(), records.end(), [](const EventRecord& a, const EventRecord& b) {
        return std::tie(a.participant_id, a.ride_index, a.event_index) <
               std::tie(b.participant_id, b.ride_index, b.event_index);
    });
    for (auto& r : records) {
        if (ds.sequences.empty() || ds.sequences.back().front().participant_id != r.participant_id) {
            ds.sequences.emplace_back();
        }
        ds.sequences.back().push_back(std::move(r));
    }
}

} // namespace detail

// Parses an event log. Every problem in the file is collected and reported
// together, one line per problem with its 1-based line number. Lines starting
// with '#' are comments.
inline Dataset parse_event_log_stream(std::istream& in, int n_bins = kDefaultBins) {
    std::vector<std::string> problems;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    std::vector<EventRecord> records;
    std::map<std::tuple<std::string, int, int>, int> seen;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        auto cells = detail::split_csv_line(line);
        if (!have_header) {
            std::vector<std::string> expected(kCsvHeader.begin(), kCsvHeader.end());
            if (cells != expected) {
                throw ValidationError("line " + std::to_string(line_no) + ": header does not match schema");
            }
            have_header = true;
            continue;
        }
        const std::string where = "line " + std::to_string(line_no) + ", ";
        if (cells.size() != kCsvHeader.size()) {
            problems.push_back(where.substr(0, where.size() - 2) + ": expected " + std::to_string(kCsvHeader.size()) +
                               " columns, got " + std::to_string(cells.size()));
            continue;
        }
        EventRecord r;
        r.participant_id = cells[0];
        if (r.participant_id.empty()) problems.push_back(where + "participant_id: empty");
        auto ride = detail::parse_int(cells[1]);
        auto event = detail::parse_int(cells[2]);
        if (!ride) problems.push_back(where + "ride: not an integer");
        if (!event) problems.push_back(where + "event: not an integer");
        r.ride_index = ride.value_or(0);
        r.event_index = event.value_or(0);
        if (cells[3] == "R") {
            r.contributor = Contributor::R;
        } else if (cells[3] == "O") {
            r.contributor = Contributor::O;
        } else {
            problems.push_back(where + "contributor: expected R or O, got '" + cells[3] + "'");
        }
        bool ok = true;
        r.a_R = detail::parse_token<AvAction>(cells[4], "R_PLUS", "R_MINUS", ok);
        if (!ok) problems.push_back(where + "a_R: unknown token '" + cells[4] + "'");
        r.a_O = detail::parse_token<OtherAction>(cells[5], "O_PLUS", "O_MINUS", ok);
        if (!ok) problems.push_back(where + "a_O: unknown token '" + cells[5] + "'");
        r.alignment = detail::parse_token<Alignment>(cells[6], "AL1", "AL0", ok);
        if (!ok) problems.push_back(where + "alignment: unknown token '" + cells[6] + "'");
        r.intention = detail::parse_token<Intention>(cells[7], "I_PLUS", "I_MINUS", ok);
        if (!ok) problems.push_back(where + "intention: unknown token '" + cells[7] + "'");
        bool likert_ok = true;
        for (std::size_t k = 0; k < 8; ++k) {
            auto v = detail::parse_int(cells[8 + k]);
            if (!v) {
                problems.push_back(where + "q" + std::to_string(k + 1) + ": not an integer");
                likert_ok = false;
            } else {
                r.responses.q[k] = *v;
            }
        }
        for (const auto& p : record_problems(r)) {
            if (!likert_ok && p.starts_with("q")) continue;
            problems.push_back(where + p);
        }
        auto key = std::make_tuple(r.participant_id, r.ride_index, r.event_index);
        auto [it, inserted] = seen.emplace(key, line_no);
        if (!inserted) {
            problems.push_back(where + "duplicate (participant_id, ride, event); first seen on line " +
                               std::to_string(it->second));
        }
        records.push_back(std::move(r));
    }
    if (!have_header) throw ValidationError("event log has no header");
    if (!problems.empty()) {
        std::string msg = "event log has " + std::to_string(problems.size()) + " problem(s):";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ValidationError(msg);
    }
    Dataset ds;
    ds.n_bins = n_bins;
    detail::sort_and_group(std::move(records), ds);
    return ds;
}

inline Dataset parse_event_log(const std::string& path, int n_bins = kDefaultBins) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open event log '" + path + "'");
    return parse_event_log_stream(in, n_bins);
}

inline void write_event_log(std::ostream& out, const Dataset& ds) {
    for (std::size_t k = 0; k < kCsvHeader.size(); ++k) out << (k ? "," : "") << kCsvHeader[k];
    out << '\n';
    for (const auto& seq : ds.sequences) {
        for (const auto& r : seq) {
            out << r.participant_id << ',' << r.ride_index << ',' << r.event_index << ',' << to_token(r.contributor)
                << ',' << (r.a_R ? to_token(*r.a_R) : "") << ',' << (r.a_O ? to_token(*r.a_O) : "") << ','
                << (r.alignment ? to_token(*r.alignment) : "") << ',' << (r.intention ? to_token(*r.intention) : "");
            for (int q : r.responses.q) out << ',' << q;
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Dataset JSON
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const EventRecord& r) {
    nlohmann::json j;
    j["participant_id"] = r.participant_id;
    j["ride"] = r.ride_index;
    j["event"] = r.event_index;
    j["contributor"] = std::string(to_token(r.contributor));
    j["a_R"] = r.a_R ? nlohmann::json(std::string(to_token(*r.a_R))) : nlohmann::json();
    j["a_O"] = r.a_O ? nlohmann::json(std::string(to_token(*r.a_O))) : nlohmann::json();
    j["alignment"] = r.alignment ? nlohmann::json(std::string(to_token(*r.alignment))) : nlohmann::json();
    j["intention"] = r.intention ? nlohmann::json(std::string(to_token(*r.intention))) : nlohmann::json();
    j["responses"] = r.responses.q;
    return j;
}

inline nlohmann::json to_json(const Dataset& ds) {
    nlohmann::json seqs = nlohmann::json::array();
    for (const auto& s : ds.sequences) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : s) arr.push_back(to_json(r));
        seqs.push_back(std::move(arr));
    }
    return nlohmann::json{{"n_bins", ds.n_bins}, {"sequences", std::move(seqs)}};
}

inline Dataset dataset_from_json(const nlohmann::json& j) {
    try {
        Dataset ds;
        ds.n_bins = j.at("n_bins").get<int>();
        auto tok = [](const nlohmann::json& v) { return v.is_null() ? std::string() : v.get<std::string>(); };
        for (const auto& s : j.at("sequences")) {
            std::vector<EventRecord> seq;
            for (const auto& e : s) {
                EventRecord r;
                r.participant_id = e.at("participant_id").get<std::string>();
                r.ride_index = e.at("ride").get<int>();
                r.event_index = e.at("event").get<int>();
                const auto c = e.at("contributor").get<std::string>();
                if (c != "R" && c != "O") throw ValidationError("dataset JSON: bad contributor '" + c + "'");
                r.contributor = c == "R" ? Contributor::R : Contributor::O;
                bool ok = true;
                r.a_R = detail::parse_token<AvAction>(tok(e.at("a_R")), "R_PLUS", "R_MINUS", ok);
                if (!ok) throw ValidationError("dataset JSON: bad a_R");
                r.a_O = detail::parse_token<OtherAction>(tok(e.at("a_O")), "O_PLUS", "O_MINUS", ok);
                if (!ok) throw ValidationError("dataset JSON: bad a_O");
                r.alignment = detail::parse_token<Alignment>(tok(e.at("alignment")), "AL1", "AL0", ok);
                if (!ok) throw ValidationError("dataset JSON: bad alignment");
                r.intention = detail::parse_token<Intention>(tok(e.at("intention")), "I_PLUS", "I_MINUS", ok);
                if (!ok) throw ValidationError("dataset JSON: bad intention");
                r.responses.q = e.at("responses").get<std::array<int, 8>>();
                if (auto p = record_problems(r); !p.empty()) {
                    throw ValidationError("dataset JSON: participant " + r.participant_id + ": " + p.front());
                }
                seq.push_back(std::move(r));
            }
            if (seq.empty()) throw ValidationError("dataset JSON: empty sequence");
            ds.sequences.push_back(std::move(seq));
        }
        return ds;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("dataset JSON: ") + e.what());
    }
}

} // namespace wbdbn
