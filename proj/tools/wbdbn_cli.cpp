// wbdbn command-line front end.
//
//   wbdbn <learn|eval|filter|simulate|policy|voi|sweep|synth|stats> [options]
//
// Options may also come from `--config file.json` (an object keyed by long
// option names); flags given on the command line win. Every artifact carries
// the resolved options and seed. `--no-timestamp` drops the only
// run-dependent field so reruns are byte-identical.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wbdbn/wbdbn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wbdbn;

namespace {

struct Common {
    std::string config_path;
    std::string out = "-";
    std::uint64_t seed = 0;
    int workers = 1;
    bool no_timestamp = false;
};

// ---------------------------------------------------------------------------
// Config file -> extra argv tokens

std::vector<std::string> config_tokens(const std::string& path) {
    const json j = read_json_file(path);
    if (!j.is_object()) throw UsageError("config '" + path + "' must be a JSON object");
    std::vector<std::string> out;
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) {
                if (!joined.empty()) joined += ',';
                joined += v.is_string() ? v.get<std::string>() : v.dump();
            }
            out.push_back(flag);
            out.push_back(joined);
        } else if (value.is_string()) {
            out.push_back(flag);
            out.push_back(value.get<std::string>());
        } else if (value.is_number()) {
            out.push_back(flag);
            out.push_back(value.dump());
        } else {
            throw UsageError("config key '" + key + "' has an unsupported value");
        }
    }
    return out;
}

// Resolved options of a subcommand as JSON. Values keep their command-line
// spelling; numbers become JSON numbers.
json resolved_config(const CLI::App& sub) {
    static const std::vector<std::string> skip{"help", "config", "workers", "no-timestamp", "out"};
    json cfg = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
        if (name == "no-mirror") {
            cfg[name] = opt->count() > 0;
            continue;
        }
        std::string text = opt->count() > 0 ? opt->results().back() : opt->get_default_str();
        if (text.empty()) {
            cfg[name] = nullptr;
            continue;
        }
        char* end = nullptr;
        const double num = std::strtod(text.c_str(), &end);
        const bool numeric = end && *end == '\0' && text.find_first_not_of("0123456789.-+eE") == std::string::npos;
        if (numeric && text.find_first_not_of("0123456789-") == std::string::npos) {
            cfg[name] = std::stoll(text);
        } else if (numeric) {
            cfg[name] = num;
        } else {
            cfg[name] = text;
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Output helpers

std::string output_path(const std::string& out) {
    if (out == "-") return out;
    fs::path p(out);
    if (p.is_relative()) {
        if (const char* dir = std::getenv("WBDBN_OUTPUT_DIR"); dir && *dir) p = fs::path(dir) / p;
    }
    return p.string();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Run {
    std::string command;
    json config;
    const Common* common = nullptr;

    json header() const {
        json h{{"command", command}, {"config", config}, {"seed", common->seed}};
        if (!common->no_timestamp) h["generated_at"] = utc_timestamp();
        return h;
    }

    std::string csv_header() const {
        std::string s = "# wbdbn " + command + "\n# run: " + header().dump() + "\n";
        return s;
    }

    void write(const std::string& text) const {
        const auto path = output_path(common->out);
        if (path == "-") {
            std::cout << text;
            return;
        }
        if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ValidationError("cannot write '" + path + "'");
        f << text;
    }

    void write_json(json body) const {
        body["run"] = header();
        write(body.dump(2) + "\n");
    }
};

// ---------------------------------------------------------------------------
// Argument parsing helpers

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(s);
    while (std::getline(in, cell, sep)) {
        if (!cell.empty()) out.push_back(cell);
    }
    return out;
}

double parse_number(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw UsageError("'" + s + "' is not a number");
    return v;
}

// "0,0.1,0.5" or "start:stop:step".
std::vector<double> parse_grid(const std::string& s) {
    const auto parts = split(s, ':');
    if (parts.size() == 3) {
        const double a = parse_number(parts[0]), b = parse_number(parts[1]), step = parse_number(parts[2]);
        if (!(step > 0.0) || b < a) throw UsageError("bad cost range '" + s + "'");
        std::vector<double> out;
        const long n = std::lround(std::floor((b - a) / step + 1e-9));
        for (long k = 0; k <= n; ++k) out.push_back(a + static_cast<double>(k) * step);
        return out;
    }
    std::vector<double> out;
    for (const auto& p : split(s, ',')) out.push_back(parse_number(p));
    if (out.empty()) throw UsageError("empty cost grid");
    return out;
}

int parse_state(const std::string& name, const std::string& value, int n_bins) {
    static const std::map<std::string, int> tokens{{"R_PLUS", 1}, {"R_MINUS", 0}, {"O_PLUS", 1}, {"O_MINUS", 0},
                                                   {"I_PLUS", 1}, {"I_MINUS", 0}, {"AL1", 1},    {"AL0", 0}};
    if (auto it = tokens.find(value); it != tokens.end()) return it->second;
    const double v = parse_number(value);
    const int state = static_cast<int>(v);
    if (state != v || state < 0 || state >= cardinality_of(name, n_bins)) {
        throw UsageError("value '" + value + "' out of range for '" + name + "'");
    }
    return state;
}

// "i=I_PLUS,w_prev=3"
Evidence parse_evidence(const std::string& s, int n_bins) {
    Evidence ev;
    for (const auto& item : split(s, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("evidence item '" + item + "' must be name=value");
        const auto name = item.substr(0, eq);
        if (!is_chance_node(name)) throw UsageError("'" + name + "' cannot be evidence");
        ev[name] = parse_state(name, item.substr(eq + 1), n_bins);
    }
    return ev;
}

json evidence_json(const Evidence& ev) {
    json j = json::object();
    for (const auto& [k, v] : ev) j[k] = v;
    return j;
}

DbnModel load_model(const std::string& path, int n_bins) {
    if (path.empty()) return reference_model(n_bins);
    return model_from_json(read_json_file(path));
}

StructureCandidate load_structure(const std::string& path) {
    if (path.empty()) return default_structure();
    return structure_from_json(read_json_file(path));
}

Dataset load_data(const std::string& path, int n_bins) {
    if (path.empty()) throw UsageError("--data is required");
    if (fs::path(path).extension() == ".json") {
        auto ds = dataset_from_json(read_json_file(path));
        ds.n_bins = n_bins;
        return ds;
    }
    return parse_event_log(path, n_bins);
}

UtilitySpec make_utility(const std::string& kind, double cost) {
    if (kind == "wellbeing") return UtilitySpec::user_wellbeing();
    if (kind == "trust") return UtilitySpec::user_trust();
    if (kind == "tradeoff") return UtilitySpec::tradeoff(cost);
    throw UsageError("unknown utility '" + kind + "' (wellbeing | trust | tradeoff)");
}

json decision_json(const PolicyDecision& d) {
    return json{{"optimal_action", std::string(to_token(d.action))},
                {"eu_yield", d.eu_yield},
                {"eu_unyield", d.eu_unyield}};
}

// ---------------------------------------------------------------------------
// Event scripts for `simulate`

EventInput event_from_json(const json& j) {
    EventInput e;
    const auto c = j.at("contributor").get<std::string>();
    if (c != "R" && c != "O") throw ValidationError("contributor must be R or O");
    e.contributor = c == "R" ? Contributor::R : Contributor::O;
    auto token = [&](const char* key) -> std::optional<int> {
        if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
        return parse_state(key == std::string("a_R") ? "aR" : key == std::string("a_O") ? "aO"
                           : key == std::string("alignment")                      ? "al"
                           : key == std::string("prev_a_O")                       ? "aO_prev"
                                                                                  : "i",
                           j.at(key).get<std::string>(), 2);
    };
    if (auto v = token("a_R")) e.a_R = static_cast<AvAction>(*v);
    if (auto v = token("a_O")) e.a_O = static_cast<OtherAction>(*v);
    if (auto v = token("alignment")) e.alignment = static_cast<Alignment>(*v);
    if (auto v = token("prev_a_O")) e.prev_a_O = static_cast<OtherAction>(*v);
    if (auto v = token("intention")) e.observed_intention = static_cast<Intention>(*v);
    check_event(e);
    return e;
}

std::vector<EventInput> preset_script(const std::string& preset, int events) {
    if (events < 1) throw UsageError("--events must be >= 1");
    EventInput e;
    e.contributor = Contributor::R;
    if (preset == "aligned-yield") {
        e.a_R = AvAction::Yield;
        e.alignment = Alignment::Aligned;
    } else if (preset == "aligned-unyield") {
        e.a_R = AvAction::Unyield;
        e.alignment = Alignment::Aligned;
    } else if (preset == "misaligned-yield") {
        e.a_R = AvAction::Yield;
        e.alignment = Alignment::Misaligned;
    } else if (preset == "misaligned-unyield") {
        e.a_R = AvAction::Unyield;
        e.alignment = Alignment::Misaligned;
    } else if (preset == "other-yield" || preset == "other-unyield") {
        e.contributor = Contributor::O;
        e.a_O = preset == "other-yield" ? OtherAction::Yield : OtherAction::Unyield;
    } else {
        throw UsageError("unknown preset '" + preset + "'");
    }
    return std::vector<EventInput>(static_cast<std::size_t>(events), e);
}

std::string trajectory_text(const std::vector<TrajectoryPoint>& pts) {
    std::ostringstream os;
    write_trajectory_csv(os, pts);
    return os.str();
}

// ---------------------------------------------------------------------------
// Stats report: group comparisons on continuous scores.

json ttest_json(const std::string& label, std::vector<double> a, std::vector<double> b) {
    json j{{"comparison", label}, {"n_a", a.size()}, {"n_b", b.size()}};
    try {
        const auto one = stats::welch_t_test(a, b, stats::Tail::One);
        const auto two = stats::welch_t_test(a, b, stats::Tail::Two);
        j["t"] = one.t;
        j["df"] = one.df;
        j["p_one_tail"] = one.p;
        j["p_two_tail"] = two.p;
    } catch (const Error& e) {
        j["error"] = e.what();
    }
    return j;
}

json stats_report(const Dataset& ds) {
    std::vector<double> w_oplus, w_ominus, t_rplus, t_rminus, w_iplus, w_iminus;
    std::vector<double> w_al1, w_al0, t_al1, t_al0, all_w, all_t;
    for (const auto& seq : ds.sequences) {
        for (const auto& r : seq) {
            const double w = score_wellbeing(r.responses);
            const double t = score_trust(r.responses);
            all_w.push_back(w);
            all_t.push_back(t);
            if (r.a_O) (*r.a_O == OtherAction::Yield ? w_oplus : w_ominus).push_back(w);
            if (r.a_R) (*r.a_R == AvAction::Yield ? t_rplus : t_rminus).push_back(t);
            if (r.intention) (*r.intention == Intention::Yield ? w_iplus : w_iminus).push_back(w);
            if (r.alignment) {
                (*r.alignment == Alignment::Aligned ? w_al1 : w_al0).push_back(w);
                (*r.alignment == Alignment::Aligned ? t_al1 : t_al0).push_back(t);
            }
        }
    }
    json tests = json::array();
    tests.push_back(ttest_json("wellbeing: O_PLUS vs O_MINUS", w_oplus, w_ominus));
    tests.push_back(ttest_json("trust: R_PLUS vs R_MINUS", t_rplus, t_rminus));
    tests.push_back(ttest_json("wellbeing: I_PLUS vs I_MINUS", w_iplus, w_iminus));
    tests.push_back(ttest_json("wellbeing: AL1 vs AL0", w_al1, w_al0));
    tests.push_back(ttest_json("trust: AL1 vs AL0", t_al1, t_al0));
    json corr{{"comparison", "trust vs wellbeing"}, {"n", all_w.size()}};
    try {
        const auto c = stats::pearson_r(all_t, all_w);
        corr["r"] = c.r;
        corr["df"] = c.df;
        corr["p_two_tail"] = c.p;
    } catch (const Error& e) {
        corr["error"] = e.what();
    }
    return json{{"t_tests", tests}, {"correlation", corr}, {"events", ds.event_count()}};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Well-being and trust DBN toolkit"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

    Common common;
    int n_bins = kDefaultBins;
    double alpha = 1.0;
    bool no_mirror = false;
    std::string data_path, model_path, structure_path, candidates, evidence, by, utility = "wellbeing";
    std::string costs = "0:1:0.1", script_path, preset = "aligned-yield", participant;
    int folds = 5, iterations = 10, participants = 20, events = 20;
    double cost = 0.2, p_av_yield = 0.5, p_other_yield = 0.5;

    auto add_common = [&](CLI::App* sub) {
        sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
        sub->add_option("--config", common.config_path, "JSON file of option values; flags override it");
        sub->add_option("-o,--out", common.out, "Output file, '-' for stdout");
        sub->add_option("--seed", common.seed, "Random seed");
        sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--no-timestamp", common.no_timestamp, "Omit generated_at from outputs");
        sub->add_option("--n-bins", n_bins, "Bins for well-being and trust")->check(CLI::Range(2, 64));
    };
    auto add_decision = [&](CLI::App* sub) {
        sub->add_option("--model", model_path, "Model JSON (default: built-in reference model)");
        sub->add_option("--utility", utility, "wellbeing | trust | tradeoff");
        sub->add_option("--cost", cost, "Yielding cost for the tradeoff utility");
        sub->add_option("--evidence", evidence, "Observed chance nodes, e.g. i=I_PLUS,w_prev=3");
    };

    auto* learn = app.add_subcommand("learn", "Estimate CPDs from an event log");
    add_common(learn);
    learn->add_option("--data", data_path, "Event-log CSV or dataset JSON");
    learn->add_option("--structure", structure_path, "Structure JSON (default structure if omitted)");
    learn->add_option("--candidates", candidates, "Comma-separated structure files; cross-validate and keep the best");
    learn->add_option("--folds", folds, "Folds for structure selection");
    learn->add_option("--alpha", alpha, "Dirichlet pseudo-count");
    learn->add_flag("--no-mirror", no_mirror, "Do not mirror user transitions into the other's well-being CPD");

    auto* eval = app.add_subcommand("eval", "Cross-validated inference accuracy");
    add_common(eval);
    eval->add_option("--data", data_path, "Event-log CSV or dataset JSON");
    eval->add_option("--structure", structure_path, "Structure JSON");
    eval->add_option("--folds", folds, "Folds");
    eval->add_option("--iterations", iterations, "Repetitions");
    eval->add_option("--alpha", alpha, "Dirichlet pseudo-count");
    eval->add_flag("--no-mirror", no_mirror, "Do not mirror user transitions into the other's well-being CPD");

    auto* filter = app.add_subcommand("filter", "Belief trace for an event log");
    add_common(filter);
    filter->add_option("--model", model_path, "Model JSON");
    filter->add_option("--data", data_path, "Event-log CSV or dataset JSON");
    filter->add_option("--participant", participant, "Only this participant");

    auto* simulate = app.add_subcommand("simulate", "Expected-state trajectory for a scripted event sequence");
    add_common(simulate);
    simulate->add_option("--model", model_path, "Model JSON (default: built-in reference model)");
    simulate->add_option("--script", script_path, "JSON list of events");
    simulate->add_option("--preset", preset,
                         "aligned-yield | aligned-unyield | misaligned-yield | misaligned-unyield | other-yield | "
                         "other-unyield");
    simulate->add_option("--events", events, "Events in a preset script");

    auto* policy = app.add_subcommand("policy", "Optimal accommodative action");
    add_common(policy);
    add_decision(policy);
    policy->add_option("--by", by, "Tabulate the policy over this chance node");

    auto* voi = app.add_subcommand("voi", "Value of information of each chance node");
    add_common(voi);
    add_decision(voi);

    auto* sweep = app.add_subcommand("sweep", "Policy over a grid of yielding costs");
    add_common(sweep);
    sweep->add_option("--model", model_path, "Model JSON (default: built-in reference model)");
    sweep->add_option("--costs", costs, "Cost grid: list a,b,c or range start:stop:step");
    sweep->add_option("--by", by, "Also split by this chance node");
    sweep->add_option("--evidence", evidence, "Fixed evidence");

    auto* synth = app.add_subcommand("synth", "Sample a synthetic event log");
    add_common(synth);
    synth->add_option("--model", model_path, "Generating model JSON (default: built-in reference model)");
    synth->add_option("--participants", participants, "Participants")->check(CLI::PositiveNumber);
    synth->add_option("--events", events, "Events per participant")->check(CLI::PositiveNumber);
    synth->add_option("--p-av-yield", p_av_yield, "P(AV yields)")->check(CLI::Range(0.0, 1.0));
    synth->add_option("--p-other-yield", p_other_yield, "P(other yields)")->check(CLI::Range(0.0, 1.0));

    auto* stats_cmd = app.add_subcommand("stats", "Group t-tests and trust/well-being correlation");
    add_common(stats_cmd);
    stats_cmd->add_option("--data", data_path, "Event-log CSV or dataset JSON");

    // Splice config-file values in right after the subcommand name so that
    // explicit flags, which come later, take precedence.
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        for (std::size_t k = 0; k < args.size(); ++k) {
            std::string cfg;
            if (args[k] == "--config" && k + 1 < args.size()) cfg = args[k + 1];
            else if (args[k].rfind("--config=", 0) == 0) cfg = args[k].substr(9);
            if (cfg.empty()) continue;
            const auto extra = config_tokens(cfg);
            std::size_t sub_pos = 0;
            while (sub_pos < args.size() && args[sub_pos].rfind("-", 0) == 0) ++sub_pos;
            args.insert(args.begin() + static_cast<long>(std::min(sub_pos + 1, args.size())), extra.begin(), extra.end());
            break;
        }
    } catch (const Error& e) {
        std::cerr << "wbdbn: error: " << e.what() << "\n";
        return 2;
    }
    std::reverse(args.begin(), args.end());

    try {
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    Run run{sub->get_name(), resolved_config(*sub), &common};

    try {
        if (sub == learn) {
            const auto data = load_data(data_path, n_bins);
            EstimateOptions opts{alpha, !no_mirror};
            json body;
            StructureCandidate chosen = load_structure(structure_path);
            if (!candidates.empty()) {
                std::vector<StructureCandidate> cands;
                for (const auto& p : split(candidates, ',')) cands.push_back(load_structure(p));
                const auto sel = select_structure(cands, data, folds, opts, common.workers);
                chosen = cands[sel.winner];
                json scores = json::array();
                for (std::size_t c = 0; c < cands.size(); ++c) {
                    scores.push_back({{"structure_id", cands[c].structure_id}, {"mean_heldout_loglik", sel.mean_heldout_loglik[c]}});
                }
                body["selection"] = scores;
            }
            const auto model = estimate_cpds(data, chosen, opts);
            json doc = to_json(model);
            if (body.contains("selection")) doc["selection"] = body["selection"];
            doc["training_events"] = data.event_count();
            run.write_json(std::move(doc));
        } else if (sub == eval) {
            const auto data = load_data(data_path, n_bins);
            const auto rep = evaluate_accuracy(data, load_structure(structure_path), folds, iterations, common.seed,
                                               EstimateOptions{alpha, !no_mirror}, common.workers);
            auto acc = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
            json tallies = json::array();
            for (const auto& t : rep.per_fold_tally) {
                tallies.push_back({{"correct", t.correct}, {"total", t.total}});
            }
            run.write_json(json{{"per_target_accuracy",
                                 {{"wellbeing", acc(rep.per_target_accuracy[0])},
                                  {"trust", acc(rep.per_target_accuracy[1])},
                                  {"intention", acc(rep.per_target_accuracy[2])}}},
                                {"per_fold_loglik", rep.per_fold_loglik},
                                {"per_fold_tally", tallies},
                                {"seed", common.seed}});
        } else if (sub == filter) {
            if (model_path.empty()) throw UsageError("--model is required");
            const auto model = load_model(model_path, n_bins);
            const auto data = load_data(data_path, model.n_bins());
            std::ostringstream os;
            os << run.csv_header() << "participant_id,event_index,contributor,E_w,E_t,P_I_plus,E_wO,log_evidence\n";
            bool matched = false;
            for (const auto& seq : data.sequences) {
                if (seq.empty() || (!participant.empty() && seq.front().participant_id != participant)) continue;
                matched = true;
                BeliefState b = model.initial_belief();
                const auto inputs = to_event_inputs(seq, model.n_bins());
                for (std::size_t k = 0; k < inputs.size(); ++k) {
                    auto step = filter_step_detailed(b, inputs[k], model);
                    b = std::move(step.belief);
                    const auto p = summarize(b);
                    os << seq.front().participant_id << ',' << p.event_index << ',' << to_token(inputs[k].contributor)
                       << ',' << format_double(p.expected_wellbeing) << ',' << format_double(p.expected_trust) << ','
                       << format_double(p.intention_yield) << ',' << format_double(p.expected_other_wellbeing) << ','
                       << format_double(std::log(step.evidence)) << '\n';
                }
            }
            if (!participant.empty() && !matched) throw ValidationError("no participant '" + participant + "' in data");
            run.write(os.str());
        } else if (sub == simulate) {
            const auto model = load_model(model_path, n_bins);
            std::vector<EventInput> script;
            if (!script_path.empty()) {
                const json j = read_json_file(script_path);
                try {
                    for (const auto& e : j) script.push_back(event_from_json(e));
                } catch (const json::exception& e) {
                    throw ValidationError(std::string("script: ") + e.what());
                }
            } else {
                script = preset_script(preset, events);
            }
            const auto pts = forward_simulate(model.initial_belief(), script, model);
            run.write(run.csv_header() + trajectory_text(pts));
        } else if (sub == policy) {
            const auto model = load_model(model_path, n_bins);
            const InfluenceDiagram cim(model, make_utility(utility, cost));
            const auto ev = parse_evidence(evidence, model.n_bins());
            json body{{"utility", utility}, {"evidence", evidence_json(ev)}, {"decision", decision_json(optimal_policy(cim, ev))}};
            if (!by.empty()) {
                json rows = json::array();
                for (const auto& r : policy_table(cim, by, ev)) {
                    json row{{by, r.value}};
                    if (r.lower) row["lower"] = *r.lower;
                    if (r.upper) row["upper"] = *r.upper;
                    row.update(decision_json(r.decision));
                    rows.push_back(row);
                }
                body["by"] = by;
                body["table"] = rows;
            }
            run.write_json(std::move(body));
        } else if (sub == voi) {
            const auto model = load_model(model_path, n_bins);
            const InfluenceDiagram cim(model, make_utility(utility, cost));
            const auto ev = parse_evidence(evidence, model.n_bins());
            json nodes = json::array();
            for (auto node : kChanceNodes) {
                if (ev.contains(node)) continue;
                nodes.push_back({{"node", std::string(node)}, {"voi", value_of_information(cim, node, ev)}});
            }
            run.write_json(json{{"utility", utility},
                                {"evidence", evidence_json(ev)},
                                {"baseline", decision_json(optimal_policy(cim, ev))},
                                {"nodes", nodes}});
        } else if (sub == sweep) {
            const auto model = load_model(model_path, n_bins);
            const InfluenceDiagram cim(model, UtilitySpec::tradeoff(0.0));
            const auto ev = parse_evidence(evidence, model.n_bins());
            const auto rows = cost_sensitivity_sweep(cim, parse_grid(costs),
                                                     by.empty() ? std::nullopt : std::optional<std::string>(by), ev,
                                                     common.workers);
            std::ostringstream os;
            os << run.csv_header();
            write_sweep_csv(os, rows);
            run.write(os.str());
        } else if (sub == synth) {
            const auto model = load_model(model_path, n_bins);
            SynthOptions opts;
            opts.p_av_yield = p_av_yield;
            opts.p_other_yield = p_other_yield;
            const auto ds = generate_synthetic(model, participants, events, common.seed, opts);
            const auto path = output_path(common.out);
            if (fs::path(path).extension() == ".json") {
                run.write_json(to_json(ds));
            } else {
                std::ostringstream os;
                os << run.csv_header();
                write_event_log(os, ds);
                run.write(os.str());
            }
        } else if (sub == stats_cmd) {
            run.write_json(stats_report(load_data(data_path, n_bins)));
        }
    } catch (const UsageError& e) {
        std::cerr << "wbdbn " << run.command << ": usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "wbdbn " << run.command << ": error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "wbdbn " << run.command << ": error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
