#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wbdbn/inference.hpp"
#include "wbdbn/model.hpp"
#include "wbdbn/parallel.hpp"

namespace wbdbn {

// Slice-k values the utility can read, plus the chosen action.
struct Outcome {
    int wellbeing = 0;
    int trust = 0;
    int intention = 0;
    int other_wellbeing = 0;
    AvAction action = AvAction::Yield;
    int n_bins = kDefaultBins;

    double w() const { return bin_midpoint(Bin{wellbeing, n_bins}); }
    double t() const { return bin_midpoint(Bin{trust, n_bins}); }
    double w_other() const { return bin_midpoint(Bin{other_wellbeing, n_bins}); }
};

enum class UtilityKind { UserWellbeing, UserTrust, Tradeoff, Custom };

// Utility node. Tradeoff is w + wO, minus `cost` when the AV yields.
struct UtilitySpec {
    UtilityKind kind = UtilityKind::UserWellbeing;
    double cost = 0.0;
    std::function<double(const Outcome&)> custom;

    static UtilitySpec user_wellbeing() { return {UtilityKind::UserWellbeing, 0.0, {}}; }
    static UtilitySpec user_trust() { return {UtilityKind::UserTrust, 0.0, {}}; }
    static UtilitySpec tradeoff(double cost) {
        if (!(cost >= 0.0)) throw DomainError("tradeoff cost must be >= 0");
        return {UtilityKind::Tradeoff, cost, {}};
    }
    static UtilitySpec from_function(std::function<double(const Outcome&)> fn) {
        return {UtilityKind::Custom, 0.0, std::move(fn)};
    }

    double operator()(const Outcome& o) const {
        switch (kind) {
        case UtilityKind::UserWellbeing:
            return o.w();
        case UtilityKind::UserTrust:
            return o.t();
        case UtilityKind::Tradeoff:
            return o.w() + o.w_other() - (o.action == AvAction::Yield ? cost : 0.0);
        case UtilityKind::Custom:
            return custom(o);
        }
        return 0.0;
    }
};

inline std::string_view to_string(UtilityKind k) {
    switch (k) {
    case UtilityKind::UserWellbeing:
        return "wellbeing";
    case UtilityKind::UserTrust:
        return "trust";
    case UtilityKind::Tradeoff:
        return "tradeoff";
    case UtilityKind::Custom:
        return "custom";
    }
    return "custom";
}

// Observed values available before the AV acts at event k, keyed by model
// variable name: w_prev, t_prev, i_prev, wO_prev (previous slice), aO_prev,
// and i (the user's current intention).
using Evidence = Assignment;

inline constexpr std::array<std::string_view, 6> kChanceNodes{"w_prev", "t_prev", "i_prev", "wO_prev", "aO_prev", "i"};

inline bool is_chance_node(std::string_view name) {
    return std::find(kChanceNodes.begin(), kChanceNodes.end(), name) != kChanceNodes.end();
}

// Decision slice of the R-contributor network: a belief over the previous
// slice, the AV's action as decision, and a utility over slice-k outcomes.
class InfluenceDiagram {
public:
    InfluenceDiagram(DbnModel model, UtilitySpec utility)
        : InfluenceDiagram(model, std::move(utility), model.initial_belief()) {}

    InfluenceDiagram(DbnModel model, UtilitySpec utility, BeliefState previous)
        : model_(std::move(model)), utility_(std::move(utility)), previous_(std::move(previous)) {
        check_information_order();
    }

    const DbnModel& model() const { return model_; }
    const UtilitySpec& utility() const { return utility_; }
    const BeliefState& previous_belief() const { return previous_; }

    InfluenceDiagram with_utility(UtilitySpec u) const { return InfluenceDiagram(model_, std::move(u), previous_); }

    void check_evidence(const Evidence& ev) const {
        for (const auto& [name, value] : ev) {
            if (!is_chance_node(name)) {
                throw UsageError("evidence on '" + name + "' is not allowed; only pre-decision variables may be observed");
            }
            const int card = cardinality_of(name, model_.n_bins());
            if (value < 0 || value >= card) throw UsageError("evidence value out of range for '" + name + "'");
        }
    }

    // Previous-slice belief conditioned on the previous-slice evidence.
    BeliefState conditioned_previous(const Evidence& ev) const {
        BeliefState b = previous_;
        for (const auto& [name, value] : ev) {
            if (var::is_prev_latent(name)) {
                b = condition(b, name.substr(0, name.size() - 5), value);
            }
        }
        return b;
    }

    // P(w, t, i, wO | ev, action) as (user joint, other marginal).
    BeliefState outcome_distribution(AvAction action, const Evidence& ev) const {
        check_evidence(ev);
        EventInput e;
        e.contributor = Contributor::R;
        e.a_R = action;
        if (auto it = ev.find("aO_prev"); it != ev.end()) e.prev_a_O = static_cast<OtherAction>(it->second);
        if (auto it = ev.find("i"); it != ev.end()) e.observed_intention = static_cast<Intention>(it->second);
        return filter_step(conditioned_previous(ev), e, model_);
    }

private:
    // The current intention is observed before acting, so it must not
    // depend on the decision.
    void check_information_order() const {
        const auto& regime = model_.regime(Contributor::R);
        std::vector<std::string> stack{std::string(var::kIntention)};
        std::vector<std::string> seen;
        while (!stack.empty()) {
            const std::string n = stack.back();
            stack.pop_back();
            if (std::find(seen.begin(), seen.end(), n) != seen.end()) continue;
            seen.push_back(n);
            for (const auto& p : regime.cpd_for(n).parents()) {
                if (p.name == var::kAvAction) {
                    throw ModelError("intention depends on the AV action; it cannot be observed before deciding");
                }
                if (var::is_latent(p.name)) stack.push_back(p.name);
            }
        }
    }

    DbnModel model_;
    UtilitySpec utility_;
    BeliefState previous_;
};

namespace detail {

// E[U | ev, action] for evidence that fixes the previous other action, so the
// user and other chains are independent given the conditioned previous belief.
inline double expected_utility_given_inputs(const InfluenceDiagram& cim, AvAction action, const Evidence& ev) {
    const BeliefState out = cim.outcome_distribution(action, ev);
    const Factor& user = out.user_joint;  // scope i, t, w
    const auto& other = out.other_marginal.values();
    const int n = cim.model().n_bins();
    const int pi = user.position(var::kIntention);
    const int pt = user.position(var::kTrust);
    const int pw = user.position(var::kWellbeing);
    std::vector<int> states(user.scope().size(), 0);
    double eu = 0.0;
    for (std::size_t flat = 0; flat < user.size(); ++flat) {
        const double pu = user.values()[flat];
        if (pu != 0.0) {
            for (int wo = 0; wo < static_cast<int>(other.size()); ++wo) {
                const double p = pu * other[static_cast<std::size_t>(wo)];
                if (p == 0.0) continue;
                const Outcome o{states[static_cast<std::size_t>(pw)], states[static_cast<std::size_t>(pt)],
                                states[static_cast<std::size_t>(pi)], wo, action, n};
                eu += p * cim.utility()(o);
            }
        }
        user.advance(states);
    }
    return eu;
}

// Probability of the previous-slice part of `ev` under the previous belief.
inline double previous_evidence_mass(const InfluenceDiagram& cim, const Evidence& ev) {
    const BeliefState& prev = cim.previous_belief();
    double user = 0.0;
    const Factor& u = prev.user_joint;
    std::vector<int> states(u.scope().size(), 0);
    for (std::size_t flat = 0; flat < u.size(); ++flat) {
        bool keep = true;
        for (std::size_t k = 0; k < states.size(); ++k) {
            auto it = ev.find(var::prev_of(u.scope()[k].name));
            if (it != ev.end() && it->second != states[k]) keep = false;
        }
        if (keep) user += u.values()[flat];
        u.advance(states);
    }
    double other = 1.0;
    if (auto it = ev.find("wO_prev"); it != ev.end()) {
        other = prev.other_marginal.values()[static_cast<std::size_t>(it->second)];
    }
    return user * other;
}

} // namespace detail

// P(ev) under the decision slice. The previous other action is a fair coin
// shared by every slice-k CPD; the current intention does not depend on the
// action, so this is the same for both actions.
inline double evidence_probability(const InfluenceDiagram& cim, const Evidence& ev) {
    cim.check_evidence(ev);
    const double prev = detail::previous_evidence_mass(cim, ev);
    if (prev == 0.0) return 0.0;
    const auto it_a = ev.find("aO_prev");
    const auto it_i = ev.find("i");
    const double coin = it_a != ev.end() ? 0.5 : 1.0;
    if (it_i == ev.end()) return prev * coin;
    const BeliefState base = cim.conditioned_previous(ev);
    double likelihood = 0.0;
    for (int a = 0; a < 2; ++a) {
        if (it_a != ev.end() && it_a->second != a) continue;
        EventInput e;
        e.contributor = Contributor::R;
        e.a_R = AvAction::Yield;
        e.prev_a_O = static_cast<OtherAction>(a);
        e.observed_intention = static_cast<Intention>(it_i->second);
        try {
            likelihood += (it_a != ev.end() ? 1.0 : 0.5) * filter_step_detailed(base, e, cim.model()).evidence;
        } catch (const DegenerateEvidence&) {
        }
    }
    return prev * coin * likelihood;
}

// P(node = v | ev) for a pre-decision chance node.
inline std::vector<double> chance_distribution(const InfluenceDiagram& cim, std::string_view node, const Evidence& ev) {
    if (!is_chance_node(node)) throw UsageError("'" + std::string(node) + "' is not a chance node of the decision slice");
    cim.check_evidence(ev);
    const int card = cardinality_of(node, cim.model().n_bins());
    std::vector<double> p(static_cast<std::size_t>(card), 0.0);
    double total = 0.0;
    for (int v = 0; v < card; ++v) {
        Evidence e = ev;
        e[std::string(node)] = v;
        p[static_cast<std::size_t>(v)] = evidence_probability(cim, e);
        total += p[static_cast<std::size_t>(v)];
    }
    if (!(total > 0.0)) throw DegenerateEvidence("evidence has zero probability");
    for (auto& x : p) x /= total;
    return p;
}

// E[U | ev, action], summing over every joint slice-k outcome. An unobserved
// previous other action is averaged under its posterior given ev.
inline double expected_utility(const InfluenceDiagram& cim, AvAction action, const Evidence& ev) {
    cim.check_evidence(ev);
    if (ev.contains("aO_prev")) return detail::expected_utility_given_inputs(cim, action, ev);
    const auto w = chance_distribution(cim, "aO_prev", ev);
    double eu = 0.0;
    for (int a = 0; a < 2; ++a) {
        if (w[static_cast<std::size_t>(a)] == 0.0) continue;
        Evidence e = ev;
        e["aO_prev"] = a;
        eu += w[static_cast<std::size_t>(a)] * detail::expected_utility_given_inputs(cim, action, e);
    }
    return eu;
}

struct PolicyDecision {
    AvAction action = AvAction::Yield;
    double eu_yield = 0.0;
    double eu_unyield = 0.0;

    double best() const { return std::max(eu_yield, eu_unyield); }
};

// Relative gap below which two expected utilities count as tied. Sums over
// different outcome orders differ in the last few bits even when equal.
inline constexpr double kTieTolerance = 1e-12;

// Argmax over the two actions; ties go to yielding.
inline PolicyDecision optimal_policy(const InfluenceDiagram& cim, const Evidence& ev = {}) {
    PolicyDecision d;
    d.eu_yield = expected_utility(cim, AvAction::Yield, ev);
    d.eu_unyield = expected_utility(cim, AvAction::Unyield, ev);
    const double scale = std::max({1.0, std::abs(d.eu_yield), std::abs(d.eu_unyield)});
    d.action = d.eu_yield >= d.eu_unyield - kTieTolerance * scale ? AvAction::Yield : AvAction::Unyield;
    return d;
}

struct PolicyRow {
    int value = 0;
    std::optional<double> lower;  // bin range for binned variables
    std::optional<double> upper;
    PolicyDecision decision;
};

// Optimal action for each value of `ev_var`, on top of `base` evidence.
inline std::vector<PolicyRow> policy_table(const InfluenceDiagram& cim, std::string_view ev_var,
                                           const Evidence& base = {}) {
    if (!is_chance_node(ev_var)) throw UsageError("'" + std::string(ev_var) + "' is not a chance node");
    if (base.contains(ev_var)) throw UsageError("'" + std::string(ev_var) + "' is already in the evidence");
    const int n = cim.model().n_bins();
    const int card = cardinality_of(ev_var, n);
    const bool binned = card == n && ev_var != "i" && ev_var != "i_prev" && ev_var != "aO_prev";
    std::vector<PolicyRow> rows;
    for (int v = 0; v < card; ++v) {
        Evidence ev = base;
        ev[std::string(ev_var)] = v;
        PolicyRow row;
        row.value = v;
        if (binned) {
            row.lower = bin_lower(Bin{v, n});
            row.upper = bin_upper(Bin{v, n});
        }
        row.decision = optimal_policy(cim, ev);
        rows.push_back(row);
    }
    return rows;
}

// Expected gain in optimal expected utility from observing `node` first.
inline double value_of_information(const InfluenceDiagram& cim, std::string_view node, const Evidence& ev = {}) {
    if (ev.contains(node)) throw UsageError("value_of_information: '" + std::string(node) + "' is already observed");
    const auto p = chance_distribution(cim, node, ev);
    double informed = 0.0;
    for (std::size_t v = 0; v < p.size(); ++v) {
        if (p[v] == 0.0) continue;
        Evidence extended = ev;
        extended[std::string(node)] = static_cast<int>(v);
        informed += p[v] * optimal_policy(cim, extended).best();
    }
    return informed - optimal_policy(cim, ev).best();
}

struct SweepRow {
    double cost = 0.0;
    std::string evidence_var;  // "none" without an evidence variable
    std::optional<int> evidence_value;
    PolicyDecision decision;
};

// Tradeoff-utility policy for every cost in `cost_grid` and, when given, every
// value of `ev_var`. Rows are cost-major in grid order.
inline std::vector<SweepRow> cost_sensitivity_sweep(const InfluenceDiagram& cim, const std::vector<double>& cost_grid,
                                                    std::optional<std::string> ev_var = std::nullopt,
                                                    const Evidence& base = {}, int workers = 1) {
    if (cim.utility().kind != UtilityKind::Tradeoff) {
        throw UsageError("cost_sensitivity_sweep needs a tradeoff utility");
    }
    for (double c : cost_grid) {
        if (!(c >= 0.0)) throw DomainError("cost grid values must be >= 0");
    }
    if (ev_var && !is_chance_node(*ev_var)) throw UsageError("'" + *ev_var + "' is not a chance node");
    const int card = ev_var ? cardinality_of(*ev_var, cim.model().n_bins()) : 1;
    std::vector<SweepRow> rows(cost_grid.size() * static_cast<std::size_t>(card));
    parallel_for(rows.size(), workers, [&](std::size_t k) {
        const double cost = cost_grid[k / static_cast<std::size_t>(card)];
        const auto diagram = cim.with_utility(UtilitySpec::tradeoff(cost));
        SweepRow& row = rows[k];
        row.cost = cost;
        Evidence ev = base;
        if (ev_var) {
            row.evidence_var = *ev_var;
            row.evidence_value = static_cast<int>(k % static_cast<std::size_t>(card));
            ev[*ev_var] = *row.evidence_value;
        } else {
            row.evidence_var = "none";
        }
        row.decision = optimal_policy(diagram, ev);
    });
    return rows;
}

} // namespace wbdbn
