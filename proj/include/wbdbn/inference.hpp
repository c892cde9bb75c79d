#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbdbn/factor.hpp"
#include "wbdbn/model.hpp"

namespace wbdbn {

namespace detail {

inline const std::map<std::string, std::string, std::less<>>& to_prev_names() {
    static const std::map<std::string, std::string, std::less<>> names{
        {"w", "w_prev"}, {"t", "t_prev"}, {"i", "i_prev"}, {"wO", "wO_prev"}};
    return names;
}

// Fixes the observed event inputs in a CPD table.
inline Factor instantiate_inputs(const Factor& table, const EventInput& e) {
    Factor f = table;
    if (e.a_R) f = reduce(f, var::kAvAction, state_of(*e.a_R));
    if (e.a_O) f = reduce(f, var::kOtherAction, state_of(*e.a_O));
    if (e.alignment) f = reduce(f, var::kAlignment, state_of(*e.alignment));
    if (e.prev_a_O) f = reduce(f, var::kOtherActionPrev, state_of(*e.prev_a_O));
    return f;
}

// al as a deterministic function of (i, aR).
inline Factor alignment_factor(AvAction a_R) {
    const Variable i{std::string(var::kIntention), 2};
    const Variable al{std::string(var::kAlignment), 2};
    std::vector<double> vals(4, 0.0);
    for (int iv = 0; iv < 2; ++iv) {
        const int alv = state_of(alignment_of(static_cast<Intention>(iv), a_R));
        vals[static_cast<std::size_t>(iv * 2 + alv)] = 1.0;
    }
    return Factor({i, al}, std::move(vals));
}

// Unobserved inputs left in scope: alignment is derived from intention and
// the AV action; other inputs get a uniform weight.
inline Factor close_open_inputs(Factor f, const EventInput& e) {
    if (f.contains(var::kAlignment)) {
        if (!e.a_R) throw UsageError("alignment is unobserved and cannot be derived without a_R");
        f = factor_product(f, alignment_factor(*e.a_R));
        f = marginalize(f, var::kAlignment);
    }
    for (auto input : {var::kOtherActionPrev, var::kAvAction, var::kOtherAction}) {
        if (f.contains(input)) {
            f = factor_product(f, Factor::uniform(f.variable(input)));
            f = marginalize(f, input);
        }
    }
    return f;
}

// P(x^E_k | evidence_{1:k-1}, inputs_k) before any slice-k observation.
inline Factor propagate_user(const Factor& user_belief, const EventInput& e, const DbnModel& m) {
    const auto& regime = m.regime(e.contributor);
    Factor joint = rename(user_belief, to_prev_names());
    for (auto latent : var::kUserLatents) {
        joint = factor_product(joint, instantiate_inputs(regime.cpd_for(latent).table(), e));
    }
    joint = close_open_inputs(std::move(joint), e);
    static const std::vector<std::string> keep{"i", "t", "w"};
    return marginalize_to(std::move(joint), keep);
}

inline Factor propagate_other(const Factor& other_belief, const EventInput& e, const DbnModel& m) {
    const auto& regime = m.regime(e.contributor);
    Factor joint = rename(other_belief, to_prev_names());
    joint = factor_product(joint, instantiate_inputs(regime.cpd_for(var::kOtherWellbeing).table(), e));
    joint = close_open_inputs(std::move(joint), e);
    static const std::vector<std::string> keep{"wO"};
    return marginalize_to(std::move(joint), keep);
}

inline Factor observe(Factor f, std::string_view name, std::optional<int> state) {
    if (!state) return f;
    return factor_product(f, Factor::indicator(f.variable(name), *state));
}

} // namespace detail

// Filtered belief together with P(observations_k | evidence_{1:k-1}).
struct StepResult {
    BeliefState belief;
    double evidence = 1.0;
};

// One step of exact Bayesian filtering. Throws DegenerateEvidence when the
// observations have zero probability under the propagated belief.
inline StepResult filter_step_detailed(const BeliefState& belief, const EventInput& event, const DbnModel& model) {
    check_event(event);
    Factor user = detail::propagate_user(belief.user_joint, event, model);
    std::optional<int> i_obs;
    if (event.observed_intention) i_obs = state_of(*event.observed_intention);
    user = detail::observe(std::move(user), var::kWellbeing, event.observed_wellbeing);
    user = detail::observe(std::move(user), var::kTrust, event.observed_trust);
    user = detail::observe(std::move(user), var::kIntention, i_obs);

    Factor other = detail::propagate_other(belief.other_marginal, event, model);
    other = detail::observe(std::move(other), var::kOtherWellbeing, event.observed_other);

    const double user_mass = user.sum();
    const double other_mass = other.sum();
    if (!(user_mass > 0.0) || !(other_mass > 0.0)) {
        throw DegenerateEvidence("filter_step: observations at event " + std::to_string(belief.event_index + 1) +
                                 " have zero probability");
    }
    return StepResult{BeliefState{normalize(user), normalize(other), belief.event_index + 1},
                      user_mass * other_mass};
}

inline BeliefState filter_step(const BeliefState& belief, const EventInput& event, const DbnModel& model) {
    return filter_step_detailed(belief, event, model).belief;
}

// One-step prediction: propagation through the regime without observations.
inline BeliefState predict(const BeliefState& belief, const EventInput& planned, const DbnModel& model) {
    return filter_step(belief, planned.without_observations(), model);
}

// Conditions the slice-k belief on an observed value without propagating.
inline BeliefState condition(const BeliefState& belief, std::string_view name, int state) {
    BeliefState out = belief;
    if (belief.user_joint.contains(name)) {
        out.user_joint = normalize(detail::observe(belief.user_joint, name, state));
    } else if (belief.other_marginal.contains(name)) {
        out.other_marginal = normalize(detail::observe(belief.other_marginal, name, state));
    } else {
        throw UsageError("belief has no variable '" + std::string(name) + "'");
    }
    return out;
}

inline std::vector<double> marginal_of(const BeliefState& belief, std::string_view name) {
    const Factor& src = belief.user_joint.contains(name) ? belief.user_joint : belief.other_marginal;
    const std::vector<std::string> keep{std::string(name)};
    return marginalize_to(src, keep).values();
}

// Bin-midpoint expectation of a binned latent.
inline double expected_value(const BeliefState& belief, std::string_view name) {
    const auto p = marginal_of(belief, name);
    const int n = static_cast<int>(p.size());
    double e = 0.0;
    for (int b = 0; b < n; ++b) e += p[static_cast<std::size_t>(b)] * bin_midpoint(Bin{b, n});
    return e;
}

// Most probable state; ties go to the lowest index.
inline int map_state(const std::vector<double>& p) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(p.size()); ++k) {
        if (p[static_cast<std::size_t>(k)] > p[static_cast<std::size_t>(best)]) best = k;
    }
    return best;
}

struct TrajectoryPoint {
    int event_index = 0;
    double expected_wellbeing = 0.0;
    double expected_trust = 0.0;
    double intention_yield = 0.0;  // P(I+)
    double expected_other_wellbeing = 0.0;
};

inline TrajectoryPoint summarize(const BeliefState& b) {
    return TrajectoryPoint{b.event_index, expected_value(b, var::kWellbeing), expected_value(b, var::kTrust),
                           marginal_of(b, var::kIntention)[1], expected_value(b, var::kOtherWellbeing)};
}

// Filters through `script` and records the expected states after each event.
inline std::vector<TrajectoryPoint> forward_simulate(const BeliefState& init, std::span<const EventInput> script,
                                                     const DbnModel& model) {
    if (script.empty()) throw UsageError("forward_simulate: script is empty");
    std::vector<TrajectoryPoint> out;
    out.reserve(script.size());
    BeliefState b = init;
    for (const auto& e : script) {
        b = filter_step(b, e, model);
        out.push_back(summarize(b));
    }
    return out;
}

// Log marginal likelihood of one event sequence, starting from the model prior.
struct SequenceScore {
    double log_likelihood = 0.0;
    std::optional<std::size_t> zero_probability_at;  // event position, when -inf
};

inline SequenceScore score_sequence(const DbnModel& model, std::span<const EventInput> events) {
    SequenceScore s;
    BeliefState b = model.initial_belief();
    for (std::size_t k = 0; k < events.size(); ++k) {
        try {
            auto step = filter_step_detailed(b, events[k], model);
            s.log_likelihood += std::log(step.evidence);
            b = std::move(step.belief);
        } catch (const DegenerateEvidence&) {
            s.log_likelihood = -std::numeric_limits<double>::infinity();
            s.zero_probability_at = k;
            return s;
        }
    }
    return s;
}

} // namespace wbdbn
