#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wbdbn/data.hpp"
#include "wbdbn/inference.hpp"
#include "wbdbn/model.hpp"
#include "wbdbn/parallel.hpp"
#include "wbdbn/synthetic.hpp"

namespace wbdbn {

struct EstimateOptions {
    double alpha = 1.0;
    // wO is never observed. When set, its CPDs are counted from the user's own
    // well-being transitions with the acting agents swapped: the AV's action
    // affects the other the way the other's action affects the user.
    bool mirror_other_wellbeing = true;
};

namespace detail {

// Observed values of every model variable for record k of a sequence.
inline Assignment observed_assignment(const std::vector<EventRecord>& seq, std::size_t k, int n_bins) {
    Assignment a;
    auto fill_latents = [&](const EventRecord& r, const std::string& suffix) {
        a["w" + suffix] = discretize(score_wellbeing(r.responses), n_bins).index;
        a["t" + suffix] = discretize(score_trust(r.responses), n_bins).index;
        if (r.intention) a["i" + suffix] = state_of(*r.intention);
    };
    const auto& r = seq[k];
    fill_latents(r, "");
    if (k > 0) {
        fill_latents(seq[k - 1], "_prev");
        if (seq[k - 1].contributor == Contributor::O && seq[k - 1].a_O) a["aO_prev"] = state_of(*seq[k - 1].a_O);
    }
    if (r.a_R) a["aR"] = state_of(*r.a_R);
    if (r.a_O) a["aO"] = state_of(*r.a_O);
    if (r.alignment) {
        a["al"] = state_of(*r.alignment);
    } else if (r.a_R && r.intention) {
        a["al"] = state_of(alignment_of(*r.intention, *r.a_R));
    }
    return a;
}

// Row-major offset of `a` in `f`, or nullopt if some scope variable is unobserved.
inline std::optional<std::size_t> flat_index(const Factor& f, const Assignment& a) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < f.scope().size(); ++k) {
        auto it = a.find(f.scope()[k].name);
        if (it == a.end()) return std::nullopt;
        flat += static_cast<std::size_t>(it->second) * f.stride(k);
    }
    return flat;
}

struct FamilyCounts {
    Factor shape;  // scope of the CPD table
    std::vector<double> counts;
};

} // namespace detail

// Dirichlet-smoothed tabular estimate of every CPD:
// P(x | pa) = (N(x, pa) + alpha) / (N(pa) + alpha * |x|). Only records where
// the child and all its parents are observed contribute counts; the priors
// over slice 0 stay uniform.
inline DbnModel estimate_cpds(const Dataset& data, const StructureCandidate& structure,
                              const EstimateOptions& options = {}) {
    if (!(options.alpha > 0.0)) throw DomainError("estimate_cpds: alpha must be positive");
    validate_structure(structure);
    const int n = data.n_bins;

    std::array<std::map<std::string, detail::FamilyCounts, std::less<>>, 2> families;
    for (Contributor c : {Contributor::R, Contributor::O}) {
        auto& fam = families[c == Contributor::R ? 0 : 1];
        for (const auto& [child, ps] : structure.parents_for(c)) {
            std::vector<Variable> scope = resolve_parents(ps, n);
            scope.push_back(variable_of(child, n));
            Factor shape = Factor::filled(std::move(scope), 0.0);
            const std::size_t size = shape.size();
            fam.emplace(child, detail::FamilyCounts{std::move(shape), std::vector<double>(size, 0.0)});
        }
    }

    for (const auto& seq : data.sequences) {
        for (std::size_t k = 0; k < seq.size(); ++k) {
            const Contributor c = seq[k].contributor;
            const Assignment a = detail::observed_assignment(seq, k, n);
            for (auto& [child, fc] : families[c == Contributor::R ? 0 : 1]) {
                if (auto idx = detail::flat_index(fc.shape, a)) fc.counts[*idx] += 1.0;
            }
            if (!options.mirror_other_wellbeing) continue;
            Assignment m;
            if (auto it = a.find("w"); it != a.end()) m["wO"] = it->second;
            if (auto it = a.find("w_prev"); it != a.end()) m["wO_prev"] = it->second;
            if (c == Contributor::O && a.contains("aO")) m["aR"] = a.at("aO");
            if (c == Contributor::R && a.contains("aR")) m["aO"] = a.at("aR");
            auto& target = families[c == Contributor::R ? 1 : 0].at("wO");
            if (auto idx = detail::flat_index(target.shape, m)) target.counts[*idx] += 1.0;
        }
    }

    auto build = [&](Contributor c) {
        TransitionRegime regime{c, {}};
        for (auto& [child, fc] : families[c == Contributor::R ? 0 : 1]) {
            const Variable cv = variable_of(child, n);
            const std::size_t k = static_cast<std::size_t>(cv.cardinality);
            const std::size_t child_stride = fc.shape.stride(static_cast<std::size_t>(fc.shape.position(child)));
            // Column totals: sum over the child's states for each parent assignment.
            std::vector<double> probs(fc.counts.size());
            for (std::size_t flat = 0; flat < fc.counts.size(); ++flat) {
                const std::size_t child_state = (flat / child_stride) % k;
                const std::size_t base = flat - child_state * child_stride;
                double total = 0.0;
                for (std::size_t s = 0; s < k; ++s) total += fc.counts[base + s * child_stride];
                probs[flat] = (fc.counts[flat] + options.alpha) / (total + options.alpha * static_cast<double>(k));
            }
            regime.cpds.emplace_back(cv, resolve_parents(structure.parents_for(c).at(child), n),
                                     Factor(fc.shape.scope(), std::move(probs)));
        }
        return regime;
    };
    return DbnModel(structure.structure_id, n, build(Contributor::R), build(Contributor::O), uniform_user_prior(n),
                    uniform_other_prior(n));
}

// Log-likelihood of every observed well-being, trust, and intention value.
struct LogLikelihoodReport {
    double total = 0.0;
    std::vector<double> per_sequence;
    // (sequence, event position) pairs where the data had zero probability.
    std::vector<std::pair<std::size_t, std::size_t>> zero_probability;
};

namespace detail {

// Sum that does not depend on the order of the terms.
inline double order_free_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

} // namespace detail

inline LogLikelihoodReport log_likelihood(const DbnModel& model, const Dataset& data) {
    if (data.n_bins != model.n_bins()) throw UsageError("log_likelihood: dataset and model bin counts differ");
    LogLikelihoodReport rep;
    for (std::size_t s = 0; s < data.sequences.size(); ++s) {
        const auto inputs = to_event_inputs(data.sequences[s], data.n_bins);
        const auto score = score_sequence(model, inputs);
        rep.per_sequence.push_back(score.log_likelihood);
        if (score.zero_probability_at) rep.zero_probability.emplace_back(s, *score.zero_probability_at);
    }
    rep.total = detail::order_free_sum(rep.per_sequence);
    return rep;
}

// Sequence indices of fold `f` when sequences are dealt round-robin in `order`.
inline std::vector<std::size_t> fold_members(const std::vector<std::size_t>& order, int folds, int f) {
    std::vector<std::size_t> out;
    for (std::size_t p = static_cast<std::size_t>(f); p < order.size(); p += static_cast<std::size_t>(folds)) {
        out.push_back(order[p]);
    }
    return out;
}

inline Dataset subset(const Dataset& data, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.n_bins = data.n_bins;
    for (auto k : idx) out.sequences.push_back(data.sequences[k]);
    return out;
}

inline Dataset complement(const Dataset& data, const std::vector<std::size_t>& held_out) {
    std::vector<bool> skip(data.sequences.size(), false);
    for (auto k : held_out) skip[k] = true;
    Dataset out;
    out.n_bins = data.n_bins;
    for (std::size_t k = 0; k < data.sequences.size(); ++k) {
        if (!skip[k]) out.sequences.push_back(data.sequences[k]);
    }
    return out;
}

struct SelectionResult {
    std::size_t winner = 0;
    std::vector<double> mean_heldout_loglik;  // per candidate
};

// K-fold model selection by mean held-out log-likelihood. Sequence j lands in
// fold j mod K; ties go to the earlier candidate.
inline SelectionResult select_structure(const std::vector<StructureCandidate>& candidates, const Dataset& data,
                                        int folds, const EstimateOptions& options = {}, int workers = 1) {
    if (candidates.empty()) throw UsageError("select_structure: no candidates");
    if (folds < 2) throw UsageError("select_structure: folds must be >= 2");
    if (data.sequences.size() < static_cast<std::size_t>(folds)) {
        throw UsageError("select_structure: fewer sequences than folds");
    }
    std::vector<std::size_t> order(data.sequences.size());
    std::iota(order.begin(), order.end(), 0);

    const std::size_t units = candidates.size() * static_cast<std::size_t>(folds);
    std::vector<double> scores(units, 0.0);
    parallel_for(units, workers, [&](std::size_t u) {
        const std::size_t c = u / static_cast<std::size_t>(folds);
        const int f = static_cast<int>(u % static_cast<std::size_t>(folds));
        const auto held = fold_members(order, folds, f);
        const auto model = estimate_cpds(complement(data, held), candidates[c], options);
        scores[u] = log_likelihood(model, subset(data, held)).total;
    });

    SelectionResult out;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double sum = 0.0;
        for (int f = 0; f < folds; ++f) sum += scores[c * static_cast<std::size_t>(folds) + static_cast<std::size_t>(f)];
        out.mean_heldout_loglik.push_back(sum / folds);
        if (out.mean_heldout_loglik[c] > out.mean_heldout_loglik[out.winner]) out.winner = c;
    }
    return out;
}

// Correct/total tallies for the three inferred user variables.
struct AccuracyTally {
    std::array<std::size_t, 3> correct{0, 0, 0};  // w, t, i
    std::array<std::size_t, 3> total{0, 0, 0};
};

// Runs the filter through each sequence and, at every event, infers each
// target from the other observations at that event (plus the full history).
// Predictions are MAP states with ties to the lowest index; well-being and
// trust are scored by exact bin match.
inline AccuracyTally score_accuracy(const DbnModel& model, const Dataset& data) {
    AccuracyTally tally;
    for (const auto& seq : data.sequences) {
        const auto inputs = to_event_inputs(seq, data.n_bins);
        BeliefState belief = model.initial_belief();
        for (const auto& e : inputs) {
            const BeliefState prior = predict(belief, e, model);
            const std::array<std::optional<int>, 3> labels{
                e.observed_wellbeing, e.observed_trust,
                e.observed_intention ? std::optional<int>(state_of(*e.observed_intention)) : std::nullopt};
            const std::array<std::string_view, 3> names{var::kWellbeing, var::kTrust, var::kIntention};
            for (std::size_t target = 0; target < 3; ++target) {
                if (!labels[target]) continue;
                BeliefState b = prior;
                for (std::size_t other = 0; other < 3; ++other) {
                    if (other != target && labels[other]) b = condition(b, names[other], *labels[other]);
                }
                const int guess = map_state(marginal_of(b, names[target]));
                tally.total[target] += 1;
                if (guess == *labels[target]) tally.correct[target] += 1;
            }
            belief = filter_step(belief, e, model);
        }
    }
    return tally;
}

struct AccuracyReport {
    // Mean over folds and iterations; NaN when a target never had labels.
    std::array<double, 3> per_target_accuracy{0.0, 0.0, 0.0};
    std::vector<double> per_fold_loglik;  // iteration-major
    std::vector<AccuracyTally> per_fold_tally;
};

// Repeated K-fold cross-validation of inference accuracy. Each iteration deals
// a seeded shuffle of the sequences into folds; results are independent of
// `workers`.
inline AccuracyReport evaluate_accuracy(const Dataset& data, const StructureCandidate& structure, int folds,
                                        int iterations, std::uint64_t seed, const EstimateOptions& options = {},
                                        int workers = 1) {
    if (folds < 2) throw UsageError("evaluate_accuracy: folds must be >= 2");
    if (iterations < 1) throw UsageError("evaluate_accuracy: iterations must be >= 1");
    if (data.sequences.size() < static_cast<std::size_t>(folds)) {
        throw UsageError("evaluate_accuracy: fewer sequences than folds");
    }
    std::vector<std::vector<std::size_t>> orders(static_cast<std::size_t>(iterations));
    for (int it = 0; it < iterations; ++it) {
        auto& order = orders[static_cast<std::size_t>(it)];
        order.resize(data.sequences.size());
        std::iota(order.begin(), order.end(), 0);
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(it)));
        rng.shuffle(order);
    }
    const std::size_t units = static_cast<std::size_t>(iterations) * static_cast<std::size_t>(folds);
    AccuracyReport rep;
    rep.per_fold_loglik.assign(units, 0.0);
    rep.per_fold_tally.assign(units, AccuracyTally{});
    parallel_for(units, workers, [&](std::size_t u) {
        const auto& order = orders[u / static_cast<std::size_t>(folds)];
        const int f = static_cast<int>(u % static_cast<std::size_t>(folds));
        const auto held = fold_members(order, folds, f);
        const auto model = estimate_cpds(complement(data, held), structure, options);
        const auto test = subset(data, held);
        rep.per_fold_loglik[u] = log_likelihood(model, test).total;
        rep.per_fold_tally[u] = score_accuracy(model, test);
    });
    for (std::size_t target = 0; target < 3; ++target) {
        double sum = 0.0;
        std::size_t used = 0;
        for (const auto& t : rep.per_fold_tally) {
            if (t.total[target] == 0) continue;
            sum += static_cast<double>(t.correct[target]) / static_cast<double>(t.total[target]);
            ++used;
        }
        rep.per_target_accuracy[target] = used ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

} // namespace wbdbn
