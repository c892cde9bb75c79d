#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wbdbn/data.hpp"
#include "wbdbn/model.hpp"

namespace wbdbn {

// Seeded 64-bit generator. Only the raw engine output is used (never the
// standard distributions, whose algorithms are implementation-defined), so
// a seed produces the same stream on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n), unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Index drawn from unnormalized non-negative weights.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        const double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            acc += weights[k];
            if (u < acc) return static_cast<int>(k);
        }
        // Round-off guard: last index with positive weight.
        for (std::size_t k = weights.size(); k-- > 0;) {
            if (weights[k] > 0.0) return static_cast<int>(k);
        }
        return 0;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t k = v.size(); k > 1; --k) {
            std::swap(v[k - 1], v[static_cast<std::size_t>(below(k))]);
        }
    }

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to derive independent sub-seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Questionnaire answers whose scores discretize to the given bins. Picks the
// admissible answer closest to each bin's midpoint.
inline QuestionnaireResponse responses_for_bins(int wellbeing_bin, int trust_bin, int n_bins) {
    QuestionnaireResponse r;
    const double w_target = bin_midpoint(Bin{wellbeing_bin, n_bins});
    int best_sum = -1;
    double best_gap = 2.0;
    for (int s = 0; s <= 42; ++s) {
        QuestionnaireResponse cand;
        for (int k = 0; k < 7; ++k) cand.q[static_cast<std::size_t>(k)] = 1 + s / 7 + (k < s % 7 ? 1 : 0);
        const double score = score_wellbeing(cand);
        if (discretize(score, n_bins).index != wellbeing_bin) continue;
        const double gap = std::abs(score - w_target);
        if (gap < best_gap) {
            best_gap = gap;
            best_sum = s;
        }
    }
    if (best_sum < 0) {
        throw ModelError("no questionnaire answer scores into well-being bin " + std::to_string(wellbeing_bin) +
                         " of " + std::to_string(n_bins));
    }
    for (int k = 0; k < 7; ++k) r.q[static_cast<std::size_t>(k)] = 1 + best_sum / 7 + (k < best_sum % 7 ? 1 : 0);

    const double t_target = bin_midpoint(Bin{trust_bin, n_bins});
    int best_v = -1;
    best_gap = 2.0;
    for (int v = 1; v <= 7; ++v) {
        const double score = likert_to_unit(v);
        if (discretize(score, n_bins).index != trust_bin) continue;
        if (std::abs(score - t_target) < best_gap) {
            best_gap = std::abs(score - t_target);
            best_v = v;
        }
    }
    if (best_v < 0) {
        throw ModelError("no Likert value scores into trust bin " + std::to_string(trust_bin) + " of " +
                         std::to_string(n_bins));
    }
    r.q[7] = best_v;
    return r;
}

struct SynthOptions {
    double p_av_yield = 0.5;     // P(a_R = R+)
    double p_other_yield = 0.5;  // P(a_O = O+)
    bool intention_on_all_events = false;
};

namespace detail {

// Slice-k latents in an order where every intra-slice parent comes first.
// Alignment parents pull intention ahead of their child.
inline std::vector<std::string> sampling_order(const TransitionRegime& regime) {
    std::vector<std::string> order;
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
        if (std::find(order.begin(), order.end(), n) != order.end()) return;
        for (const auto& p : regime.cpd_for(n).parents()) {
            if (var::is_latent(p.name)) visit(p.name);
            if (p.name == var::kAlignment) visit(std::string(var::kIntention));
        }
        order.push_back(n);
    };
    for (auto l : var::kLatents) visit(std::string(l));
    return order;
}

inline int sample_cpd(const CpdTable& cpd, const Assignment& a, Rng& rng) {
    std::vector<double> p(static_cast<std::size_t>(cpd.child().cardinality));
    for (int s = 0; s < cpd.child().cardinality; ++s) p[static_cast<std::size_t>(s)] = cpd.probability(s, a);
    return rng.categorical(p);
}

} // namespace detail

// Samples event logs from `model`. Each participant alternates O- and
// R-contributor events, two events per ride. Well-being and trust are
// reported through questionnaire answers that score into the sampled bins.
inline Dataset generate_synthetic(const DbnModel& model, int n_participants, int events_per_participant,
                                  std::uint64_t seed, const SynthOptions& options = {}) {
    if (n_participants < 1 || events_per_participant < 1) {
        throw UsageError("generate_synthetic: need at least one participant and one event");
    }
    const int n = model.n_bins();
    Rng rng(seed);
    Dataset ds;
    ds.n_bins = n;
    const std::size_t width = std::to_string(n_participants).size();
    const std::array<std::vector<std::string>, 2> orders{detail::sampling_order(model.regime(Contributor::R)),
                                                         detail::sampling_order(model.regime(Contributor::O))};

    for (int p = 0; p < n_participants; ++p) {
        std::string pid = std::to_string(p + 1);
        pid = "P" + std::string(width - pid.size(), '0') + pid;

        Assignment state;
        {
            const Factor& up = model.user_prior();
            std::vector<int> states(up.scope().size(), 0);
            int flat = rng.categorical(up.values());
            for (std::size_t k = up.scope().size(); k-- > 0;) {
                states[k] = flat % up.scope()[k].cardinality;
                flat /= up.scope()[k].cardinality;
            }
            for (std::size_t k = 0; k < states.size(); ++k) state[up.scope()[k].name] = states[k];
            state["wO"] = rng.categorical(model.other_prior().values());
        }

        std::vector<EventRecord> seq;
        std::optional<OtherAction> last_other;
        for (int e = 0; e < events_per_participant; ++e) {
            const Contributor c = e % 2 == 0 ? Contributor::O : Contributor::R;
            const auto& regime = model.regime(c);
            Assignment a;
            for (auto l : var::kLatents) a[var::prev_of(l)] = state.at(std::string(l));

            EventRecord r;
            r.participant_id = pid;
            r.ride_index = e / 2 + 1;
            r.event_index = e % 2 + 1;
            r.contributor = c;
            if (c == Contributor::O) {
                r.a_O = rng.bernoulli(options.p_other_yield) ? OtherAction::Yield : OtherAction::Unyield;
                a["aO"] = state_of(*r.a_O);
            } else {
                r.a_R = rng.bernoulli(options.p_av_yield) ? AvAction::Yield : AvAction::Unyield;
                a["aR"] = state_of(*r.a_R);
                a["aO_prev"] = last_other ? state_of(*last_other) : static_cast<int>(rng.below(2));
            }
            for (const auto& latent : orders[c == Contributor::R ? 0 : 1]) {
                if (c == Contributor::R && !a.contains("al") && a.contains("i")) {
                    a["al"] = state_of(alignment_of(static_cast<Intention>(a.at("i")), *r.a_R));
                }
                a[latent] = detail::sample_cpd(regime.cpd_for(latent), a, rng);
            }
            if (c == Contributor::R) {
                a["al"] = state_of(alignment_of(static_cast<Intention>(a.at("i")), *r.a_R));
                r.alignment = static_cast<Alignment>(a.at("al"));
            }
            if (c == Contributor::R || options.intention_on_all_events) {
                r.intention = static_cast<Intention>(a.at("i"));
            }
            r.responses = responses_for_bins(a.at("w"), a.at("t"), n);
            for (auto l : var::kLatents) state[std::string(l)] = a.at(std::string(l));
            last_other = c == Contributor::O ? r.a_O : std::nullopt;
            seq.push_back(std::move(r));
        }
        ds.sequences.push_back(std::move(seq));
    }
    return ds;
}

namespace detail {

// Child distribution that moves one bin up with probability `up`, one bin
// down with probability `down`, and otherwise stays. Moves past either end
// stay put.
inline std::vector<double> drift_column(int from, int n, double up, double down) {
    std::vector<double> col(static_cast<std::size_t>(n), 0.0);
    const int hi = std::min(from + 1, n - 1);
    const int lo = std::max(from - 1, 0);
    col[static_cast<std::size_t>(hi)] += up;
    col[static_cast<std::size_t>(lo)] += down;
    col[static_cast<std::size_t>(from)] += 1.0 - up - down;
    return col;
}

// Builds a CPD by evaluating `column(parent_states)` for every joint parent
// assignment (row-major over `parents`).
template <typename Fn>
CpdTable tabulate(const Variable& child, const std::vector<Variable>& parents, Fn column) {
    std::vector<std::vector<double>> cols;
    std::vector<int> states(parents.size(), 0);
    while (true) {
        cols.push_back(column(states));
        std::size_t k = parents.size();
        while (k > 0) {
            --k;
            if (++states[k] < parents[k].cardinality) break;
            states[k] = 0;
            if (k == 0) return CpdTable::from_columns(child, parents, cols);
        }
        if (parents.empty()) return CpdTable::from_columns(child, parents, cols);
    }
}

} // namespace detail

// Hand-built model over the default structure. Aligned AV actions raise
// well-being and misaligned ones lower it, yielding raises trust and the
// other's well-being, a yielding other raises the user's well-being, and higher
// previous trust or a yielding intention strengthen upward moves.
inline DbnModel reference_model(int n_bins = kDefaultBins) {
    const auto s = default_structure();
    const int n = n_bins;
    auto v = [&](std::string_view name) { return variable_of(name, n); };
    auto ps = [&](Contributor c, std::string_view child) { return resolve_parents(s.parents_for(c).at(std::string(child)), n); };
    const double top = n - 1;

    TransitionRegime r{Contributor::R, {}};
    // w <- {w_prev, t_prev, i, al, aO_prev}
    r.cpds.push_back(detail::tabulate(v("w"), ps(Contributor::R, "w"), [&](const std::vector<int>& st) {
        const double lift = 0.4 * st[1] / top + 0.3 * st[2] + 0.3 * st[4];  // in [0, 1]
        if (st[3] == 1) return detail::drift_column(st[0], n, 0.3 + 0.4 * lift, 0.0);
        return detail::drift_column(st[0], n, 0.0, 0.7 - 0.4 * lift);
    }));
    // t <- {t_prev, aR, al}
    r.cpds.push_back(detail::tabulate(v("t"), ps(Contributor::R, "t"), [&](const std::vector<int>& st) {
        const int score = st[1] + st[2];
        if (score == 2) return detail::drift_column(st[0], n, 0.6, 0.0);
        if (score == 0) return detail::drift_column(st[0], n, 0.0, 0.6);
        return st[1] == 1 ? detail::drift_column(st[0], n, 0.2, 0.0) : detail::drift_column(st[0], n, 0.1, 0.1);
    }));
    // i <- {i_prev}
    r.cpds.push_back(CpdTable::from_columns(v("i"), ps(Contributor::R, "i"), {{0.9, 0.1}, {0.1, 0.9}}));
    // wO <- {wO_prev, aR}
    r.cpds.push_back(detail::tabulate(v("wO"), ps(Contributor::R, "wO"), [&](const std::vector<int>& st) {
        return st[1] == 1 ? detail::drift_column(st[0], n, 0.5, 0.0) : detail::drift_column(st[0], n, 0.0, 0.5);
    }));

    TransitionRegime o{Contributor::O, {}};
    // w <- {w_prev, t_prev, aO}
    o.cpds.push_back(detail::tabulate(v("w"), ps(Contributor::O, "w"), [&](const std::vector<int>& st) {
        const double lift = 0.3 * st[1] / top;
        if (st[2] == 1) return detail::drift_column(st[0], n, 0.4 + lift, 0.0);
        return detail::drift_column(st[0], n, 0.0, 0.5 - lift);
    }));
    // t <- {t_prev}
    o.cpds.push_back(detail::tabulate(v("t"), ps(Contributor::O, "t"), [&](const std::vector<int>& st) {
        return detail::drift_column(st[0], n, 0.1, 0.1);
    }));
    o.cpds.push_back(CpdTable::from_columns(v("i"), ps(Contributor::O, "i"), {{0.9, 0.1}, {0.1, 0.9}}));
    // wO <- {wO_prev, aO}
    o.cpds.push_back(detail::tabulate(v("wO"), ps(Contributor::O, "wO"), [&](const std::vector<int>& st) {
        return st[1] == 1 ? detail::drift_column(st[0], n, 0.0, 0.1) : detail::drift_column(st[0], n, 0.1, 0.0);
    }));

    return DbnModel("reference", n, std::move(r), std::move(o), uniform_user_prior(n), uniform_other_prior(n));
}

} // namespace wbdbn
