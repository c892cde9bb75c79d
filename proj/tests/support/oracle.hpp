#pragma once

// Brute-force references. These enumerate joint assignments of the unrolled
// network directly from CPD table entries and never call the factor algebra
// (product, marginalize, normalize) used by the implementation.

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wbdbn/decision.hpp"
#include "wbdbn/model.hpp"

namespace wbdbn::testkit {

// Dense variable ids for fast lookups.
enum VarId : int { W, T, I, WO, W_PREV, T_PREV, I_PREV, WO_PREV, AR, AO, AL, AO_PREV, kVarCount };

inline int var_id(const std::string& name) {
    static const std::array<std::string, kVarCount> names{"w", "t", "i", "wO", "w_prev", "t_prev",
                                                          "i_prev", "wO_prev", "aR", "aO", "al", "aO_prev"};
    for (int k = 0; k < kVarCount; ++k) {
        if (names[static_cast<std::size_t>(k)] == name) return k;
    }
    throw std::runtime_error("unknown variable " + name);
}

using Values = std::array<int, kVarCount>;

// Table lookup through (variable id, stride) pairs.
struct FastCpd {
    std::vector<std::pair<int, std::size_t>> index;
    const std::vector<double>* values = nullptr;
    std::vector<int> parent_ids;

    explicit FastCpd(const CpdTable& c) : values(&c.table().values()) {
        for (std::size_t k = 0; k < c.table().scope().size(); ++k) {
            index.emplace_back(var_id(c.table().scope()[k].name), c.table().stride(k));
        }
        for (const auto& p : c.parents()) parent_ids.push_back(var_id(p.name));
    }
    double operator()(const Values& v) const {
        std::size_t flat = 0;
        for (const auto& [id, stride] : index) flat += static_cast<std::size_t>(v[static_cast<std::size_t>(id)]) * stride;
        return (*values)[flat];
    }
    bool uses(int id) const { return std::find(parent_ids.begin(), parent_ids.end(), id) != parent_ids.end(); }
};

struct OracleResult {
    std::vector<double> user;   // unnormalized P(w,t,i at slice K, all observations), index (w*n + t)*2 + i
    std::vector<double> other;  // unnormalized P(wO at slice K, all observations)
    double user_mass = 0.0;
    double other_mass = 0.0;

    double user_posterior(int w, int t, int i, int n) const {
        return user[static_cast<std::size_t>((w * n + t) * 2 + i)] / user_mass;
    }
    double other_posterior(int wo) const { return other[static_cast<std::size_t>(wo)] / other_mass; }
};

// Sums the unrolled joint over every trajectory of the user latents (and,
// separately, the other's well-being chain). Unobserved alignment is set by
// intention and the AV action; an unobserved previous other action takes
// each value with probability 1/2.
inline OracleResult enumerate_unrolled(const DbnModel& m, const std::vector<EventInput>& script) {
    const int n = m.n_bins();
    const std::size_t K = script.size();
    struct Slice {
        std::array<FastCpd, 3> user;  // w, t, i
        FastCpd other;
    };
    std::vector<Slice> slices;
    for (const auto& e : script) {
        const auto& r = m.regime(e.contributor);
        slices.push_back(Slice{{FastCpd(r.cpd_for("w")), FastCpd(r.cpd_for("t")), FastCpd(r.cpd_for("i"))},
                               FastCpd(r.cpd_for("wO"))});
    }
    OracleResult out;
    out.user.assign(static_cast<std::size_t>(n * n * 2), 0.0);
    out.other.assign(static_cast<std::size_t>(n), 0.0);

    auto set_inputs = [](Values& v, const EventInput& e) {
        v[AR] = e.a_R ? state_of(*e.a_R) : -1;
        v[AO] = e.a_O ? state_of(*e.a_O) : -1;
        v[AL] = e.alignment ? state_of(*e.alignment) : -1;
        v[AO_PREV] = e.prev_a_O ? state_of(*e.prev_a_O) : -1;
    };

    // Per-slice weights from CPD entries, indexed [previous state][next state]
    // with state (w*n + t)*2 + i. Observations zero out disallowed next states.
    const int S = n * n * 2;
    std::vector<std::vector<double>> kernels;
    for (std::size_t k = 0; k < K; ++k) {
        const auto& e = script[k];
        const auto& s = slices[k];
        std::vector<double> ker(static_cast<std::size_t>(S * S), 0.0);
        Values v{};
        set_inputs(v, e);
        const bool open_aop = v[AO_PREV] < 0;
        for (int wp = 0; wp < n; ++wp) {
            for (int tp = 0; tp < n; ++tp) {
                for (int ip = 0; ip < 2; ++ip) {
                    v[W_PREV] = wp;
                    v[T_PREV] = tp;
                    v[I_PREV] = ip;
                    const int from = (wp * n + tp) * 2 + ip;
                    for (int aop = 0; aop < (open_aop ? 2 : 1); ++aop) {
                        if (open_aop) v[AO_PREV] = aop;
                        const double w_aop = open_aop ? 0.5 : 1.0;
                        for (int i = 0; i < 2; ++i) {
                            if (e.observed_intention && state_of(*e.observed_intention) != i) continue;
                            v[I] = i;
                            if (!e.alignment) {
                                v[AL] = e.a_R ? state_of(alignment_of(static_cast<Intention>(i), *e.a_R)) : 0;
                            }
                            for (int w = 0; w < n; ++w) {
                                if (e.observed_wellbeing && *e.observed_wellbeing != w) continue;
                                v[W] = w;
                                for (int t = 0; t < n; ++t) {
                                    if (e.observed_trust && *e.observed_trust != t) continue;
                                    v[T] = t;
                                    const int to = (w * n + t) * 2 + i;
                                    ker[static_cast<std::size_t>(from * S + to)] +=
                                        w_aop * s.user[0](v) * s.user[1](v) * s.user[2](v);
                                }
                            }
                        }
                    }
                }
            }
        }
        kernels.push_back(std::move(ker));
    }

    // User chain: depth-first over every trajectory.
    std::function<void(std::size_t, int, double)> user_rec = [&](std::size_t k, int state, double weight) {
        if (weight == 0.0) return;
        if (k == K) {
            out.user[static_cast<std::size_t>(state)] += weight;
            return;
        }
        const double* row = kernels[k].data() + static_cast<std::size_t>(state * S);
        for (int next = 0; next < S; ++next) user_rec(k + 1, next, weight * row[next]);
    };
    const Factor& up = m.user_prior();
    for (int w = 0; w < n; ++w) {
        for (int t = 0; t < n; ++t) {
            for (int i = 0; i < 2; ++i) {
                user_rec(0, (w * n + t) * 2 + i, up.at({{"w", w}, {"t", t}, {"i", i}}));
            }
        }
    }

    std::function<void(std::size_t, int, double)> other_rec = [&](std::size_t k, int wop, double weight) {
        if (weight == 0.0) return;
        if (k == K) {
            out.other[static_cast<std::size_t>(wop)] += weight;
            return;
        }
        const auto& e = script[k];
        Values v{};
        set_inputs(v, e);
        v[WO_PREV] = wop;
        const bool open_aop = v[AO_PREV] < 0;
        for (int aop = 0; aop < (open_aop ? 2 : 1); ++aop) {
            if (open_aop) v[AO_PREV] = aop;
            for (int wo = 0; wo < n; ++wo) {
                if (e.observed_other && *e.observed_other != wo) continue;
                v[WO] = wo;
                other_rec(k + 1, wo, weight * (open_aop ? 0.5 : 1.0) * slices[k].other(v));
            }
        }
    };
    for (int wo = 0; wo < n; ++wo) other_rec(0, wo, m.other_prior().at({{"wO", wo}}));

    for (double x : out.user) out.user_mass += x;
    for (double x : out.other) out.other_mass += x;
    return out;
}

// E[U | ev, action] by enumerating every assignment of the decision slice:
// previous latents, unobserved previous other action, intention, derived
// alignment, and the slice-k outcomes.
inline double enumerate_expected_utility(const InfluenceDiagram& cim, AvAction action, const Evidence& ev) {
    const DbnModel& m = cim.model();
    const int n = m.n_bins();
    const auto& r = m.regime(Contributor::R);
    const FastCpd cw(r.cpd_for("w")), ct(r.cpd_for("t")), ci(r.cpd_for("i")), co(r.cpd_for("wO"));
    const Factor& prev_user = cim.previous_belief().user_joint;
    const Factor& prev_other = cim.previous_belief().other_marginal;
    auto fixed = [&](const char* name, int v) {
        auto it = ev.find(name);
        return it == ev.end() || it->second == v;
    };
    double num = 0.0;
    double den = 0.0;
    Values v{};
    v[AR] = state_of(action);
    for (int wp = 0; wp < n; ++wp) {
        for (int tp = 0; tp < n; ++tp) {
            for (int ip = 0; ip < 2; ++ip) {
                if (!fixed("w_prev", wp) || !fixed("t_prev", tp) || !fixed("i_prev", ip)) continue;
                const double p_prev = prev_user.at({{"w", wp}, {"t", tp}, {"i", ip}});
                for (int wop = 0; wop < n; ++wop) {
                    if (!fixed("wO_prev", wop)) continue;
                    const double p_oprev = prev_other.at({{"wO", wop}});
                    for (int aop = 0; aop < 2; ++aop) {
                        if (!fixed("aO_prev", aop)) continue;
                        const double p_aop = ev.contains("aO_prev") ? 1.0 : 0.5;
                        for (int i = 0; i < 2; ++i) {
                            if (!fixed("i", i)) continue;
                            v = Values{};
                            v[AR] = state_of(action);
                            v[W_PREV] = wp;
                            v[T_PREV] = tp;
                            v[I_PREV] = ip;
                            v[WO_PREV] = wop;
                            v[AO_PREV] = aop;
                            v[I] = i;
                            v[AL] = state_of(alignment_of(static_cast<Intention>(i), action));
                            for (int w = 0; w < n; ++w) {
                                v[W] = w;
                                for (int t = 0; t < n; ++t) {
                                    v[T] = t;
                                    for (int wo = 0; wo < n; ++wo) {
                                        v[WO] = wo;
                                        const double p = p_prev * p_oprev * p_aop * ci(v) * cw(v) * ct(v) * co(v);
                                        if (p == 0.0) continue;
                                        den += p;
                                        num += p * cim.utility()(Outcome{w, t, i, wo, action, n});
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    if (den == 0.0) throw DegenerateEvidence("oracle: zero-probability evidence");
    return num / den;
}

} // namespace wbdbn::testkit
