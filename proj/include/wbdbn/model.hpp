#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "wbdbn/cpd.hpp"
#include "wbdbn/error.hpp"
#include "wbdbn/factor.hpp"
#include "wbdbn/variable.hpp"

namespace wbdbn {

// Variable names used throughout the model. Slice-k latents, their slice-(k-1)
// copies, and the exogenous event inputs.
namespace var {
inline constexpr std::string_view kWellbeing = "w";
inline constexpr std::string_view kTrust = "t";
inline constexpr std::string_view kIntention = "i";
inline constexpr std::string_view kOtherWellbeing = "wO";
inline constexpr std::string_view kWellbeingPrev = "w_prev";
inline constexpr std::string_view kTrustPrev = "t_prev";
inline constexpr std::string_view kIntentionPrev = "i_prev";
inline constexpr std::string_view kOtherWellbeingPrev = "wO_prev";
inline constexpr std::string_view kAvAction = "aR";
inline constexpr std::string_view kOtherAction = "aO";
inline constexpr std::string_view kAlignment = "al";
inline constexpr std::string_view kOtherActionPrev = "aO_prev";

inline constexpr std::array<std::string_view, 3> kUserLatents{kWellbeing, kTrust, kIntention};
inline constexpr std::array<std::string_view, 4> kLatents{kWellbeing, kTrust, kIntention, kOtherWellbeing};
inline constexpr std::array<std::string_view, 4> kInputs{kAvAction, kOtherAction, kAlignment, kOtherActionPrev};

inline std::string prev_of(std::string_view latent) { return std::string(latent) + "_prev"; }

inline bool is_latent(std::string_view n) {
    return std::find(kLatents.begin(), kLatents.end(), n) != kLatents.end();
}
inline bool is_user_latent(std::string_view n) {
    return std::find(kUserLatents.begin(), kUserLatents.end(), n) != kUserLatents.end();
}
inline bool is_prev_latent(std::string_view n) {
    return n == kWellbeingPrev || n == kTrustPrev || n == kIntentionPrev || n == kOtherWellbeingPrev;
}
inline bool is_input(std::string_view n) {
    return std::find(kInputs.begin(), kInputs.end(), n) != kInputs.end();
}
} // namespace var

// Binary domain values. State index 1 is the positive (prosocial) level.
enum class AvAction : int { Unyield = 0, Yield = 1 };       // R-, R+
enum class OtherAction : int { Unyield = 0, Yield = 1 };    // O-, O+
enum class Alignment : int { Misaligned = 0, Aligned = 1 }; // Al0, Al1
enum class Intention : int { NotYield = 0, Yield = 1 };     // I-, I+

enum class Contributor { R, O };

inline std::string_view to_token(AvAction a) { return a == AvAction::Yield ? "R_PLUS" : "R_MINUS"; }
inline std::string_view to_token(OtherAction a) { return a == OtherAction::Yield ? "O_PLUS" : "O_MINUS"; }
inline std::string_view to_token(Alignment a) { return a == Alignment::Aligned ? "AL1" : "AL0"; }
inline std::string_view to_token(Intention i) { return i == Intention::Yield ? "I_PLUS" : "I_MINUS"; }
inline std::string_view to_token(Contributor c) { return c == Contributor::R ? "R" : "O"; }

// Alignment holds when the AV does what the user intended.
inline Alignment alignment_of(Intention i, AvAction a) {
    const bool aligned = (i == Intention::Yield) == (a == AvAction::Yield);
    return aligned ? Alignment::Aligned : Alignment::Misaligned;
}

template <typename E>
constexpr int state_of(E e) {
    return static_cast<int>(e);
}

// Declared variables for a given bin count.
inline std::vector<Variable> declare_variables(int n_bins) {
    if (n_bins < 2) throw ModelError("n_bins must be >= 2");
    std::vector<Variable> out;
    for (auto n : {var::kWellbeing, var::kTrust, var::kOtherWellbeing, var::kWellbeingPrev, var::kTrustPrev,
                   var::kOtherWellbeingPrev}) {
        out.push_back(Variable{std::string(n), n_bins});
    }
    for (auto n : {var::kIntention, var::kIntentionPrev, var::kAvAction, var::kOtherAction, var::kAlignment,
                   var::kOtherActionPrev}) {
        out.push_back(Variable{std::string(n), 2});
    }
    return out;
}

inline int cardinality_of(std::string_view name, int n_bins) {
    if (name == var::kIntention || name == var::kIntentionPrev || var::is_input(name)) return 2;
    if (var::is_latent(name) || var::is_prev_latent(name)) return n_bins;
    throw ModelError("undeclared variable '" + std::string(name) + "'");
}

inline Variable variable_of(std::string_view name, int n_bins) {
    return Variable{std::string(name), cardinality_of(name, n_bins)};
}

// One interaction event as seen by the filter: which agent acted, the
// observed actions, and any directly observed latent values.
struct EventInput {
    Contributor contributor = Contributor::R;
    std::optional<AvAction> a_R;
    std::optional<OtherAction> a_O;
    std::optional<Alignment> alignment;
    std::optional<OtherAction> prev_a_O;  // other's action at event k-1
    std::optional<Intention> observed_intention;
    std::optional<int> observed_wellbeing;  // bin index
    std::optional<int> observed_trust;      // bin index
    std::optional<int> observed_other;      // bin index

    // Same inputs with every latent observation dropped.
    EventInput without_observations() const {
        EventInput e = *this;
        e.observed_intention.reset();
        e.observed_wellbeing.reset();
        e.observed_trust.reset();
        e.observed_other.reset();
        return e;
    }
};

inline void check_event(const EventInput& e) {
    if (e.contributor == Contributor::R) {
        if (!e.a_R) throw UsageError("R-contributor event needs a_R");
        if (e.a_O) throw UsageError("R-contributor event must not carry a_O");
    } else {
        if (!e.a_O) throw UsageError("O-contributor event needs a_O");
        if (e.a_R) throw UsageError("O-contributor event must not carry a_R");
        if (e.alignment) throw UsageError("alignment is only defined for R-contributor events");
    }
}

// Edge sets for both regimes: child latent -> ordered parent names.
struct StructureCandidate {
    std::string structure_id;
    std::map<std::string, std::vector<std::string>, std::less<>> r_parents;
    std::map<std::string, std::vector<std::string>, std::less<>> o_parents;

    const std::map<std::string, std::vector<std::string>, std::less<>>& parents_for(Contributor c) const {
        return c == Contributor::R ? r_parents : o_parents;
    }
};

namespace detail {

inline bool allowed_input(Contributor regime, std::string_view name) {
    if (regime == Contributor::R) {
        return name == var::kAvAction || name == var::kAlignment || name == var::kOtherActionPrev;
    }
    return name == var::kOtherAction;
}

// Throws ModelError unless the parent sets form a legal two-slice template.
inline void check_parent_sets(Contributor regime,
                              const std::map<std::string, std::vector<std::string>, std::less<>>& parents) {
    const std::string tag = regime == Contributor::R ? "R regime" : "O regime";
    for (auto latent : var::kLatents) {
        if (!parents.contains(latent)) {
            throw ModelError(tag + ": no CPD for latent '" + std::string(latent) + "'");
        }
    }
    for (const auto& [child, ps] : parents) {
        if (!var::is_latent(child)) {
            throw ModelError(tag + ": '" + child + "' is not a latent variable");
        }
        std::set<std::string> seen;
        for (const auto& p : ps) {
            if (!seen.insert(p).second) throw ModelError(tag + ": duplicate parent '" + p + "' of " + child);
            const bool known = var::is_latent(p) || var::is_prev_latent(p) || var::is_input(p);
            if (!known) throw ModelError(tag + ": undeclared variable '" + p + "'");
            if (p == child) throw ModelError(tag + ": '" + child + "' cannot be its own parent");
            if (var::is_input(p) && !allowed_input(regime, p)) {
                throw ModelError(tag + ": input '" + p + "' is not available in this regime");
            }
            const bool other_side = p == var::kOtherWellbeing || p == var::kOtherWellbeingPrev;
            if (var::is_user_latent(child) && other_side) {
                throw ModelError(tag + ": user latent '" + child + "' cannot depend on '" + p + "'");
            }
            if (child == var::kOtherWellbeing) {
                const bool ok = p == var::kOtherWellbeingPrev ||
                                (var::is_input(p) && p != var::kAlignment);
                if (!ok) throw ModelError(tag + ": other's well-being cannot depend on '" + p + "'");
            }
            if (child == var::kIntention && p == var::kAlignment) {
                throw ModelError(tag + ": intention cannot depend on alignment (alignment is derived from it)");
            }
        }
    }
    // Intra-slice acyclicity, including the implicit i -> al edge used when
    // alignment is unobserved in the R regime.
    std::map<std::string, std::set<std::string>, std::less<>> edges;
    for (const auto& [child, ps] : parents) {
        for (const auto& p : ps) {
            if (var::is_latent(p)) edges[child].insert(p);
            if (regime == Contributor::R && p == var::kAlignment) edges[child].insert(std::string(var::kIntention));
        }
    }
    std::map<std::string, int, std::less<>> mark;
    std::function<void(const std::string&)> visit = [&](const std::string& n) {
        int& m = mark[n];
        if (m == 2) return;
        if (m == 1) throw ModelError(tag + ": intra-slice cycle through '" + n + "'");
        m = 1;
        for (const auto& p : edges[n]) visit(p);
        mark[n] = 2;
    };
    for (auto latent : var::kLatents) visit(std::string(latent));
}

} // namespace detail

inline void validate_structure(const StructureCandidate& s) {
    detail::check_parent_sets(Contributor::R, s.r_parents);
    detail::check_parent_sets(Contributor::O, s.o_parents);
}

// Default edge set: self-persistence for every latent, t_{k-1} -> w_k, i -> w,
// al -> {w, t}, aR -> t, other's action -> w, and the AV/other action driving
// the other's well-being.
inline StructureCandidate default_structure() {
    StructureCandidate s;
    s.structure_id = "default";
    s.r_parents = {
        {"w", {"w_prev", "t_prev", "i", "al", "aO_prev"}},
        {"t", {"t_prev", "aR", "al"}},
        {"i", {"i_prev"}},
        {"wO", {"wO_prev", "aR"}},
    };
    s.o_parents = {
        {"w", {"w_prev", "t_prev", "aO"}},
        {"t", {"t_prev"}},
        {"i", {"i_prev"}},
        {"wO", {"wO_prev", "aO"}},
    };
    return s;
}

// The latent transition CPDs of one regime.
struct TransitionRegime {
    Contributor kind = Contributor::R;
    std::vector<CpdTable> cpds;

    const CpdTable& cpd_for(std::string_view child) const {
        for (const auto& c : cpds) {
            if (c.child().name == child) return c;
        }
        throw ModelError("regime has no CPD for '" + std::string(child) + "'");
    }
};

// Per-slice belief: joint over the user's {w, t, i} and marginal over wO.
struct BeliefState {
    Factor user_joint;
    Factor other_marginal;
    int event_index = 0;
};

class DbnModel {
public:
    DbnModel(std::string structure_id, int n_bins, TransitionRegime r_regime, TransitionRegime o_regime,
             Factor user_prior, Factor other_prior)
        : structure_id_(std::move(structure_id)),
          n_bins_(n_bins),
          variables_(declare_variables(n_bins)),
          r_regime_(std::move(r_regime)),
          o_regime_(std::move(o_regime)),
          user_prior_(std::move(user_prior)),
          other_prior_(std::move(other_prior)) {
        validate();
    }

    const std::string& structure_id() const { return structure_id_; }
    int n_bins() const { return n_bins_; }
    const std::vector<Variable>& variables() const { return variables_; }
    const TransitionRegime& regime(Contributor c) const { return c == Contributor::R ? r_regime_ : o_regime_; }
    const Factor& user_prior() const { return user_prior_; }
    const Factor& other_prior() const { return other_prior_; }

    Variable variable(std::string_view name) const { return variable_of(name, n_bins_); }

    BeliefState initial_belief() const { return BeliefState{user_prior_, other_prior_, 0}; }

    StructureCandidate structure() const {
        StructureCandidate s;
        s.structure_id = structure_id_;
        for (const auto& c : r_regime_.cpds) s.r_parents[c.child().name] = parent_names(c);
        for (const auto& c : o_regime_.cpds) s.o_parents[c.child().name] = parent_names(c);
        return s;
    }

private:
    static std::vector<std::string> parent_names(const CpdTable& c) {
        std::vector<std::string> out;
        for (const auto& p : c.parents()) out.push_back(p.name);
        return out;
    }

    void validate() const {
        if (r_regime_.kind != Contributor::R || o_regime_.kind != Contributor::O) {
            throw ModelError("regimes must be (R, O) in that order");
        }
        for (const auto* regime : {&r_regime_, &o_regime_}) {
            std::set<std::string> children;
            for (const auto& c : regime->cpds) {
                if (!children.insert(c.child().name).second) {
                    throw ModelError("latent '" + c.child().name + "' has more than one CPD");
                }
                if (c.child() != variable(c.child().name)) {
                    throw ModelError("CPD child '" + c.child().name + "' has the wrong cardinality");
                }
                for (const auto& p : c.parents()) {
                    if (p != variable(p.name)) {
                        throw ModelError("CPD parent '" + p.name + "' has the wrong cardinality");
                    }
                }
            }
        }
        validate_structure(structure());

        const Factor user_shape = Factor::filled(
            {variable(var::kWellbeing), variable(var::kTrust), variable(var::kIntention)}, 0.0);
        if (user_prior_.scope() != user_shape.scope()) throw ModelError("user prior must be over {w, t, i}");
        if (other_prior_.scope() != std::vector<Variable>{variable(var::kOtherWellbeing)}) {
            throw ModelError("other prior must be over {wO}");
        }
        if (std::abs(user_prior_.sum() - 1.0) > kNormTolerance ||
            std::abs(other_prior_.sum() - 1.0) > kNormTolerance) {
            throw ModelError("prior factors must be normalized");
        }
    }

    std::string structure_id_;
    int n_bins_;
    std::vector<Variable> variables_;
    TransitionRegime r_regime_;
    TransitionRegime o_regime_;
    Factor user_prior_;
    Factor other_prior_;
};

inline Factor uniform_user_prior(int n_bins) {
    const double p = 1.0 / (n_bins * n_bins * 2);
    return Factor::filled({variable_of(var::kWellbeing, n_bins), variable_of(var::kTrust, n_bins),
                           variable_of(var::kIntention, n_bins)},
                          p);
}

inline Factor uniform_other_prior(int n_bins) { return Factor::uniform(variable_of(var::kOtherWellbeing, n_bins)); }

inline std::vector<Variable> resolve_parents(const std::vector<std::string>& names, int n_bins) {
    std::vector<Variable> out;
    for (const auto& n : names) out.push_back(variable_of(n, n_bins));
    return out;
}

// Every CPD uniform, priors uniform.
inline DbnModel make_uniform_model(const StructureCandidate& s, int n_bins = kDefaultBins) {
    validate_structure(s);
    auto regime = [&](Contributor c) {
        TransitionRegime r{c, {}};
        for (const auto& [child, ps] : s.parents_for(c)) {
            r.cpds.push_back(CpdTable::uniform(variable_of(child, n_bins), resolve_parents(ps, n_bins)));
        }
        return r;
    };
    return DbnModel(s.structure_id, n_bins, regime(Contributor::R), regime(Contributor::O),
                    uniform_user_prior(n_bins), uniform_other_prior(n_bins));
}

} // namespace wbdbn
