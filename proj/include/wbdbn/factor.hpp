#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wbdbn/error.hpp"
#include "wbdbn/variable.hpp"

namespace wbdbn {

// Partial or full assignment of variable names to states.
using Assignment = std::map<std::string, int, std::less<>>;

// Dense non-negative table over an ordered scope.
//
// The scope is kept sorted by variable name and values are laid out
// row-major over that order (the last variable varies fastest). Callers may
// construct from any scope order; the constructor permutes into canonical
// form so that two factors with the same content compare equal entrywise.
class Factor {
public:
    // Scalar factor with value 1.
    Factor() : values_{1.0} {}

    // `values` is row-major over `scope` in the order given.
    Factor(std::vector<Variable> scope, std::vector<double> values) {
        for (std::size_t a = 0; a < scope.size(); ++a) {
            if (scope[a].cardinality < 1) {
                throw ModelError("factor variable '" + scope[a].name + "' has cardinality < 1");
            }
            for (std::size_t b = a + 1; b < scope.size(); ++b) {
                if (scope[a].name == scope[b].name) {
                    throw ModelError("factor scope repeats variable '" + scope[a].name + "'");
                }
            }
        }
        std::size_t expected = 1;
        for (const auto& v : scope) expected *= static_cast<std::size_t>(v.cardinality);
        if (values.size() != expected) {
            throw ModelError("factor has " + std::to_string(values.size()) +
                             " values but its scope needs " + std::to_string(expected));
        }
        for (double v : values) {
            if (!(v >= 0.0)) throw ModelError("factor values must be non-negative and finite");
        }

        std::vector<std::size_t> order(scope.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return scope[a].name < scope[b].name; });
        const bool sorted = std::is_sorted(order.begin(), order.end());

        scope_.reserve(scope.size());
        for (auto k : order) scope_.push_back(scope[k]);
        compute_strides();

        if (sorted) {
            values_ = std::move(values);
            return;
        }
        // Strides of the caller's layout, then scatter into canonical layout.
        std::vector<std::size_t> given_strides(scope.size());
        std::size_t s = 1;
        for (std::size_t k = scope.size(); k-- > 0;) {
            given_strides[k] = s;
            s *= static_cast<std::size_t>(scope[k].cardinality);
        }
        values_.assign(values.size(), 0.0);
        std::vector<int> states(scope_.size(), 0);
        for (std::size_t flat = 0; flat < values_.size(); ++flat) {
            std::size_t src = 0;
            for (std::size_t c = 0; c < scope_.size(); ++c) src += states[c] * given_strides[order[c]];
            values_[flat] = values[src];
            advance(states);
        }
    }

    // All-constant factor over `scope`.
    static Factor filled(std::vector<Variable> scope, double value) {
        std::size_t n = 1;
        for (const auto& v : scope) n *= static_cast<std::size_t>(v.cardinality);
        return Factor(std::move(scope), std::vector<double>(n, value));
    }

    static Factor uniform(const Variable& v) {
        return filled({v}, 1.0 / v.cardinality);
    }

    // 1 at `state`, 0 elsewhere.
    static Factor indicator(const Variable& v, int state) {
        if (state < 0 || state >= v.cardinality) {
            throw UsageError("state " + std::to_string(state) + " out of range for '" + v.name + "'");
        }
        std::vector<double> vals(static_cast<std::size_t>(v.cardinality), 0.0);
        vals[static_cast<std::size_t>(state)] = 1.0;
        return Factor({v}, std::move(vals));
    }

    const std::vector<Variable>& scope() const { return scope_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool is_scalar() const { return scope_.empty(); }

    // Position of `name` in the canonical scope, or -1.
    int position(std::string_view name) const {
        for (std::size_t k = 0; k < scope_.size(); ++k) {
            if (scope_[k].name == name) return static_cast<int>(k);
        }
        return -1;
    }
    bool contains(std::string_view name) const { return position(name) >= 0; }

    const Variable& variable(std::string_view name) const {
        int p = position(name);
        if (p < 0) throw UsageError("variable '" + std::string(name) + "' not in factor scope");
        return scope_[static_cast<std::size_t>(p)];
    }

    std::size_t stride(std::size_t position) const { return strides_[position]; }

    // Value at a full assignment of the scope (extra entries are ignored).
    double at(const Assignment& assignment) const {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < scope_.size(); ++k) {
            auto it = assignment.find(scope_[k].name);
            if (it == assignment.end()) {
                throw UsageError("assignment misses variable '" + scope_[k].name + "'");
            }
            if (it->second < 0 || it->second >= scope_[k].cardinality) {
                throw UsageError("state out of range for '" + scope_[k].name + "'");
            }
            flat += static_cast<std::size_t>(it->second) * strides_[k];
        }
        return values_[flat];
    }

    // Value at states listed in canonical scope order.
    double at_states(std::span<const int> states) const {
        std::size_t flat = 0;
        for (std::size_t k = 0; k < scope_.size(); ++k) {
            flat += static_cast<std::size_t>(states[k]) * strides_[k];
        }
        return values_[flat];
    }

    double sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

    // Odometer step over the canonical scope; returns false after the last state.
    bool advance(std::vector<int>& states) const {
        for (std::size_t k = scope_.size(); k-- > 0;) {
            if (++states[k] < scope_[k].cardinality) return true;
            states[k] = 0;
        }
        return false;
    }

private:
    void compute_strides() {
        strides_.assign(scope_.size(), 1);
        std::size_t s = 1;
        for (std::size_t k = scope_.size(); k-- > 0;) {
            strides_[k] = s;
            s *= static_cast<std::size_t>(scope_[k].cardinality);
        }
    }

    std::vector<Variable> scope_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_;
};

namespace detail {

// Flat offset into `f` for each position of the `union_scope` odometer.
inline std::vector<std::size_t> union_strides(const Factor& f, const std::vector<Variable>& union_scope) {
    std::vector<std::size_t> out(union_scope.size(), 0);
    for (std::size_t k = 0; k < union_scope.size(); ++k) {
        int p = f.position(union_scope[k].name);
        if (p >= 0) out[k] = f.stride(static_cast<std::size_t>(p));
    }
    return out;
}

} // namespace detail

// Pointwise product over the union of both scopes.
inline Factor factor_product(const Factor& f, const Factor& g) {
    std::vector<Variable> scope = f.scope();
    for (const auto& v : g.scope()) {
        int p = f.position(v.name);
        if (p >= 0) {
            if (f.scope()[static_cast<std::size_t>(p)].cardinality != v.cardinality) {
                throw ModelError("factor_product: variable '" + v.name + "' has cardinality " +
                                 std::to_string(f.scope()[static_cast<std::size_t>(p)].cardinality) +
                                 " and " + std::to_string(v.cardinality));
            }
        } else {
            scope.push_back(v);
        }
    }
    std::sort(scope.begin(), scope.end(),
              [](const Variable& a, const Variable& b) { return a.name < b.name; });

    Factor shape = Factor::filled(scope, 0.0);
    const auto fs = detail::union_strides(f, scope);
    const auto gs = detail::union_strides(g, scope);
    std::vector<double> out(shape.size());
    std::vector<int> states(scope.size(), 0);
    std::size_t fi = 0;
    std::size_t gi = 0;
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out[flat] = f.values()[fi] * g.values()[gi];
        // Inline odometer so the operand offsets update incrementally.
        for (std::size_t k = scope.size(); k-- > 0;) {
            if (++states[k] < scope[k].cardinality) {
                fi += fs[k];
                gi += gs[k];
                break;
            }
            fi -= fs[k] * static_cast<std::size_t>(scope[k].cardinality - 1);
            gi -= gs[k] * static_cast<std::size_t>(scope[k].cardinality - 1);
            states[k] = 0;
        }
    }
    return Factor(std::move(scope), std::move(out));
}

// Sums `name` out of `f`.
inline Factor marginalize(const Factor& f, std::string_view name) {
    const int p = f.position(name);
    if (p < 0) {
        throw UsageError("marginalize: variable '" + std::string(name) + "' not in factor scope");
    }
    std::vector<Variable> scope;
    for (const auto& v : f.scope()) {
        if (v.name != name) scope.push_back(v);
    }
    const std::size_t stride = f.stride(static_cast<std::size_t>(p));
    const std::size_t card = static_cast<std::size_t>(f.scope()[static_cast<std::size_t>(p)].cardinality);
    const std::size_t outer = f.size() / (stride * card);
    std::vector<double> out(outer * stride, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t c = 0; c < card; ++c) {
            const std::size_t base = (o * card + c) * stride;
            for (std::size_t in = 0; in < stride; ++in) out[o * stride + in] += f.values()[base + in];
        }
    }
    return Factor(std::move(scope), std::move(out));
}

// Sums out every variable not listed in `keep`.
inline Factor marginalize_to(Factor f, std::span<const std::string> keep) {
    std::vector<std::string> drop;
    for (const auto& v : f.scope()) {
        if (std::find(keep.begin(), keep.end(), v.name) == keep.end()) drop.push_back(v.name);
    }
    for (const auto& name : drop) f = marginalize(f, name);
    return f;
}

// Rescales to unit mass. Zero mass means the conditioning evidence is impossible.
inline Factor normalize(const Factor& f) {
    const double total = f.sum();
    if (!(total > 0.0)) {
        throw DegenerateEvidence("normalize: factor has zero total mass (impossible evidence)");
    }
    std::vector<double> out = f.values();
    for (double& v : out) v /= total;
    return Factor(f.scope(), std::move(out));
}

// Fixes `name` to `state` and drops it from the scope.
inline Factor reduce(const Factor& f, std::string_view name, int state) {
    const int p = f.position(name);
    if (p < 0) return f;
    const auto& var = f.scope()[static_cast<std::size_t>(p)];
    if (state < 0 || state >= var.cardinality) {
        throw UsageError("reduce: state " + std::to_string(state) + " out of range for '" + var.name + "'");
    }
    std::vector<Variable> scope;
    for (const auto& v : f.scope()) {
        if (v.name != name) scope.push_back(v);
    }
    const std::size_t stride = f.stride(static_cast<std::size_t>(p));
    const std::size_t card = static_cast<std::size_t>(var.cardinality);
    const std::size_t outer = f.size() / (stride * card);
    std::vector<double> out(outer * stride);
    for (std::size_t o = 0; o < outer; ++o) {
        const std::size_t base = (o * card + static_cast<std::size_t>(state)) * stride;
        for (std::size_t in = 0; in < stride; ++in) out[o * stride + in] = f.values()[base + in];
    }
    return Factor(std::move(scope), std::move(out));
}

// Renames scope variables (cardinalities unchanged); re-canonicalizes the layout.
inline Factor rename(const Factor& f, const std::map<std::string, std::string, std::less<>>& names) {
    std::vector<Variable> scope = f.scope();
    for (auto& v : scope) {
        auto it = names.find(v.name);
        if (it != names.end()) v.name = it->second;
    }
    return Factor(std::move(scope), f.values());
}

// Entrywise comparison; scopes must match exactly.
inline double max_abs_difference(const Factor& a, const Factor& b) {
    if (a.scope() != b.scope()) throw UsageError("max_abs_difference: scopes differ");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a.values()[k] - b.values()[k]));
    return m;
}

} // namespace wbdbn
