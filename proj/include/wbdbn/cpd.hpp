#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wbdbn/error.hpp"
#include "wbdbn/factor.hpp"

namespace wbdbn {

inline constexpr double kNormTolerance = 1e-9;

// P(child | parents) as a factor over {child} ∪ parents.
class CpdTable {
public:
    CpdTable(Variable child, std::vector<Variable> parents, Factor table)
        : child_(std::move(child)), parents_(std::move(parents)), table_(std::move(table)) {
        validate();
    }

    // `columns[j]` is the child distribution for the j-th joint parent
    // assignment, enumerated row-major over `parents` in the order given.
    static CpdTable from_columns(Variable child, std::vector<Variable> parents,
                                 const std::vector<std::vector<double>>& columns) {
        std::vector<Variable> scope = parents;
        scope.push_back(child);
        std::vector<double> flat;
        for (const auto& col : columns) {
            if (col.size() != static_cast<std::size_t>(child.cardinality)) {
                throw ModelError("CPD column for '" + child.name + "' has wrong length");
            }
            flat.insert(flat.end(), col.begin(), col.end());
        }
        Factor table(std::move(scope), std::move(flat));
        return CpdTable(std::move(child), std::move(parents), std::move(table));
    }

    static CpdTable uniform(Variable child, std::vector<Variable> parents) {
        std::vector<Variable> scope = parents;
        scope.push_back(child);
        Factor table = Factor::filled(std::move(scope), 1.0 / child.cardinality);
        return CpdTable(std::move(child), std::move(parents), std::move(table));
    }

    const Variable& child() const { return child_; }
    const std::vector<Variable>& parents() const { return parents_; }
    const Factor& table() const { return table_; }

    bool has_parent(std::string_view name) const {
        for (const auto& p : parents_) {
            if (p.name == name) return true;
        }
        return false;
    }

    // P(child = state | parents as in `assignment`).
    double probability(int state, const Assignment& assignment) const {
        Assignment full;
        for (const auto& p : parents_) {
            auto it = assignment.find(p.name);
            if (it == assignment.end()) {
                throw UsageError("CPD '" + child_.name + "' needs parent '" + p.name + "'");
            }
            full.emplace(p.name, it->second);
        }
        full.emplace(child_.name, state);
        return table_.at(full);
    }

    std::size_t column_count() const { return table_.size() / static_cast<std::size_t>(child_.cardinality); }

private:
    void validate() const {
        std::vector<Variable> expected = parents_;
        expected.push_back(child_);
        for (const auto& p : parents_) {
            if (p.name == child_.name) throw ModelError("CPD '" + child_.name + "' lists itself as parent");
        }
        Factor shape = Factor::filled(expected, 0.0);
        if (shape.scope() != table_.scope()) {
            throw ModelError("CPD '" + child_.name + "' table scope does not match child and parents");
        }
        Factor column_sums = marginalize(table_, child_.name);
        for (double s : column_sums.values()) {
            if (std::abs(s - 1.0) > kNormTolerance) {
                throw ModelError("CPD '" + child_.name + "' has a column summing to " + std::to_string(s));
            }
        }
    }

    Variable child_;
    std::vector<Variable> parents_;
    Factor table_;
};

} // namespace wbdbn
