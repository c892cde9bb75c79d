#pragma once

#include <cmath>
#include <string>

#include "wbdbn/error.hpp"

namespace wbdbn {

// A discrete random variable. Cardinality is at least 2.
struct Variable {
    std::string name;
    int cardinality = 2;

    friend bool operator==(const Variable&, const Variable&) = default;
};

inline Variable make_variable(std::string name, int cardinality) {
    if (cardinality < 2) {
        throw ModelError("variable '" + name + "' needs cardinality >= 2, got " +
                         std::to_string(cardinality));
    }
    return Variable{std::move(name), cardinality};
}

// One cell of a uniform partition of [0, 1].
struct Bin {
    int index = 0;
    int n_bins = 6;

    friend bool operator==(const Bin&, const Bin&) = default;
};

inline constexpr int kDefaultBins = 6;

// Maps x to its bin: [i/n, (i+1)/n) for i < n-1, and [(n-1)/n, 1] for the last.
inline Bin discretize(double x, int n_bins = kDefaultBins) {
    if (n_bins < 2) {
        throw DomainError("discretize: n_bins must be >= 2, got " + std::to_string(n_bins));
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError("discretize: value " + std::to_string(x) + " outside [0, 1]");
    }
    int index = static_cast<int>(std::floor(x * n_bins));
    if (index >= n_bins) index = n_bins - 1;
    return Bin{index, n_bins};
}

inline double bin_midpoint(Bin b) {
    return (b.index + 0.5) / b.n_bins;
}

inline double bin_lower(Bin b) { return static_cast<double>(b.index) / b.n_bins; }
inline double bin_upper(Bin b) { return static_cast<double>(b.index + 1) / b.n_bins; }

} // namespace wbdbn
