#pragma once

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "wbdbn/error.hpp"
#include "wbdbn/model.hpp"

namespace wbdbn {

inline constexpr std::string_view kModelFormat = "wbdbn-model/1";

inline nlohmann::json to_json(const Factor& f) {
    nlohmann::json scope = nlohmann::json::array();
    for (const auto& v : f.scope()) scope.push_back(v.name);
    return nlohmann::json{{"scope", std::move(scope)}, {"values", f.values()}};
}

inline nlohmann::json to_json(const CpdTable& c) {
    nlohmann::json parents = nlohmann::json::array();
    for (const auto& p : c.parents()) parents.push_back(p.name);
    nlohmann::json j = to_json(c.table());
    j["child"] = c.child().name;
    j["parents"] = std::move(parents);
    return j;
}

inline nlohmann::json to_json(const DbnModel& m) {
    nlohmann::json vars = nlohmann::json::array();
    for (const auto& v : m.variables()) vars.push_back({{"name", v.name}, {"cardinality", v.cardinality}});
    auto regime = [](const TransitionRegime& r) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : r.cpds) arr.push_back(to_json(c));
        return arr;
    };
    nlohmann::json j;
    j["format"] = std::string(kModelFormat);
    j["structure_id"] = m.structure_id();
    j["n_bins"] = m.n_bins();
    j["variables"] = std::move(vars);
    j["prior"] = {{"user", to_json(m.user_prior())}, {"other", to_json(m.other_prior())}};
    j["regimes"] = {{"R", regime(m.regime(Contributor::R))}, {"O", regime(m.regime(Contributor::O))}};
    return j;
}

namespace detail {

inline Factor factor_from_json(const nlohmann::json& j, int n_bins) {
    std::vector<Variable> scope;
    for (const auto& n : j.at("scope")) scope.push_back(variable_of(n.get<std::string>(), n_bins));
    return Factor(std::move(scope), j.at("values").get<std::vector<double>>());
}

inline TransitionRegime regime_from_json(const nlohmann::json& arr, Contributor kind, int n_bins) {
    TransitionRegime r{kind, {}};
    for (const auto& c : arr) {
        Variable child = variable_of(c.at("child").get<std::string>(), n_bins);
        std::vector<Variable> parents;
        for (const auto& p : c.at("parents")) parents.push_back(variable_of(p.get<std::string>(), n_bins));
        r.cpds.emplace_back(std::move(child), std::move(parents), factor_from_json(c, n_bins));
    }
    return r;
}

} // namespace detail

// Throws ModelError for structurally invalid documents.
inline DbnModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.contains("format") && j.at("format").get<std::string>() != kModelFormat) {
            throw ModelError("unsupported model format '" + j.at("format").get<std::string>() + "'");
        }
        const int n_bins = j.at("n_bins").get<int>();
        if (n_bins < 2) throw ModelError("model n_bins must be >= 2");
        if (j.contains("variables")) {
            for (const auto& v : j.at("variables")) {
                const auto name = v.at("name").get<std::string>();
                if (v.at("cardinality").get<int>() != cardinality_of(name, n_bins)) {
                    throw ModelError("variable '" + name + "' declared with unexpected cardinality");
                }
            }
        }
        return DbnModel(j.at("structure_id").get<std::string>(), n_bins,
                        detail::regime_from_json(j.at("regimes").at("R"), Contributor::R, n_bins),
                        detail::regime_from_json(j.at("regimes").at("O"), Contributor::O, n_bins),
                        detail::factor_from_json(j.at("prior").at("user"), n_bins),
                        detail::factor_from_json(j.at("prior").at("other"), n_bins));
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("model JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const StructureCandidate& s) {
    return nlohmann::json{{"structure_id", s.structure_id}, {"R", s.r_parents}, {"O", s.o_parents}};
}

// Accepts either the compact {structure_id, R, O} form or a full model document.
inline StructureCandidate structure_from_json(const nlohmann::json& j) {
    if (j.contains("regimes")) return model_from_json(j).structure();
    try {
        StructureCandidate s;
        s.structure_id = j.at("structure_id").get<std::string>();
        for (const auto& [child, ps] : j.at("R").items()) s.r_parents[child] = ps.get<std::vector<std::string>>();
        for (const auto& [child, ps] : j.at("O").items()) s.o_parents[child] = ps.get<std::vector<std::string>>();
        validate_structure(s);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("structure JSON: ") + e.what());
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

} // namespace wbdbn
