#include "pullin/model_io.hpp"

#include <cmath>
#include <set>

#include "pullin/errors.hpp"

namespace pullin {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

void require_keys(const json& obj, const std::set<std::string>& required,
                  const std::string& where) {
    for (const auto& k : required) {
        if (!obj.contains(k))
            throw ConfigError("missing key \"" + k + "\" in " + where);
    }
}

int config_int(const json& obj, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw ConfigError("key \"" + key + "\" must be an integer");
    return v.get<int>();
}

}  // namespace

double config_number(const json& obj, const std::string& key) {
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw ConfigError("key \"" + key + "\" must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        throw ConfigError("key \"" + key + "\" must be finite");
    return x;
}

ModelSpec model_from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("model spec must be a JSON object");
    require_keys(doc, {"g", "f"}, "model spec");

    const double beta = doc.contains("beta") ? config_number(doc, "beta") : 1.0;
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");

    const json& gj = doc.at("g");
    if (!gj.is_object() || !gj.contains("family"))
        throw ConfigError("\"g\" must be an object with a \"family\" key");
    const std::string gfam = gj.at("family").get<std::string>();

    GModel g = GModel::exponential(beta);
    try {
        if (gfam == "power_even") {
            reject_unknown_keys(gj, {"family", "k"}, "g spec");
            require_keys(gj, {"k"}, "g spec");
            g = GModel::power_even(config_int(gj, "k"), beta);
        } else if (gfam == "exponential") {
            reject_unknown_keys(gj, {"family"}, "g spec");
            g = GModel::exponential(beta);
        } else if (gfam == "poly_even") {
            reject_unknown_keys(gj, {"family", "k"}, "g spec");
            require_keys(gj, {"k"}, "g spec");
            g = GModel::poly_even(config_int(gj, "k"), beta);
        } else if (gfam == "inverse_power") {
            reject_unknown_keys(gj, {"family", "p"}, "g spec");
            require_keys(gj, {"p"}, "g spec");
            g = GModel::inverse_power(config_number(gj, "p"), beta);
        } else {
            throw ConfigError("unknown g family \"" + gfam + "\"");
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid g spec: ") + e.what());
    }

    const json& fj = doc.at("f");
    if (!fj.is_object() || !fj.contains("family"))
        throw ConfigError("\"f\" must be an object with a \"family\" key");
    const std::string ffam = fj.at("family").get<std::string>();

    FModel f = FModel::linear();
    try {
        if (ffam == "linear") {
            reject_unknown_keys(fj, {"family"}, "f spec");
        } else if (ffam == "odd_power") {
            reject_unknown_keys(fj, {"family", "theta", "c"}, "f spec");
            require_keys(fj, {"theta", "c"}, "f spec");
            f = FModel::odd_power(config_number(fj, "theta"),
                                  config_number(fj, "c"));
        } else {
            throw ConfigError("unknown f family \"" + ffam + "\"");
        }
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid f spec: ") + e.what());
    }

    return {std::move(g), std::move(f)};
}

json model_to_json(const ModelSpec& spec) {
    json gj;
    switch (spec.g.family()) {
        case GFamily::PowerEven:
            gj = {{"family", "power_even"}, {"k", spec.g.k()}};
            break;
        case GFamily::Exponential:
            gj = {{"family", "exponential"}};
            break;
        case GFamily::PolyEven:
            gj = {{"family", "poly_even"}, {"k", spec.g.k()}};
            break;
        case GFamily::InversePower:
            gj = {{"family", "inverse_power"}, {"p", spec.g.p()}};
            break;
        case GFamily::Tabulated:
            gj = {{"family", "tabulated"}};
            break;
    }
    json fj;
    if (spec.f.family() == FFamily::Linear) {
        fj = {{"family", "linear"}};
    } else {
        fj = {{"family", "odd_power"},
              {"theta", spec.f.theta()},
              {"c", spec.f.eta()}};
    }
    return {{"g", gj}, {"beta", spec.g.beta()}, {"f", fj}};
}

}  // namespace pullin
