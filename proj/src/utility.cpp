#include "benes/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace benes {

std::string to_string(UtilityForm form) {
    switch (form) {
        case UtilityForm::log1p: return "log";
        case UtilityForm::saturating_exp: return "exp";
    }
    return "?";
}

UtilityForm parse_utility_form(const std::string& name) {
    if (name == "log") return UtilityForm::log1p;
    if (name == "exp") return UtilityForm::saturating_exp;
    throw std::invalid_argument("unknown utility form '" + name + "' (expected log or exp)");
}

UtilitySpec::UtilitySpec(UtilityForm form, int servers, std::vector<double> weights)
    : form_(form), servers_(servers), weights_(std::move(weights)) {
    if (servers_ < 2) throw std::invalid_argument("utility needs at least two servers");
    if (weights_.size() != static_cast<std::size_t>(servers_) * static_cast<std::size_t>(servers_)) {
        throw std::invalid_argument("utility weight vector must have one entry per flow");
    }
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("utility weights must be finite and >= 0");
    }
}

UtilitySpec UtilitySpec::uniform_log(int servers, double weight) {
    return UtilitySpec(UtilityForm::log1p, servers,
                       std::vector<double>(static_cast<std::size_t>(servers) * static_cast<std::size_t>(servers), weight));
}

double UtilitySpec::value(int flow, double r) const {
    const double w = weight(flow);
    switch (form_) {
        case UtilityForm::log1p: return w * std::log1p(r);
        case UtilityForm::saturating_exp: return -w * std::expm1(-r);
    }
    return 0.0;
}

double UtilitySpec::derivative(int flow, double r) const {
    const double w = weight(flow);
    switch (form_) {
        case UtilityForm::log1p: return w / (1.0 + r);
        case UtilityForm::saturating_exp: return w * std::exp(-r);
    }
    return 0.0;
}

double UtilitySpec::curvature_bound(int flow) const { return weight(flow); }

double UtilitySpec::max_slope_at_zero() const {
    return *std::max_element(weights_.begin(), weights_.end());
}

double UtilitySpec::total(std::span<const double> rates) const {
    if (rates.size() != weights_.size()) throw std::invalid_argument("rate vector size mismatch");
    double sum = 0.0;
    for (std::size_t f = 0; f < rates.size(); ++f) sum += value(static_cast<int>(f), rates[f]);
    return sum;
}

}  // namespace benes
