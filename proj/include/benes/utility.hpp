#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace benes {

// Flows are (s, d) pairs with 1-based server rows; the flat flow id is
// (s-1)*servers + (d-1).
constexpr int flow_id(int servers, int s, int d) noexcept { return (s - 1) * servers + (d - 1); }
constexpr int flow_source(int servers, int flow) noexcept { return flow / servers + 1; }
constexpr int flow_dest(int servers, int flow) noexcept { return flow % servers + 1; }

enum class UtilityForm {
    log1p,           // w * log(1 + r)
    saturating_exp,  // w * (1 - exp(-r))
};

std::string to_string(UtilityForm form);
UtilityForm parse_utility_form(const std::string& name);

// Per-flow concave increasing utilities with finite slope at zero.
class UtilitySpec {
public:
    UtilitySpec(UtilityForm form, int servers, std::vector<double> weights);

    static UtilitySpec uniform_log(int servers, double weight = 1.0);

    UtilityForm form() const noexcept { return form_; }
    int servers() const noexcept { return servers_; }
    int flows() const noexcept { return servers_ * servers_; }
    double weight(int flow) const { return weights_[static_cast<std::size_t>(flow)]; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    double value(int flow, double r) const;
    double derivative(int flow, double r) const;
    // sup of |U''| over r >= 0 (attained at r = 0 for both forms)
    double curvature_bound(int flow) const;
    // beta: the largest U'(0) over all flows
    double max_slope_at_zero() const;

    double total(std::span<const double> rates) const;

    friend bool operator==(const UtilitySpec&, const UtilitySpec&) = default;

private:
    UtilityForm form_;
    int servers_;
    std::vector<double> weights_;
};

}  // namespace benes
