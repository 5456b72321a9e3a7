#pragma once

// Grouped-backpressure decision rules. Every function here is pure: given a
// queue snapshot it returns the slot's decisions without touching state.

#include <array>
#include <span>
#include <vector>

#include "benes/queueing.hpp"
#include "benes/topology.hpp"
#include "benes/utility.hpp"

namespace benes {

struct GbpParams {
    double V = 10.0;
    double eta = 0.01;
    int a_max = 2;
    double beta = 1.0;  // max U'(0) over flows

    // Throws std::invalid_argument on V < 1, eta outside (0,1), a_max < 0, beta < 0.
    void validate() const;
    // Additionally requires beta to equal the utility's largest slope at zero.
    void validate(const UtilitySpec& utility) const;
};

// argmax over [0, a_max] of V*U(gamma) - H*gamma.
double select_auxiliary(double H, const UtilitySpec& utility, int flow, const GbpParams& params);

// All-or-nothing: admit every arrival iff H - q - Q_division > 0.
int admission_decide(double H, double regulation, double source_backlog, int arrivals) noexcept;

struct DivisionPressure {
    double upper = 0.0;
    double lower = 0.0;
};

// Q~ seen by an upstream link: half-sum of the downstream module's two queues
// per division, or the partition node's D1/D2 counters.
DivisionPressure module_pressure(const std::array<double, 4>& downstream) noexcept;
DivisionPressure partition_pressure(const std::array<double, 2>& downstream) noexcept;

struct LinkWeights {
    double upper = 0.0;
    double lower = 0.0;
};

// W = max(Q_own + hop_offset - Q~, 0) per division; an empty own queue has
// weight 0. hop_offset is 0 for plain G-BP and 1 for the destination-biased
// variant (one hop closer downstream).
LinkWeights link_weights(double own_upper, double own_lower, DivisionPressure downstream,
                         double hop_offset = 0.0) noexcept;

struct Grant {
    bool upper = false;
    bool lower = false;

    friend bool operator==(const Grant&, const Grant&) = default;
};

// Unit-capacity max-weight choice; ties between positive weights go upper.
Grant schedule_link(LinkWeights w) noexcept;

// D1 and D2 are independent unit links: serve each nonempty counter.
Grant partition_service(double d1, double d2) noexcept;

// Second-half modules serve both FIFOs at full rate every slot.
constexpr Grant free_flow_grants() noexcept { return {true, true}; }

// B = 1/2 [2^n (10n - 2) + A^2 (2^{3n-1} + 2^{2n+1} + 2^{3n})]
double compute_drift_bound_B(int n, int a_max);

// U_opt - B/V - 2^n beta eta
double utility_lower_bound(double u_opt, const GbpParams& params, int n);

struct ControlAction {
    std::vector<double> gamma;                // per flow
    std::vector<int> admit;                   // per flow
    std::vector<Grant> server;                // per input server, link to m(s)
    std::vector<std::array<Grant, 2>> module; // columns 1..n-1: [a] = (UU, LU), [b] = (UL, LL)
    std::vector<Grant> partition;             // per partition row: (D1, D2)
};

struct DecisionInputs {
    std::span<const int> arrivals;              // A_sd(t) per flow
    std::span<const double> regulation_view;    // q_d as seen by admission control
    bool bias_enhanced = false;
};

ControlAction decide(const BenesTopology& topo, const QueueState& state, const UtilitySpec& utility,
                     const GbpParams& params, const DecisionInputs& inputs);
// Same, reusing the buffers of `out` across slots.
void decide(const BenesTopology& topo, const QueueState& state, const UtilitySpec& utility, const GbpParams& params,
            const DecisionInputs& inputs, ControlAction& out);

}  // namespace benes
