#pragma once

// Slotted G-BP engine running the fictitious first half and the physical
// packet network in lockstep.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "benes/controller.hpp"
#include "benes/oracle.hpp"
#include "benes/queueing.hpp"
#include "benes/topology.hpp"
#include "benes/utility.hpp"

namespace benes {

// How admission control sees the regulation queues.
//   exact       current q_d, fed by admitted packets
//   delayed_1x  q_d(t - (2n-1)), fed by deliveries at output d
//   delayed_5x  q_d(t - 5(2n-1)), fed by deliveries
//   sparse_5x   q_d(t0) refreshed every 5(2n-1) slots, fed by deliveries
enum class RegulationVariant : std::uint8_t { exact, delayed_1x, delayed_5x, sparse_5x };

std::string to_string(RegulationVariant v);
RegulationVariant parse_regulation_variant(const std::string& name);

// Slot whose q values admission control reads at slot t. May be negative
// (reads as zero) and never exceeds t.
std::int64_t regulation_lag_slot(RegulationVariant v, int n, std::int64_t t) noexcept;

// Ring of past regulation-queue vectors, long enough for every variant.
class RegulationHistory {
public:
    RegulationHistory(int n, int servers);

    // Records q(t), the values at the start of slot t. Slots must be pushed in order.
    void push(std::int64_t t, const std::vector<double>& q);
    // q(t) for a retained slot; zeros for negative t. Throws std::out_of_range
    // for slots that were never pushed or have been overwritten.
    const std::vector<double>& at(std::int64_t t) const;
    std::size_t capacity() const noexcept { return ring_.size(); }

private:
    std::vector<std::vector<double>> ring_;
    std::vector<double> zeros_;
    std::int64_t latest_ = -1;
};

const std::vector<double>& regulation_view(const RegulationHistory& history, RegulationVariant v, int n,
                                           std::int64_t t);

struct TrafficConfig {
    enum class Model : std::uint8_t { deterministic, binomial };
    Model model = Model::deterministic;  // deterministic: A_max every slot
    double rate = 0.0;                   // binomial mean per flow when `rates` is empty
    std::vector<double> rates;           // optional per-flow means in [0, A_max]
};

struct UtilitySwitch {
    std::int64_t slot = 0;
    UtilitySpec utility;
};

struct SimConfig {
    int n = 4;
    GbpParams params;
    UtilitySpec utility = UtilitySpec::uniform_log(16);
    TrafficConfig traffic;
    std::int64_t slots = 100000;
    std::uint64_t seed = 1;
    RegulationVariant variant = RegulationVariant::exact;
    bool bias_enhanced = false;
    std::optional<UtilitySwitch> utility_switch;
    bool check_invariants = false;
    bool record_timeseries = false;

    // Throws std::invalid_argument on inconsistent settings.
    void validate() const;
};

struct TimePoint {
    std::int64_t slot = 0;
    std::int64_t total_physical = 0;
    double total_fictitious = 0.0;
    std::int64_t admitted_cum = 0;
    std::int64_t delivered_cum = 0;
};

struct PhaseMetrics {
    std::int64_t begin = 0;
    std::int64_t end = 0;
    std::vector<double> rate;  // per flow, admissions per slot within the phase
    double utility = 0.0;      // under the utility active during the phase
};

struct MetricsReport {
    int n = 0;
    std::int64_t slots = 0;

    std::vector<std::int64_t> admitted;   // per flow
    std::vector<std::int64_t> delivered;  // per flow
    std::vector<double> rate;             // admitted / slots
    std::vector<double> flow_utility;
    double total_utility = 0.0;

    std::int64_t admitted_total = 0;
    std::int64_t delivered_total = 0;
    double delivery_fraction = 1.0;
    double avg_delay = 0.0;  // slots from admission to output, delivered packets only

    // packets of each flow reaching each partition row: [flow * rows + row - 1]
    std::vector<std::int64_t> partition_arrivals;
    // first-half fictitious grants per node: UU, UL, LU, LL
    std::vector<std::array<std::int64_t, 4>> module_grants;

    std::array<double, kQueueFamilies> max_queue{};
    std::array<double, kQueueFamilies> min_slack{};
    std::int64_t bound_violations = 0;
    std::int64_t conservation_failures = 0;
    std::int64_t placement_failures = 0;
    std::int64_t domination_failures = 0;
    std::string first_violation;

    std::vector<PhaseMetrics> phases;
    std::vector<TimePoint> timeseries;

    bool invariants_clean() const noexcept {
        return bound_violations == 0 && conservation_failures == 0 && placement_failures == 0 &&
               domination_failures == 0;
    }
};

// Deterministic sub-seed for a named random stream.
std::uint64_t derive_seed(std::uint64_t master, const std::string& stream);

MetricsReport run(const SimConfig& config);

// Redraws every flow weight uniformly from {1, 2, 3} (seeded stream
// "weights") and switches to w * log(1 + r) at slots / 2.
struct SwitchOutcome {
    MetricsReport report;
    std::vector<double> weights;
};
SwitchOutcome run_utility_switch(SimConfig config);

struct ScalingRow {
    int n = 0;
    double delay = 0.0;
    double delay_biased = 0.0;
    double ratio = 0.0;  // delay / n^2
};

std::vector<ScalingRow> run_scaling_experiment(const std::vector<int>& orders, const SimConfig& base);

}  // namespace benes
