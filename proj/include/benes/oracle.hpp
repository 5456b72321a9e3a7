#pragma once

// Reference computations that share no code with the simulated controller:
// the utility optimum over the (slackened) capacity region, a single-queue
// stability harness, and the deterministic per-queue bounds every G-BP run
// must respect.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "benes/capacity.hpp"
#include "benes/controller.hpp"
#include "benes/queueing.hpp"
#include "benes/topology.hpp"
#include "benes/utility.hpp"

namespace benes {

struct OptimumOptions {
    int max_iterations = 100000;
    double tolerance = 1e-8;
};

struct OptimumResult {
    RateMatrix r_star;
    double utility = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

// Maximizes the total utility subject to row sums <= 1 and column sums
// <= 1 - eta by projected gradient ascent. Throws std::invalid_argument on
// bad dimensions or eta outside [0, 1), std::runtime_error when the
// iteration cap is reached before the residual drops below tolerance.
OptimumResult solve_optimum(const UtilitySpec& utility, int n, double eta, const OptimumOptions& options = {});

// Euclidean projection onto {y >= 0, row sums <= 1, column sums <= column_cap}.
RateMatrix project_to_region(const RateMatrix& x, double column_cap);

struct KktReport {
    double residual = 0.0;          // worst stationarity / complementarity gap
    std::vector<double> row_price;  // per source, zero for slack rows
    std::vector<double> column_price;
};

// Recovers row/column prices from the tight constraints and measures how far
// r is from satisfying the optimality conditions.
KktReport kkt_residual(const UtilitySpec& utility, const RateMatrix& r, double eta);

struct SingleQueueReport {
    double max_queue = 0.0;
    double first_half_max = 0.0;
    double second_half_max = 0.0;
    double mean_arrival = 0.0;
    std::int64_t window = 0;  // shortest window whose every block mean is <= 1 - eta/2; 0 if none
    double window_bound = 0.0; // a_max * window
    bool bounded = false;     // second_half_max <= first_half_max + a_max
};

using ArrivalSampler = std::function<int(std::mt19937_64&)>;

// Unit-service queue Q(t+1) = [Q(t) - 1]^+ + R(t) driven for `slots` slots.
SingleQueueReport single_queue_harness(const ArrivalSampler& arrivals, int a_max, double eta, std::int64_t slots,
                            std::uint64_t seed);

enum class QueueFamily : std::uint8_t { admission, source, regulation, module, partition };
constexpr std::size_t kQueueFamilies = 5;

std::string to_string(QueueFamily f);

struct QueueBounds {
    double admission = 0.0;
    double source = 0.0;
    double regulation = 0.0;
    std::vector<double> column;  // index j = 1..n, column[0] unused; column[n] bounds the partition counters
};

QueueBounds queue_bounds(const GbpParams& params, int n);

struct BoundViolation {
    QueueFamily family;
    std::string where;
    double value = 0.0;
    double bound = 0.0;
};

// Smallest (bound - value) per family over the snapshot; negative means violated.
std::array<double, kQueueFamilies> bound_slack(const BenesTopology& topo, const QueueState& state,
                                               const QueueBounds& bounds);

// Largest value per family over the snapshot (module family: per-division pair sums).
std::array<double, kQueueFamilies> family_maxima(const QueueState& state);

std::vector<BoundViolation> check_queue_bounds(const BenesTopology& topo, const QueueState& state,
                                               const GbpParams& params, bool check_regulation = true);

}  // namespace benes
