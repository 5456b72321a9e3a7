#include "benes/controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace benes {

void GbpParams::validate() const {
    if (!(V >= 1.0)) throw std::invalid_argument("V must be >= 1");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0, 1)");
    if (a_max < 0) throw std::invalid_argument("A_max must be >= 0");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
}

void GbpParams::validate(const UtilitySpec& utility) const {
    validate();
    if (std::abs(beta - utility.max_slope_at_zero()) > 1e-12) {
        throw std::invalid_argument("beta does not match the utility's largest slope at zero");
    }
}

namespace {

// Golden-section search for the maximizer of a concave function on [lo, hi].
template <class F>
double golden_max(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double mid = 0.5 * (a + b);
    // endpoints win when the optimum sits on the boundary
    double best = mid;
    double best_val = f(mid);
    for (double x : {lo, hi}) {
        const double v = f(x);
        if (v > best_val) {
            best = x;
            best_val = v;
        }
    }
    return best;
}

}  // namespace

double select_auxiliary(double H, const UtilitySpec& utility, int flow, const GbpParams& params) {
    const double cap = static_cast<double>(params.a_max);
    const double w = utility.weight(flow);
    if (w == 0.0 || cap == 0.0) return 0.0;
    if (H <= 0.0) return cap;
    if (utility.form() == UtilityForm::log1p) {
        // stationary point of V w log(1+g) - H g
        return std::clamp(params.V * w / H - 1.0, 0.0, cap);
    }
    auto objective = [&](double g) { return params.V * utility.value(flow, g) - H * g; };
    return golden_max(objective, 0.0, cap, 1e-9);
}

int admission_decide(double H, double regulation, double source_backlog, int arrivals) noexcept {
    return H - regulation - source_backlog > 0.0 ? arrivals : 0;
}

DivisionPressure module_pressure(const std::array<double, 4>& q) noexcept {
    return {0.5 * (q[0] + q[1]), 0.5 * (q[2] + q[3])};
}

DivisionPressure partition_pressure(const std::array<double, 2>& q) noexcept { return {q[0], q[1]}; }

LinkWeights link_weights(double own_upper, double own_lower, DivisionPressure downstream, double hop_offset) noexcept {
    auto weight = [&](double own, double down) {
        return own > 0.0 ? std::max(own + hop_offset - down, 0.0) : 0.0;
    };
    return {weight(own_upper, downstream.upper), weight(own_lower, downstream.lower)};
}

Grant schedule_link(LinkWeights w) noexcept {
    if (w.upper <= 0.0 && w.lower <= 0.0) return {};
    if (w.upper >= w.lower) return {true, false};
    return {false, true};
}

Grant partition_service(double d1, double d2) noexcept { return {d1 > 0.0, d2 > 0.0}; }

double compute_drift_bound_B(int n, int a_max) {
    if (n < 1) throw std::invalid_argument("order must be >= 1");
    const double p = std::ldexp(1.0, n);
    const double a2 = static_cast<double>(a_max) * static_cast<double>(a_max);
    return 0.5 * (p * (10.0 * n - 2.0) + a2 * (std::ldexp(1.0, 3 * n - 1) + std::ldexp(1.0, 2 * n + 1) +
                                                std::ldexp(1.0, 3 * n)));
}

double utility_lower_bound(double u_opt, const GbpParams& params, int n) {
    return u_opt - compute_drift_bound_B(n, params.a_max) / params.V - std::ldexp(1.0, n) * params.beta * params.eta;
}

namespace {

DivisionPressure pressure_at(const BenesTopology& topo, const QueueState& state, int node_index) {
    if (node_index < state.first_fifo_index()) {
        return module_pressure(state.module_count[static_cast<std::size_t>(node_index)]);
    }
    // first column past the controlled half is the partition column
    return partition_pressure(state.partition_count[static_cast<std::size_t>(node_index % topo.rows())]);
}

void decide_into(const BenesTopology& topo, const QueueState& state, const UtilitySpec& utility,
                 const GbpParams& params, const DecisionInputs& inputs, ControlAction& out) {
    const int servers = topo.servers();
    const auto flows = static_cast<std::size_t>(servers) * static_cast<std::size_t>(servers);
    if (inputs.arrivals.size() != flows || inputs.regulation_view.size() != static_cast<std::size_t>(servers)) {
        throw std::invalid_argument("decision inputs do not match topology");
    }
    const double hop_offset = inputs.bias_enhanced ? 1.0 : 0.0;

    out.gamma.resize(flows);
    out.admit.resize(flows);
    for (int s = 1; s <= servers; ++s) {
        const auto& backlog = state.source_count[static_cast<std::size_t>(s - 1)];
        for (int d = 1; d <= servers; ++d) {
            const auto f = static_cast<std::size_t>(flow_id(servers, s, d));
            const double H = state.admission[f];
            out.gamma[f] = select_auxiliary(H, utility, static_cast<int>(f), params);
            const double own = backlog[static_cast<std::size_t>(division_slot(division_of(d, servers)))];
            out.admit[f] = admission_decide(H, inputs.regulation_view[static_cast<std::size_t>(d - 1)], own,
                                            inputs.arrivals[f]);
        }
    }

    out.server.resize(static_cast<std::size_t>(servers));
    for (int s = 1; s <= servers; ++s) {
        const auto& own = state.source_count[static_cast<std::size_t>(s - 1)];
        const DivisionPressure down = pressure_at(topo, state, topo.index(topo.ingress(s)));
        out.server[static_cast<std::size_t>(s - 1)] = schedule_link(link_weights(own[0], own[1], down, hop_offset));
    }

    const int controlled = state.first_fifo_index();
    out.module.resize(static_cast<std::size_t>(controlled));
    for (int idx = 0; idx < controlled; ++idx) {
        const auto& q = state.module_count[static_cast<std::size_t>(idx)];
        auto& grants = out.module[static_cast<std::size_t>(idx)];
        for (Link l : {Link::a, Link::b}) {
            const DivisionPressure down = pressure_at(topo, state, topo.next_index(idx, l));
            const double own_upper = q[static_cast<std::size_t>(module_slot(Division::upper, l))];
            const double own_lower = q[static_cast<std::size_t>(module_slot(Division::lower, l))];
            grants[static_cast<std::size_t>(link_slot(l))] =
                schedule_link(link_weights(own_upper, own_lower, down, hop_offset));
        }
    }

    out.partition.resize(static_cast<std::size_t>(topo.rows()));
    for (int row = 0; row < topo.rows(); ++row) {
        const auto& d = state.partition_count[static_cast<std::size_t>(row)];
        out.partition[static_cast<std::size_t>(row)] = partition_service(d[0], d[1]);
    }
}

}  // namespace

ControlAction decide(const BenesTopology& topo, const QueueState& state, const UtilitySpec& utility,
                     const GbpParams& params, const DecisionInputs& inputs) {
    ControlAction out;
    decide_into(topo, state, utility, params, inputs, out);
    return out;
}

void decide(const BenesTopology& topo, const QueueState& state, const UtilitySpec& utility, const GbpParams& params,
            const DecisionInputs& inputs, ControlAction& out) {
    decide_into(topo, state, utility, params, inputs, out);
}

}  // namespace benes
