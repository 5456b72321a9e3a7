#include "benes/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>

namespace benes {

std::string to_string(RegulationVariant v) {
    switch (v) {
        case RegulationVariant::exact: return "exact";
        case RegulationVariant::delayed_1x: return "delayed_1x";
        case RegulationVariant::delayed_5x: return "delayed_5x";
        case RegulationVariant::sparse_5x: return "sparse_5x";
    }
    return "?";
}

RegulationVariant parse_regulation_variant(const std::string& name) {
    for (auto v : {RegulationVariant::exact, RegulationVariant::delayed_1x, RegulationVariant::delayed_5x,
                   RegulationVariant::sparse_5x}) {
        if (to_string(v) == name) return v;
    }
    throw std::invalid_argument("unknown variant '" + name + "'");
}

std::int64_t regulation_lag_slot(RegulationVariant v, int n, std::int64_t t) noexcept {
    const std::int64_t hop = 2 * n - 1;
    switch (v) {
        case RegulationVariant::exact: return t;
        case RegulationVariant::delayed_1x: return t - hop;
        case RegulationVariant::delayed_5x: return t - 5 * hop;
        case RegulationVariant::sparse_5x: {
            const std::int64_t period = 5 * hop;
            const std::int64_t t0 = std::max<std::int64_t>((t / period - 1) * period, 1);
            // the refresh slot never lies in the future
            return std::min(t0, t);
        }
    }
    return t;
}

RegulationHistory::RegulationHistory(int n, int servers)
    : ring_(static_cast<std::size_t>(2 * 5 * (2 * n - 1) + 1), std::vector<double>(static_cast<std::size_t>(servers))),
      zeros_(static_cast<std::size_t>(servers), 0.0) {}

void RegulationHistory::push(std::int64_t t, const std::vector<double>& q) {
    if (t != latest_ + 1) throw std::logic_error("regulation history pushed out of order");
    if (q.size() != zeros_.size()) throw std::invalid_argument("regulation vector size mismatch");
    ring_[static_cast<std::size_t>(t % static_cast<std::int64_t>(ring_.size()))] = q;
    latest_ = t;
}

const std::vector<double>& RegulationHistory::at(std::int64_t t) const {
    if (t < 0) return zeros_;
    if (t > latest_ || latest_ - t >= static_cast<std::int64_t>(ring_.size())) {
        throw std::out_of_range("regulation history does not hold slot " + std::to_string(t));
    }
    return ring_[static_cast<std::size_t>(t % static_cast<std::int64_t>(ring_.size()))];
}

const std::vector<double>& regulation_view(const RegulationHistory& history, RegulationVariant v, int n,
                                           std::int64_t t) {
    return history.at(regulation_lag_slot(v, n, t));
}

void SimConfig::validate() const {
    if (n < 1 || n > 10) throw std::invalid_argument("n must lie in 1..10");
    if (slots < 1) throw std::invalid_argument("slots must be >= 1");
    const int servers = 1 << n;
    if (utility.servers() != servers) throw std::invalid_argument("utility does not match the network size");
    params.validate(utility);
    const auto flows = static_cast<std::size_t>(servers) * static_cast<std::size_t>(servers);
    if (traffic.model == TrafficConfig::Model::binomial) {
        auto check_rate = [&](double r) {
            if (!(r >= 0.0 && r <= params.a_max)) throw std::invalid_argument("arrival rate outside [0, A_max]");
        };
        if (traffic.rates.empty()) {
            check_rate(traffic.rate);
        } else {
            if (traffic.rates.size() != flows) throw std::invalid_argument("per-flow rate vector size mismatch");
            for (double r : traffic.rates) check_rate(r);
        }
    }
    if (utility_switch) {
        if (utility_switch->slot <= 0 || utility_switch->slot >= slots) {
            throw std::invalid_argument("utility switch slot must lie strictly inside the horizon");
        }
        if (utility_switch->utility.servers() != servers) {
            throw std::invalid_argument("switched utility does not match the network size");
        }
    }
}

std::uint64_t derive_seed(std::uint64_t master, const std::string& stream) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : stream) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return mix64(master ^ mix64(h));
}

namespace {

class Engine {
public:
    explicit Engine(const SimConfig& cfg)
        : cfg_(cfg),
          topo_(BenesTopology::build(cfg.n)),
          state_(topo_),
          history_(cfg.n, topo_.servers()),
          splitter_(derive_seed(cfg.seed, "splitters")),
          arrival_rng_(derive_seed(cfg.seed, "arrivals")),
          utility_(cfg.utility),
          params_(cfg.params),
          servers_(topo_.servers()),
          flows_(servers_ * servers_),
          rows_(topo_.rows()),
          first_fifo_(state_.first_fifo_index()),
          staged_count_(static_cast<std::size_t>(first_fifo_ + rows_), {0.0, 0.0}),
          staged_packets_(static_cast<std::size_t>(first_fifo_ + rows_)),
          arrivals_(static_cast<std::size_t>(flows_), 0),
          delivered_to_(static_cast<std::size_t>(servers_), 0) {
        if (cfg.traffic.model == TrafficConfig::Model::binomial) {
            for (int f = 0; f < flows_; ++f) {
                const double mean = cfg.traffic.rates.empty() ? cfg.traffic.rate
                                                               : cfg.traffic.rates[static_cast<std::size_t>(f)];
                const double p = params_.a_max > 0 ? mean / params_.a_max : 0.0;
                binomial_.emplace_back(params_.a_max, std::clamp(p, 0.0, 1.0));
            }
        }
        rep_.n = cfg.n;
        rep_.slots = cfg.slots;
        rep_.admitted.assign(static_cast<std::size_t>(flows_), 0);
        rep_.delivered.assign(static_cast<std::size_t>(flows_), 0);
        rep_.partition_arrivals.assign(static_cast<std::size_t>(flows_) * static_cast<std::size_t>(rows_), 0);
        rep_.module_grants.assign(static_cast<std::size_t>(first_fifo_), {0, 0, 0, 0});
        rep_.min_slack.fill(std::numeric_limits<double>::infinity());
        history_.push(0, state_.regulation);
        bounds_ = queue_bounds(params_, cfg.n);
    }

    MetricsReport run() {
        std::int64_t phase_begin = 0;
        std::vector<std::int64_t> phase_admitted(static_cast<std::size_t>(flows_), 0);
        std::int64_t delay_sum = 0;

        for (std::int64_t t = 0; t < cfg_.slots; ++t) {
            if (cfg_.utility_switch && t == cfg_.utility_switch->slot) {
                close_phase(phase_begin, t, phase_admitted);
                phase_begin = t;
                utility_ = cfg_.utility_switch->utility;
                params_.beta = utility_.max_slope_at_zero();
                bounds_ = queue_bounds(params_, cfg_.n);
            }
            draw_arrivals();
            const std::vector<double>& view = cfg_.variant == RegulationVariant::exact
                                                  ? state_.regulation
                                                  : regulation_view(history_, cfg_.variant, cfg_.n, t);
            decide(topo_, state_, utility_, params_, {arrivals_, view, cfg_.bias_enhanced}, act_);

            std::fill(delivered_to_.begin(), delivered_to_.end(), 0);
            serve_first_half();
            delay_sum += serve_second_half(t);
            land_staged(t);
            admit(t, phase_admitted);
            update_virtual_queues();
            history_.push(t + 1, state_.regulation);
            observe(t);
        }
        close_phase(phase_begin, cfg_.slots, phase_admitted);

        rep_.rate.resize(static_cast<std::size_t>(flows_));
        rep_.flow_utility.resize(static_cast<std::size_t>(flows_));
        const double T = static_cast<double>(cfg_.slots);
        for (int f = 0; f < flows_; ++f) {
            const auto i = static_cast<std::size_t>(f);
            rep_.rate[i] = static_cast<double>(rep_.admitted[i]) / T;
        }
        if (rep_.phases.size() == 1) {
            rep_.flow_utility.clear();
            for (int f = 0; f < flows_; ++f) rep_.flow_utility.push_back(utility_.value(f, rep_.rate[static_cast<std::size_t>(f)]));
            rep_.total_utility = rep_.phases.front().utility;
        } else {
            // time-weighted utility of the phases
            std::fill(rep_.flow_utility.begin(), rep_.flow_utility.end(), 0.0);
            rep_.total_utility = 0.0;
            for (std::size_t k = 0; k < rep_.phases.size(); ++k) {
                const auto& ph = rep_.phases[k];
                const double share = static_cast<double>(ph.end - ph.begin) / T;
                const UtilitySpec& u = k == 0 ? cfg_.utility : cfg_.utility_switch->utility;
                for (int f = 0; f < flows_; ++f) {
                    rep_.flow_utility[static_cast<std::size_t>(f)] +=
                        share * u.value(f, ph.rate[static_cast<std::size_t>(f)]);
                }
                rep_.total_utility += share * ph.utility;
            }
        }
        rep_.delivery_fraction =
            rep_.admitted_total > 0 ? static_cast<double>(rep_.delivered_total) / rep_.admitted_total : 1.0;
        rep_.avg_delay = rep_.delivered_total > 0 ? static_cast<double>(delay_sum) / rep_.delivered_total : 0.0;
        return std::move(rep_);
    }

private:
    void draw_arrivals() {
        if (cfg_.traffic.model == TrafficConfig::Model::deterministic) {
            std::fill(arrivals_.begin(), arrivals_.end(), params_.a_max);
            return;
        }
        for (std::size_t f = 0; f < arrivals_.size(); ++f) arrivals_[f] = binomial_[f](arrival_rng_);
    }

    void stage(int node, Division div, double amount, PacketQueue& src) {
        const auto k = static_cast<std::size_t>(division_slot(div));
        staged_count_[static_cast<std::size_t>(node)][k] += amount;
        if (!src.empty()) {
            staged_packets_[static_cast<std::size_t>(node)][k].push_back(src.front());
            src.pop_front();
        }
    }

    // Servers and columns 1..n-1 follow the fictitious grants; the partition
    // counters drain toward D1/D2.
    void serve_first_half() {
        for (int s = 1; s <= servers_; ++s) {
            const Grant g = act_.server[static_cast<std::size_t>(s - 1)];
            if (!g.upper && !g.lower) continue;
            auto& count = state_.source_count[static_cast<std::size_t>(s - 1)];
            auto& packets = state_.source_packets[static_cast<std::size_t>(s - 1)];
            const int node = topo_.index(topo_.ingress(s));
            const Division div = g.upper ? Division::upper : Division::lower;
            const auto k = static_cast<std::size_t>(division_slot(div));
            const double moved = std::min(1.0, count[k]);
            count[k] -= moved;
            stage(node, div, moved, packets[k]);
        }
        for (int idx = 0; idx < first_fifo_; ++idx) {
            auto& count = state_.module_count[static_cast<std::size_t>(idx)];
            auto& packets = state_.module_packets[static_cast<std::size_t>(idx)];
            for (Link l : {Link::a, Link::b}) {
                const Grant g = act_.module[static_cast<std::size_t>(idx)][static_cast<std::size_t>(link_slot(l))];
                if (!g.upper && !g.lower) continue;
                const Division div = g.upper ? Division::upper : Division::lower;
                const auto slot = static_cast<std::size_t>(module_slot(div, l));
                const double moved = std::min(1.0, count[slot]);
                count[slot] -= moved;
                ++rep_.module_grants[static_cast<std::size_t>(idx)][slot];
                stage(topo_.next_index(idx, l), div, moved, packets[slot]);
            }
        }
        for (int row = 0; row < rows_; ++row) {
            auto& d = state_.partition_count[static_cast<std::size_t>(row)];
            const Grant g = act_.partition[static_cast<std::size_t>(row)];
            d[0] = step_counter_queue(d[0], g.upper ? 1.0 : 0.0, 0.0);
            d[1] = step_counter_queue(d[1], g.lower ? 1.0 : 0.0, 0.0);
        }
    }

    // Free-flow FIFOs in columns n..2n-1; returns the summed delay of packets
    // delivered this slot.
    std::int64_t serve_second_half(std::int64_t t) {
        std::int64_t delay = 0;
        fifo_moves_.clear();
        const int last_column = topo_.columns();
        for (int idx = first_fifo_; idx < topo_.node_count(); ++idx) {
            auto& pair = state_.fifo_at(idx);
            const bool exits = idx / rows_ + 1 == last_column;
            for (Link l : {Link::a, Link::b}) {
                auto& q = pair[static_cast<std::size_t>(link_slot(l))];
                if (q.empty()) continue;
                const Packet p = q.front();
                q.pop_front();
                if (!exits) {
                    fifo_moves_.emplace_back(topo_.next_index(idx, l), p);
                    continue;
                }
                const int exit_server = topo_.egress_server(topo_.node(idx), l);
                if (exit_server != p.dest) {
                    throw std::logic_error("packet for output " + std::to_string(p.dest) + " left at output " +
                                           std::to_string(exit_server));
                }
                const auto f = static_cast<std::size_t>(flow_id(servers_, p.source, p.dest));
                ++rep_.delivered[f];
                ++rep_.delivered_total;
                ++delivered_to_[static_cast<std::size_t>(p.dest - 1)];
                delay += t - p.admit_slot;
            }
        }
        return delay;
    }

    void place_in_fifo(int node, const Packet& p) {
        const Link l = topo_.reachable_outputs_fast(node, Link::a).contains(p.dest) ? Link::a : Link::b;
        state_.fifo_at(node)[static_cast<std::size_t>(link_slot(l))].push_back(p);
    }

    void land_staged(std::int64_t t) {
        for (int node = 0; node < first_fifo_; ++node) {
            auto& count = staged_count_[static_cast<std::size_t>(node)];
            auto& packets = staged_packets_[static_cast<std::size_t>(node)];
            if (count[0] == 0.0 && count[1] == 0.0 && packets[0].empty() && packets[1].empty()) continue;
            // one fair draw per division per node per slot routes the whole batch
            const SplitBits bits = splitter_.draw(node, t);
            auto& q = state_.module_count[static_cast<std::size_t>(node)];
            auto& pq = state_.module_packets[static_cast<std::size_t>(node)];
            const auto upper_to = static_cast<std::size_t>(module_slot(Division::upper, bits.x ? Link::a : Link::b));
            const auto lower_to = static_cast<std::size_t>(module_slot(Division::lower, bits.y ? Link::a : Link::b));
            q[upper_to] += count[0];
            q[lower_to] += count[1];
            for (const Packet& p : packets[0]) pq[upper_to].push_back(p);
            for (const Packet& p : packets[1]) pq[lower_to].push_back(p);
            count = {0.0, 0.0};
            packets[0].clear();
            packets[1].clear();
        }
        for (int row = 0; row < rows_; ++row) {
            const int node = first_fifo_ + row;
            auto& count = staged_count_[static_cast<std::size_t>(node)];
            auto& packets = staged_packets_[static_cast<std::size_t>(node)];
            auto& d = state_.partition_count[static_cast<std::size_t>(row)];
            d[0] += count[0];
            d[1] += count[1];
            for (auto& batch : packets) {
                for (const Packet& p : batch) {
                    const auto f = static_cast<std::size_t>(flow_id(servers_, p.source, p.dest));
                    ++rep_.partition_arrivals[f * static_cast<std::size_t>(rows_) + static_cast<std::size_t>(row)];
                    place_in_fifo(node, p);
                }
                batch.clear();
            }
            count = {0.0, 0.0};
        }
        for (const auto& [node, p] : fifo_moves_) place_in_fifo(node, p);
    }

    void admit(std::int64_t t, std::vector<std::int64_t>& phase_admitted) {
        for (int s = 1; s <= servers_; ++s) {
            auto& count = state_.source_count[static_cast<std::size_t>(s - 1)];
            auto& packets = state_.source_packets[static_cast<std::size_t>(s - 1)];
            for (int d = 1; d <= servers_; ++d) {
                const auto f = static_cast<std::size_t>(flow_id(servers_, s, d));
                const int r = act_.admit[f];
                if (r == 0) continue;
                const auto k = static_cast<std::size_t>(division_slot(division_of(d, servers_)));
                count[k] += r;
                for (int i = 0; i < r; ++i) packets[k].push_back({s, d, t});
                rep_.admitted[f] += r;
                phase_admitted[f] += r;
                rep_.admitted_total += r;
            }
        }
    }

    void update_virtual_queues() {
        for (int f = 0; f < flows_; ++f) {
            const auto i = static_cast<std::size_t>(f);
            state_.admission[i] = step_counter_queue(state_.admission[i], act_.admit[i], act_.gamma[i]);
        }
        const double service = 1.0 - params_.eta;
        for (int d = 1; d <= servers_; ++d) {
            double input = 0.0;
            if (cfg_.variant == RegulationVariant::exact) {
                for (int s = 1; s <= servers_; ++s) input += act_.admit[static_cast<std::size_t>(flow_id(servers_, s, d))];
            } else {
                input = delivered_to_[static_cast<std::size_t>(d - 1)];
            }
            auto& q = state_.regulation[static_cast<std::size_t>(d - 1)];
            q = step_counter_queue(q, service, input);
        }
    }

    void note_violation(const std::string& what, std::int64_t t) {
        if (rep_.first_violation.empty()) rep_.first_violation = "slot " + std::to_string(t) + ": " + what;
    }

    void observe(std::int64_t t) {
        const auto maxima = family_maxima(state_);
        const auto slack = bound_slack(topo_, state_, bounds_);
        for (std::size_t k = 0; k < kQueueFamilies; ++k) {
            rep_.max_queue[k] = std::max(rep_.max_queue[k], maxima[k]);
            const bool regulation = k == static_cast<std::size_t>(QueueFamily::regulation);
            // delivery-fed regulation queues carry no deterministic bound
            if (regulation && cfg_.variant != RegulationVariant::exact) continue;
            rep_.min_slack[k] = std::min(rep_.min_slack[k], slack[k]);
            if (cfg_.check_invariants && slack[k] < 0.0) {
                ++rep_.bound_violations;
                note_violation(to_string(static_cast<QueueFamily>(k)) + " bound exceeded", t);
            }
        }

        std::int64_t backlog = -1;
        if (cfg_.check_invariants) {
            backlog = state_.physical_backlog();
            if (backlog != rep_.admitted_total - rep_.delivered_total) {
                ++rep_.conservation_failures;
                note_violation("packet conservation broken", t);
            }
            check_domination(t);
            if (t % 1000 == 0) check_placement(t);
        }
        if (cfg_.record_timeseries) {
            if (backlog < 0) backlog = state_.physical_backlog();
            rep_.timeseries.push_back(
                {t, backlog, state_.fictitious_backlog(), rep_.admitted_total, rep_.delivered_total});
        }
    }

    void check_domination(std::int64_t t) {
        for (std::size_t s = 0; s < state_.source_count.size(); ++s) {
            for (std::size_t k = 0; k < 2; ++k) {
                if (static_cast<double>(state_.source_packets[s][k].size()) > state_.source_count[s][k]) {
                    ++rep_.domination_failures;
                    note_violation("physical source queue exceeds its counter", t);
                }
            }
        }
        for (std::size_t idx = 0; idx < state_.module_count.size(); ++idx) {
            for (std::size_t k = 0; k < 4; ++k) {
                if (static_cast<double>(state_.module_packets[idx][k].size()) > state_.module_count[idx][k]) {
                    ++rep_.domination_failures;
                    note_violation("physical module queue exceeds its counter", t);
                }
            }
        }
    }

    void check_placement(std::int64_t t) {
        for (int idx = first_fifo_; idx < topo_.node_count(); ++idx) {
            const auto& pair = state_.fifo_at(idx);
            for (Link l : {Link::a, Link::b}) {
                const ReachSet reach = topo_.reachable_outputs_fast(idx, l);
                for (const Packet& p : pair[static_cast<std::size_t>(link_slot(l))]) {
                    if (!reach.contains(p.dest)) {
                        ++rep_.placement_failures;
                        note_violation("packet queued toward a link that cannot reach it", t);
                    }
                }
            }
        }
    }

    void close_phase(std::int64_t begin, std::int64_t end, std::vector<std::int64_t>& admitted) {
        if (end <= begin) return;
        PhaseMetrics ph;
        ph.begin = begin;
        ph.end = end;
        ph.rate.resize(admitted.size());
        for (std::size_t f = 0; f < admitted.size(); ++f) {
            ph.rate[f] = static_cast<double>(admitted[f]) / static_cast<double>(end - begin);
        }
        ph.utility = utility_.total(ph.rate);
        rep_.phases.push_back(std::move(ph));
        std::fill(admitted.begin(), admitted.end(), 0);
    }

    const SimConfig& cfg_;
    BenesTopology topo_;
    QueueState state_;
    RegulationHistory history_;
    SplitterStream splitter_;
    std::mt19937_64 arrival_rng_;
    std::vector<std::binomial_distribution<int>> binomial_;
    UtilitySpec utility_;
    GbpParams params_;
    QueueBounds bounds_;
    int servers_;
    int flows_;
    int rows_;
    int first_fifo_;

    ControlAction act_;
    std::vector<std::array<double, 2>> staged_count_;
    std::vector<std::array<std::vector<Packet>, 2>> staged_packets_;
    std::vector<std::pair<int, Packet>> fifo_moves_;
    std::vector<int> arrivals_;
    std::vector<int> delivered_to_;
    MetricsReport rep_;
};

}  // namespace

MetricsReport run(const SimConfig& config) {
    config.validate();
    Engine engine(config);
    return engine.run();
}

SwitchOutcome run_utility_switch(SimConfig config) {
    const int servers = 1 << config.n;
    std::mt19937_64 rng(derive_seed(config.seed, "weights"));
    std::uniform_int_distribution<int> pick(1, 3);
    std::vector<double> weights(static_cast<std::size_t>(servers) * static_cast<std::size_t>(servers));
    for (double& w : weights) w = pick(rng);
    config.utility_switch = UtilitySwitch{config.slots / 2, UtilitySpec(UtilityForm::log1p, servers, weights)};
    SwitchOutcome out;
    out.report = run(config);
    out.weights = std::move(weights);
    return out;
}

std::vector<ScalingRow> run_scaling_experiment(const std::vector<int>& orders, const SimConfig& base) {
    std::vector<std::future<MetricsReport>> plain;
    std::vector<std::future<MetricsReport>> biased;
    std::vector<SimConfig> configs;
    configs.reserve(orders.size() * 2);
    for (int n : orders) {
        SimConfig c = base;
        c.n = n;
        c.utility = UtilitySpec::uniform_log(1 << n);
        c.params.beta = c.utility.max_slope_at_zero();
        c.utility_switch.reset();
        c.bias_enhanced = false;
        configs.push_back(c);
        c.bias_enhanced = true;
        configs.push_back(c);
    }
    for (std::size_t i = 0; i < configs.size(); i += 2) {
        plain.push_back(std::async(std::launch::async, [&configs, i] { return run(configs[i]); }));
        biased.push_back(std::async(std::launch::async, [&configs, i] { return run(configs[i + 1]); }));
    }
    std::vector<ScalingRow> rows;
    for (std::size_t k = 0; k < orders.size(); ++k) {
        ScalingRow row;
        row.n = orders[k];
        row.delay = plain[k].get().avg_delay;
        row.delay_biased = biased[k].get().avg_delay;
        row.ratio = row.delay / (static_cast<double>(row.n) * row.n);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace benes
