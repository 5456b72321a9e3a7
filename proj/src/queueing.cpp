#include "benes/queueing.hpp"

namespace benes {

std::uint64_t mix64(std::uint64_t x) noexcept {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SplitBits SplitterStream::draw(int node_index, std::int64_t slot) const noexcept {
    const std::uint64_t h =
        mix64(mix64(seed_ ^ 0x5851f42d4c957f2dULL) ^ mix64(static_cast<std::uint64_t>(node_index) << 1) ^
              static_cast<std::uint64_t>(slot) * 0xd1342543de82ef95ULL);
    return {(h & 1ULL) != 0, (h & 2ULL) != 0};
}

QueueState::QueueState(const BenesTopology& topo)
    : order_(topo.order()), rows_(topo.rows()), first_fifo_index_(topo.rows() * (topo.order() - 1)) {
    const auto servers = static_cast<std::size_t>(topo.servers());
    const auto first_half = static_cast<std::size_t>(first_fifo_index_);
    const auto second_half = static_cast<std::size_t>(topo.node_count() - first_fifo_index_);
    source_count.assign(servers, {0.0, 0.0});
    module_count.assign(first_half, {0.0, 0.0, 0.0, 0.0});
    partition_count.assign(static_cast<std::size_t>(rows_), {0.0, 0.0});
    source_packets.resize(servers);
    module_packets.resize(first_half);
    fifo.resize(second_half);
    admission.assign(servers * servers, 0.0);
    regulation.assign(servers, 0.0);
}

std::int64_t QueueState::physical_backlog() const {
    std::int64_t total = 0;
    for (const auto& q : source_packets) total += static_cast<std::int64_t>(q[0].size() + q[1].size());
    for (const auto& q : module_packets) {
        for (const auto& x : q) total += static_cast<std::int64_t>(x.size());
    }
    for (const auto& q : fifo) total += static_cast<std::int64_t>(q[0].size() + q[1].size());
    return total;
}

double QueueState::fictitious_backlog() const {
    double total = 0.0;
    for (const auto& q : source_count) total += q[0] + q[1];
    for (const auto& q : module_count) total += q[0] + q[1] + q[2] + q[3];
    for (const auto& q : partition_count) total += q[0] + q[1];
    return total;
}

}  // namespace benes
