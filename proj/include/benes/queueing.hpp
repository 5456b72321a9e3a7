#pragma once

// Queue families of the fictitious and physical systems.
//
// The fictitious system keeps real-valued counters for the input servers,
// the four-queue modules of columns 1..n-1 and the D1/D2 queues of the
// partition nodes. The physical system holds packets: the same input-server
// and four-queue families, plus a FIFO pair per module in columns n..2n-1.
// The admission queues H and regulation queues q are virtual counters.

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "benes/topology.hpp"

namespace benes {

struct Packet {
    int source = 0;
    int dest = 0;
    std::int64_t admit_slot = 0;
};

using PacketQueue = std::deque<Packet>;

enum class Division : std::uint8_t { upper = 0, lower = 1 };

constexpr int division_slot(Division d) noexcept { return static_cast<int>(d); }
constexpr Division division_of(int dest, int servers) noexcept {
    return dest <= servers / 2 ? Division::upper : Division::lower;
}

// Four-queue module slots: UU, UL, LU, LL. The first letter is the division,
// the second the outgoing link (U -> a toward m_u, L -> b toward m_l).
enum class ModuleQueue : std::uint8_t { uu = 0, ul = 1, lu = 2, ll = 3 };

constexpr int module_slot(Division div, Link link) noexcept {
    return 2 * division_slot(div) + link_slot(link);
}

// [Q - service]^+ + arrivals
constexpr double step_counter_queue(double q, double service, double arrivals) noexcept {
    return (q > service ? q - service : 0.0) + arrivals;
}

// Moves up to `grant` head packets out of src, handing each to `place`.
// Returns the number moved; an empty source wastes the grant.
template <class Place>
int transfer_packets(PacketQueue& src, int grant, Place&& place) {
    int moved = 0;
    while (moved < grant && !src.empty()) {
        Packet p = src.front();
        src.pop_front();
        place(p);
        ++moved;
    }
    return moved;
}

struct SplitBits {
    bool x = false;  // upper-division batch -> UU when set, else UL
    bool y = false;  // lower-division batch -> LU when set, else LL
};

// Fair splitter bits per (module, slot). Stateless: the bits are a hash of
// (seed, module, slot), so distinct modules get independent streams and the
// same seed reproduces the same sequence.
class SplitterStream {
public:
    explicit SplitterStream(std::uint64_t seed) : seed_(seed) {}
    SplitBits draw(int node_index, std::int64_t slot) const noexcept;

private:
    std::uint64_t seed_;
};

std::uint64_t mix64(std::uint64_t x) noexcept;

class QueueState {
public:
    explicit QueueState(const BenesTopology& topo);

    int order() const noexcept { return order_; }
    int rows() const noexcept { return rows_; }
    int servers() const noexcept { return 2 * rows_; }

    // fictitious counters
    std::vector<std::array<double, 2>> source_count;     // per input server: [U, L]
    std::vector<std::array<double, 4>> module_count;     // columns 1..n-1 by flat index
    std::vector<std::array<double, 2>> partition_count;  // per partition row: [D1, D2]

    // physical packets
    std::vector<std::array<PacketQueue, 2>> source_packets;
    std::vector<std::array<PacketQueue, 4>> module_packets;
    std::vector<std::array<PacketQueue, 2>> fifo;        // columns n..2n-1, offset by rows*(n-1)

    // virtual queues
    std::vector<double> admission;   // H per flow id
    std::vector<double> regulation;  // q per output server, indexed d-1

    std::array<PacketQueue, 2>& fifo_at(int node_index) {
        return fifo[static_cast<std::size_t>(node_index - first_fifo_index_)];
    }
    const std::array<PacketQueue, 2>& fifo_at(int node_index) const {
        return fifo[static_cast<std::size_t>(node_index - first_fifo_index_)];
    }
    int first_fifo_index() const noexcept { return first_fifo_index_; }

    std::int64_t physical_backlog() const;
    double fictitious_backlog() const;

private:
    int order_;
    int rows_;
    int first_fifo_index_;
};

}  // namespace benes
