#pragma once

// Benes fabric wiring for a 2^n x 2^n network of 2x2 switch modules.
//
// All domain labels are 1-based: switch modules are addressed by
// (column, row) with column in 1..2n-1 and row in 1..2^{n-1}; input and
// output servers by their row in 1..2^n. Flat node indices (used on hot
// paths) are 0-based and column-major.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace benes {

// Outgoing link of a module: `a` leads to the next hop with the smaller row
// number (m_u), `b` to the one with the larger row (m_l).
enum class Link : std::uint8_t { a = 0, b = 1 };

constexpr int link_slot(Link l) noexcept { return static_cast<int>(l); }

struct NodeRef {
    int column = 0;
    int row = 0;

    friend bool operator==(const NodeRef&, const NodeRef&) = default;
    friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

enum class ServerSide : std::uint8_t { input, output };

struct ServerRef {
    ServerSide side = ServerSide::input;
    int row = 0;

    friend bool operator==(const ServerRef&, const ServerRef&) = default;
};

// Contiguous, inclusive range of output-server rows.
struct ReachSet {
    int first = 1;
    int last = 0;

    bool contains(int d) const noexcept { return d >= first && d <= last; }
    int size() const noexcept { return last >= first ? last - first + 1 : 0; }
    std::vector<int> outputs() const;

    friend bool operator==(const ReachSet&, const ReachSet&) = default;
};

// A module together with the outgoing link taken from it.
struct Hop {
    NodeRef node;
    Link link = Link::a;

    friend bool operator==(const Hop&, const Hop&) = default;
};

class BenesTopology {
public:
    // Throws std::invalid_argument for n < 1 or n > 20.
    static BenesTopology build(int n);

    int order() const noexcept { return n_; }
    int rows() const noexcept { return rows_; }
    int columns() const noexcept { return 2 * n_ - 1; }
    int servers() const noexcept { return 2 * rows_; }
    int partition_column() const noexcept { return n_; }
    int node_count() const noexcept { return rows_ * columns(); }

    bool contains(NodeRef m) const noexcept;
    int index(NodeRef m) const;
    NodeRef node(int index) const;

    bool is_partition(NodeRef m) const noexcept { return m.column == n_; }
    bool in_first_half(NodeRef m) const noexcept { return m.column < n_; }
    bool in_output_column(NodeRef m) const noexcept { return m.column == columns(); }

    // m_u / m_l. Throws for modules in the output column.
    NodeRef next(NodeRef m, Link l) const;
    // Flat-index variant; -1 in the output column.
    int next_index(int index, Link l) const noexcept { return next_[2 * index + link_slot(l)]; }

    // The two upstream modules of m with the link each uses to reach m.
    // Throws for column-1 modules (they are fed by input servers).
    std::array<Hop, 2> previous(NodeRef m) const;
    // M_m^u (l = a) or M_m^l (l = b): upstream modules whose link l reaches m.
    std::vector<NodeRef> previous_via(NodeRef m, Link l) const;

    // m(s): the column-1 module input server s attaches to.
    NodeRef ingress(int s) const;
    // Input servers 2i-1 and 2i attached to the column-1 module in row i.
    std::array<int, 2> attached_inputs(NodeRef m) const;
    // Output server reached by link l of an output-column module.
    int egress_server(NodeRef m, Link l) const;

    // O_m^a / O_m^b. Defined only for columns n..2n-1; throws otherwise.
    ReachSet reachable_outputs(NodeRef m, Link l) const;
    // Flat-index variant without bounds checks, for the simulator.
    ReachSet reachable_outputs_fast(int index, Link l) const noexcept {
        return reach_[2 * index + link_slot(l)];
    }

    // Second-half route from partition node m to output server d: n hops,
    // each choosing the link whose reach set contains d.
    std::vector<Hop> unique_path(NodeRef m, int d) const;

    // One line per directed link: "from_col from_row to_col to_row".
    // Input servers use column 0, output servers column 2n.
    void write_edge_list(std::ostream& out) const;

private:
    explicit BenesTopology(int n);
    void wire(int order, int row_offset, int column_offset);
    void connect(NodeRef from, Link l, NodeRef to);

    int n_ = 0;
    int rows_ = 0;
    std::vector<int> next_;                  // 2 per node, -1 in the output column
    std::vector<std::array<int, 2>> prev_;   // upstream node indices, -1 in column 1
    std::vector<std::array<Link, 2>> prev_link_;
    std::vector<int> prev_fill_;
    std::vector<ReachSet> reach_;            // 2 per node, empty for columns < n
};

}  // namespace benes
