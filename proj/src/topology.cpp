#include "benes/topology.hpp"

#include <ostream>
#include <stdexcept>
#include <string>

namespace benes {

std::vector<int> ReachSet::outputs() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (int d = first; d <= last; ++d) out.push_back(d);
    return out;
}

BenesTopology::BenesTopology(int n) : n_(n), rows_(1 << (n - 1)) {
    const auto count = static_cast<std::size_t>(node_count());
    next_.assign(2 * count, -1);
    prev_.assign(count, {-1, -1});
    prev_link_.assign(count, {Link::a, Link::a});
    prev_fill_.assign(count, 0);
    reach_.assign(2 * count, ReachSet{});
}

BenesTopology BenesTopology::build(int n) {
    if (n < 1 || n > 20) {
        throw std::invalid_argument("benes order must be in 1..20, got " + std::to_string(n));
    }
    BenesTopology topo(n);
    topo.wire(n, 0, 0);

    for (int idx = 0; idx < topo.node_count(); ++idx) {
        const NodeRef m = topo.node(idx);
        if (m.column > 1 && topo.prev_fill_[static_cast<std::size_t>(idx)] != 2) {
            throw std::logic_error("module without two upstream neighbours");
        }
        if (m.column < n) continue;
        // O_m^a, O_m^b for a module in column n + l
        const int l = m.column - n;
        const int span = 1 << (n - l);
        const int kappa = (m.row - 1) % (1 << l);
        topo.reach_[2 * static_cast<std::size_t>(idx)] = {kappa * span + 1, kappa * span + span / 2};
        topo.reach_[2 * static_cast<std::size_t>(idx) + 1] = {kappa * span + span / 2 + 1, (kappa + 1) * span};
    }
    return topo;
}

// Recursive construction: an order-k network occupying rows
// row_offset+1 .. row_offset+2^{k-1} and columns column_offset+1 .. column_offset+2k-1.
void BenesTopology::wire(int order, int row_offset, int column_offset) {
    if (order == 1) return;
    const int half = 1 << (order - 2);
    const int in_col = column_offset + 1;
    const int out_col = column_offset + 2 * order - 1;

    wire(order - 1, row_offset, column_offset + 1);
    wire(order - 1, row_offset + half, column_offset + 1);

    // k-th input module feeds the k-th input link of each subnetwork; that
    // link belongs to the subnetwork module in row ceil(k/2).
    for (int k = 1; k <= 2 * half; ++k) {
        const int sub_row = (k + 1) / 2;
        connect({in_col, row_offset + k}, Link::a, {in_col + 1, row_offset + sub_row});
        connect({in_col, row_offset + k}, Link::b, {in_col + 1, row_offset + half + sub_row});
    }

    // Subnetwork output links 2i-1 and 2i come from its last-column row i and
    // land on output modules 2i-1 and 2i.
    const int sub_last = out_col - 1;
    for (int i = 1; i <= half; ++i) {
        for (int base : {row_offset, row_offset + half}) {
            connect({sub_last, base + i}, Link::a, {out_col, row_offset + 2 * i - 1});
            connect({sub_last, base + i}, Link::b, {out_col, row_offset + 2 * i});
        }
    }
}

void BenesTopology::connect(NodeRef from, Link l, NodeRef to) {
    const int f = index(from);
    const int t = index(to);
    next_[2 * static_cast<std::size_t>(f) + static_cast<std::size_t>(link_slot(l))] = t;
    auto& fill = prev_fill_[static_cast<std::size_t>(t)];
    if (fill >= 2) throw std::logic_error("module with more than two upstream neighbours");
    prev_[static_cast<std::size_t>(t)][static_cast<std::size_t>(fill)] = f;
    prev_link_[static_cast<std::size_t>(t)][static_cast<std::size_t>(fill)] = l;
    ++fill;
}

bool BenesTopology::contains(NodeRef m) const noexcept {
    return m.column >= 1 && m.column <= columns() && m.row >= 1 && m.row <= rows_;
}

int BenesTopology::index(NodeRef m) const {
    if (!contains(m)) {
        throw std::out_of_range("node (" + std::to_string(m.column) + "," + std::to_string(m.row) +
                                ") outside order-" + std::to_string(n_) + " network");
    }
    return (m.column - 1) * rows_ + (m.row - 1);
}

NodeRef BenesTopology::node(int index) const {
    if (index < 0 || index >= node_count()) throw std::out_of_range("node index out of range");
    return {index / rows_ + 1, index % rows_ + 1};
}

NodeRef BenesTopology::next(NodeRef m, Link l) const {
    const int t = next_index(index(m), l);
    if (t < 0) throw std::invalid_argument("output-column modules feed servers, not modules");
    return node(t);
}

std::array<Hop, 2> BenesTopology::previous(NodeRef m) const {
    const auto idx = static_cast<std::size_t>(index(m));
    if (m.column == 1) throw std::invalid_argument("column-1 modules are fed by input servers");
    return {Hop{node(prev_[idx][0]), prev_link_[idx][0]}, Hop{node(prev_[idx][1]), prev_link_[idx][1]}};
}

std::vector<NodeRef> BenesTopology::previous_via(NodeRef m, Link l) const {
    std::vector<NodeRef> out;
    for (const Hop& h : previous(m)) {
        if (h.link == l) out.push_back(h.node);
    }
    return out;
}

NodeRef BenesTopology::ingress(int s) const {
    if (s < 1 || s > servers()) throw std::out_of_range("input server " + std::to_string(s));
    return {1, (s + 1) / 2};
}

std::array<int, 2> BenesTopology::attached_inputs(NodeRef m) const {
    index(m);
    if (m.column != 1) throw std::invalid_argument("only column-1 modules have attached input servers");
    return {2 * m.row - 1, 2 * m.row};
}

int BenesTopology::egress_server(NodeRef m, Link l) const {
    index(m);
    if (!in_output_column(m)) throw std::invalid_argument("only output-column modules feed output servers");
    return 2 * m.row - 1 + link_slot(l);
}

ReachSet BenesTopology::reachable_outputs(NodeRef m, Link l) const {
    const int idx = index(m);
    if (m.column < n_) {
        throw std::invalid_argument("reach sets are defined only for columns n..2n-1");
    }
    return reachable_outputs_fast(idx, l);
}

std::vector<Hop> BenesTopology::unique_path(NodeRef m, int d) const {
    if (!is_partition(m)) throw std::invalid_argument("unique paths start at partition nodes");
    if (d < 1 || d > servers()) throw std::out_of_range("output server " + std::to_string(d));
    std::vector<Hop> path;
    path.reserve(static_cast<std::size_t>(n_));
    int idx = index(m);
    for (int hop = 0; hop < n_; ++hop) {
        const Link l = reachable_outputs_fast(idx, Link::a).contains(d) ? Link::a : Link::b;
        path.push_back({node(idx), l});
        idx = next_index(idx, l);
    }
    return path;
}

void BenesTopology::write_edge_list(std::ostream& out) const {
    for (int s = 1; s <= servers(); ++s) {
        const NodeRef m = ingress(s);
        out << 0 << ' ' << s << ' ' << m.column << ' ' << m.row << '\n';
    }
    for (int idx = 0; idx < node_count(); ++idx) {
        const NodeRef m = node(idx);
        for (Link l : {Link::a, Link::b}) {
            if (in_output_column(m)) {
                out << m.column << ' ' << m.row << ' ' << 2 * n_ << ' ' << egress_server(m, l) << '\n';
            } else {
                const NodeRef t = node(next_index(idx, l));
                out << m.column << ' ' << m.row << ' ' << t.column << ' ' << t.row << '\n';
            }
        }
    }
}

}  // namespace benes
