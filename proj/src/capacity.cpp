#include "benes/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace benes {

RateMatrix::RateMatrix(int servers, double fill)
    : size_(servers), values_(static_cast<std::size_t>(servers) * static_cast<std::size_t>(servers), fill) {
    if (servers < 1) throw std::invalid_argument("rate matrix needs at least one server");
}

std::size_t RateMatrix::offset(int s, int d) const {
    if (s < 1 || s > size_ || d < 1 || d > size_) throw std::out_of_range("rate matrix index");
    return static_cast<std::size_t>(s - 1) * static_cast<std::size_t>(size_) + static_cast<std::size_t>(d - 1);
}

double RateMatrix::row_sum(int s) const {
    double sum = 0.0;
    for (int d = 1; d <= size_; ++d) sum += at(s, d);
    return sum;
}

double RateMatrix::column_sum(int d) const {
    double sum = 0.0;
    for (int s = 1; s <= size_; ++s) sum += at(s, d);
    return sum;
}

RateMatrix RateMatrix::scaled(double factor) const {
    RateMatrix out = *this;
    for (double& v : out.values_) v *= factor;
    return out;
}

RateProfile RateProfile::zero(const BenesTopology& topo) {
    RateProfile p;
    p.order = topo.order();
    p.server.assign(static_cast<std::size_t>(topo.servers()), {});
    p.module.assign(static_cast<std::size_t>(topo.rows() * (topo.order() - 1)), {});
    p.to_d1.assign(static_cast<std::size_t>(topo.rows()), {});
    p.to_d2.assign(static_cast<std::size_t>(topo.rows()), {});
    return p;
}

std::string to_string(ProfileConstraint c) {
    switch (c) {
        case ProfileConstraint::source_coverage: return "source_coverage";
        case ProfileConstraint::conservation: return "conservation";
        case ProfileConstraint::link_capacity: return "link_capacity";
        case ProfileConstraint::nonnegativity: return "nonnegativity";
        case ProfileConstraint::exit_purity: return "exit_purity";
        case ProfileConstraint::symmetry: return "symmetry";
    }
    return "?";
}

bool in_capacity_region(const RateMatrix& r, int n, double slack) {
    if (n < 1 || r.size() != (1 << n)) throw std::invalid_argument("rate matrix is not 2^n x 2^n");
    if (slack < 0.0 || slack >= 1.0) throw std::invalid_argument("slack must be in [0, 1)");
    for (double v : r.values()) {
        if (v < 0.0) return false;
    }
    for (int i = 1; i <= r.size(); ++i) {
        if (r.row_sum(i) > 1.0) return false;
        if (r.column_sum(i) > 1.0 - slack) return false;
    }
    return true;
}

namespace {

struct Split {
    double upper = 0.0;
    double lower = 0.0;
};

// Upper/lower-division load offered by a pair of consecutive input ports.
Split port_pair_load(const RateMatrix& r, int first_port) {
    const int half = r.size() / 2;
    Split out;
    for (int s = first_port; s <= first_port + 1; ++s) {
        for (int d = 1; d <= r.size(); ++d) (d <= half ? out.upper : out.lower) += r.at(s, d);
    }
    return out;
}

void split_first_column(RateProfile& p, const BenesTopology& topo, const RateMatrix& r, int row_offset,
                        int column_offset) {
    for (int i = 1; i <= r.size() / 2; ++i) {
        const Split load = port_pair_load(r, 2 * i - 1);
        const auto idx = static_cast<std::size_t>(topo.index({column_offset + 1, row_offset + i}));
        const DivisionRates half_load{load.upper / 2.0, load.lower / 2.0};
        p.module[idx] = {half_load, half_load};
    }
}

// Order-2 (4x4) subnetwork: explicit base-case allocation.
void allocate_base(RateProfile& p, const BenesTopology& topo, const RateMatrix& r, int row_offset,
                   int column_offset) {
    split_first_column(p, topo, r, row_offset, column_offset);
    double upper_total = 0.0;
    double lower_total = 0.0;
    for (int s = 1; s <= 4; ++s) {
        upper_total += r.at(s, 1) + r.at(s, 2);
        lower_total += r.at(s, 3) + r.at(s, 4);
    }
    for (int i = 1; i <= 2; ++i) {
        const auto row = static_cast<std::size_t>(row_offset + i - 1);
        p.to_d1[row] = {upper_total / 2.0, 0.0};
        p.to_d2[row] = {0.0, lower_total / 2.0};
    }
}

void allocate(RateProfile& p, const BenesTopology& topo, const RateMatrix& r, int order, int row_offset,
              int column_offset) {
    if (order == 2) {
        allocate_base(p, topo, r, row_offset, column_offset);
        return;
    }
    split_first_column(p, topo, r, row_offset, column_offset);

    // Subnetwork port s' carries half of the traffic of ports 2s'-1, 2s';
    // subnetwork output d' stands for outputs 2d'-1, 2d'.
    const int sub = r.size() / 2;
    RateMatrix inner(sub);
    for (int s = 1; s <= sub; ++s) {
        for (int d = 1; d <= sub; ++d) {
            inner.at(s, d) = 0.5 * (r.at(2 * s - 1, 2 * d - 1) + r.at(2 * s - 1, 2 * d) + r.at(2 * s, 2 * d - 1) +
                                    r.at(2 * s, 2 * d));
        }
    }
    const int sub_rows = 1 << (order - 2);
    allocate(p, topo, inner, order - 1, row_offset, column_offset + 1);
    allocate(p, topo, inner, order - 1, row_offset + sub_rows, column_offset + 1);
}

}  // namespace

RateProfile build_stabilizing_profile(const RateMatrix& r, const BenesTopology& topo) {
    const int n = topo.order();
    if (r.size() != topo.servers()) throw std::invalid_argument("rate matrix does not match topology");
    if (!in_capacity_region(r, n, 0.0)) throw std::invalid_argument("rate matrix lies outside the capacity region");

    RateProfile p = RateProfile::zero(topo);
    const int half = topo.servers() / 2;
    for (int s = 1; s <= topo.servers(); ++s) {
        auto& link = p.server[static_cast<std::size_t>(s - 1)];
        for (int d = 1; d <= topo.servers(); ++d) (d <= half ? link.upper : link.lower) += r.at(s, d);
    }

    if (n == 1) {
        p.to_d1[0] = {r.column_sum(1), 0.0};
        p.to_d2[0] = {0.0, r.column_sum(2)};
        return p;
    }
    allocate(p, topo, r, n, 0, 0);
    return p;
}

std::vector<ProfileViolation> verify_profile(const RateProfile& p, const RateMatrix& r, const BenesTopology& topo,
                                             double tolerance) {
    const int n = topo.order();
    if (p.order != n || r.size() != topo.servers() || p.server.size() != static_cast<std::size_t>(topo.servers()) ||
        p.module.size() != static_cast<std::size_t>(topo.rows() * (n - 1)) ||
        p.to_d1.size() != static_cast<std::size_t>(topo.rows()) || p.to_d2.size() != p.to_d1.size()) {
        throw std::invalid_argument("profile dimensions do not match topology");
    }

    std::vector<ProfileViolation> out;
    auto report = [&](ProfileConstraint c, std::string where, double excess) {
        if (excess > tolerance) out.push_back({c, std::move(where), excess});
    };
    auto check_link = [&](const DivisionRates& rates, const std::string& where) {
        report(ProfileConstraint::nonnegativity, where, -rates.upper);
        report(ProfileConstraint::nonnegativity, where, -rates.lower);
        report(ProfileConstraint::link_capacity, where, rates.upper + rates.lower - 1.0);
    };
    auto label = [](NodeRef m) { return "(" + std::to_string(m.column) + "," + std::to_string(m.row) + ")"; };

    const int half = topo.servers() / 2;
    for (int s = 1; s <= topo.servers(); ++s) {
        const auto& link = p.server[static_cast<std::size_t>(s - 1)];
        const std::string where = "server " + std::to_string(s);
        check_link(link, where);
        double upper = 0.0;
        double lower = 0.0;
        for (int d = 1; d <= topo.servers(); ++d) (d <= half ? upper : lower) += r.at(s, d);
        report(ProfileConstraint::source_coverage, where, upper - link.upper);
        report(ProfileConstraint::source_coverage, where, lower - link.lower);
    }

    for (int column = 1; column <= n; ++column) {
        for (int row = 1; row <= topo.rows(); ++row) {
            const NodeRef m{column, row};
            const auto idx = static_cast<std::size_t>(topo.index(m));

            DivisionRates inflow;
            if (column == 1) {
                for (int s : topo.attached_inputs(m)) {
                    inflow.upper += p.server[static_cast<std::size_t>(s - 1)].upper;
                    inflow.lower += p.server[static_cast<std::size_t>(s - 1)].lower;
                }
            } else {
                for (const Hop& h : topo.previous(m)) {
                    const auto& link = p.module[static_cast<std::size_t>(topo.index(h.node))][link_slot(h.link)];
                    inflow.upper += link.upper;
                    inflow.lower += link.lower;
                }
            }

            DivisionRates outflow;
            if (column < n) {
                const auto& links = p.module[idx];
                check_link(links[0], label(m) + " link a");
                check_link(links[1], label(m) + " link b");
                outflow = {links[0].upper + links[1].upper, links[0].lower + links[1].lower};
                report(ProfileConstraint::symmetry, label(m), std::abs(links[0].upper - links[1].upper));
                report(ProfileConstraint::symmetry, label(m), std::abs(links[0].lower - links[1].lower));
            } else {
                const auto& d1 = p.to_d1[static_cast<std::size_t>(row - 1)];
                const auto& d2 = p.to_d2[static_cast<std::size_t>(row - 1)];
                check_link(d1, label(m) + " exit D1");
                check_link(d2, label(m) + " exit D2");
                report(ProfileConstraint::exit_purity, label(m) + " exit D1", std::abs(d1.lower));
                report(ProfileConstraint::exit_purity, label(m) + " exit D2", std::abs(d2.upper));
                outflow = {d1.upper + d2.upper, d1.lower + d2.lower};
            }
            report(ProfileConstraint::conservation, label(m) + " upper", inflow.upper - outflow.upper);
            report(ProfileConstraint::conservation, label(m) + " lower", inflow.lower - outflow.lower);
        }
    }
    return out;
}

RateMatrix sample_interior(int n, std::mt19937_64& rng, double margin) {
    if (margin <= 1.0) throw std::invalid_argument("sampling margin must exceed 1");
    RateMatrix r(1 << n);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : r.values()) v = unit(rng);
    double largest = 0.0;
    for (int i = 1; i <= r.size(); ++i) largest = std::max({largest, r.row_sum(i), r.column_sum(i)});
    return largest > 0.0 ? r.scaled(1.0 / (largest * margin)) : r;
}

}  // namespace benes
