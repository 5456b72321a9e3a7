#include "benes/oracle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace benes {

namespace {

// Projection of y onto {z >= 0, sum z <= cap}, in place.
void project_capped(std::vector<double>& y, double cap, std::vector<double>& scratch) {
    double clipped = 0.0;
    for (double v : y) clipped += std::max(v, 0.0);
    if (clipped <= cap) {
        for (double& v : y) v = std::max(v, 0.0);
        return;
    }
    // onto the face sum z = cap: sort-based simplex projection
    scratch = y;
    std::sort(scratch.begin(), scratch.end(), std::greater<>());
    double running = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < scratch.size(); ++k) {
        running += scratch[k];
        const double t = (running - cap) / static_cast<double>(k + 1);
        if (scratch[k] - t > 0.0) theta = t;
    }
    for (double& v : y) v = std::max(v - theta, 0.0);
}

void project_rows(std::vector<double>& x, int S, double cap, std::vector<double>& line, std::vector<double>& scratch) {
    const auto s = static_cast<std::size_t>(S);
    line.resize(s);
    for (std::size_t row = 0; row < s; ++row) {
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(row * s), s, line.begin());
        project_capped(line, cap, scratch);
        std::copy(line.begin(), line.end(), x.begin() + static_cast<std::ptrdiff_t>(row * s));
    }
}

void project_columns(std::vector<double>& x, int S, double cap, std::vector<double>& line,
                     std::vector<double>& scratch) {
    const auto s = static_cast<std::size_t>(S);
    line.resize(s);
    for (std::size_t col = 0; col < s; ++col) {
        for (std::size_t row = 0; row < s; ++row) line[row] = x[row * s + col];
        project_capped(line, cap, scratch);
        for (std::size_t row = 0; row < s; ++row) x[row * s + col] = line[row];
    }
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

RateMatrix project_to_region(const RateMatrix& x, double column_cap) {
    const int S = x.size();
    // Dykstra's alternating projections converge to the projection onto
    // the intersection of the row-capped and column-capped sets.
    std::vector<double> cur = x.values();
    std::vector<double> p(cur.size(), 0.0);
    std::vector<double> q(cur.size(), 0.0);
    std::vector<double> y(cur.size());
    std::vector<double> prev;
    std::vector<double> line;
    std::vector<double> scratch;
    for (int iter = 0; iter < 50000; ++iter) {
        prev = cur;
        for (std::size_t i = 0; i < cur.size(); ++i) y[i] = cur[i] + p[i];
        std::vector<double> y_in = y;
        project_rows(y, S, 1.0, line, scratch);
        for (std::size_t i = 0; i < cur.size(); ++i) p[i] = y_in[i] - y[i];

        for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = y[i] + q[i];
        std::vector<double> c_in = cur;
        project_columns(cur, S, column_cap, line, scratch);
        for (std::size_t i = 0; i < cur.size(); ++i) q[i] = c_in[i] - cur[i];

        if (iter > 0 && max_abs_diff(cur, prev) < 1e-15 && max_abs_diff(cur, y) < 1e-13) break;
    }
    RateMatrix out(S);
    out.values() = std::move(cur);
    return out;
}

OptimumResult solve_optimum(const UtilitySpec& utility, int n, double eta, const OptimumOptions& options) {
    if (n < 1 || n > 12) throw std::invalid_argument("order out of range for the optimum solver");
    const int S = 1 << n;
    if (utility.servers() != S) throw std::invalid_argument("utility does not match the network size");
    if (!(eta >= 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in [0, 1)");
    switch (utility.form()) {
        case UtilityForm::log1p:
        case UtilityForm::saturating_exp: break;
        default: throw std::invalid_argument("utility is not known to be concave");
    }

    double lipschitz = 0.0;
    for (int f = 0; f < utility.flows(); ++f) lipschitz = std::max(lipschitz, utility.curvature_bound(f));

    OptimumResult result;
    result.r_star = RateMatrix(S);
    if (lipschitz == 0.0) return result;

    const double step = 1.0 / lipschitz;
    const double column_cap = 1.0 - eta;
    RateMatrix x(S);
    RateMatrix trial(S);
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        for (int f = 0; f < utility.flows(); ++f) {
            const auto i = static_cast<std::size_t>(f);
            trial.values()[i] = x.values()[i] + step * utility.derivative(f, x.values()[i]);
        }
        RateMatrix next = project_to_region(trial, column_cap);
        const double change = max_abs_diff(next.values(), x.values());
        x = std::move(next);
        result.iterations = iter;
        result.residual = change;
        if (change < options.tolerance) {
            result.r_star = x;
            result.utility = utility.total(x.values());
            return result;
        }
    }
    throw std::runtime_error("optimum solver did not converge within the iteration cap");
}

KktReport kkt_residual(const UtilitySpec& utility, const RateMatrix& r, double eta) {
    const int S = r.size();
    const double column_cap = 1.0 - eta;
    constexpr double tight_tol = 1e-7;
    constexpr double interior_tol = 1e-9;

    // unknowns: prices of the tight rows then the tight columns
    std::vector<int> row_var(static_cast<std::size_t>(S), -1);
    std::vector<int> col_var(static_cast<std::size_t>(S), -1);
    int unknowns = 0;
    for (int s = 1; s <= S; ++s) {
        if (r.row_sum(s) >= 1.0 - tight_tol) row_var[static_cast<std::size_t>(s - 1)] = unknowns++;
    }
    for (int d = 1; d <= S; ++d) {
        if (r.column_sum(d) >= column_cap - tight_tol) col_var[static_cast<std::size_t>(d - 1)] = unknowns++;
    }

    KktReport report;
    report.row_price.assign(static_cast<std::size_t>(S), 0.0);
    report.column_price.assign(static_cast<std::size_t>(S), 0.0);

    if (unknowns > 0) {
        Eigen::MatrixXd normal = Eigen::MatrixXd::Identity(unknowns, unknowns) * 1e-10;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(unknowns);
        for (int s = 1; s <= S; ++s) {
            for (int d = 1; d <= S; ++d) {
                if (r.at(s, d) <= interior_tol) continue;
                const double g = utility.derivative(flow_id(S, s, d), r.at(s, d));
                const int a = row_var[static_cast<std::size_t>(s - 1)];
                const int b = col_var[static_cast<std::size_t>(d - 1)];
                for (int u : {a, b}) {
                    if (u < 0) continue;
                    rhs(u) += g;
                    for (int v : {a, b}) {
                        if (v >= 0) normal(u, v) += 1.0;
                    }
                }
            }
        }
        const Eigen::VectorXd prices = normal.ldlt().solve(rhs);
        for (int s = 0; s < S; ++s) {
            if (row_var[static_cast<std::size_t>(s)] >= 0) {
                report.row_price[static_cast<std::size_t>(s)] = prices(row_var[static_cast<std::size_t>(s)]);
            }
            if (col_var[static_cast<std::size_t>(s)] >= 0) {
                report.column_price[static_cast<std::size_t>(s)] = prices(col_var[static_cast<std::size_t>(s)]);
            }
        }
    }

    for (int s = 1; s <= S; ++s) {
        for (int d = 1; d <= S; ++d) {
            const double gap = utility.derivative(flow_id(S, s, d), r.at(s, d)) -
                               report.row_price[static_cast<std::size_t>(s - 1)] -
                               report.column_price[static_cast<std::size_t>(d - 1)];
            const double err = r.at(s, d) > interior_tol ? std::abs(gap) : std::max(gap, 0.0);
            report.residual = std::max(report.residual, err);
        }
    }
    return report;
}

SingleQueueReport single_queue_harness(const ArrivalSampler& arrivals, int a_max, double eta, std::int64_t slots,
                            std::uint64_t seed) {
    if (slots < 2) throw std::invalid_argument("harness needs at least two slots");
    std::mt19937_64 rng(seed);
    std::vector<int> trace(static_cast<std::size_t>(slots));
    SingleQueueReport rep;
    double q = 0.0;
    double total = 0.0;
    const std::int64_t half = slots / 2;
    for (std::int64_t t = 0; t < slots; ++t) {
        const int a = arrivals(rng);
        if (a < 0 || a > a_max) throw std::invalid_argument("arrival outside [0, a_max]");
        trace[static_cast<std::size_t>(t)] = a;
        total += a;
        q = step_counter_queue(q, 1.0, a);
        if (t < half) {
            rep.first_half_max = std::max(rep.first_half_max, q);
        } else {
            rep.second_half_max = std::max(rep.second_half_max, q);
        }
    }
    rep.max_queue = std::max(rep.first_half_max, rep.second_half_max);
    rep.mean_arrival = total / static_cast<double>(slots);

    const double target = 1.0 - eta / 2.0;
    for (std::int64_t w = 1; w <= slots; w *= 2) {
        bool ok = true;
        for (std::int64_t start = 0; start + w <= slots && ok; start += w) {
            const auto first = trace.begin() + static_cast<std::ptrdiff_t>(start);
            const double sum = std::accumulate(first, first + static_cast<std::ptrdiff_t>(w), 0.0);
            ok = sum / static_cast<double>(w) <= target;
        }
        if (ok) {
            rep.window = w;
            rep.window_bound = static_cast<double>(a_max) * static_cast<double>(w);
            break;
        }
    }
    rep.bounded = rep.second_half_max <= rep.first_half_max + a_max;
    return rep;
}

std::string to_string(QueueFamily f) {
    switch (f) {
        case QueueFamily::admission: return "admission";
        case QueueFamily::source: return "source";
        case QueueFamily::regulation: return "regulation";
        case QueueFamily::module: return "module";
        case QueueFamily::partition: return "partition";
    }
    return "?";
}

QueueBounds queue_bounds(const GbpParams& params, int n) {
    const double a = params.a_max;
    const double vb = params.V * params.beta;
    QueueBounds b;
    b.admission = vb + a;
    b.source = vb + (std::ldexp(1.0, n - 1) + 1.0) * a;
    b.regulation = vb + (std::ldexp(1.0, n) + 1.0) * a;
    b.column.assign(static_cast<std::size_t>(n + 1), 0.0);
    for (int j = 1; j <= n; ++j) {
        // sum_{l=1..j} 2^l = 2^{j+1} - 2
        b.column[static_cast<std::size_t>(j)] = std::ldexp(b.source, j) + std::ldexp(1.0, j + 1) - 2.0;
    }
    return b;
}

std::array<double, kQueueFamilies> bound_slack(const BenesTopology& topo, const QueueState& state,
                                               const QueueBounds& bounds) {
    std::array<double, kQueueFamilies> slack;
    slack.fill(std::numeric_limits<double>::infinity());
    auto note = [&](QueueFamily f, double value, double bound) {
        auto& s = slack[static_cast<std::size_t>(f)];
        s = std::min(s, bound - value);
    };
    for (double h : state.admission) note(QueueFamily::admission, h, bounds.admission);
    for (const auto& q : state.source_count) {
        note(QueueFamily::source, q[0], bounds.source);
        note(QueueFamily::source, q[1], bounds.source);
    }
    for (double q : state.regulation) note(QueueFamily::regulation, q, bounds.regulation);
    for (std::size_t idx = 0; idx < state.module_count.size(); ++idx) {
        const auto& q = state.module_count[idx];
        const int column = static_cast<int>(idx) / topo.rows() + 1;
        const double bound = bounds.column[static_cast<std::size_t>(column)];
        note(QueueFamily::module, q[0] + q[1], bound);
        note(QueueFamily::module, q[2] + q[3], bound);
    }
    const double partition_bound = bounds.column[static_cast<std::size_t>(topo.order())];
    for (const auto& q : state.partition_count) {
        note(QueueFamily::partition, q[0], partition_bound);
        note(QueueFamily::partition, q[1], partition_bound);
    }
    return slack;
}

std::array<double, kQueueFamilies> family_maxima(const QueueState& state) {
    std::array<double, kQueueFamilies> m{};
    auto note = [&](QueueFamily f, double v) {
        auto& x = m[static_cast<std::size_t>(f)];
        x = std::max(x, v);
    };
    for (double h : state.admission) note(QueueFamily::admission, h);
    for (const auto& q : state.source_count) note(QueueFamily::source, std::max(q[0], q[1]));
    for (double q : state.regulation) note(QueueFamily::regulation, q);
    for (const auto& q : state.module_count) note(QueueFamily::module, std::max(q[0] + q[1], q[2] + q[3]));
    for (const auto& q : state.partition_count) note(QueueFamily::partition, std::max(q[0], q[1]));
    return m;
}

std::vector<BoundViolation> check_queue_bounds(const BenesTopology& topo, const QueueState& state,
                                               const GbpParams& params, bool check_regulation) {
    const QueueBounds b = queue_bounds(params, topo.order());
    const int S = topo.servers();
    std::vector<BoundViolation> out;
    auto check = [&](QueueFamily f, const std::string& where, double value, double bound) {
        if (value > bound || value < 0.0) out.push_back({f, where, value, bound});
    };
    for (int f = 0; f < S * S; ++f) {
        check(QueueFamily::admission,
              "H(" + std::to_string(flow_source(S, f)) + "," + std::to_string(flow_dest(S, f)) + ")",
              state.admission[static_cast<std::size_t>(f)], b.admission);
    }
    for (int s = 1; s <= S; ++s) {
        const auto& q = state.source_count[static_cast<std::size_t>(s - 1)];
        check(QueueFamily::source, "server " + std::to_string(s) + " U", q[0], b.source);
        check(QueueFamily::source, "server " + std::to_string(s) + " L", q[1], b.source);
        if (check_regulation) {
            check(QueueFamily::regulation, "output " + std::to_string(s),
                  state.regulation[static_cast<std::size_t>(s - 1)], b.regulation);
        }
    }
    for (std::size_t idx = 0; idx < state.module_count.size(); ++idx) {
        const NodeRef m = topo.node(static_cast<int>(idx));
        const auto& q = state.module_count[idx];
        const double bound = b.column[static_cast<std::size_t>(m.column)];
        const std::string name = "module (" + std::to_string(m.column) + "," + std::to_string(m.row) + ")";
        check(QueueFamily::module, name + " upper", q[0] + q[1], bound);
        check(QueueFamily::module, name + " lower", q[2] + q[3], bound);
    }
    const double pb = b.column[static_cast<std::size_t>(topo.order())];
    for (int row = 1; row <= topo.rows(); ++row) {
        const auto& q = state.partition_count[static_cast<std::size_t>(row - 1)];
        check(QueueFamily::partition, "partition row " + std::to_string(row) + " D1", q[0], pb);
        check(QueueFamily::partition, "partition row " + std::to_string(row) + " D2", q[1], pb);
    }
    return out;
}

}  // namespace benes
