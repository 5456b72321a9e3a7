#include "benes/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <random>
#include <sstream>

#include "benes/capacity.hpp"
#include "benes/oracle.hpp"

namespace benes {

std::string to_string(ExperimentName e) {
    switch (e) {
        case ExperimentName::utility_sweep: return "utility_sweep";
        case ExperimentName::robustness: return "robustness";
        case ExperimentName::adaptation: return "adaptation";
        case ExperimentName::scaling: return "scaling";
        case ExperimentName::invariants: return "invariants";
        case ExperimentName::capacity_check: return "capacity_check";
    }
    return "?";
}

ExperimentName parse_experiment_name(const std::string& name) {
    for (auto e : {ExperimentName::utility_sweep, ExperimentName::robustness, ExperimentName::adaptation,
                   ExperimentName::scaling, ExperimentName::invariants, ExperimentName::capacity_check}) {
        if (to_string(e) == name) return e;
    }
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

ConfigError::ConfigError(int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

std::vector<int> ExperimentSpec::orders() const {
    if (!n.empty()) return n;
    switch (experiment) {
        case ExperimentName::scaling: return {3, 4, 5, 6};
        case ExperimentName::capacity_check: return {2, 3, 4, 5, 6};
        default: return {4};
    }
}

std::vector<RegulationVariant> ExperimentSpec::variant_list() const {
    if (!variants.empty()) return variants;
    if (experiment == ExperimentName::robustness) {
        return {RegulationVariant::exact, RegulationVariant::delayed_1x, RegulationVariant::delayed_5x,
                RegulationVariant::sparse_5x};
    }
    return {RegulationVariant::exact};
}

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value, int line, const std::string& key) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw ConfigError(line, "malformed list for '" + key + "'");
        items.push_back(item);
    }
    if (items.empty()) throw ConfigError(line, "empty list for '" + key + "'");
    return items;
}

template <class T>
T parse_number(const std::string& text, int line, const std::string& key) {
    T value{};
    const char* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, value);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError(line, "'" + key + "' expects a number, got '" + text + "'");
    }
    return value;
}

bool parse_bool(const std::string& text, int line, const std::string& key) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(line, "'" + key + "' expects true or false, got '" + text + "'");
}

void require(bool ok, int line, const std::string& message) {
    if (!ok) throw ConfigError(line, message);
}

}  // namespace

ExperimentSpec parse_config(const std::string& text) {
    ExperimentSpec spec;
    std::map<std::string, int> seen;
    std::stringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) throw ConfigError(line, "missing key");
        seen[key] = line;

        try {
            if (key == "experiment") {
                spec.experiment = parse_experiment_name(value);
            } else if (key == "n") {
                spec.n.clear();
                for (const auto& item : split_list(value, line, key)) {
                    const int n = parse_number<int>(item, line, key);
                    require(n >= 1 && n <= 10, line, "n must lie in 1..10");
                    spec.n.push_back(n);
                }
            } else if (key == "V") {
                spec.V.clear();
                for (const auto& item : split_list(value, line, key)) {
                    const double v = parse_number<double>(item, line, key);
                    require(v >= 1.0, line, "V must be >= 1");
                    spec.V.push_back(v);
                }
            } else if (key == "eta") {
                spec.eta = parse_number<double>(value, line, key);
                require(spec.eta > 0.0 && spec.eta < 1.0, line, "eta must lie in (0, 1)");
            } else if (key == "A_max") {
                spec.a_max = parse_number<int>(value, line, key);
                require(spec.a_max >= 0 && spec.a_max <= 1000, line, "A_max must lie in 0..1000");
            } else if (key == "slots") {
                spec.slots = parse_number<std::int64_t>(value, line, key);
                require(spec.slots >= 1, line, "slots must be >= 1");
            } else if (key == "seed") {
                spec.seed = parse_number<std::uint64_t>(value, line, key);
            } else if (key == "variant") {
                spec.variants.clear();
                for (const auto& item : split_list(value, line, key)) {
                    spec.variants.push_back(parse_regulation_variant(item));
                }
            } else if (key == "utility") {
                spec.utility = parse_utility_form(value);
            } else if (key == "weight") {
                spec.weight = parse_number<double>(value, line, key);
                require(spec.weight > 0.0, line, "weight must be > 0");
            } else if (key == "traffic") {
                if (value == "deterministic") {
                    spec.traffic = TrafficConfig::Model::deterministic;
                } else if (value == "binomial") {
                    spec.traffic = TrafficConfig::Model::binomial;
                } else {
                    throw ConfigError(line, "traffic must be deterministic or binomial");
                }
            } else if (key == "rate") {
                spec.rate = parse_number<double>(value, line, key);
                require(spec.rate >= 0.0, line, "rate must be >= 0");
            } else if (key == "bias_enhanced") {
                spec.bias_enhanced = parse_bool(value, line, key);
            } else if (key == "check_invariants") {
                spec.check_invariants = parse_bool(value, line, key);
            } else if (key == "timeseries") {
                spec.timeseries = parse_bool(value, line, key);
            } else if (key == "samples") {
                spec.samples = parse_number<int>(value, line, key);
                require(spec.samples >= 1, line, "samples must be >= 1");
            } else {
                throw ConfigError(line, "unknown key '" + key + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(line, e.what());
        }
    }
    if (spec.rate > spec.a_max) {
        throw ConfigError(seen.count("rate") ? seen["rate"] : 0, "rate must not exceed A_max");
    }
    return spec;
}

namespace {

std::string exact_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& items, F&& fmt) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ", ";
        out += fmt(items[i]);
    }
    return out;
}

}  // namespace

std::string format_config(const ExperimentSpec& spec) {
    std::ostringstream out;
    out << "experiment = " << to_string(spec.experiment) << '\n';
    if (!spec.n.empty()) out << "n = " << join(spec.n, [](int v) { return std::to_string(v); }) << '\n';
    out << "V = " << join(spec.V, exact_number) << '\n';
    out << "eta = " << exact_number(spec.eta) << '\n';
    out << "A_max = " << spec.a_max << '\n';
    out << "slots = " << spec.slots << '\n';
    out << "seed = " << spec.seed << '\n';
    if (!spec.variants.empty()) {
        out << "variant = " << join(spec.variants, [](RegulationVariant v) { return to_string(v); }) << '\n';
    }
    out << "utility = " << to_string(spec.utility) << '\n';
    out << "weight = " << exact_number(spec.weight) << '\n';
    out << "traffic = " << (spec.traffic == TrafficConfig::Model::binomial ? "binomial" : "deterministic") << '\n';
    out << "rate = " << exact_number(spec.rate) << '\n';
    out << "bias_enhanced = " << (spec.bias_enhanced ? "true" : "false") << '\n';
    out << "check_invariants = " << (spec.check_invariants ? "true" : "false") << '\n';
    out << "timeseries = " << (spec.timeseries ? "true" : "false") << '\n';
    out << "samples = " << spec.samples << '\n';
    return out.str();
}

SimConfig make_sim_config(const ExperimentSpec& spec, int n, double V, RegulationVariant variant) {
    SimConfig c;
    c.n = n;
    const int servers = 1 << n;
    c.utility = UtilitySpec(spec.utility, servers,
                            std::vector<double>(static_cast<std::size_t>(servers) * static_cast<std::size_t>(servers),
                                                spec.weight));
    c.params.V = V;
    c.params.eta = spec.eta;
    c.params.a_max = spec.a_max;
    c.params.beta = c.utility.max_slope_at_zero();
    c.traffic.model = spec.traffic;
    c.traffic.rate = spec.rate;
    c.slots = spec.slots;
    c.seed = spec.seed;
    c.variant = variant;
    c.bias_enhanced = spec.bias_enhanced;
    c.check_invariants = spec.check_invariants || spec.experiment == ExperimentName::invariants;
    c.record_timeseries = spec.timeseries || spec.experiment == ExperimentName::adaptation;
    return c;
}

bool ExperimentResult::invariant_violation() const {
    return std::any_of(runs.begin(), runs.end(), [](const RunRecord& r) { return !r.report.invariants_clean(); });
}

namespace {

std::string run_label(const SimConfig& c) {
    std::string label = "n" + std::to_string(c.n) + "_V" + format_number(c.params.V) + "_" + to_string(c.variant);
    if (c.bias_enhanced) label += "_bias";
    return label;
}

double optimum_for(const UtilitySpec& u, int n) { return solve_optimum(u, n, 0.0).utility; }

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult result;
    result.spec = spec;

    if (spec.experiment == ExperimentName::capacity_check) {
        std::mt19937_64 rng(derive_seed(spec.seed, "capacity"));
        for (int n : spec.orders()) {
            const auto start = std::chrono::steady_clock::now();
            const auto topo = BenesTopology::build(n);
            CapacityRow row;
            row.n = n;
            row.samples = spec.samples;
            for (int k = 0; k < spec.samples; ++k) {
                const RateMatrix r = sample_interior(n, rng);
                row.violations += static_cast<int>(verify_profile(build_stabilizing_profile(r, topo), r, topo).size());
            }
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            result.capacity.push_back(row);
        }
        return result;
    }

    if (spec.experiment == ExperimentName::scaling) {
        const SimConfig base = make_sim_config(spec, spec.orders().front(), spec.V.front(), spec.variant_list().front());
        result.scaling = run_scaling_experiment(spec.orders(), base);
        return result;
    }

    std::vector<SimConfig> configs;
    for (int n : spec.orders()) {
        for (double V : spec.V) {
            for (RegulationVariant v : spec.variant_list()) configs.push_back(make_sim_config(spec, n, V, v));
        }
    }
    for (const auto& c : configs) c.validate();

    const bool adaptation = spec.experiment == ExperimentName::adaptation;
    std::vector<std::future<RunRecord>> pending;
    for (const auto& c : configs) {
        pending.push_back(std::async(std::launch::async, [c, adaptation] {
            RunRecord rec;
            rec.config = c;
            rec.label = run_label(c);
            if (adaptation) {
                auto out = run_utility_switch(c);
                rec.report = std::move(out.report);
                rec.weights = std::move(out.weights);
                const UtilitySpec switched(UtilityForm::log1p, 1 << c.n, rec.weights);
                double opt = 0.0;
                const UtilitySpec* phase_utility[2] = {&c.utility, &switched};
                for (std::size_t k = 0; k < rec.report.phases.size() && k < 2; ++k) {
                    const auto& ph = rec.report.phases[k];
                    opt += static_cast<double>(ph.end - ph.begin) / static_cast<double>(c.slots) *
                           optimum_for(*phase_utility[k], c.n);
                }
                rec.optimum = opt;
            } else {
                rec.report = run(c);
                rec.optimum = optimum_for(c.utility, c.n);
            }
            return rec;
        }));
    }
    for (auto& f : pending) result.runs.push_back(f.get());
    return result;
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

}  // namespace

std::vector<std::filesystem::path> emit_results(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    std::vector<std::filesystem::path> written;
    const std::string experiment = to_string(result.spec.experiment);

    if (!result.runs.empty()) {
        const auto path = dir / "summary.csv";
        auto out = open_for_write(path);
        out << "experiment,label,n,V,eta,A_max,variant,bias_enhanced,seed,slots,total_utility,optimum,gap_pct,"
               "avg_delay,delivery_fraction,admitted,delivered,bound_violations,conservation_failures,"
               "slack_admission,slack_source,slack_regulation,slack_module,slack_partition\n";
        for (const auto& r : result.runs) {
            const auto& c = r.config;
            const auto& m = r.report;
            const double gap = r.optimum > 0.0 ? 100.0 * (r.optimum - m.total_utility) / r.optimum : 0.0;
            out << experiment << ',' << r.label << ',' << c.n << ',' << format_number(c.params.V) << ','
                << format_number(c.params.eta) << ',' << c.params.a_max << ',' << to_string(c.variant) << ','
                << (c.bias_enhanced ? 1 : 0) << ',' << c.seed << ',' << c.slots << ','
                << format_number(m.total_utility) << ',' << format_number(r.optimum) << ',' << format_number(gap)
                << ',' << format_number(m.avg_delay) << ',' << format_number(m.delivery_fraction) << ','
                << m.admitted_total << ',' << m.delivered_total << ',' << m.bound_violations << ','
                << m.conservation_failures;
            for (double s : m.min_slack) out << ',' << format_number(s);
            out << '\n';
        }
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    }

    for (const auto& r : result.runs) {
        if (r.report.timeseries.empty()) continue;
        const auto path = dir / ("timeseries_" + r.label + ".csv");
        auto out = open_for_write(path);
        out << "slot,total_physical_queue,total_fictitious_queue,admitted_cum,delivered_cum\n";
        for (const auto& p : r.report.timeseries) {
            out << p.slot << ',' << p.total_physical << ',' << format_number(p.total_fictitious) << ','
                << p.admitted_cum << ',' << p.delivered_cum << '\n';
        }
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    }

    if (!result.scaling.empty()) {
        const auto path = dir / "scaling.csv";
        auto out = open_for_write(path);
        out << "n,avg_delay,avg_delay_over_n2,avg_delay_biased\n";
        for (const auto& row : result.scaling) {
            out << row.n << ',' << format_number(row.delay) << ',' << format_number(row.ratio) << ','
                << format_number(row.delay_biased) << '\n';
        }
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    }

    if (!result.capacity.empty()) {
        const auto path = dir / "capacity.csv";
        auto out = open_for_write(path);
        out << "n,samples,violations,seconds\n";
        for (const auto& row : result.capacity) {
            out << row.n << ',' << row.samples << ',' << row.violations << ',' << format_number(row.seconds) << '\n';
        }
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    }
    return written;
}

}  // namespace benes
