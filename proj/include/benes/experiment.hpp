#pragma once

// Flat key = value experiment configuration, experiment orchestration and
// CSV result emission.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "benes/simulator.hpp"

namespace benes {

enum class ExperimentName : std::uint8_t { utility_sweep, robustness, adaptation, scaling, invariants, capacity_check };

std::string to_string(ExperimentName e);
ExperimentName parse_experiment_name(const std::string& name);

class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message);
    int line() const noexcept { return line_; }

private:
    int line_;
};

struct ExperimentSpec {
    ExperimentName experiment = ExperimentName::utility_sweep;
    std::vector<int> n;  // empty: 4, or 3..6 for scaling, 2..6 for capacity_check
    std::vector<double> V{10.0};
    double eta = 0.01;
    int a_max = 2;
    std::int64_t slots = 100000;
    std::uint64_t seed = 1;
    std::vector<RegulationVariant> variants;  // empty: exact, or all four for robustness
    UtilityForm utility = UtilityForm::log1p;
    double weight = 1.0;
    TrafficConfig::Model traffic = TrafficConfig::Model::deterministic;
    double rate = 0.0;
    bool bias_enhanced = false;
    bool check_invariants = false;
    bool timeseries = false;
    int samples = 100;

    std::vector<int> orders() const;
    std::vector<RegulationVariant> variant_list() const;

    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;
};

// Throws ConfigError naming the offending line and key.
ExperimentSpec parse_config(const std::string& text);
std::string format_config(const ExperimentSpec& spec);

SimConfig make_sim_config(const ExperimentSpec& spec, int n, double V, RegulationVariant variant);

struct RunRecord {
    std::string label;
    SimConfig config;
    MetricsReport report;
    double optimum = 0.0;
    std::vector<double> weights;  // adaptation runs: redrawn weights
};

struct CapacityRow {
    int n = 0;
    int samples = 0;
    int violations = 0;
    double seconds = 0.0;
};

struct ExperimentResult {
    ExperimentSpec spec;
    std::vector<RunRecord> runs;
    std::vector<ScalingRow> scaling;
    std::vector<CapacityRow> capacity;

    bool invariant_violation() const;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

// Writes summary.csv plus timeseries_<label>.csv, scaling.csv and
// capacity.csv when present. Returns the paths written; throws
// std::runtime_error if the directory or a file cannot be written.
std::vector<std::filesystem::path> emit_results(const ExperimentResult& result, const std::filesystem::path& dir);

std::string format_number(double x);

}  // namespace benes
