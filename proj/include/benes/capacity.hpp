#pragma once

// Capacity region of the fabric and the constructive balanced rate
// allocation over the first half (server links, columns 1..n-1 and the
// partition exits toward the two aggregate destinations D1/D2).

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "benes/topology.hpp"

namespace benes {

// r[s][d] in packets/slot, 1-based (s, d).
class RateMatrix {
public:
    RateMatrix() = default;
    explicit RateMatrix(int servers, double fill = 0.0);

    int size() const noexcept { return size_; }
    double& at(int s, int d) { return values_[offset(s, d)]; }
    double at(int s, int d) const { return values_[offset(s, d)]; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    double row_sum(int s) const;
    double column_sum(int d) const;
    RateMatrix scaled(double factor) const;

private:
    std::size_t offset(int s, int d) const;

    int size_ = 0;
    std::vector<double> values_;
};

struct DivisionRates {
    double upper = 0.0;
    double lower = 0.0;

    friend bool operator==(const DivisionRates&, const DivisionRates&) = default;
};

struct RateProfile {
    int order = 0;
    std::vector<DivisionRates> server;                    // link s -> m(s), indexed s-1
    std::vector<std::array<DivisionRates, 2>> module;     // columns 1..n-1, by flat node index; [a], [b]
    std::vector<DivisionRates> to_d1;                     // partition exits, indexed row-1
    std::vector<DivisionRates> to_d2;

    static RateProfile zero(const BenesTopology& topo);
};

enum class ProfileConstraint {
    source_coverage,
    conservation,
    link_capacity,
    nonnegativity,
    exit_purity,
    symmetry,
};

std::string to_string(ProfileConstraint c);

struct ProfileViolation {
    ProfileConstraint constraint;
    std::string where;
    double excess = 0.0;
};

// Row sums <= 1 and column sums <= 1 - slack. Throws on a dimension mismatch.
bool in_capacity_region(const RateMatrix& r, int n, double slack = 0.0);

// Throws std::invalid_argument unless r lies in the capacity region of topo.
RateProfile build_stabilizing_profile(const RateMatrix& r, const BenesTopology& topo);

constexpr double kProfileTolerance = 1e-9;

std::vector<ProfileViolation> verify_profile(const RateProfile& p, const RateMatrix& r, const BenesTopology& topo,
                                             double tolerance = kProfileTolerance);

// Uniform nonnegative matrix rescaled so its largest row/column sum is 1/margin.
RateMatrix sample_interior(int n, std::mt19937_64& rng, double margin = 1.05);

}  // namespace benes
