#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "nomarl/network.hpp"

namespace nomarl {

struct GuardViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BenchmarkResult {
    AssociationState best_assignment;
    std::map<int, double> best_powers_w;
    double best_sum_rate_bps = 0.0;
    long long states_evaluated = 0;  // raw assignments enumerated
    RateReport best_report;
};

struct ExhaustiveGuard {
    long long max_assignments = 10'000'000;
    // Cap on the per-sub-channel power-level search so heavy instances are
    // rejected instead of running for hours.
    long long max_power_combos = 2'000'000;
};

/// Enumerates every user->(bs, sub-channel) assignment within the cluster
/// load cap and, per sub-channel, every power-level combination meeting
/// the power-cap and SINR-threshold constraints; returns the sum-rate
/// maximizer with a lexicographic tie-break (first user's cell most
/// significant, level indices likewise). Throws GuardViolation when the
/// instance exceeds the guard.
BenchmarkResult exhaustive_best(const std::vector<UserTerminal>& users,
                                const NetworkConfig& config,
                                const ExhaustiveGuard& guard = {});

/// One user per resource block, chosen greedily by descending p*g (ties by
/// id) and placed in row-major block order; no intra-cluster interference,
/// unserved users sit at rate zero.
BenchmarkResult oma_allocate(const std::vector<UserTerminal>& users,
                             const NetworkConfig& config);

/// Exhaustive assignment search with every user pinned to one power level.
BenchmarkResult noma_fixed_power(const std::vector<UserTerminal>& users,
                                 const NetworkConfig& config, double fixed_level_dbm,
                                 const ExhaustiveGuard& guard = {});

struct PowerOptResult {
    std::map<int, double> powers_w;
    double sum_rate_bps = 0.0;
    bool optimized = false;  // false when every sub-channel kept sampled powers
};

/// Re-optimizes power levels per sub-channel for a fixed association. The
/// sampled powers always stay in the candidate set, so the result never
/// rates below the input; sub-channels whose level search exceeds the
/// guard keep their sampled powers.
PowerOptResult optimize_powers(const AssociationState& state,
                               const std::vector<UserTerminal>& users,
                               const NetworkConfig& config,
                               long long combo_guard = 2'000'000);

}  // namespace nomarl
