#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nomarl/network.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

/// A single-user move between two resource blocks of the occupancy grid,
/// expressed as a delta matrix with one -1 (source) and one +1
/// (destination), or the all-zero no-op.
struct SwapAction {
    std::vector<int> delta;  // row-major n_bs*n_subchannels
    int src = -1;            // flat cell index, -1 for the no-op
    int dst = -1;

    bool is_noop() const { return src < 0; }
};

/// Fixed, documented ordering: same-sub-channel swaps first (sub-channel
/// ascending, source BS ascending, destination BS ascending), then same-BS
/// swaps (BS ascending, source sub-channel ascending, destination
/// ascending), then the no-op. For a 2x2 grid this yields the canonical
/// 8 swap matrices followed by the no-op, 2*N_b*N_s + 1 = 9 actions.
std::vector<SwapAction> action_catalog(const NetworkConfig& config);

struct EnvState {
    AssociationState association;
    int step = 0;

    std::vector<int> occupancy() const { return association.occupancy(); }
    int user_count() const { return association.assigned_count(); }
};

/// Applies the swap to the occupancy grid. Returns nothing when an entry
/// would leave [0, max_cluster_load]; otherwise moves one concrete user,
/// chosen uniformly among the source cell's users, and bumps the step.
/// Only valid non-no-op moves consume randomness.
std::optional<EnvState> apply_action(const EnvState& state, const SwapAction& action,
                                     const NetworkConfig& config, Rng& rng);

/// Two-condition reward: 0 when the rate did not drop and the user count
/// is conserved, -10 otherwise.
double reward(int prev_user_count, int next_user_count, double prev_rate_bps,
              double next_rate_bps);
double reward(const EnvState& prev, const EnvState& next, double prev_rate_bps,
              double next_rate_bps);

/// Bijective mixed-radix encoding of an occupancy vector, row-major with
/// the first cell as the most significant digit. Radix must exceed every
/// entry; callers use n_users + 1.
std::uint64_t occupancy_index(const std::vector<int>& occupancy, int radix);
std::vector<int> decode_occupancy_index(std::uint64_t index, int radix, int n_cells);
std::uint64_t state_index(const EnvState& state, int n_users);

/// DRL input vector: occupancy normalized by the cluster load cap,
/// followed by the instantaneous and running-average rewards.
std::vector<double> encode_drl_state(const EnvState& state, double r_inst, double r_avg,
                                     const NetworkConfig& config);

/// Owns one episode's users and association and advances them one swap at
/// a time, caching the current rate report.
class Environment {
public:
    explicit Environment(NetworkConfig config);

    /// Fresh episode: installs the users and draws an association whose
    /// occupancy is uniform over all valid matrices with that many users.
    void reset(std::vector<UserTerminal> users, Rng& rng);

    struct StepResult {
        double reward = 0.0;
        bool valid_move = false;
        double sum_rate_bps = 0.0;
    };
    StepResult step(int action_index, Rng& rng);

    const EnvState& state() const { return state_; }
    const std::vector<UserTerminal>& users() const { return users_; }
    const RateReport& report() const { return report_; }
    double sum_rate_bps() const { return report_.sum_rate_bps; }
    int user_count() const { return static_cast<int>(users_.size()); }
    const std::vector<SwapAction>& actions() const { return actions_; }
    int action_count() const { return static_cast<int>(actions_.size()); }
    const NetworkConfig& config() const { return config_; }

private:
    NetworkConfig config_;
    std::vector<SwapAction> actions_;
    std::vector<UserTerminal> users_;
    EnvState state_;
    RateReport report_;
};

/// Uniform sample over occupancy vectors with the given total and per-cell
/// cap, via exact counting.
std::vector<int> sample_occupancy(Rng& rng, int n_cells, int total, int per_cell_cap);

}  // namespace nomarl
