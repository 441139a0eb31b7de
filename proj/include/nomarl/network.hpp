#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nomarl/rng.hpp"

namespace nomarl {

/// Physical-layer configuration of the uplink network: grid of base
/// stations x sub-channels, bandwidth, noise model constants, per-cluster
/// limits and the discrete gain/power sets users draw from.
struct NetworkConfig {
    int n_bs = 2;
    int n_subchannels = 2;
    double total_bandwidth_hz = 60e3;
    double resistor_temp_k = 300.0;
    double boltzmann = 1.380649e-23;
    int max_cluster_load = 3;              // U_s, users per resource block
    double subchannel_power_cap_w = 10.0;  // P_s
    double sic_rate_threshold_bps = 10e3;  // shared SIC decode threshold
    std::vector<double> gain_levels{1e-5, 1.5e-5, 2e-5};
    std::vector<double> power_levels_dbm{5, 10, 15, 20, 25, 30};

    int cells() const { return n_bs * n_subchannels; }
    double subchannel_bandwidth_hz() const { return total_bandwidth_hz / n_subchannels; }
    // Minimum SINR implied by the rate threshold: 2^(Rth*Ns/B) - 1.
    double sinr_threshold() const;
    void validate() const;  // throws std::invalid_argument naming the bad field
};

double dbm_to_watts(double dbm);

struct UserTerminal {
    int id = 0;
    double gain = 0.0;  // dimensionless channel gain
    double tx_power_w = 0.0;
    bool active = false;
};

/// The 3D user<->BS<->sub-channel association. Cells hold concrete user ids
/// in insertion order; occupancy is derived from the cells so the two can
/// never disagree. add_unchecked() exists so tests can build states that
/// violate the single-cluster constraint.
class AssociationState {
public:
    AssociationState() = default;
    AssociationState(int n_bs, int n_subchannels);

    void assign(int user_id, int bs, int subchannel);  // moves if already placed
    void unassign(int user_id);
    void add_unchecked(int user_id, int bs, int subchannel);
    std::optional<std::pair<int, int>> cell_of(int user_id) const;
    const std::vector<int>& users_in(int bs, int subchannel) const;
    std::vector<int>& users_in(int bs, int subchannel);

    std::vector<int> occupancy() const;  // row-major n_bs*n_subchannels counts
    int occupancy_at(int bs, int subchannel) const;
    int assigned_count() const;
    int n_bs() const { return n_bs_; }
    int n_subchannels() const { return n_sc_; }
    bool empty() const { return assigned_count() == 0; }

private:
    int cell_index(int bs, int subchannel) const { return bs * n_sc_ + subchannel; }
    int n_bs_ = 0;
    int n_sc_ = 0;
    std::vector<std::vector<int>> cells_;
};

struct ClusterMember {
    int user_id = 0;
    double gain = 0.0;
    double tx_power_w = 0.0;
};

/// One resource block's active users, sorted ascending by channel gain
/// (ties by user id). Decoding walks this list back to front.
struct ClusterSnapshot {
    int bs = 0;
    int subchannel = 0;
    std::vector<ClusterMember> members;

    double total_power_w() const;
    double total_received_power_w() const;  // sum of p*g over members
};

ClusterSnapshot build_cluster(int bs, int subchannel, const AssociationState& state,
                              const std::vector<UserTerminal>& users);
// Sub-channel-major order: (bs 0..N_b-1) within sub-channel 0, then 1, ...
std::vector<ClusterSnapshot> build_clusters(const AssociationState& state,
                                            const std::vector<UserTerminal>& users);

struct RateReport {
    std::map<int, double> per_user_rate_bps;
    std::map<int, double> per_user_sinr;
    double sum_rate_bps = 0.0;
    std::set<int> decode_failures;

    int served_users() const;  // users with strictly positive rate
};

/// Thermal noise k_b * T_r * B over the full system bandwidth.
double noise_power_w(const NetworkConfig& config);

/// Received power from active users of other BSs sharing `subchannel`.
double inter_cell_interference_w(int target_bs, int subchannel,
                                 const AssociationState& state,
                                 const std::vector<UserTerminal>& users);

/// Per-member SINR in gain-ascending order. Member k sees the aggregate
/// received power of all weaker members plus inter-cell interference and
/// noise in its denominator; the weakest member has an empty intra sum.
std::vector<std::pair<int, double>> cluster_sinrs(const ClusterSnapshot& cluster,
                                                  double inter_cell_w, double noise_w);

struct ClusterRates {
    // (user id, rate) aligned with the snapshot's member order.
    std::vector<std::pair<int, double>> rate_bps;
    std::vector<int> failures;
};

/// SIC cascade: decode strongest member first. A member whose rate falls
/// below the threshold keeps its computed rate but every weaker member
/// decodes to zero and is reported as a failure.
ClusterRates sic_decode(const ClusterSnapshot& cluster,
                        const std::vector<std::pair<int, double>>& sinrs,
                        const NetworkConfig& config);

RateReport instantaneous_sum_rate(const AssociationState& state,
                                  const std::vector<UserTerminal>& users,
                                  const NetworkConfig& config);

enum class Constraint {
    GainOrder,
    PowerCap,
    SinrThreshold,
    SystemLoad,
    ClusterLoad,
    SingleCluster,
};

const char* to_string(Constraint c);

std::vector<Constraint> validate(const AssociationState& state,
                                 const std::vector<UserTerminal>& users,
                                 const NetworkConfig& config);
// Lower-level entry point taking prebuilt snapshots, so states with
// hand-mangled member ordering can be checked too.
std::vector<Constraint> validate_clusters(const std::vector<ClusterSnapshot>& clusters,
                                          std::size_t n_users, const NetworkConfig& config);

/// Draws the active-user count uniformly from [2, U_s*N_b*N_s] and gives
/// each active user a fresh gain and power level. Ids run 0..count-1.
std::vector<UserTerminal> sample_active_users(Rng& rng, const NetworkConfig& config,
                                              int n_total_users);
// Same but with an explicit count range (traffic density control).
std::vector<UserTerminal> sample_active_users(Rng& rng, const NetworkConfig& config,
                                              int n_total_users, int min_active,
                                              int max_active);

}  // namespace nomarl
