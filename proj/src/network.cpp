#include "nomarl/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nomarl {

double NetworkConfig::sinr_threshold() const {
    return std::pow(2.0, sic_rate_threshold_bps * n_subchannels / total_bandwidth_hz) - 1.0;
}

void NetworkConfig::validate() const {
    if (n_bs < 1) throw std::invalid_argument("n_bs must be >= 1");
    if (n_subchannels < 1) throw std::invalid_argument("n_subchannels must be >= 1");
    if (!(total_bandwidth_hz > 0.0))
        throw std::invalid_argument("total_bandwidth_hz must be > 0");
    if (max_cluster_load < 1) throw std::invalid_argument("max_cluster_load must be >= 1");
    if (!(subchannel_power_cap_w > 0.0))
        throw std::invalid_argument("subchannel_power_cap_w must be > 0");
    if (sic_rate_threshold_bps < 0.0)
        throw std::invalid_argument("sic_rate_threshold_bps must be >= 0");
    if (gain_levels.empty()) throw std::invalid_argument("gain_levels must be nonempty");
    for (double g : gain_levels)
        if (!(g > 0.0)) throw std::invalid_argument("gain_levels must all be > 0");
    if (power_levels_dbm.empty())
        throw std::invalid_argument("power_levels_dbm must be nonempty");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

AssociationState::AssociationState(int n_bs, int n_subchannels)
    : n_bs_(n_bs), n_sc_(n_subchannels), cells_(static_cast<std::size_t>(n_bs) * n_subchannels) {}

void AssociationState::assign(int user_id, int bs, int subchannel) {
    unassign(user_id);
    cells_[cell_index(bs, subchannel)].push_back(user_id);
}

void AssociationState::unassign(int user_id) {
    for (auto& cell : cells_) {
        auto it = std::find(cell.begin(), cell.end(), user_id);
        if (it != cell.end()) {
            cell.erase(it);
            return;
        }
    }
}

void AssociationState::add_unchecked(int user_id, int bs, int subchannel) {
    cells_[cell_index(bs, subchannel)].push_back(user_id);
}

std::optional<std::pair<int, int>> AssociationState::cell_of(int user_id) const {
    for (int i = 0; i < n_bs_; ++i)
        for (int j = 0; j < n_sc_; ++j) {
            const auto& cell = cells_[cell_index(i, j)];
            if (std::find(cell.begin(), cell.end(), user_id) != cell.end())
                return std::make_pair(i, j);
        }
    return std::nullopt;
}

const std::vector<int>& AssociationState::users_in(int bs, int subchannel) const {
    return cells_[cell_index(bs, subchannel)];
}

std::vector<int>& AssociationState::users_in(int bs, int subchannel) {
    return cells_[cell_index(bs, subchannel)];
}

std::vector<int> AssociationState::occupancy() const {
    std::vector<int> occ(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) occ[c] = static_cast<int>(cells_[c].size());
    return occ;
}

int AssociationState::occupancy_at(int bs, int subchannel) const {
    return static_cast<int>(cells_[cell_index(bs, subchannel)].size());
}

int AssociationState::assigned_count() const {
    int n = 0;
    for (const auto& cell : cells_) n += static_cast<int>(cell.size());
    return n;
}

double ClusterSnapshot::total_power_w() const {
    double p = 0.0;
    for (const auto& m : members) p += m.tx_power_w;
    return p;
}

double ClusterSnapshot::total_received_power_w() const {
    double pg = 0.0;
    for (const auto& m : members) pg += m.tx_power_w * m.gain;
    return pg;
}

namespace {

const UserTerminal& user_by_id(const std::vector<UserTerminal>& users, int id) {
    if (id >= 0 && id < static_cast<int>(users.size()) && users[id].id == id) return users[id];
    for (const auto& u : users)
        if (u.id == id) return u;
    throw std::invalid_argument("unknown user id in association state");
}

}  // namespace

ClusterSnapshot build_cluster(int bs, int subchannel, const AssociationState& state,
                              const std::vector<UserTerminal>& users) {
    ClusterSnapshot snap;
    snap.bs = bs;
    snap.subchannel = subchannel;
    for (int id : state.users_in(bs, subchannel)) {
        const UserTerminal& u = user_by_id(users, id);
        if (!u.active) continue;
        snap.members.push_back({u.id, u.gain, u.tx_power_w});
    }
    std::sort(snap.members.begin(), snap.members.end(),
              [](const ClusterMember& a, const ClusterMember& b) {
                  if (a.gain != b.gain) return a.gain < b.gain;
                  return a.user_id < b.user_id;
              });
    return snap;
}

std::vector<ClusterSnapshot> build_clusters(const AssociationState& state,
                                            const std::vector<UserTerminal>& users) {
    std::vector<ClusterSnapshot> clusters;
    clusters.reserve(static_cast<std::size_t>(state.n_bs()) * state.n_subchannels());
    for (int j = 0; j < state.n_subchannels(); ++j)
        for (int i = 0; i < state.n_bs(); ++i)
            clusters.push_back(build_cluster(i, j, state, users));
    return clusters;
}

int RateReport::served_users() const {
    int n = 0;
    for (const auto& [id, rate] : per_user_rate_bps)
        if (rate > 0.0) ++n;
    return n;
}

double noise_power_w(const NetworkConfig& config) {
    return config.boltzmann * config.resistor_temp_k * config.total_bandwidth_hz;
}

double inter_cell_interference_w(int target_bs, int subchannel, const AssociationState& state,
                                 const std::vector<UserTerminal>& users) {
    double total = 0.0;
    for (int i = 0; i < state.n_bs(); ++i) {
        if (i == target_bs) continue;
        ClusterSnapshot other = build_cluster(i, subchannel, state, users);
        for (const auto& m : other.members) total += m.tx_power_w * m.gain;
    }
    return total;
}

std::vector<std::pair<int, double>> cluster_sinrs(const ClusterSnapshot& cluster,
                                                  double inter_cell_w, double noise_w) {
    std::vector<std::pair<int, double>> out;
    out.reserve(cluster.members.size());
    double intra = 0.0;  // received power of weaker members, accumulated in gain order
    for (const auto& m : cluster.members) {
        double signal = m.tx_power_w * m.gain;
        double sinr = signal > 0.0 ? signal / (intra + inter_cell_w + noise_w) : 0.0;
        out.emplace_back(m.user_id, sinr);
        intra += signal;
    }
    return out;
}

ClusterRates sic_decode(const ClusterSnapshot& cluster,
                        const std::vector<std::pair<int, double>>& sinrs,
                        const NetworkConfig& config) {
    ClusterRates rates;
    rates.rate_bps.assign(cluster.members.size(), {0, 0.0});
    const double bw = config.subchannel_bandwidth_hz();
    bool cascade_ok = true;
    // Strongest member (largest gain, end of the list) decodes first.
    for (int idx = static_cast<int>(cluster.members.size()) - 1; idx >= 0; --idx) {
        int id = cluster.members[idx].user_id;
        if (!cascade_ok) {
            rates.rate_bps[idx] = {id, 0.0};
            rates.failures.push_back(id);
            continue;
        }
        double rate = bw > 0.0 ? bw * std::log2(1.0 + sinrs[idx].second) : 0.0;
        rates.rate_bps[idx] = {id, rate};
        if (rate < config.sic_rate_threshold_bps) cascade_ok = false;
    }
    return rates;
}

RateReport instantaneous_sum_rate(const AssociationState& state,
                                  const std::vector<UserTerminal>& users,
                                  const NetworkConfig& config) {
    RateReport report;
    const double noise = noise_power_w(config);
    // Per-sub-channel subtotals summed sub-channel-major; the brute-force
    // searches accumulate the same way so optima compare bit-exactly.
    for (int j = 0; j < state.n_subchannels(); ++j) {
        double subtotal = 0.0;
        for (int i = 0; i < state.n_bs(); ++i) {
            ClusterSnapshot cluster = build_cluster(i, j, state, users);
            if (cluster.members.empty()) continue;
            double inter = inter_cell_interference_w(i, j, state, users);
            auto sinrs = cluster_sinrs(cluster, inter, noise);
            ClusterRates rates = sic_decode(cluster, sinrs, config);
            for (std::size_t k = 0; k < cluster.members.size(); ++k) {
                report.per_user_sinr[sinrs[k].first] = sinrs[k].second;
                report.per_user_rate_bps[rates.rate_bps[k].first] = rates.rate_bps[k].second;
                subtotal += rates.rate_bps[k].second;
            }
            for (int id : rates.failures) report.decode_failures.insert(id);
        }
        report.sum_rate_bps += subtotal;
    }
    return report;
}

const char* to_string(Constraint c) {
    switch (c) {
        case Constraint::GainOrder: return "GainOrder";
        case Constraint::PowerCap: return "PowerCap";
        case Constraint::SinrThreshold: return "SinrThreshold";
        case Constraint::SystemLoad: return "SystemLoad";
        case Constraint::ClusterLoad: return "ClusterLoad";
        case Constraint::SingleCluster: return "SingleCluster";
    }
    return "?";
}

std::vector<Constraint> validate_clusters(const std::vector<ClusterSnapshot>& clusters,
                                          std::size_t n_users, const NetworkConfig& config) {
    std::vector<Constraint> violations;
    const double noise = noise_power_w(config);
    const double min_sinr = config.sinr_threshold();

    bool gain_order_ok = true;
    bool power_cap_ok = true;
    bool sinr_ok = true;
    bool cluster_load_ok = true;
    bool single_ok = true;

    std::map<int, int> appearances;
    int total_members = 0;

    for (const auto& cluster : clusters) {
        for (std::size_t k = 1; k < cluster.members.size(); ++k)
            if (cluster.members[k - 1].gain > cluster.members[k].gain) gain_order_ok = false;
        if (cluster.total_power_w() > config.subchannel_power_cap_w) power_cap_ok = false;
        if (static_cast<int>(cluster.members.size()) > config.max_cluster_load)
            cluster_load_ok = false;
        for (const auto& m : cluster.members) {
            ++appearances[m.user_id];
            ++total_members;
        }

        // Inter-cell interference from the co-channel clusters in this set.
        double inter = 0.0;
        for (const auto& other : clusters) {
            if (other.subchannel != cluster.subchannel || other.bs == cluster.bs) continue;
            inter += other.total_received_power_w();
        }
        for (const auto& [id, sinr] : cluster_sinrs(cluster, inter, noise))
            if (sinr < min_sinr) sinr_ok = false;
    }

    for (const auto& [id, count] : appearances)
        if (count > 1) single_ok = false;

    bool system_load_ok =
        total_members == 0 ||
        (total_members >= 2 && total_members <= static_cast<int>(n_users));

    if (!gain_order_ok) violations.push_back(Constraint::GainOrder);
    if (!power_cap_ok) violations.push_back(Constraint::PowerCap);
    if (!sinr_ok) violations.push_back(Constraint::SinrThreshold);
    if (!system_load_ok) violations.push_back(Constraint::SystemLoad);
    if (!cluster_load_ok) violations.push_back(Constraint::ClusterLoad);
    if (!single_ok) violations.push_back(Constraint::SingleCluster);
    return violations;
}

std::vector<Constraint> validate(const AssociationState& state,
                                 const std::vector<UserTerminal>& users,
                                 const NetworkConfig& config) {
    return validate_clusters(build_clusters(state, users), users.size(), config);
}

std::vector<UserTerminal> sample_active_users(Rng& rng, const NetworkConfig& config,
                                              int n_total_users, int min_active,
                                              int max_active) {
    const int capacity = config.max_cluster_load * config.cells();
    if (min_active < 2) throw std::invalid_argument("min_active must be >= 2");
    if (max_active < min_active) throw std::invalid_argument("max_active must be >= min_active");
    if (max_active > capacity)
        throw std::invalid_argument("max_active exceeds U_s*N_b*N_s capacity");
    if (max_active > n_total_users)
        throw std::invalid_argument("max_active exceeds the user pool");

    const int count = uniform_int(rng, min_active, max_active);
    std::vector<UserTerminal> active;
    active.reserve(static_cast<std::size_t>(count));
    for (int id = 0; id < count; ++id) {
        UserTerminal u;
        u.id = id;
        u.gain = pick(rng, config.gain_levels);
        u.tx_power_w = dbm_to_watts(pick(rng, config.power_levels_dbm));
        u.active = true;
        active.push_back(u);
    }
    return active;
}

std::vector<UserTerminal> sample_active_users(Rng& rng, const NetworkConfig& config,
                                              int n_total_users) {
    const int capacity = config.max_cluster_load * config.cells();
    if (capacity > n_total_users)
        throw std::invalid_argument("U_s*N_b*N_s exceeds the user pool");
    return sample_active_users(rng, config, n_total_users, 2, capacity);
}

}  // namespace nomarl
