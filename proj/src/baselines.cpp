#include "nomarl/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace nomarl {

namespace {

// One sub-channel's clusters plus the slot of every user inside them, in
// ascending user order (the power odometer's digit order).
struct SubchannelWork {
    int subchannel = 0;
    std::vector<ClusterSnapshot> clusters;             // nonempty, BS ascending
    std::vector<std::pair<int, int>> member_slots;     // (cluster, member) per digit
    std::vector<int> user_indices;                     // into the users vector
};

SubchannelWork build_subchannel_work(int subchannel, const std::vector<int>& cells,
                                     const std::vector<UserTerminal>& users,
                                     const NetworkConfig& config) {
    SubchannelWork work;
    work.subchannel = subchannel;
    for (int bs = 0; bs < config.n_bs; ++bs) {
        ClusterSnapshot snap;
        snap.bs = bs;
        snap.subchannel = subchannel;
        for (std::size_t k = 0; k < users.size(); ++k) {
            const int cell = cells[k];
            if (!users[k].active) continue;
            if (cell / config.n_subchannels != bs || cell % config.n_subchannels != subchannel)
                continue;
            snap.members.push_back({users[k].id, users[k].gain, users[k].tx_power_w});
        }
        if (snap.members.empty()) continue;
        std::sort(snap.members.begin(), snap.members.end(),
                  [](const ClusterMember& a, const ClusterMember& b) {
                      if (a.gain != b.gain) return a.gain < b.gain;
                      return a.user_id < b.user_id;
                  });
        work.clusters.push_back(std::move(snap));
    }
    for (std::size_t k = 0; k < users.size(); ++k) {
        const int cell = cells[k];
        if (!users[k].active) continue;
        if (cell % config.n_subchannels != subchannel) continue;
        work.user_indices.push_back(static_cast<int>(k));
        bool found = false;
        for (std::size_t ci = 0; ci < work.clusters.size() && !found; ++ci)
            for (std::size_t mi = 0; mi < work.clusters[ci].members.size(); ++mi)
                if (work.clusters[ci].members[mi].user_id == users[k].id) {
                    work.member_slots.emplace_back(static_cast<int>(ci), static_cast<int>(mi));
                    found = true;
                    break;
                }
    }
    return work;
}

// Sum rate of one sub-channel under the powers currently written into the
// cluster members. Accumulation mirrors instantaneous_sum_rate exactly:
// clusters BS-ascending, members gain-ascending, one running subtotal.
double eval_subchannel(const SubchannelWork& work, const NetworkConfig& config, double noise,
                       double min_sinr, bool enforce_constraints, bool* valid_out) {
    bool valid = true;
    double subtotal = 0.0;
    for (std::size_t ci = 0; ci < work.clusters.size(); ++ci) {
        const ClusterSnapshot& cluster = work.clusters[ci];
        if (enforce_constraints &&
            cluster.total_power_w() > config.subchannel_power_cap_w)
            valid = false;
        double inter = 0.0;
        for (std::size_t cj = 0; cj < work.clusters.size(); ++cj) {
            if (cj == ci) continue;
            for (const auto& m : work.clusters[cj].members) inter += m.tx_power_w * m.gain;
        }
        auto sinrs = cluster_sinrs(cluster, inter, noise);
        if (enforce_constraints)
            for (const auto& [id, sinr] : sinrs)
                if (sinr < min_sinr) valid = false;
        ClusterRates rates = sic_decode(cluster, sinrs, config);
        for (const auto& [id, rate] : rates.rate_bps) subtotal += rate;
    }
    if (valid_out) *valid_out = valid;
    return subtotal;
}

struct SubchannelBest {
    double rate = 0.0;
    std::vector<double> powers_w;  // aligned with work.user_indices
};

// Best valid power-level combination for one sub-channel; first
// strictly-better combination wins so ties resolve to the lexicographically
// smallest level indices.
std::optional<SubchannelBest> best_subchannel_powers(SubchannelWork& work,
                                                     const std::vector<double>& levels_dbm,
                                                     const NetworkConfig& config, double noise,
                                                     double min_sinr) {
    const std::size_t n = work.user_indices.size();
    if (n == 0) return SubchannelBest{0.0, {}};

    std::vector<double> levels_w(levels_dbm.size());
    for (std::size_t i = 0; i < levels_dbm.size(); ++i)
        levels_w[i] = dbm_to_watts(levels_dbm[i]);

    std::vector<std::size_t> digits(n, 0);
    std::optional<SubchannelBest> best;
    for (;;) {
        for (std::size_t k = 0; k < n; ++k) {
            const auto [ci, mi] = work.member_slots[k];
            work.clusters[static_cast<std::size_t>(ci)]
                .members[static_cast<std::size_t>(mi)]
                .tx_power_w = levels_w[digits[k]];
        }
        bool valid = false;
        const double rate = eval_subchannel(work, config, noise, min_sinr, true, &valid);
        if (valid && (!best || rate > best->rate)) {
            SubchannelBest b;
            b.rate = rate;
            b.powers_w.resize(n);
            for (std::size_t k = 0; k < n; ++k) b.powers_w[k] = levels_w[digits[k]];
            best = std::move(b);
        }
        // advance odometer, last digit fastest
        std::size_t pos = n;
        while (pos > 0) {
            --pos;
            if (++digits[pos] < levels_w.size()) break;
            digits[pos] = 0;
            if (pos == 0) return best;
        }
    }
}

double pow_ll(double base, int exp) {
    double v = 1.0;
    for (int i = 0; i < exp; ++i) v *= base;
    return v;
}

BenchmarkResult exhaustive_core(const std::vector<UserTerminal>& users,
                                const NetworkConfig& config,
                                const std::vector<double>& levels_dbm,
                                const ExhaustiveGuard& guard) {
    config.validate();
    const int n = static_cast<int>(users.size());
    const int cells = config.cells();
    const double noise = noise_power_w(config);
    const double min_sinr = config.sinr_threshold();

    const double assignments = pow_ll(static_cast<double>(cells), n);
    if (assignments > static_cast<double>(guard.max_assignments))
        throw GuardViolation("exhaustive search: " + std::to_string(assignments) +
                             " assignments exceed the guard of " +
                             std::to_string(guard.max_assignments));
    const int worst_cochannel = std::min(n, config.max_cluster_load * config.n_bs);
    const double worst_combos =
        pow_ll(static_cast<double>(levels_dbm.size()), worst_cochannel);
    if (worst_combos > static_cast<double>(guard.max_power_combos))
        throw GuardViolation("exhaustive search: " + std::to_string(worst_combos) +
                             " power combinations exceed the guard of " +
                             std::to_string(guard.max_power_combos));

    BenchmarkResult result;
    result.best_assignment = AssociationState(config.n_bs, config.n_subchannels);

    std::vector<int> cells_of(static_cast<std::size_t>(n), 0);
    std::vector<int> occupancy(static_cast<std::size_t>(cells), 0);
    bool have_best = false;
    double best_value = 0.0;
    std::vector<int> best_cells;
    std::vector<double> best_powers;

    for (;;) {
        ++result.states_evaluated;

        std::fill(occupancy.begin(), occupancy.end(), 0);
        bool load_ok = true;
        for (int k = 0; k < n; ++k)
            if (++occupancy[static_cast<std::size_t>(cells_of[static_cast<std::size_t>(k)])] >
                config.max_cluster_load)
                load_ok = false;

        if (load_ok) {
            double value = 0.0;
            std::vector<double> powers(static_cast<std::size_t>(n), 0.0);
            bool feasible = true;
            for (int j = 0; j < config.n_subchannels && feasible; ++j) {
                SubchannelWork work = build_subchannel_work(j, cells_of, users, config);
                auto best = best_subchannel_powers(work, levels_dbm, config, noise, min_sinr);
                if (!best) {
                    feasible = false;
                    break;
                }
                value += best->rate;
                for (std::size_t k = 0; k < work.user_indices.size(); ++k)
                    powers[static_cast<std::size_t>(work.user_indices[k])] = best->powers_w[k];
            }
            if (feasible && (!have_best || value > best_value)) {
                have_best = true;
                best_value = value;
                best_cells = cells_of;
                best_powers = powers;
            }
        }

        // odometer: last user fastest, so ties keep the lexicographically
        // smallest assignment
        int pos = n;
        bool done = false;
        while (pos > 0) {
            --pos;
            if (++cells_of[static_cast<std::size_t>(pos)] < cells) break;
            cells_of[static_cast<std::size_t>(pos)] = 0;
            if (pos == 0) done = true;
        }
        if (done || n == 0) break;
    }

    if (have_best) {
        std::vector<UserTerminal> tuned = users;
        for (int k = 0; k < n; ++k) {
            const int cell = best_cells[static_cast<std::size_t>(k)];
            result.best_assignment.add_unchecked(users[static_cast<std::size_t>(k)].id,
                                                 cell / config.n_subchannels,
                                                 cell % config.n_subchannels);
            tuned[static_cast<std::size_t>(k)].tx_power_w =
                best_powers[static_cast<std::size_t>(k)];
            result.best_powers_w[users[static_cast<std::size_t>(k)].id] =
                best_powers[static_cast<std::size_t>(k)];
        }
        result.best_report = instantaneous_sum_rate(result.best_assignment, tuned, config);
        result.best_sum_rate_bps = result.best_report.sum_rate_bps;
    }
    return result;
}

}  // namespace

BenchmarkResult exhaustive_best(const std::vector<UserTerminal>& users,
                                const NetworkConfig& config, const ExhaustiveGuard& guard) {
    return exhaustive_core(users, config, config.power_levels_dbm, guard);
}

BenchmarkResult noma_fixed_power(const std::vector<UserTerminal>& users,
                                 const NetworkConfig& config, double fixed_level_dbm,
                                 const ExhaustiveGuard& guard) {
    if (std::find(config.power_levels_dbm.begin(), config.power_levels_dbm.end(),
                  fixed_level_dbm) == config.power_levels_dbm.end())
        throw std::invalid_argument("fixed power level not in power_levels_dbm");
    return exhaustive_core(users, config, {fixed_level_dbm}, guard);
}

BenchmarkResult oma_allocate(const std::vector<UserTerminal>& users,
                             const NetworkConfig& config) {
    config.validate();
    BenchmarkResult result;
    result.states_evaluated = 1;
    result.best_assignment = AssociationState(config.n_bs, config.n_subchannels);

    std::vector<int> order;
    for (std::size_t k = 0; k < users.size(); ++k)
        if (users[k].active) order.push_back(static_cast<int>(k));
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double pga = users[static_cast<std::size_t>(a)].tx_power_w *
                           users[static_cast<std::size_t>(a)].gain;
        const double pgb = users[static_cast<std::size_t>(b)].tx_power_w *
                           users[static_cast<std::size_t>(b)].gain;
        if (pga != pgb) return pga > pgb;
        return users[static_cast<std::size_t>(a)].id < users[static_cast<std::size_t>(b)].id;
    });

    const int served = std::min(static_cast<int>(order.size()), config.cells());
    struct Placed {
        int user_index;
        int bs;
        int subchannel;
    };
    std::vector<Placed> placed;
    for (int slot = 0; slot < served; ++slot) {
        const int bs = slot / config.n_subchannels;       // row-major block order
        const int sc = slot % config.n_subchannels;
        const int k = order[static_cast<std::size_t>(slot)];
        result.best_assignment.add_unchecked(users[static_cast<std::size_t>(k)].id, bs, sc);
        result.best_powers_w[users[static_cast<std::size_t>(k)].id] =
            users[static_cast<std::size_t>(k)].tx_power_w;
        placed.push_back({k, bs, sc});
    }

    const double noise = noise_power_w(config);
    const double bw = config.subchannel_bandwidth_hz();
    for (int j = 0; j < config.n_subchannels; ++j) {
        double subtotal = 0.0;
        for (const auto& p : placed) {
            if (p.subchannel != j) continue;
            const UserTerminal& u = users[static_cast<std::size_t>(p.user_index)];
            double inter = 0.0;
            for (const auto& q : placed) {
                if (q.subchannel != j || q.bs == p.bs) continue;
                const UserTerminal& v = users[static_cast<std::size_t>(q.user_index)];
                inter += v.tx_power_w * v.gain;
            }
            const double sinr = u.tx_power_w * u.gain / (inter + noise);
            const double rate = bw > 0.0 ? bw * std::log2(1.0 + sinr) : 0.0;
            result.best_report.per_user_sinr[u.id] = sinr;
            result.best_report.per_user_rate_bps[u.id] = rate;
            subtotal += rate;
        }
        result.best_report.sum_rate_bps += subtotal;
    }
    for (std::size_t k = 0; k < users.size(); ++k)
        if (users[k].active && !result.best_report.per_user_rate_bps.count(users[k].id))
            result.best_report.per_user_rate_bps[users[k].id] = 0.0;
    result.best_sum_rate_bps = result.best_report.sum_rate_bps;
    return result;
}

PowerOptResult optimize_powers(const AssociationState& state,
                               const std::vector<UserTerminal>& users,
                               const NetworkConfig& config, long long combo_guard) {
    const double noise = noise_power_w(config);
    const double min_sinr = config.sinr_threshold();

    std::vector<UserTerminal> tuned = users;
    // Map association cells back onto the users vector.
    std::vector<int> cells_of(users.size(), -1);
    for (std::size_t k = 0; k < users.size(); ++k) {
        auto cell = state.cell_of(users[k].id);
        if (cell)
            cells_of[k] = cell->first * config.n_subchannels + cell->second;
    }

    bool all_searched = true;
    for (int j = 0; j < config.n_subchannels; ++j) {
        // Unassigned users carry cell -1, which matches no sub-channel.
        SubchannelWork work = build_subchannel_work(j, cells_of, tuned, config);
        const double combos =
            pow_ll(static_cast<double>(config.power_levels_dbm.size()),
                   static_cast<int>(work.user_indices.size()));
        if (combos > static_cast<double>(combo_guard)) {
            all_searched = false;
            continue;
        }
        const double sampled_rate = eval_subchannel(work, config, noise, min_sinr, false, nullptr);
        auto best = best_subchannel_powers(work, config.power_levels_dbm, config, noise, min_sinr);
        if (best && best->rate > sampled_rate)
            for (std::size_t k = 0; k < work.user_indices.size(); ++k)
                tuned[static_cast<std::size_t>(work.user_indices[k])].tx_power_w =
                    best->powers_w[k];
    }

    PowerOptResult result;
    result.optimized = all_searched;
    for (const auto& u : tuned)
        if (u.active) result.powers_w[u.id] = u.tx_power_w;
    result.sum_rate_bps = instantaneous_sum_rate(state, tuned, config).sum_rate_bps;
    return result;
}

}  // namespace nomarl
