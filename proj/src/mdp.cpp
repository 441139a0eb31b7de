#include "nomarl/mdp.hpp"

#include <algorithm>
#include <stdexcept>

namespace nomarl {

namespace {

SwapAction make_swap(int cells, int src, int dst) {
    SwapAction a;
    a.delta.assign(static_cast<std::size_t>(cells), 0);
    a.delta[static_cast<std::size_t>(src)] = -1;
    a.delta[static_cast<std::size_t>(dst)] = 1;
    a.src = src;
    a.dst = dst;
    return a;
}

}  // namespace

std::vector<SwapAction> action_catalog(const NetworkConfig& config) {
    const int nb = config.n_bs;
    const int ns = config.n_subchannels;
    const int cells = nb * ns;
    std::vector<SwapAction> catalog;

    // Moves between BSs on the same sub-channel.
    for (int j = 0; j < ns; ++j)
        for (int src_i = 0; src_i < nb; ++src_i)
            for (int dst_i = 0; dst_i < nb; ++dst_i) {
                if (dst_i == src_i) continue;
                catalog.push_back(make_swap(cells, src_i * ns + j, dst_i * ns + j));
            }
    // Moves between sub-channels at the same BS.
    for (int i = 0; i < nb; ++i)
        for (int src_j = 0; src_j < ns; ++src_j)
            for (int dst_j = 0; dst_j < ns; ++dst_j) {
                if (dst_j == src_j) continue;
                catalog.push_back(make_swap(cells, i * ns + src_j, i * ns + dst_j));
            }

    SwapAction noop;
    noop.delta.assign(static_cast<std::size_t>(cells), 0);
    catalog.push_back(noop);
    return catalog;
}

std::optional<EnvState> apply_action(const EnvState& state, const SwapAction& action,
                                     const NetworkConfig& config, Rng& rng) {
    EnvState next = state;
    next.step = state.step + 1;
    if (action.is_noop()) return next;

    const int src_bs = action.src / config.n_subchannels;
    const int src_sc = action.src % config.n_subchannels;
    const int dst_bs = action.dst / config.n_subchannels;
    const int dst_sc = action.dst % config.n_subchannels;

    if (state.association.occupancy_at(src_bs, src_sc) < 1) return std::nullopt;
    if (state.association.occupancy_at(dst_bs, dst_sc) + 1 > config.max_cluster_load)
        return std::nullopt;

    auto& src_cell = next.association.users_in(src_bs, src_sc);
    const std::size_t pick = uniform_index(rng, src_cell.size());
    const int user_id = src_cell[pick];
    src_cell.erase(src_cell.begin() + static_cast<std::ptrdiff_t>(pick));
    next.association.users_in(dst_bs, dst_sc).push_back(user_id);
    return next;
}

double reward(int prev_user_count, int next_user_count, double prev_rate_bps,
              double next_rate_bps) {
    if (next_rate_bps >= prev_rate_bps && prev_user_count == next_user_count) return 0.0;
    return -10.0;
}

double reward(const EnvState& prev, const EnvState& next, double prev_rate_bps,
              double next_rate_bps) {
    return reward(prev.user_count(), next.user_count(), prev_rate_bps, next_rate_bps);
}

std::uint64_t occupancy_index(const std::vector<int>& occupancy, int radix) {
    std::uint64_t index = 0;
    for (int entry : occupancy) {
        if (entry < 0 || entry >= radix)
            throw std::out_of_range("occupancy entry out of radix range");
        index = index * static_cast<std::uint64_t>(radix) + static_cast<std::uint64_t>(entry);
    }
    return index;
}

std::vector<int> decode_occupancy_index(std::uint64_t index, int radix, int n_cells) {
    std::vector<int> occ(static_cast<std::size_t>(n_cells), 0);
    for (int c = n_cells - 1; c >= 0; --c) {
        occ[static_cast<std::size_t>(c)] =
            static_cast<int>(index % static_cast<std::uint64_t>(radix));
        index /= static_cast<std::uint64_t>(radix);
    }
    if (index != 0) throw std::out_of_range("index exceeds the occupancy grid");
    return occ;
}

std::uint64_t state_index(const EnvState& state, int n_users) {
    return occupancy_index(state.occupancy(), n_users + 1);
}

std::vector<double> encode_drl_state(const EnvState& state, double r_inst, double r_avg,
                                     const NetworkConfig& config) {
    std::vector<double> vec;
    vec.reserve(static_cast<std::size_t>(config.cells()) + 2);
    for (int entry : state.occupancy())
        vec.push_back(static_cast<double>(entry) / config.max_cluster_load);
    vec.push_back(r_inst);
    vec.push_back(r_avg);
    return vec;
}

namespace {

// ways[c][r] = #occupancy vectors over c cells summing to r with entries <= cap
std::vector<std::vector<std::uint64_t>> occupancy_counts(int n_cells, int total, int cap) {
    std::vector<std::vector<std::uint64_t>> ways(
        static_cast<std::size_t>(n_cells) + 1,
        std::vector<std::uint64_t>(static_cast<std::size_t>(total) + 1, 0));
    ways[0][0] = 1;
    for (int c = 1; c <= n_cells; ++c)
        for (int r = 0; r <= total; ++r) {
            std::uint64_t sum = 0;
            for (int k = 0; k <= std::min(cap, r); ++k) sum += ways[c - 1][r - k];
            ways[c][r] = sum;
        }
    return ways;
}

}  // namespace

std::vector<int> sample_occupancy(Rng& rng, int n_cells, int total, int per_cell_cap) {
    if (total > n_cells * per_cell_cap)
        throw std::invalid_argument("total users exceed the grid capacity");
    auto ways = occupancy_counts(n_cells, total, per_cell_cap);
    std::vector<int> occ(static_cast<std::size_t>(n_cells), 0);
    int remaining = total;
    for (int c = 0; c < n_cells; ++c) {
        const int cells_left = n_cells - c - 1;
        std::uint64_t target = uniform_index(rng, ways[cells_left + 1][remaining]);
        for (int k = 0; k <= std::min(per_cell_cap, remaining); ++k) {
            const std::uint64_t branch = ways[cells_left][remaining - k];
            if (target < branch) {
                occ[static_cast<std::size_t>(c)] = k;
                remaining -= k;
                break;
            }
            target -= branch;
        }
    }
    return occ;
}

Environment::Environment(NetworkConfig config)
    : config_(std::move(config)), actions_(action_catalog(config_)) {
    config_.validate();
}

void Environment::reset(std::vector<UserTerminal> users, Rng& rng) {
    users_ = std::move(users);
    state_ = EnvState{};
    state_.association = AssociationState(config_.n_bs, config_.n_subchannels);

    const int m = static_cast<int>(users_.size());
    std::vector<int> occ = sample_occupancy(rng, config_.cells(), m, config_.max_cluster_load);

    std::vector<int> order(users_.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = users_[k].id;
    for (std::size_t k = order.size(); k > 1; --k)
        std::swap(order[k - 1], order[uniform_index(rng, k)]);

    std::size_t cursor = 0;
    for (int cell = 0; cell < config_.cells(); ++cell)
        for (int n = 0; n < occ[static_cast<std::size_t>(cell)]; ++n)
            state_.association.add_unchecked(order[cursor++], cell / config_.n_subchannels,
                                             cell % config_.n_subchannels);

    report_ = instantaneous_sum_rate(state_.association, users_, config_);
}

Environment::StepResult Environment::step(int action_index, Rng& rng) {
    const double prev_rate = report_.sum_rate_bps;
    const int prev_count = state_.user_count();
    auto next = apply_action(state_, actions_[static_cast<std::size_t>(action_index)],
                             config_, rng);
    if (!next) {
        // Rejected move: stay in place with the failure reward.
        return StepResult{-10.0, false, prev_rate};
    }
    RateReport next_report = instantaneous_sum_rate(next->association, users_, config_);
    const double r = reward(prev_count, next->user_count(), prev_rate,
                            next_report.sum_rate_bps);
    state_ = std::move(*next);
    report_ = std::move(next_report);
    return StepResult{r, true, report_.sum_rate_bps};
}

}  // namespace nomarl
