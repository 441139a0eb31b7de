#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nomarl/mdp.hpp"
#include "nomarl/rng.hpp"

namespace nomarl {

struct SarsaHyper {
    double alpha = 0.75;
    double gamma = 0.6;
    double epsilon = 0.1;
    int episodes = 500;
    int trials_per_episode = 500;

    void validate() const;
};

/// Dense state x action value table, initialized to -100 so trained
/// entries drift toward zero as allocations improve.
class QTable {
public:
    QTable() = default;
    QTable(std::uint64_t n_states, int n_actions, double initial_value = -100.0);

    double at(std::uint64_t s, int a) const;
    double& at(std::uint64_t s, int a);
    std::uint64_t n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    const std::vector<double>& data() const { return values_; }

    std::vector<double>& data() { return values_; }

    int argmax_action(std::uint64_t s) const;  // ties break to the lowest index
    double row_max(std::uint64_t s) const;

private:
    std::uint64_t n_states_ = 0;
    int n_actions_ = 0;
    std::vector<double> values_;
};

int select_action(const QTable& q, std::uint64_t s, double epsilon, Rng& rng);

void sarsa_update(QTable& q, std::uint64_t s, int a, double r, std::uint64_t s_next,
                  int a_next, const SarsaHyper& hyper);

std::vector<int> greedy_policy(const QTable& q);
double state_value(const QTable& q, std::uint64_t s);

/// The allocation an episode hands back: the best association visited plus
/// per-cluster re-optimized power levels (falling back to the sampled
/// powers where the level search would be too large or no valid combination
/// exists).
struct OptimizedAllocation {
    AssociationState association;
    std::map<int, double> powers_w;
    double sum_rate_bps = 0.0;
    bool powers_optimized = false;
};

struct EpisodeMetrics {
    double cumulative_reward = 0.0;
    double mean_sum_rate_bps = 0.0;
    double best_sum_rate_bps = 0.0;   // best visited, sampled powers
    double final_sum_rate_bps = 0.0;
    double mean_decision_seconds = 0.0;
    double mean_loss = 0.0;  // DQN only; 0 when no gradient step ran
    bool has_loss = false;
    int served_users = 0;  // at the optimized allocation
    std::vector<double> reward_trace;
    std::vector<double> rate_trace;
    OptimizedAllocation optimized;
};

/// One on-policy episode over a freshly reset environment: select, step,
/// select next, update, advance. `radix_users` sets the state-index radix
/// (the scenario's maximum active-user count).
EpisodeMetrics run_sarsa_episode(Environment& env, QTable& q, const SarsaHyper& hyper,
                                 int radix_users, Rng& rng);

/// Greedy rollout without learning; used to score a trained table.
EpisodeMetrics run_greedy_episode(Environment& env, const QTable& q, int trials,
                                  int radix_users, Rng& rng);

// Checkpoint: little-endian header (radix, grid dims, action count, hyper)
// followed by the table as a flat array.
void save_qtable(std::ostream& out, const QTable& q, int radix, int n_bs, int n_subchannels,
                 const SarsaHyper& hyper);
struct QTableCheckpoint {
    QTable table;
    int radix = 0;
    int n_bs = 0;
    int n_subchannels = 0;
    SarsaHyper hyper;
};
QTableCheckpoint load_qtable(std::istream& in);
void save_qtable_file(const std::string& path, const QTable& q, int radix, int n_bs,
                      int n_subchannels, const SarsaHyper& hyper);
QTableCheckpoint load_qtable_file(const std::string& path);

}  // namespace nomarl
