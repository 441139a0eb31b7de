#pragma once

#include <cstddef>
#include <vector>

#include "nomarl/mdp.hpp"
#include "nomarl/mlp.hpp"
#include "nomarl/rng.hpp"
#include "nomarl/sarsa.hpp"  // EpisodeMetrics / OptimizedAllocation

namespace nomarl {

struct Transition {
    std::vector<double> s;
    int a = 0;
    double r = 0.0;
    std::vector<double> s_next;
};

/// Bounded FIFO of transitions; pushing past capacity evicts the oldest.
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity);

    void remember(Transition t);
    std::size_t size() const { return size_; }
    std::size_t capacity() const { return capacity_; }
    const Transition& at(std::size_t logical) const;  // 0 = oldest

    /// Uniform sample without replacement within one batch.
    std::vector<Transition> sample_minibatch(std::size_t batch_size, Rng& rng) const;

private:
    std::size_t capacity_ = 0;
    std::size_t size_ = 0;
    std::size_t head_ = 0;  // next slot to overwrite
    std::vector<Transition> storage_;
};

struct DqnConfig {
    int batch_size = 500;
    int replay_capacity = 500;
    int pretrain_length = 500;       // transitions taken with random actions
    int target_update_interval = 100;  // gradient steps between target syncs
    double epsilon = 0.1;
    double gamma = 0.6;
    int episodes = 500;
    int trials = 500;
    Activation activation = Activation::ReLU;
    int hidden_width = 500;
    int hidden_layers = 2;
    double adam_lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_lambda = 0.5;

    void validate() const;
    std::vector<int> widths(int input_width, int n_actions) const;
};

struct TwinNetworks {
    Mlp train_net;
    Mlp target_net;

    static TwinNetworks make(const std::vector<int>& widths, Activation act, Rng& rng);
};

/// Bit-exact copy of the training parameters into the target network.
void sync_target(TwinNetworks& twins);

/// y = r + gamma * max_a' Q(s', a'; target).
std::vector<double> target_values(const std::vector<Transition>& batch, const Mlp& target_net,
                                  double gamma);

/// One gradient step: sample, bootstrap targets from the frozen target
/// net, mask the loss to each record's taken action, Adam-update the
/// training net. Returns the batch loss.
double train_step(TwinNetworks& twins, const ReplayBuffer& buffer, AdamState& adam,
                  const DqnConfig& config, Rng& rng);

int select_action(const TwinNetworks& twins, std::span<const double> s_vec, double epsilon,
                  Rng& rng);

/// Counters that persist across episodes of one training run.
struct DqnRunState {
    long long total_transitions = 0;
    long long gradient_steps = 0;
    double reward_sum = 0.0;  // feeds the running-average reward input
    long long reward_steps = 0;
};

EpisodeMetrics run_dqn_episode(Environment& env, TwinNetworks& twins, ReplayBuffer& buffer,
                               AdamState& adam, const DqnConfig& config, DqnRunState& run,
                               Rng& rng);

// Checkpoint: training-network parameters in the Mlp format plus a run
// header (episode, gradient steps); the replay buffer is omitted.
void save_dqn_checkpoint(std::ostream& out, const TwinNetworks& twins, long long episode,
                         const DqnRunState& run);
struct DqnCheckpoint {
    Mlp train_net;
    long long episode = 0;
    long long total_transitions = 0;
    long long gradient_steps = 0;
};
DqnCheckpoint load_dqn_checkpoint(std::istream& in);

}  // namespace nomarl
