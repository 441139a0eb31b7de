#include "nomarl/dqn.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <stdexcept>

#include "nomarl/baselines.hpp"

namespace nomarl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity), storage_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
}

void ReplayBuffer::remember(Transition t) {
    storage_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
    if (size_ < capacity_) ++size_;
}

const Transition& ReplayBuffer::at(std::size_t logical) const {
    if (logical >= size_) throw std::out_of_range("replay index out of range");
    const std::size_t oldest = size_ < capacity_ ? 0 : head_;
    return storage_[(oldest + logical) % capacity_];
}

std::vector<Transition> ReplayBuffer::sample_minibatch(std::size_t batch_size, Rng& rng) const {
    if (batch_size > size_)
        throw std::runtime_error("replay buffer holds fewer transitions than the batch size");
    std::vector<std::size_t> indices(size_);
    for (std::size_t i = 0; i < size_; ++i) indices[i] = i;
    std::vector<Transition> batch;
    batch.reserve(batch_size);
    // partial Fisher-Yates: uniform without replacement
    for (std::size_t k = 0; k < batch_size; ++k) {
        const std::size_t j = k + uniform_index(rng, size_ - k);
        std::swap(indices[k], indices[j]);
        batch.push_back(at(indices[k]));
    }
    return batch;
}

void DqnConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (replay_capacity < batch_size)
        throw std::invalid_argument("batch_size must be <= replay_capacity");
    if (pretrain_length < 0) throw std::invalid_argument("pretrain_length must be >= 0");
    if (target_update_interval < 1)
        throw std::invalid_argument("target_update_interval must be >= 1");
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0,1]");
    if (!(gamma > 0.0) || !(gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
    if (hidden_width < 1 || hidden_layers < 1)
        throw std::invalid_argument("hidden dimensions must be >= 1");
}

std::vector<int> DqnConfig::widths(int input_width, int n_actions) const {
    std::vector<int> w;
    w.push_back(input_width);
    for (int l = 0; l < hidden_layers; ++l) w.push_back(hidden_width);
    w.push_back(n_actions);
    return w;
}

TwinNetworks TwinNetworks::make(const std::vector<int>& widths, Activation act, Rng& rng) {
    TwinNetworks twins;
    twins.train_net = Mlp::glorot(widths, act, rng);
    twins.target_net = twins.train_net;
    return twins;
}

void sync_target(TwinNetworks& twins) { twins.target_net = twins.train_net; }

std::vector<double> target_values(const std::vector<Transition>& batch, const Mlp& target_net,
                                  double gamma) {
    std::vector<double> ys;
    ys.reserve(batch.size());
    for (const Transition& t : batch) {
        const std::vector<double> q = target_net.forward(t.s_next);
        double best = q.front();
        for (double v : q) best = std::max(best, v);
        ys.push_back(t.r + gamma * best);
    }
    return ys;
}

double train_step(TwinNetworks& twins, const ReplayBuffer& buffer, AdamState& adam,
                  const DqnConfig& config, Rng& rng) {
    const std::vector<Transition> batch =
        buffer.sample_minibatch(static_cast<std::size_t>(config.batch_size), rng);
    const std::vector<double> ys = target_values(batch, twins.target_net, config.gamma);

    Batch inputs;
    Batch targets;
    inputs.reserve(batch.size());
    targets.reserve(batch.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        inputs.push_back(batch[k].s);
        // Loss masked to the taken action: every other component's target
        // equals the current prediction, so its residual is exactly zero.
        std::vector<double> target = twins.train_net.forward(batch[k].s);
        target[static_cast<std::size_t>(batch[k].a)] = ys[k];
        targets.push_back(std::move(target));
    }
    double loss = 0.0;
    const std::vector<double> grads = backward(twins.train_net, inputs, targets, &loss);
    adam_step(twins.train_net.params(), grads, adam);
    return loss;
}

int select_action(const TwinNetworks& twins, std::span<const double> s_vec, double epsilon,
                  Rng& rng) {
    const int n_actions = twins.train_net.output_width();
    if (epsilon > 0.0 && uniform01(rng) < epsilon)
        return static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n_actions)));
    const std::vector<double> q = twins.train_net.forward(s_vec);
    int best = 0;
    for (int a = 1; a < n_actions; ++a)
        if (q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(best)]) best = a;
    return best;
}

EpisodeMetrics run_dqn_episode(Environment& env, TwinNetworks& twins, ReplayBuffer& buffer,
                               AdamState& adam, const DqnConfig& config, DqnRunState& run,
                               Rng& rng) {
    using clock = std::chrono::steady_clock;
    EpisodeMetrics metrics;
    metrics.best_sum_rate_bps = env.sum_rate_bps();
    AssociationState best_assoc = env.state().association;

    double episode_reward_sum = 0.0;
    double r_inst = 0.0;
    double rate_sum = 0.0;
    double seconds = 0.0;
    double loss_sum = 0.0;
    int loss_count = 0;

    for (int t = 0; t < config.trials; ++t) {
        const double r_avg = run.reward_steps > 0
                                 ? run.reward_sum / static_cast<double>(run.reward_steps)
                                 : 0.0;
        const std::vector<double> s_vec =
            encode_drl_state(env.state(), r_inst, r_avg, env.config());

        const bool pretraining = run.total_transitions < config.pretrain_length;
        const auto t0 = clock::now();
        const int a = pretraining
                          ? static_cast<int>(uniform_index(
                                rng, static_cast<std::size_t>(env.action_count())))
                          : select_action(twins, s_vec, config.epsilon, rng);
        const Environment::StepResult res = env.step(a, rng);
        seconds += std::chrono::duration<double>(clock::now() - t0).count();

        r_inst = res.reward;
        episode_reward_sum += res.reward;
        run.reward_sum += res.reward;
        run.reward_steps += 1;
        const double r_avg_next = run.reward_sum / static_cast<double>(run.reward_steps);
        const std::vector<double> s_next_vec =
            encode_drl_state(env.state(), r_inst, r_avg_next, env.config());

        buffer.remember(Transition{s_vec, a, res.reward, s_next_vec});
        run.total_transitions += 1;

        if (run.total_transitions >= config.pretrain_length &&
            buffer.size() >= static_cast<std::size_t>(config.batch_size)) {
            loss_sum += train_step(twins, buffer, adam, config, rng);
            ++loss_count;
            run.gradient_steps += 1;
            if (run.gradient_steps % config.target_update_interval == 0) sync_target(twins);
        }

        rate_sum += res.sum_rate_bps;
        metrics.reward_trace.push_back(res.reward);
        metrics.rate_trace.push_back(res.sum_rate_bps);
        if (res.sum_rate_bps > metrics.best_sum_rate_bps) {
            metrics.best_sum_rate_bps = res.sum_rate_bps;
            best_assoc = env.state().association;
        }
    }

    metrics.cumulative_reward = episode_reward_sum;
    metrics.final_sum_rate_bps = env.sum_rate_bps();
    if (config.trials > 0) {
        metrics.mean_sum_rate_bps = rate_sum / config.trials;
        metrics.mean_decision_seconds = seconds / config.trials;
    } else {
        metrics.mean_sum_rate_bps = env.sum_rate_bps();
    }
    if (loss_count > 0) {
        metrics.mean_loss = loss_sum / loss_count;
        metrics.has_loss = true;
    }

    PowerOptResult popt = optimize_powers(best_assoc, env.users(), env.config());
    metrics.optimized.association = std::move(best_assoc);
    metrics.optimized.powers_w = std::move(popt.powers_w);
    metrics.optimized.sum_rate_bps = popt.sum_rate_bps;
    metrics.optimized.powers_optimized = popt.optimized;

    std::vector<UserTerminal> tuned = env.users();
    for (auto& u : tuned) {
        auto it = metrics.optimized.powers_w.find(u.id);
        if (it != metrics.optimized.powers_w.end()) u.tx_power_w = it->second;
    }
    metrics.served_users =
        instantaneous_sum_rate(metrics.optimized.association, tuned, env.config())
            .served_users();
    return metrics;
}

namespace {

constexpr std::uint32_t kDqnMagic = 0x4e44514e;  // "NDQN"

template <class T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated DQN checkpoint");
    return value;
}

}  // namespace

void save_dqn_checkpoint(std::ostream& out, const TwinNetworks& twins, long long episode,
                         const DqnRunState& run) {
    write_pod(out, kDqnMagic);
    write_pod(out, static_cast<std::uint32_t>(1));
    write_pod(out, static_cast<std::int64_t>(episode));
    write_pod(out, static_cast<std::int64_t>(run.total_transitions));
    write_pod(out, static_cast<std::int64_t>(run.gradient_steps));
    twins.train_net.save(out);
}

DqnCheckpoint load_dqn_checkpoint(std::istream& in) {
    if (read_pod<std::uint32_t>(in) != kDqnMagic)
        throw std::runtime_error("not a DQN checkpoint");
    if (read_pod<std::uint32_t>(in) != 1)
        throw std::runtime_error("unsupported DQN checkpoint version");
    DqnCheckpoint cp;
    cp.episode = read_pod<std::int64_t>(in);
    cp.total_transitions = read_pod<std::int64_t>(in);
    cp.gradient_steps = read_pod<std::int64_t>(in);
    cp.train_net = Mlp::load(in);
    return cp;
}

}  // namespace nomarl
