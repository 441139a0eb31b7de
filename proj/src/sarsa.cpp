#include "nomarl/sarsa.hpp"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <stdexcept>

#include "nomarl/baselines.hpp"

namespace nomarl {

void SarsaHyper::validate() const {
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (!(gamma > 0.0) || !(gamma < 1.0)) throw std::invalid_argument("gamma must be in (0,1)");
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("epsilon must be in [0,1]");
    if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
    if (trials_per_episode < 0) throw std::invalid_argument("trials must be >= 0");
}

QTable::QTable(std::uint64_t n_states, int n_actions, double initial_value)
    : n_states_(n_states), n_actions_(n_actions) {
    if (n_actions < 1) throw std::invalid_argument("n_actions must be >= 1");
    constexpr std::uint64_t kMaxEntries = 50'000'000;
    if (n_states > kMaxEntries / static_cast<std::uint64_t>(n_actions))
        throw std::invalid_argument("Q-table too large for tabular learning");
    values_.assign(n_states * static_cast<std::uint64_t>(n_actions), initial_value);
}

double QTable::at(std::uint64_t s, int a) const {
    return values_[s * static_cast<std::uint64_t>(n_actions_) + static_cast<std::uint64_t>(a)];
}

double& QTable::at(std::uint64_t s, int a) {
    return values_[s * static_cast<std::uint64_t>(n_actions_) + static_cast<std::uint64_t>(a)];
}

int QTable::argmax_action(std::uint64_t s) const {
    int best = 0;
    double best_value = at(s, 0);
    for (int a = 1; a < n_actions_; ++a) {
        const double v = at(s, a);
        if (v > best_value) {
            best_value = v;
            best = a;
        }
    }
    return best;
}

double QTable::row_max(std::uint64_t s) const { return at(s, argmax_action(s)); }

int select_action(const QTable& q, std::uint64_t s, double epsilon, Rng& rng) {
    if (epsilon > 0.0 && uniform01(rng) < epsilon)
        return static_cast<int>(uniform_index(rng, static_cast<std::size_t>(q.n_actions())));
    return q.argmax_action(s);
}

void sarsa_update(QTable& q, std::uint64_t s, int a, double r, std::uint64_t s_next,
                  int a_next, const SarsaHyper& hyper) {
    double& entry = q.at(s, a);
    entry = (1.0 - hyper.alpha) * entry +
            hyper.alpha * (r + hyper.gamma * q.at(s_next, a_next));
}

std::vector<int> greedy_policy(const QTable& q) {
    std::vector<int> policy(q.n_states());
    for (std::uint64_t s = 0; s < q.n_states(); ++s) policy[s] = q.argmax_action(s);
    return policy;
}

double state_value(const QTable& q, std::uint64_t s) { return q.row_max(s); }

namespace {

// Shared trial loop; when `q_mutable` is null the table is only read
// (greedy evaluation).
EpisodeMetrics run_episode_impl(Environment& env, const QTable& q, QTable* q_mutable,
                                const SarsaHyper& hyper, int trials, double epsilon,
                                int radix_users, Rng& rng) {
    using clock = std::chrono::steady_clock;
    EpisodeMetrics metrics;
    metrics.best_sum_rate_bps = env.sum_rate_bps();
    metrics.final_sum_rate_bps = env.sum_rate_bps();
    AssociationState best_assoc = env.state().association;

    std::uint64_t s = state_index(env.state(), radix_users);
    int a = select_action(q, s, epsilon, rng);
    double rate_sum = 0.0;
    double seconds = 0.0;

    for (int t = 0; t < trials; ++t) {
        const auto t0 = clock::now();
        const Environment::StepResult res = env.step(a, rng);
        const std::uint64_t s_next = state_index(env.state(), radix_users);
        const int a_next = select_action(q, s_next, epsilon, rng);
        seconds += std::chrono::duration<double>(clock::now() - t0).count();

        if (q_mutable) sarsa_update(*q_mutable, s, a, res.reward, s_next, a_next, hyper);

        metrics.cumulative_reward += res.reward;
        rate_sum += res.sum_rate_bps;
        metrics.reward_trace.push_back(res.reward);
        metrics.rate_trace.push_back(res.sum_rate_bps);
        if (res.sum_rate_bps > metrics.best_sum_rate_bps) {
            metrics.best_sum_rate_bps = res.sum_rate_bps;
            best_assoc = env.state().association;
        }
        s = s_next;
        a = a_next;
    }

    metrics.final_sum_rate_bps = env.sum_rate_bps();
    if (trials > 0) {
        metrics.mean_sum_rate_bps = rate_sum / trials;
        metrics.mean_decision_seconds = seconds / trials;
    } else {
        metrics.mean_sum_rate_bps = env.sum_rate_bps();
    }

    // The episode's returned allocation: best visited association with
    // power levels re-optimized per sub-channel where tractable.
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

}  // namespace

EpisodeMetrics run_sarsa_episode(Environment& env, QTable& q, const SarsaHyper& hyper,
                                 int radix_users, Rng& rng) {
    return run_episode_impl(env, q, &q, hyper, hyper.trials_per_episode, hyper.epsilon,
                            radix_users, rng);
}

EpisodeMetrics run_greedy_episode(Environment& env, const QTable& q, int trials,
                                  int radix_users, Rng& rng) {
    SarsaHyper unused;
    return run_episode_impl(env, q, nullptr, unused, trials, 0.0, radix_users, rng);
}

namespace {

constexpr std::uint32_t kQTableMagic = 0x4e515442;  // "NQTB"

template <class T>
void write_pod(std::ostream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated Q-table checkpoint");
    return value;
}

}  // namespace

void save_qtable(std::ostream& out, const QTable& q, int radix, int n_bs, int n_subchannels,
                 const SarsaHyper& hyper) {
    write_pod(out, kQTableMagic);
    write_pod(out, static_cast<std::uint32_t>(1));  // version
    write_pod(out, static_cast<std::uint32_t>(radix));
    write_pod(out, static_cast<std::uint32_t>(n_bs));
    write_pod(out, static_cast<std::uint32_t>(n_subchannels));
    write_pod(out, static_cast<std::uint64_t>(q.n_states()));
    write_pod(out, static_cast<std::uint32_t>(q.n_actions()));
    write_pod(out, hyper.alpha);
    write_pod(out, hyper.gamma);
    write_pod(out, hyper.epsilon);
    write_pod(out, static_cast<std::uint32_t>(hyper.episodes));
    write_pod(out, static_cast<std::uint32_t>(hyper.trials_per_episode));
    out.write(reinterpret_cast<const char*>(q.data().data()),
              static_cast<std::streamsize>(q.data().size() * sizeof(double)));
    if (!out) throw std::runtime_error("failed to write Q-table checkpoint");
}

QTableCheckpoint load_qtable(std::istream& in) {
    if (read_pod<std::uint32_t>(in) != kQTableMagic)
        throw std::runtime_error("not a Q-table checkpoint");
    if (read_pod<std::uint32_t>(in) != 1)
        throw std::runtime_error("unsupported Q-table checkpoint version");
    QTableCheckpoint cp;
    cp.radix = static_cast<int>(read_pod<std::uint32_t>(in));
    cp.n_bs = static_cast<int>(read_pod<std::uint32_t>(in));
    cp.n_subchannels = static_cast<int>(read_pod<std::uint32_t>(in));
    const auto n_states = read_pod<std::uint64_t>(in);
    const auto n_actions = static_cast<int>(read_pod<std::uint32_t>(in));
    cp.hyper.alpha = read_pod<double>(in);
    cp.hyper.gamma = read_pod<double>(in);
    cp.hyper.epsilon = read_pod<double>(in);
    cp.hyper.episodes = static_cast<int>(read_pod<std::uint32_t>(in));
    cp.hyper.trials_per_episode = static_cast<int>(read_pod<std::uint32_t>(in));
    cp.table = QTable(n_states, n_actions);
    in.read(reinterpret_cast<char*>(cp.table.data().data()),
            static_cast<std::streamsize>(cp.table.data().size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated Q-table checkpoint");
    return cp;
}

void save_qtable_file(const std::string& path, const QTable& q, int radix, int n_bs,
                      int n_subchannels, const SarsaHyper& hyper) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    save_qtable(out, q, radix, n_bs, n_subchannels, hyper);
}

QTableCheckpoint load_qtable_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return load_qtable(in);
}

}  // namespace nomarl
