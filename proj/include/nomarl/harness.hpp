#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nomarl/baselines.hpp"
#include "nomarl/dqn.hpp"
#include "nomarl/mlp.hpp"
#include "nomarl/network.hpp"
#include "nomarl/sarsa.hpp"

namespace nomarl {

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_name, const std::string& message)
        : std::runtime_error(field_name + ": " + message), field(std::move(field_name)) {}
};

enum class Scenario { SarsaLight, DqnMedium, DqnHeavy, Benchmark, Oma, NomaFixed };

const char* to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct TrafficRange {
    int lo = 2;
    int hi = 3;
};

TrafficRange traffic_from_string(const std::string& text);  // "2-10"

struct ExperimentConfig {
    Scenario scenario = Scenario::SarsaLight;
    TrafficRange traffic{2, 3};
    double bandwidth_khz = 60.0;
    int n_bs = 2;
    int n_subchannels = 2;
    std::vector<double> gain_levels{1e-5, 1.5e-5, 2e-5};
    std::vector<double> power_levels_dbm{5, 10, 15, 20, 25, 30};
    double sic_rate_threshold_bps = 10e3;
    double subchannel_power_cap_w = 10.0;
    int max_cluster_load = -1;  // -1: traffic.hi

    double alpha = 0.75;
    double gamma = 0.6;
    double epsilon = 0.1;
    double lambda = 0.5;
    Activation activation = Activation::ReLU;
    int episodes = 500;
    int trials = 500;
    std::vector<std::uint64_t> seeds;

    // DQN knobs (Table-II defaults; tests shrink them)
    int batch_size = 500;
    int replay_capacity = 500;
    int pretrain_length = 500;
    int target_update_interval = 100;
    int hidden_width = 500;
    int hidden_layers = 2;
    double adam_lr = 1e-3;

    double fixed_power_dbm = 20.0;  // noma-fixed scenario level
    // When > 0, a SARSA run that goes this many episodes without a new
    // best episode reward hands the remaining episodes to a DQN agent.
    int fallback_stagnant_episodes = 0;
    int summary_window = 100;  // final-window length for summaries
    bool keep_traces = false;  // retain per-trial traces in episode details

    void validate() const;  // throws ConfigError naming the field
    NetworkConfig network() const;
    int cluster_load() const { return max_cluster_load > 0 ? max_cluster_load : traffic.hi; }
    bool is_agent_scenario() const;
    DqnConfig dqn() const;
    SarsaHyper sarsa() const;
};

struct MetricsRecord {
    std::string scenario;
    std::uint64_t seed = 0;
    int episode = 0;
    double cumulative_reward = 0.0;
    double mean_sum_rate_bps = 0.0;
    std::optional<double> dqn_loss;
    double clustering_time_s = 0.0;
    long long served_users_cumulative = 0;
};

/// The instance stream is a pure function of (seed, episode, traffic,
/// network config) so every scenario sees identical users for matching
/// seeds and traffic.
std::vector<UserTerminal> instance_for(std::uint64_t seed, int episode,
                                       const ExperimentConfig& config);

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<MetricsRecord> records;
    std::vector<EpisodeMetrics> episodes;  // per-episode details for in-process analysis
};

struct RunSummary {
    std::string scenario;
    int episodes = 0;
    int window = 0;  // episodes covered by the final window
    std::vector<std::uint64_t> seeds;
    // Final-window means per seed, then mean +- stddev across seeds.
    std::vector<double> reward_per_seed;
    std::vector<double> rate_per_seed;
    std::vector<double> loss_per_seed;  // empty when the scenario has no loss
    double reward_mean = 0.0, reward_std = 0.0;
    double rate_mean = 0.0, rate_std = 0.0;
    double loss_mean = 0.0, loss_std = 0.0;
    bool has_loss = false;
    double mean_clustering_time_s = 0.0;
    long long served_users_total = 0;
};

struct RunResult {
    std::vector<MetricsRecord> records;
    std::vector<SeedRun> seed_runs;
    RunSummary summary;
};

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed);
RunResult run(const ExperimentConfig& config);
RunSummary summarize(const ExperimentConfig& config, const std::vector<SeedRun>& seed_runs);

enum class EmitFormat { Csv, JsonLines };

extern const char* const kCsvHeader;  // documented column order

void emit(const std::vector<MetricsRecord>& records, EmitFormat format,
          const std::string& path);
std::string render(const std::vector<MetricsRecord>& records, EmitFormat format);
std::vector<MetricsRecord> parse_csv(const std::string& path);
std::vector<MetricsRecord> parse_jsonl(const std::string& path);
std::vector<MetricsRecord> parse_records_text(const std::string& text, EmitFormat format);

struct CompareRow {
    std::string label;
    double reward_mean = 0.0;
    double rate_mean = 0.0;
    double loss_mean = 0.0;
    bool has_loss = false;
    double rate_ratio_vs_first = 1.0;
    double reward_ratio_vs_first = 1.0;
};

struct ComparisonTable {
    std::vector<CompareRow> rows;
    std::string to_text() const;
};

/// Final-window means side by side with ratios against the first run.
/// Mismatched episode counts are rejected.
ComparisonTable compare_report(const std::vector<RunSummary>& summaries);

/// Summary recomputed from emitted records (CLI compare path).
RunSummary summarize_records(const std::vector<MetricsRecord>& records, int window);

// Flat key=value config file; '#' starts a comment. CLI flags override.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});
void apply_config_line(ExperimentConfig& config, const std::string& key,
                       const std::string& value);

}  // namespace nomarl
