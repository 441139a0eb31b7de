#include "nomarl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace nomarl {

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::SarsaLight: return "sarsa-light";
        case Scenario::DqnMedium: return "dqn-medium";
        case Scenario::DqnHeavy: return "dqn-heavy";
        case Scenario::Benchmark: return "benchmark";
        case Scenario::Oma: return "oma";
        case Scenario::NomaFixed: return "noma-fixed";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& name) {
    if (name == "sarsa-light") return Scenario::SarsaLight;
    if (name == "dqn-medium") return Scenario::DqnMedium;
    if (name == "dqn-heavy") return Scenario::DqnHeavy;
    if (name == "benchmark") return Scenario::Benchmark;
    if (name == "oma") return Scenario::Oma;
    if (name == "noma-fixed") return Scenario::NomaFixed;
    throw ConfigError("scenario", "unknown scenario '" + name + "'");
}

TrafficRange traffic_from_string(const std::string& text) {
    const auto dash = text.find('-');
    if (dash == std::string::npos)
        throw ConfigError("traffic", "expected LO-HI, got '" + text + "'");
    TrafficRange r;
    try {
        r.lo = std::stoi(text.substr(0, dash));
        r.hi = std::stoi(text.substr(dash + 1));
    } catch (const std::exception&) {
        throw ConfigError("traffic", "expected LO-HI, got '" + text + "'");
    }
    return r;
}

bool ExperimentConfig::is_agent_scenario() const {
    return scenario == Scenario::SarsaLight || scenario == Scenario::DqnMedium ||
           scenario == Scenario::DqnHeavy;
}

void ExperimentConfig::validate() const {
    if (traffic.lo < 2) throw ConfigError("traffic", "minimum load is 2");
    if (traffic.hi < traffic.lo) throw ConfigError("traffic", "range high below low");
    if (n_bs < 1) throw ConfigError("n_bs", "must be >= 1");
    if (n_subchannels < 1) throw ConfigError("n_subchannels", "must be >= 1");
    if (!(bandwidth_khz > 0.0)) throw ConfigError("bandwidth_khz", "must be > 0");
    if (traffic.hi > cluster_load() * n_bs * n_subchannels)
        throw ConfigError("traffic", "high end exceeds U_s*N_b*N_s capacity");
    if (!(alpha > 0.0) || !(alpha < 1.0)) throw ConfigError("alpha", "must be in (0,1)");
    if (!(gamma > 0.0) || !(gamma < 1.0)) throw ConfigError("gamma", "must be in (0,1)");
    if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon", "must be in [0,1]");
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda", "must be in [0,1]");
    if (episodes < 1) throw ConfigError("episodes", "must be >= 1");
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (seeds.empty()) throw ConfigError("seeds", "at least one seed is required");
    if (gain_levels.empty()) throw ConfigError("gain_levels", "must be nonempty");
    for (double g : gain_levels)
        if (!(g > 0.0)) throw ConfigError("gain_levels", "must all be > 0");
    if (power_levels_dbm.empty()) throw ConfigError("power_levels_dbm", "must be nonempty");
    if (sic_rate_threshold_bps < 0.0) throw ConfigError("rth_bps", "must be >= 0");
    if (!(subchannel_power_cap_w > 0.0)) throw ConfigError("power_cap_w", "must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
    if (replay_capacity < batch_size)
        throw ConfigError("replay_capacity", "must be >= batch_size");
    if (pretrain_length < 0) throw ConfigError("pretrain_length", "must be >= 0");
    if (target_update_interval < 1) throw ConfigError("target_update_interval", "must be >= 1");
    if (hidden_width < 1) throw ConfigError("hidden_width", "must be >= 1");
    if (hidden_layers < 1) throw ConfigError("hidden_layers", "must be >= 1");
    if (!(adam_lr > 0.0)) throw ConfigError("adam_lr", "must be > 0");
    if (summary_window < 1) throw ConfigError("summary_window", "must be >= 1");
    if (fallback_stagnant_episodes < 0)
        throw ConfigError("fallback_stagnant_episodes", "must be >= 0");
    if (scenario == Scenario::NomaFixed &&
        std::find(power_levels_dbm.begin(), power_levels_dbm.end(), fixed_power_dbm) ==
            power_levels_dbm.end())
        throw ConfigError("fixed_power_dbm", "must be one of power_levels_dbm");
}

NetworkConfig ExperimentConfig::network() const {
    NetworkConfig net;
    net.n_bs = n_bs;
    net.n_subchannels = n_subchannels;
    net.total_bandwidth_hz = bandwidth_khz * 1e3;
    net.max_cluster_load = cluster_load();
    net.subchannel_power_cap_w = subchannel_power_cap_w;
    net.sic_rate_threshold_bps = sic_rate_threshold_bps;
    net.gain_levels = gain_levels;
    net.power_levels_dbm = power_levels_dbm;
    return net;
}

DqnConfig ExperimentConfig::dqn() const {
    DqnConfig dq;
    dq.batch_size = batch_size;
    dq.replay_capacity = replay_capacity;
    dq.pretrain_length = pretrain_length;
    dq.target_update_interval = target_update_interval;
    dq.epsilon = epsilon;
    dq.gamma = gamma;
    dq.episodes = episodes;
    dq.trials = trials;
    dq.activation = activation;
    dq.hidden_width = hidden_width;
    dq.hidden_layers = hidden_layers;
    dq.adam_lr = adam_lr;
    dq.adam_lambda = lambda;
    return dq;
}

SarsaHyper ExperimentConfig::sarsa() const {
    SarsaHyper h;
    h.alpha = alpha;
    h.gamma = gamma;
    h.epsilon = epsilon;
    h.episodes = episodes;
    h.trials_per_episode = trials;
    return h;
}

std::vector<UserTerminal> instance_for(std::uint64_t seed, int episode,
                                       const ExperimentConfig& config) {
    const NetworkConfig net = config.network();
    Rng rng = make_rng(seed, 0x10000u + static_cast<std::uint64_t>(episode));
    const int pool = net.max_cluster_load * net.cells();
    return sample_active_users(rng, net, pool, config.traffic.lo, config.traffic.hi);
}

namespace {

std::uint64_t pow_u64_checked(std::uint64_t base, int exp) {
    std::uint64_t v = 1;
    for (int i = 0; i < exp; ++i) {
        if (v > std::numeric_limits<std::uint64_t>::max() / base)
            throw ConfigError("traffic", "state space too large to index");
        v *= base;
    }
    return v;
}

MetricsRecord make_record(const ExperimentConfig& cfg, std::uint64_t seed, int episode,
                          const EpisodeMetrics& m, long long served_cum) {
    MetricsRecord rec;
    rec.scenario = to_string(cfg.scenario);
    rec.seed = seed;
    rec.episode = episode;
    rec.cumulative_reward = m.cumulative_reward;
    rec.mean_sum_rate_bps = m.mean_sum_rate_bps;
    if (m.has_loss) rec.dqn_loss = m.mean_loss;
    rec.clustering_time_s = m.mean_decision_seconds;
    rec.served_users_cumulative = served_cum;
    return rec;
}

void trim_traces(EpisodeMetrics& m, bool keep) {
    if (keep) return;
    m.reward_trace.clear();
    m.reward_trace.shrink_to_fit();
    m.rate_trace.clear();
    m.rate_trace.shrink_to_fit();
}

SeedRun run_agent_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    SeedRun sr;
    sr.seed = seed;
    const NetworkConfig net = cfg.network();
    Environment env(net);
    Rng agent_rng = make_rng(seed, 1);

    const bool sarsa_mode = cfg.scenario == Scenario::SarsaLight;
    const int n_actions = static_cast<int>(action_catalog(net).size());

    // SARSA state
    SarsaHyper hyper = cfg.sarsa();
    const int radix_users = cfg.traffic.hi;
    QTable q;
    if (sarsa_mode)
        q = QTable(pow_u64_checked(static_cast<std::uint64_t>(radix_users) + 1,
                                   net.cells()),
                   n_actions);

    // DQN state, built lazily for the SARSA fallback path
    DqnConfig dq = cfg.dqn();
    TwinNetworks twins;
    ReplayBuffer buffer(static_cast<std::size_t>(dq.replay_capacity));
    AdamState adam;
    DqnRunState run_state;
    bool dqn_ready = false;
    auto ensure_dqn = [&]() {
        if (dqn_ready) return;
        Rng init_rng = make_rng(seed, 2);
        twins = TwinNetworks::make(dq.widths(net.cells() + 2, n_actions), dq.activation,
                                   init_rng);
        adam = AdamState(twins.train_net.param_count(), dq.adam_lr, 0.9, 0.999,
                         dq.adam_lambda);
        dqn_ready = true;
    };
    bool using_dqn = !sarsa_mode;
    if (using_dqn) ensure_dqn();

    long long served_cum = 0;
    double best_episode_reward = -std::numeric_limits<double>::infinity();
    int stagnant = 0;

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        std::vector<UserTerminal> users = instance_for(seed, ep, cfg);
        env.reset(std::move(users), agent_rng);
        EpisodeMetrics m =
            using_dqn ? run_dqn_episode(env, twins, buffer, adam, dq, run_state, agent_rng)
                      : run_sarsa_episode(env, q, hyper, radix_users, agent_rng);
        served_cum += m.served_users;
        sr.records.push_back(make_record(cfg, seed, ep, m, served_cum));
        trim_traces(m, cfg.keep_traces);
        sr.episodes.push_back(std::move(m));

        if (sarsa_mode && !using_dqn && cfg.fallback_stagnant_episodes > 0) {
            const double r = sr.episodes.back().cumulative_reward;
            if (r > best_episode_reward) {
                best_episode_reward = r;
                stagnant = 0;
            } else if (++stagnant >= cfg.fallback_stagnant_episodes) {
                using_dqn = true;
                ensure_dqn();
            }
        }
    }
    return sr;
}

SeedRun run_baseline_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    SeedRun sr;
    sr.seed = seed;
    const NetworkConfig net = cfg.network();

    long long served_cum = 0;
    for (int ep = 0; ep < cfg.episodes; ++ep) {
        std::vector<UserTerminal> users = instance_for(seed, ep, cfg);
        const auto t0 = clock::now();
        BenchmarkResult result;
        switch (cfg.scenario) {
            case Scenario::Benchmark: result = exhaustive_best(users, net); break;
            case Scenario::Oma: result = oma_allocate(users, net); break;
            case Scenario::NomaFixed:
                result = noma_fixed_power(users, net, cfg.fixed_power_dbm);
                break;
            default: throw std::logic_error("not a baseline scenario");
        }
        const double dt = std::chrono::duration<double>(clock::now() - t0).count();

        EpisodeMetrics m;
        m.mean_sum_rate_bps = result.best_sum_rate_bps;
        m.best_sum_rate_bps = result.best_sum_rate_bps;
        m.final_sum_rate_bps = result.best_sum_rate_bps;
        m.mean_decision_seconds = dt;
        m.served_users = result.best_report.served_users();
        m.optimized.association = result.best_assignment;
        m.optimized.powers_w = result.best_powers_w;
        m.optimized.sum_rate_bps = result.best_sum_rate_bps;
        m.optimized.powers_optimized = cfg.scenario != Scenario::Oma;

        served_cum += m.served_users;
        sr.records.push_back(make_record(cfg, seed, ep, m, served_cum));
        sr.episodes.push_back(std::move(m));
    }
    return sr;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
    config.validate();
    if (config.is_agent_scenario()) return run_agent_seed(config, seed);
    return run_baseline_seed(config, seed);
}

RunSummary summarize(const ExperimentConfig& config, const std::vector<SeedRun>& seed_runs) {
    RunSummary s;
    s.scenario = to_string(config.scenario);
    s.episodes = config.episodes;
    s.window = std::min(config.summary_window, config.episodes);

    double time_sum = 0.0;
    long long time_count = 0;
    for (const SeedRun& run : seed_runs) {
        s.seeds.push_back(run.seed);
        std::vector<double> rewards, rates, losses;
        const std::size_t start = run.records.size() - static_cast<std::size_t>(s.window);
        for (std::size_t k = start; k < run.records.size(); ++k) {
            rewards.push_back(run.records[k].cumulative_reward);
            rates.push_back(run.records[k].mean_sum_rate_bps);
            if (run.records[k].dqn_loss) losses.push_back(*run.records[k].dqn_loss);
        }
        s.reward_per_seed.push_back(mean_of(rewards));
        s.rate_per_seed.push_back(mean_of(rates));
        if (!losses.empty()) {
            s.loss_per_seed.push_back(mean_of(losses));
            s.has_loss = true;
        }
        for (const auto& rec : run.records) {
            time_sum += rec.clustering_time_s;
            ++time_count;
        }
        if (!run.records.empty())
            s.served_users_total += run.records.back().served_users_cumulative;
    }
    s.reward_mean = mean_of(s.reward_per_seed);
    s.reward_std = std_of(s.reward_per_seed);
    s.rate_mean = mean_of(s.rate_per_seed);
    s.rate_std = std_of(s.rate_per_seed);
    s.loss_mean = mean_of(s.loss_per_seed);
    s.loss_std = std_of(s.loss_per_seed);
    s.mean_clustering_time_s = time_count > 0 ? time_sum / static_cast<double>(time_count) : 0.0;
    return s;
}

RunResult run(const ExperimentConfig& config) {
    config.validate();
    RunResult result;
    for (std::uint64_t seed : config.seeds) {
        result.seed_runs.push_back(run_seed(config, seed));
        const SeedRun& sr = result.seed_runs.back();
        result.records.insert(result.records.end(), sr.records.begin(), sr.records.end());
    }
    result.summary = summarize(config, result.seed_runs);
    return result;
}

const char* const kCsvHeader =
    "scenario,seed,episode,reward,sum_rate_bps,loss,clustering_time_s,served_users";

namespace {

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string render(const std::vector<MetricsRecord>& records, EmitFormat format) {
    std::ostringstream out;
    if (format == EmitFormat::Csv) {
        out << kCsvHeader << '\n';
        for (const auto& r : records) {
            out << r.scenario << ',' << r.seed << ',' << r.episode << ','
                << fmt_double(r.cumulative_reward) << ',' << fmt_double(r.mean_sum_rate_bps)
                << ',' << (r.dqn_loss ? fmt_double(*r.dqn_loss) : std::string()) << ','
                << fmt_double(r.clustering_time_s) << ',' << r.served_users_cumulative
                << '\n';
        }
    } else {
        for (const auto& r : records) {
            nlohmann::json j;
            j["scenario"] = r.scenario;
            j["seed"] = r.seed;
            j["episode"] = r.episode;
            j["reward"] = r.cumulative_reward;
            j["sum_rate_bps"] = r.mean_sum_rate_bps;
            if (r.dqn_loss)
                j["loss"] = *r.dqn_loss;
            else
                j["loss"] = nullptr;
            j["clustering_time_s"] = r.clustering_time_s;
            j["served_users"] = r.served_users_cumulative;
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

void emit(const std::vector<MetricsRecord>& records, EmitFormat format,
          const std::string& path) {
    if (records.empty()) throw std::invalid_argument("no records to emit");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << render(records, format);
    if (!out) throw std::runtime_error("failed while writing: " + path);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::vector<MetricsRecord> parse_records_text(const std::string& text, EmitFormat format) {
    std::vector<MetricsRecord> records;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (format == EmitFormat::Csv && first) {
            first = false;
            if (line != kCsvHeader)
                throw std::runtime_error("unexpected CSV header: " + line);
            continue;
        }
        MetricsRecord r;
        if (format == EmitFormat::Csv) {
            const auto parts = split(line, ',');
            if (parts.size() != 8) throw std::runtime_error("malformed CSV row: " + line);
            r.scenario = parts[0];
            r.seed = std::stoull(parts[1]);
            r.episode = std::stoi(parts[2]);
            r.cumulative_reward = std::stod(parts[3]);
            r.mean_sum_rate_bps = std::stod(parts[4]);
            if (!parts[5].empty()) r.dqn_loss = std::stod(parts[5]);
            r.clustering_time_s = std::stod(parts[6]);
            r.served_users_cumulative = std::stoll(parts[7]);
        } else {
            const nlohmann::json j = nlohmann::json::parse(line);
            r.scenario = j.at("scenario").get<std::string>();
            r.seed = j.at("seed").get<std::uint64_t>();
            r.episode = j.at("episode").get<int>();
            r.cumulative_reward = j.at("reward").get<double>();
            r.mean_sum_rate_bps = j.at("sum_rate_bps").get<double>();
            if (!j.at("loss").is_null()) r.dqn_loss = j.at("loss").get<double>();
            r.clustering_time_s = j.at("clustering_time_s").get<double>();
            r.served_users_cumulative = j.at("served_users").get<long long>();
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<MetricsRecord> parse_csv(const std::string& path) {
    return parse_records_text(read_file(path), EmitFormat::Csv);
}

std::vector<MetricsRecord> parse_jsonl(const std::string& path) {
    return parse_records_text(read_file(path), EmitFormat::JsonLines);
}

RunSummary summarize_records(const std::vector<MetricsRecord>& records, int window) {
    if (records.empty()) throw std::invalid_argument("no records to summarize");
    RunSummary s;
    s.scenario = records.front().scenario;

    std::vector<std::uint64_t> seed_order;
    std::vector<std::vector<const MetricsRecord*>> by_seed;
    for (const auto& r : records) {
        auto it = std::find(seed_order.begin(), seed_order.end(), r.seed);
        if (it == seed_order.end()) {
            seed_order.push_back(r.seed);
            by_seed.emplace_back();
            it = seed_order.end() - 1;
        }
        by_seed[static_cast<std::size_t>(it - seed_order.begin())].push_back(&r);
    }
    s.episodes = static_cast<int>(by_seed.front().size());
    for (const auto& group : by_seed)
        if (static_cast<int>(group.size()) != s.episodes)
            throw std::runtime_error("episode counts differ between seeds");
    s.window = std::min(window, s.episodes);

    double time_sum = 0.0;
    long long time_count = 0;
    for (std::size_t g = 0; g < by_seed.size(); ++g) {
        s.seeds.push_back(seed_order[g]);
        std::vector<double> rewards, rates, losses;
        const std::size_t start = by_seed[g].size() - static_cast<std::size_t>(s.window);
        for (std::size_t k = start; k < by_seed[g].size(); ++k) {
            rewards.push_back(by_seed[g][k]->cumulative_reward);
            rates.push_back(by_seed[g][k]->mean_sum_rate_bps);
            if (by_seed[g][k]->dqn_loss) losses.push_back(*by_seed[g][k]->dqn_loss);
        }
        s.reward_per_seed.push_back(mean_of(rewards));
        s.rate_per_seed.push_back(mean_of(rates));
        if (!losses.empty()) {
            s.loss_per_seed.push_back(mean_of(losses));
            s.has_loss = true;
        }
        for (const auto* rec : by_seed[g]) {
            time_sum += rec->clustering_time_s;
            ++time_count;
        }
        s.served_users_total += by_seed[g].back()->served_users_cumulative;
    }
    s.reward_mean = mean_of(s.reward_per_seed);
    s.reward_std = std_of(s.reward_per_seed);
    s.rate_mean = mean_of(s.rate_per_seed);
    s.rate_std = std_of(s.rate_per_seed);
    s.loss_mean = mean_of(s.loss_per_seed);
    s.loss_std = std_of(s.loss_per_seed);
    s.mean_clustering_time_s = time_count > 0 ? time_sum / static_cast<double>(time_count) : 0.0;
    return s;
}

std::string ComparisonTable::to_text() const {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-16s %16s %16s %12s %12s %12s\n", "run", "reward(mean)",
                  "rate(bps)", "loss", "rate_ratio", "reward_ratio");
    out << buf;
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%-16s %16.6g %16.6g %12s %12.4f %12.4f\n",
                      row.label.c_str(), row.reward_mean, row.rate_mean,
                      row.has_loss ? fmt_double(row.loss_mean).substr(0, 12).c_str() : "-",
                      row.rate_ratio_vs_first, row.reward_ratio_vs_first);
        out << buf;
    }
    return out.str();
}

ComparisonTable compare_report(const std::vector<RunSummary>& summaries) {
    if (summaries.size() < 2)
        throw std::invalid_argument("compare_report needs at least two runs");
    for (const auto& s : summaries)
        if (s.episodes != summaries.front().episodes)
            throw std::runtime_error("episode counts differ between runs");

    ComparisonTable table;
    const RunSummary& first = summaries.front();
    for (std::size_t k = 0; k < summaries.size(); ++k) {
        const RunSummary& s = summaries[k];
        CompareRow row;
        row.label = s.scenario + "#" + std::to_string(k);
        row.reward_mean = s.reward_mean;
        row.rate_mean = s.rate_mean;
        row.loss_mean = s.loss_mean;
        row.has_loss = s.has_loss;
        row.rate_ratio_vs_first =
            first.rate_mean != 0.0 ? s.rate_mean / first.rate_mean : (k == 0 ? 1.0 : 0.0);
        row.reward_ratio_vs_first =
            first.reward_mean != 0.0 ? s.reward_mean / first.reward_mean
                                     : (s.reward_mean == 0.0 ? 1.0 : 0.0);
        table.rows.push_back(std::move(row));
    }
    return table;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    std::size_t e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_double_list(const std::string& field, const std::string& value) {
    std::vector<double> out;
    for (const auto& part : split(value, ',')) {
        const std::string p = trim(part);
        if (p.empty()) continue;
        try {
            out.push_back(std::stod(p));
        } catch (const std::exception&) {
            throw ConfigError(field, "bad number '" + p + "'");
        }
    }
    return out;
}

double parse_double(const std::string& field, const std::string& value) {
    try {
        return std::stod(trim(value));
    } catch (const std::exception&) {
        throw ConfigError(field, "bad number '" + value + "'");
    }
}

int parse_int(const std::string& field, const std::string& value) {
    try {
        return std::stoi(trim(value));
    } catch (const std::exception&) {
        throw ConfigError(field, "bad integer '" + value + "'");
    }
}

}  // namespace

void apply_config_line(ExperimentConfig& config, const std::string& key,
                       const std::string& value) {
    if (key == "scenario") config.scenario = scenario_from_string(trim(value));
    else if (key == "traffic") config.traffic = traffic_from_string(trim(value));
    else if (key == "bandwidth_khz") config.bandwidth_khz = parse_double(key, value);
    else if (key == "n_bs") config.n_bs = parse_int(key, value);
    else if (key == "n_subchannels") config.n_subchannels = parse_int(key, value);
    else if (key == "gain_levels") config.gain_levels = parse_double_list(key, value);
    else if (key == "power_levels_dbm")
        config.power_levels_dbm = parse_double_list(key, value);
    else if (key == "rth_bps") config.sic_rate_threshold_bps = parse_double(key, value);
    else if (key == "power_cap_w") config.subchannel_power_cap_w = parse_double(key, value);
    else if (key == "max_cluster_load") config.max_cluster_load = parse_int(key, value);
    else if (key == "alpha") config.alpha = parse_double(key, value);
    else if (key == "gamma") config.gamma = parse_double(key, value);
    else if (key == "epsilon") config.epsilon = parse_double(key, value);
    else if (key == "lambda") config.lambda = parse_double(key, value);
    else if (key == "activation") config.activation = activation_from_string(trim(value));
    else if (key == "episodes") config.episodes = parse_int(key, value);
    else if (key == "trials") config.trials = parse_int(key, value);
    else if (key == "seeds") {
        config.seeds.clear();
        for (const auto& part : split(value, ',')) {
            const std::string p = trim(part);
            if (p.empty()) continue;
            try {
                config.seeds.push_back(std::stoull(p));
            } catch (const std::exception&) {
                throw ConfigError("seeds", "bad seed '" + p + "'");
            }
        }
    } else if (key == "batch_size") config.batch_size = parse_int(key, value);
    else if (key == "replay_capacity") config.replay_capacity = parse_int(key, value);
    else if (key == "pretrain_length") config.pretrain_length = parse_int(key, value);
    else if (key == "target_update_interval")
        config.target_update_interval = parse_int(key, value);
    else if (key == "hidden_width") config.hidden_width = parse_int(key, value);
    else if (key == "hidden_layers") config.hidden_layers = parse_int(key, value);
    else if (key == "adam_lr") config.adam_lr = parse_double(key, value);
    else if (key == "fixed_power_dbm") config.fixed_power_dbm = parse_double(key, value);
    else if (key == "fallback_stagnant_episodes")
        config.fallback_stagnant_episodes = parse_int(key, value);
    else if (key == "summary_window") config.summary_window = parse_int(key, value);
    else throw ConfigError(key, "unknown config key");
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config", "line " + std::to_string(line_no) +
                                            ": expected key=value");
        apply_config_line(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

}  // namespace nomarl
