// Command-line front end for the three-phase workflow: generate a synthetic
// network and payment script, simulate the payments, and turn the raw
// per-payment records into batch-means statistics.

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "htlcsim/engine.hpp"
#include "htlcsim/io.hpp"
#include "htlcsim/netgen.hpp"
#include "htlcsim/stats.hpp"

namespace fs = std::filesystem;
using namespace htlcsim;

namespace {

struct Options {
    GenerationParams gen;
    SimConfig sim;
    std::uint32_t batches = 30;
    std::uint32_t warmup_batches = 1;
    std::string in_dir = ".";
    std::string out_dir = ".";
    std::uint64_t seed = kDefaultSeed;
    unsigned runs = 1;

    void apply_seed() {
        gen.seed = seed;
        sim.seed = seed;
        sim.p_uncoop_before = gen.p_uncoop_before;
        sim.p_uncoop_after = gen.p_uncoop_after;
    }
};

void add_common_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", "Config file with key=value lines; flags take precedence");
    cmd->add_option("--seed", o.seed, "Seed for all randomness")->capture_default_str();
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return "";
    return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

// key=value lines, '#' comments. Keys are the long flag names without the
// leading dashes; values given on the command line win.
void apply_config_file(CLI::App* cmd) {
    const CLI::Option* copt = cmd->get_option_no_throw("--config");
    if (copt == nullptr || copt->count() == 0) return;
    const std::string path = copt->as<std::string>();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        CLI::Option* op = cmd->get_option_no_throw("--" + key);
        if (op == nullptr)
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": unknown option '" +
                                     key + "' for subcommand " + cmd->get_name());
        if (op->count() > 0) continue;
        op->add_result(value);
        op->run_callback();
    }
}

void add_generation_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--peers", o.gen.n_peers, "Number of peers")->capture_default_str();
    cmd->add_option("--avg-channels", o.gen.avg_channels_per_peer,
                    "Average channels initiated per peer")
        ->capture_default_str();
    cmd->add_option("--sigma-topology", o.gen.topology_sigma,
                    "Gaussian width of counterparty choice; 0 creates a hub")
        ->capture_default_str();
    cmd->add_option("--avg-capacity", o.gen.avg_channel_capacity,
                    "Average channel capacity in satoshi")
        ->capture_default_str();
    cmd->add_option("--gini", o.gen.capacity_gini, "Gini index of channel capacities")
        ->capture_default_str();
    cmd->add_option("--payment-rate", o.gen.payment_rate, "Payments per second")
        ->capture_default_str();
    cmd->add_option("--n-payments", o.gen.n_payments, "Number of payments")
        ->capture_default_str();
    cmd->add_option("--sigma-amount", o.gen.amount_sigma,
                    "Gaussian width of payment amount magnitudes")
        ->capture_default_str();
    cmd->add_option("--same-recipient-fraction", o.gen.same_recipient_fraction,
                    "Fraction of payments to one designated recipient")
        ->capture_default_str();
    cmd->add_option("--base-fee-msat", o.gen.default_base_fee_msat,
                    "Default endpoint base fee (msat)")
        ->capture_default_str();
    cmd->add_option("--prop-fee-ppm", o.gen.default_prop_fee_ppm,
                    "Default endpoint proportional fee (ppm)")
        ->capture_default_str();
    cmd->add_option("--timelock-delta", o.gen.default_timelock_delta,
                    "Default endpoint timelock delta (blocks)")
        ->capture_default_str();
    cmd->add_option("--min-htlc", o.gen.default_min_htlc, "Default endpoint minimum HTLC (sat)")
        ->capture_default_str();
}

void add_uncoop_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--p-uncoop-before", o.gen.p_uncoop_before,
                    "Probability a hop is uncooperative before establishing the HTLC")
        ->capture_default_str();
    cmd->add_option("--p-uncoop-after", o.gen.p_uncoop_after,
                    "Probability a hop is uncooperative after establishing the HTLC")
        ->capture_default_str();
}

void add_simulation_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--latency-min", o.sim.latency_min_ms, "Minimum message latency (ms)")
        ->capture_default_str();
    cmd->add_option("--latency-max", o.sim.latency_max_ms, "Maximum message latency (ms)")
        ->capture_default_str();
    cmd->add_option("--timeout-ms", o.sim.payment_timeout_ms,
                    "Give up re-attempting a payment after this long (ms)")
        ->capture_default_str();
    cmd->add_option("--block-interval-ms", o.sim.block_interval_ms,
                    "Simulated milliseconds per block")
        ->capture_default_str();
    cmd->add_option("--fee-weight", o.sim.weights.fee_weight, "Routing distance weight per msat")
        ->capture_default_str();
    cmd->add_option("--timelock-weight", o.sim.weights.timelock_weight,
                    "Routing distance weight per block")
        ->capture_default_str();
    cmd->add_option("--final-timelock", o.sim.final_timelock,
                    "Timelock of the receiver-side hop (blocks)")
        ->capture_default_str();
    cmd->add_option("--validity-window-ms", o.sim.validity_window_ms,
                    "Results after this simulated time are reported unknown")
        ->capture_default_str();
}

void add_stats_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--batches", o.batches, "Number of batches for the batch means method")
        ->capture_default_str();
    cmd->add_option("--warmup-batches", o.warmup_batches,
                    "Leading batches dropped as initial transient")
        ->capture_default_str();
}

ConfigEcho make_echo(const Options& o, bool with_gen, bool with_sim) {
    ConfigEcho echo;
    const auto add = [&echo](const std::string& key, auto value) {
        if constexpr (std::is_floating_point_v<decltype(value)>) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", value);
            echo.emplace_back(key, buf);
        } else {
            echo.emplace_back(key, std::to_string(value));
        }
    };
    add("seed", o.seed);
    if (with_gen) {
        add("peers", o.gen.n_peers);
        add("avg-channels", o.gen.avg_channels_per_peer);
        add("sigma-topology", o.gen.topology_sigma);
        add("avg-capacity", o.gen.avg_channel_capacity);
        add("gini", o.gen.capacity_gini);
        add("payment-rate", o.gen.payment_rate);
        add("n-payments", o.gen.n_payments);
        add("sigma-amount", o.gen.amount_sigma);
        add("same-recipient-fraction", o.gen.same_recipient_fraction);
        add("base-fee-msat", o.gen.default_base_fee_msat);
        add("prop-fee-ppm", o.gen.default_prop_fee_ppm);
        add("timelock-delta", o.gen.default_timelock_delta);
        add("min-htlc", o.gen.default_min_htlc);
    }
    if (with_sim) {
        add("p-uncoop-before", o.sim.p_uncoop_before);
        add("p-uncoop-after", o.sim.p_uncoop_after);
        add("latency-min", o.sim.latency_min_ms);
        add("latency-max", o.sim.latency_max_ms);
        add("timeout-ms", o.sim.payment_timeout_ms);
        add("block-interval-ms", o.sim.block_interval_ms);
        add("fee-weight", o.sim.weights.fee_weight);
        add("timelock-weight", o.sim.weights.timelock_weight);
        add("final-timelock", o.sim.final_timelock);
        add("validity-window-ms", o.sim.validity_window_ms);
    }
    echo.emplace_back("batches", std::to_string(o.batches));
    echo.emplace_back("warmup-batches", std::to_string(o.warmup_batches));
    return echo;
}

void cmd_generate(const Options& o) {
    Network net = generate_network(o.gen);
    std::vector<Payment> payments = generate_payments(o.gen);

    fs::create_directories(o.out_dir);
    write_network(o.out_dir, net);
    write_payments_csv(fs::path(o.out_dir) / kPaymentsFile, payments);

    const double n = static_cast<double>(net.peers.size());
    std::printf("generated %zu peers, %zu channels (%.2f initiated / %.2f incident per peer), "
                "%zu payments -> %s\n",
                net.peers.size(), net.channels.size(), static_cast<double>(net.channels.size()) / n,
                2.0 * static_cast<double>(net.channels.size()) / n, payments.size(),
                o.out_dir.c_str());
}

SimSummary cmd_simulate(const Options& o) {
    Network net = read_network(o.in_dir);
    std::vector<Payment> payments = read_payments_csv(fs::path(o.in_dir) / kPaymentsFile);
    std::stable_sort(payments.begin(), payments.end(),
                     [](const Payment& a, const Payment& b) { return a.start_time < b.start_time; });

    const SimSummary summary = run(net, payments, o.sim);

    fs::create_directories(o.out_dir);
    write_raw_results_csv(fs::path(o.out_dir) / kRawResultsFile, payments);
    std::printf("simulated %zu payments: %llu events, %llu route searches, final time %lld ms\n",
                payments.size(), static_cast<unsigned long long>(summary.events_processed),
                static_cast<unsigned long long>(summary.route_searches),
                static_cast<long long>(summary.final_time));
    return summary;
}

SimStatistics cmd_analyze(const Options& o, bool with_gen, bool with_sim) {
    std::vector<Payment> records =
        read_raw_results_csv(fs::path(o.in_dir) / kRawResultsFile);
    std::stable_sort(records.begin(), records.end(),
                     [](const Payment& a, const Payment& b) { return a.start_time < b.start_time; });
    const SimStatistics stats = batch_means(records, o.batches, o.warmup_batches);
    fs::create_directories(o.out_dir);
    write_statistics_json(fs::path(o.out_dir) / kStatisticsFile, stats, o.batches,
                          o.warmup_batches, make_echo(o, with_gen, with_sim));
    return stats;
}

void print_measure(const char* name, const MeasureStats& m) {
    if (m.n_batches == 0) {
        std::printf("  %-22s %10s\n", name, "n/a");
        return;
    }
    std::printf("  %-22s %12.6g %12.6g   [%12.6g, %12.6g]\n", name, m.mean, m.variance, m.ci95_low,
                m.ci95_high);
}

void print_summary(const SimStatistics& s) {
    std::printf("  %-22s %12s %12s   %s\n", "measure", "mean", "variance", "95% CI");
    print_measure("p_success", s.p_success);
    print_measure("p_fail_no_route", s.p_fail_no_route);
    print_measure("p_fail_unbalanced", s.p_fail_unbalanced);
    print_measure("p_fail_uncooperative", s.p_fail_uncooperative);
    print_measure("p_fail_timeout", s.p_fail_timeout);
    print_measure("p_unknown", s.p_unknown);
    print_measure("payment_time_ms", s.payment_time_ms);
    print_measure("attempts", s.attempts);
    print_measure("route_length", s.route_length);
}

void run_single(Options o) {
    o.apply_seed();
    cmd_generate(o);
    Options sim_opts = o;
    sim_opts.in_dir = o.out_dir;
    cmd_simulate(sim_opts);
    const SimStatistics stats = cmd_analyze(sim_opts, true, true);
    print_summary(stats);
}

int cmd_run(const Options& o) {
    if (o.runs <= 1) {
        run_single(o);
        return 0;
    }
    // Independent seeded replicas, one thread each.
    std::vector<std::thread> workers;
    std::vector<std::string> errors(o.runs);
    for (unsigned r = 0; r < o.runs; ++r) {
        workers.emplace_back([&, r]() {
            try {
                Options replica = o;
                replica.seed = o.seed + r;
                char sub[32];
                std::snprintf(sub, sizeof sub, "run-%04u", r);
                replica.out_dir = (fs::path(o.out_dir) / sub).string();
                run_single(replica);
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        });
    }
    for (auto& w : workers) w.join();
    int rc = 0;
    for (unsigned r = 0; r < o.runs; ++r) {
        if (!errors[r].empty()) {
            std::cerr << "run " << r << " failed: " << errors[r] << "\n";
            rc = 1;
        }
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete-event simulator of multi-hop HTLC payments on a channel network"};
    app.require_subcommand(1);

    Options gen_opts, sim_opts, analyze_opts, run_opts;

    CLI::App* generate =
        app.add_subcommand("generate", "Generate a synthetic network and payment script");
    add_common_flags(generate, gen_opts);
    add_generation_flags(generate, gen_opts);
    add_uncoop_flags(generate, gen_opts);
    generate->add_option("--out", gen_opts.out_dir, "Output directory")->capture_default_str();

    CLI::App* simulate = app.add_subcommand("simulate", "Execute a payment script on a network");
    add_common_flags(simulate, sim_opts);
    add_uncoop_flags(simulate, sim_opts);
    add_simulation_flags(simulate, sim_opts);
    simulate->add_option("--in", sim_opts.in_dir, "Directory with the four input CSV files")
        ->capture_default_str();
    simulate->add_option("--out", sim_opts.out_dir, "Output directory")->capture_default_str();

    CLI::App* analyze =
        app.add_subcommand("analyze", "Compute batch-means statistics from raw results");
    analyze->add_option("--config", "Config file with key=value lines; flags take precedence");
    add_stats_flags(analyze, analyze_opts);
    analyze->add_option("--in", analyze_opts.in_dir, "Directory with raw-per-payment-data.csv")
        ->capture_default_str();
    analyze->add_option("--out", analyze_opts.out_dir, "Output directory")->capture_default_str();

    CLI::App* run_cmd = app.add_subcommand("run", "All three phases in sequence");
    add_common_flags(run_cmd, run_opts);
    add_generation_flags(run_cmd, run_opts);
    add_uncoop_flags(run_cmd, run_opts);
    add_simulation_flags(run_cmd, run_opts);
    add_stats_flags(run_cmd, run_opts);
    run_cmd->add_option("--out", run_opts.out_dir, "Output directory")->capture_default_str();
    run_cmd->add_option("--runs", run_opts.runs, "Independent seeded replicas run in parallel")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        for (CLI::App* sub : {generate, simulate, analyze, run_cmd})
            if (sub->parsed()) apply_config_file(sub);

        if (generate->parsed()) {
            gen_opts.apply_seed();
            cmd_generate(gen_opts);
        } else if (simulate->parsed()) {
            sim_opts.apply_seed();
            cmd_simulate(sim_opts);
        } else if (analyze->parsed()) {
            cmd_analyze(analyze_opts, false, false);
        } else if (run_cmd->parsed()) {
            return cmd_run(run_opts);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
