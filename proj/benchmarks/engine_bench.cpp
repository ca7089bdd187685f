#include <benchmark/benchmark.h>

#include "htlcsim/engine.hpp"
#include "htlcsim/netgen.hpp"

using namespace htlcsim;

static void SimulateRun(benchmark::State& state) {
    GenerationParams gp;
    gp.n_peers = static_cast<std::uint32_t>(state.range(0));
    gp.avg_channels_per_peer = 4;
    gp.topology_sigma = static_cast<double>(gp.n_peers) / 30.0;
    gp.avg_channel_capacity = 100'000;
    gp.capacity_gini = 0.4;
    gp.payment_rate = 100;
    gp.n_payments = 2'000;
    gp.amount_sigma = 1.0;
    gp.seed = 3;

    SimConfig cfg;
    cfg.p_uncoop_before = 0.05;
    cfg.p_uncoop_after = 0.02;
    cfg.seed = 3;

    std::uint64_t events = 0;
    for (auto _ : state) {
        state.PauseTiming();
        Network net = generate_network(gp);
        std::vector<Payment> payments = generate_payments(gp);
        state.ResumeTiming();
        const SimSummary s = run(net, payments, cfg);
        events += s.events_processed;
        benchmark::DoNotOptimize(payments);
    }
    state.counters["events/s"] = benchmark::Counter(static_cast<double>(events),
                                                    benchmark::Counter::kIsRate);
}
BENCHMARK(SimulateRun)->Arg(100)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);
