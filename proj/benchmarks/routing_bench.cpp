#include <benchmark/benchmark.h>

#include "htlcsim/netgen.hpp"
#include "htlcsim/rng.hpp"
#include "htlcsim/routing.hpp"

using namespace htlcsim;

namespace {

Network bench_network(std::uint32_t peers) {
    GenerationParams p;
    p.n_peers = peers;
    p.avg_channels_per_peer = 4;
    p.topology_sigma = static_cast<double>(peers) / 30.0;
    p.avg_channel_capacity = 10'000'000;
    p.capacity_gini = 0.3;
    p.seed = 1;
    return generate_network(p);
}

}  // namespace

// Route searches dominate large simulations; this tracks cost per search as
// the graph grows.
static void FindRoute(benchmark::State& state) {
    const auto peers = static_cast<std::uint32_t>(state.range(0));
    Network net = bench_network(peers);
    Router router(net);
    Rng rng(7);

    Payment p;
    p.amount = 1'000;
    for (auto _ : state) {
        p.sender = static_cast<PeerId>(rng.uniform_below(peers));
        p.receiver = static_cast<PeerId>(rng.uniform_below(peers - 1));
        if (p.receiver >= p.sender) ++p.receiver;
        auto route = router.find_route(p, {}, {}, 144);
        benchmark::DoNotOptimize(route);
    }
    state.SetComplexityN(peers);
}
BENCHMARK(FindRoute)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

static void FindRouteWithBlacklist(benchmark::State& state) {
    Network net = bench_network(4096);
    Router router(net);
    Rng rng(7);
    Blacklist bl;
    for (int i = 0; i < 32; ++i) {
        bl.excluded_channel_ids.insert(static_cast<ChannelId>(rng.uniform_below(net.channels.size())));
        bl.excluded_peer_ids.insert(1 + static_cast<PeerId>(rng.uniform_below(4094)));
    }

    Payment p;
    p.amount = 1'000;
    for (auto _ : state) {
        p.sender = static_cast<PeerId>(rng.uniform_below(4096));
        p.receiver = static_cast<PeerId>(rng.uniform_below(4095));
        if (p.receiver >= p.sender) ++p.receiver;
        if (bl.has_peer(p.sender) || bl.has_peer(p.receiver)) continue;
        auto route = router.find_route(p, bl, {}, 144);
        benchmark::DoNotOptimize(route);
    }
}
BENCHMARK(FindRouteWithBlacklist);
