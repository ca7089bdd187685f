#pragma once

#include <optional>
#include <span>
#include <vector>

#include "htlcsim/model.hpp"

namespace htlcsim {

/// Linear blend of fee and timelock for the path-search distance metric.
struct DistanceWeights {
    double fee_weight = 1.0;        // per msat of fee at the searched amount
    double timelock_weight = 10.0;  // per block of timelock delta

    void validate() const;  // throws if negative or both zero
};

/// base_fee + floor(prop_fee_ppm * amount_msat / 10^6), in millisatoshi.
Msat fee_msat(const ChannelEndpoint& endpoint, Sat amount);

/// Same fee rounded up to whole satoshi, as charged on a route hop.
Sat fee_sat_ceil(const ChannelEndpoint& endpoint, Sat amount);

/// Strictly monotone in both the fee and the timelock delta when both
/// weights are positive.
double edge_distance(const ChannelEndpoint& endpoint, Sat amount, const DistanceWeights& weights);

/// Source-routing search state, reusable across calls on one network.
/// Searches are read-only with respect to the graph; reuse from a single
/// thread at a time.
class Router {
public:
    explicit Router(const Network& net);

    /// Minimum-distance path from source to target over open, non-blacklisted
    /// channels viable for `amount` (capacity bound, or the source's own
    /// balance on its first hop). Ties broken by fewer hops, then by the
    /// lexicographically smallest channel-id sequence. Returns the channel
    /// ids sender-side first, or nullopt if the target is unreachable.
    std::optional<std::vector<ChannelId>> find_path(PeerId source, PeerId target, Sat amount,
                                                    const Blacklist& blacklist,
                                                    const DistanceWeights& weights);

    /// find_path composed with new_route.
    std::optional<Route> find_route(const Payment& payment, const Blacklist& blacklist,
                                    const DistanceWeights& weights, Blocks final_timelock);

    std::uint64_t searches() const { return searches_; }

private:
    struct HeapEntry {
        double dist;
        std::uint32_t hops;
        PeerId peer;
    };

    bool lex_less(PeerId via_peer, std::uint32_t via_channel_pos, PeerId incumbent_peer) const;
    void build_chain(PeerId tail, std::vector<ChannelId>& out) const;

    const Network* net_;
    std::vector<double> dist_;
    std::vector<std::uint32_t> hops_;
    std::vector<PeerId> parent_peer_;
    std::vector<std::uint32_t> parent_channel_;  // position into net_->channels
    std::vector<std::uint32_t> seen_epoch_;
    std::vector<std::uint32_t> settled_epoch_;
    std::uint32_t epoch_ = 0;
    std::vector<HeapEntry> heap_;
    mutable std::vector<ChannelId> chain_a_, chain_b_;
    std::uint64_t searches_ = 0;
};

/// Turns a path into a route by assigning per-hop forward amounts and
/// cumulative timelocks receiver-to-sender: the last hop carries exactly
/// `amount`; each earlier hop adds the next forwarding endpoint's fee
/// (rounded up to satoshi) and its timelock delta. Returns nullopt when any
/// hop's viability bound (channel capacity, or the sender's balance on the
/// first hop) is below its forward amount, or a forward amount is below the
/// establishing endpoint's min_htlc.
std::optional<Route> new_route(const Network& net, std::span<const ChannelId> path, PeerId sender,
                               Sat amount, Blocks final_timelock);

/// One-shot convenience wrapper; allocates a fresh Router.
std::optional<Route> find_route(const Network& net, const Payment& payment,
                                const Blacklist& blacklist, const DistanceWeights& weights,
                                Blocks final_timelock);

}  // namespace htlcsim
