#include "htlcsim/routing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace htlcsim {

void DistanceWeights::validate() const {
    if (fee_weight < 0 || timelock_weight < 0)
        throw std::invalid_argument("distance weights must be non-negative");
    if (fee_weight == 0 && timelock_weight == 0)
        throw std::invalid_argument("distance weights must not both be zero");
}

Msat fee_msat(const ChannelEndpoint& endpoint, Sat amount) {
    if (amount < 0) throw std::invalid_argument("fee of a negative amount");
    const auto prop = static_cast<__int128>(endpoint.prop_fee_ppm) * amount * 1000 / 1'000'000;
    return endpoint.base_fee_msat + static_cast<Msat>(prop);
}

Sat fee_sat_ceil(const ChannelEndpoint& endpoint, Sat amount) {
    return (fee_msat(endpoint, amount) + 999) / 1000;
}

double edge_distance(const ChannelEndpoint& endpoint, Sat amount, const DistanceWeights& weights) {
    return weights.fee_weight * static_cast<double>(fee_msat(endpoint, amount)) +
           weights.timelock_weight * static_cast<double>(endpoint.timelock_delta);
}

Router::Router(const Network& net) : net_(&net) {
    const std::size_t n = net.peers.size();
    dist_.resize(n);
    hops_.resize(n);
    parent_peer_.resize(n);
    parent_channel_.resize(n);
    seen_epoch_.assign(n, 0);
    settled_epoch_.assign(n, 0);
}

void Router::build_chain(PeerId tail, std::vector<ChannelId>& out) const {
    out.clear();
    PeerId p = tail;
    while (parent_peer_[p] != kNoPeer) {
        out.push_back(net_->channels[parent_channel_[p]].id);
        p = parent_peer_[p];
    }
    std::reverse(out.begin(), out.end());
}

// Compares the candidate path (best path to via_peer, then via_channel)
// against the incumbent path recorded for the node whose parent is
// incumbent_peer. Both have equal distance and hop count.
bool Router::lex_less(PeerId via_peer, std::uint32_t via_channel_pos,
                      PeerId incumbent_peer) const {
    build_chain(via_peer, chain_a_);
    chain_a_.push_back(net_->channels[via_channel_pos].id);
    build_chain(incumbent_peer, chain_b_);
    return std::lexicographical_compare(chain_a_.begin(), chain_a_.end(), chain_b_.begin(),
                                        chain_b_.end());
}

std::optional<std::vector<ChannelId>> Router::find_path(PeerId source, PeerId target, Sat amount,
                                                        const Blacklist& blacklist,
                                                        const DistanceWeights& weights) {
    if (source == target) throw std::invalid_argument("find_path needs source != target");
    if (source >= net_->peers.size() || target >= net_->peers.size())
        throw std::invalid_argument("find_path peer out of range");
    ++searches_;
    ++epoch_;

    const auto heap_after = [](const HeapEntry& a, const HeapEntry& b) {
        return a.dist > b.dist || (a.dist == b.dist && a.hops > b.hops);
    };
    heap_.clear();

    dist_[source] = 0.0;
    hops_[source] = 0;
    parent_peer_[source] = kNoPeer;
    parent_channel_[source] = kNoChannel;
    seen_epoch_[source] = epoch_;
    heap_.push_back({0.0, 0, source});

    while (!heap_.empty()) {
        std::pop_heap(heap_.begin(), heap_.end(), heap_after);
        const HeapEntry top = heap_.back();
        heap_.pop_back();

        const PeerId u = top.peer;
        if (settled_epoch_[u] == epoch_) continue;
        if (top.dist != dist_[u] || top.hops != hops_[u]) continue;  // stale entry
        settled_epoch_[u] = epoch_;
        if (u == target) break;

        for (std::uint32_t pos : net_->adjacent_channels(u)) {
            const Channel& c = net_->channels[pos];
            if (c.closed) continue;
            const PeerId v = c.other_peer(u);
            if (settled_epoch_[v] == epoch_) continue;
            if (blacklist.has_channel(c.id) || blacklist.has_peer(v)) continue;

            const ChannelEndpoint& ep = u == c.peer1 ? c.endpoint1 : c.endpoint2;
            const Sat bound = u == source ? ep.balance : c.capacity;
            if (bound < amount || amount < ep.min_htlc) continue;

            const double nd = dist_[u] + edge_distance(ep, amount, weights);
            const std::uint32_t nh = hops_[u] + 1;
            if (seen_epoch_[v] != epoch_ || nd < dist_[v] ||
                (nd == dist_[v] && nh < hops_[v])) {
                seen_epoch_[v] = epoch_;
                dist_[v] = nd;
                hops_[v] = nh;
                parent_peer_[v] = u;
                parent_channel_[v] = pos;
                heap_.push_back({nd, nh, v});
                std::push_heap(heap_.begin(), heap_.end(), heap_after);
            } else if (nd == dist_[v] && nh == hops_[v] && lex_less(u, pos, parent_peer_[v])) {
                // Same key; keep the lexicographically smallest channel
                // sequence. No re-push needed, the key is unchanged.
                parent_peer_[v] = u;
                parent_channel_[v] = pos;
            }
        }
    }

    if (settled_epoch_[target] != epoch_) return std::nullopt;
    std::vector<ChannelId> path;
    build_chain(target, path);
    return path;
}

std::optional<Route> new_route(const Network& net, std::span<const ChannelId> path, PeerId sender,
                               Sat amount, Blocks final_timelock) {
    if (path.empty()) throw std::invalid_argument("new_route of empty path");
    if (amount <= 0) throw std::invalid_argument("new_route needs a positive amount");
    if (final_timelock < 0) throw std::invalid_argument("negative final timelock");

    Route route;
    route.hops.resize(path.size());
    PeerId from = sender;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const Channel& c = net.channel_by_id(path[i]);
        if (!c.has_peer(from))
            throw std::invalid_argument("path does not form a connected walk from the sender");
        route.hops[i].channel_id = path[i];
        route.hops[i].from_peer = from;
        route.hops[i].to_peer = c.other_peer(from);
        from = route.hops[i].to_peer;
    }

    // Receiver to sender: accumulate the next forwarding endpoint's fee and
    // timelock delta onto each earlier hop.
    const std::size_t last = path.size() - 1;
    route.hops[last].forward_amount = amount;
    route.hops[last].cumulative_timelock = final_timelock;
    for (std::size_t i = last; i-- > 0;) {
        const RouteHop& next = route.hops[i + 1];
        const Channel& next_channel = net.channel_by_id(next.channel_id);
        const ChannelEndpoint& forwarder = endpoint_for_direction(next_channel, next.from_peer);
        route.hops[i].forward_amount =
            next.forward_amount + fee_sat_ceil(forwarder, next.forward_amount);
        route.hops[i].cumulative_timelock = next.cumulative_timelock + forwarder.timelock_delta;
    }

    for (std::size_t i = 0; i < route.hops.size(); ++i) {
        const RouteHop& hop = route.hops[i];
        const Channel& c = net.channel_by_id(hop.channel_id);
        const ChannelEndpoint& ep = endpoint_for_direction(c, hop.from_peer);
        const Sat bound = i == 0 ? ep.balance : c.capacity;
        if (bound < hop.forward_amount) return std::nullopt;
        if (hop.forward_amount < ep.min_htlc) return std::nullopt;
    }
    return route;
}

std::optional<Route> Router::find_route(const Payment& payment, const Blacklist& blacklist,
                                        const DistanceWeights& weights, Blocks final_timelock) {
    auto path = find_path(payment.sender, payment.receiver, payment.amount, blacklist, weights);
    if (!path) return std::nullopt;
    return new_route(*net_, *path, payment.sender, payment.amount, final_timelock);
}

std::optional<Route> find_route(const Network& net, const Payment& payment,
                                const Blacklist& blacklist, const DistanceWeights& weights,
                                Blocks final_timelock) {
    Router router(net);
    return router.find_route(payment, blacklist, weights, final_timelock);
}

}  // namespace htlcsim
