#include "htlcsim/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace htlcsim {

ChannelEndpoint& endpoint_for_direction(Channel& channel, PeerId from_peer) {
    if (from_peer == channel.peer1) return channel.endpoint1;
    if (from_peer == channel.peer2) return channel.endpoint2;
    throw std::invalid_argument("peer " + std::to_string(from_peer) + " is not on channel " +
                                std::to_string(channel.id));
}

const ChannelEndpoint& endpoint_for_direction(const Channel& channel, PeerId from_peer) {
    return endpoint_for_direction(const_cast<Channel&>(channel), from_peer);
}

Sat pending_total(const Channel& channel) {
    Sat sum = 0;
    for (const auto& h : channel.pending) sum += h.amount;
    return sum;
}

bool conservation_holds(const Channel& channel) {
    return channel.endpoint1.balance + channel.endpoint2.balance + pending_total(channel) ==
           channel.capacity;
}

void establish_htlc(Channel& channel, PaymentId payment, PeerId from_peer, Sat amount) {
    ChannelEndpoint& ep = endpoint_for_direction(channel, from_peer);
    if (amount < 0) throw std::invalid_argument("negative HTLC amount");
    if (ep.balance < amount)
        throw std::invalid_argument("insufficient balance to establish HTLC on channel " +
                                    std::to_string(channel.id));
    ep.balance -= amount;
    channel.pending.push_back({payment, from_peer, amount});
}

namespace {

std::vector<PendingHtlc>::iterator find_htlc(Channel& channel, PaymentId payment) {
    auto it = std::find_if(channel.pending.begin(), channel.pending.end(),
                           [&](const PendingHtlc& h) { return h.payment_id == payment; });
    if (it == channel.pending.end())
        throw std::invalid_argument("no pending HTLC for payment " + std::to_string(payment) +
                                    " on channel " + std::to_string(channel.id));
    return it;
}

void remove_and_credit(Channel& channel, std::vector<PendingHtlc>::iterator it, bool to_opposite) {
    const PeerId credited = to_opposite ? channel.other_peer(it->from_peer) : it->from_peer;
    endpoint_for_direction(channel, credited).balance += it->amount;
    channel.pending.erase(it);
}

}  // namespace

void settle_htlc(Channel& channel, PaymentId payment) {
    remove_and_credit(channel, find_htlc(channel, payment), /*to_opposite=*/true);
}

void refund_htlc(Channel& channel, PaymentId payment) {
    remove_and_credit(channel, find_htlc(channel, payment), /*to_opposite=*/false);
}

void apply_hop_settlement(Channel& channel, PeerId from_peer, Sat amount) {
    auto it = std::find_if(channel.pending.begin(), channel.pending.end(), [&](const PendingHtlc& h) {
        return h.from_peer == from_peer && h.amount == amount;
    });
    if (it == channel.pending.end())
        throw std::invalid_argument("no pending HTLC of amount " + std::to_string(amount) +
                                    " from peer " + std::to_string(from_peer) + " on channel " +
                                    std::to_string(channel.id));
    remove_and_credit(channel, it, /*to_opposite=*/true);
}

const char* to_string(PaymentResult r) {
    switch (r) {
        case PaymentResult::pending: return "pending";
        case PaymentResult::success: return "success";
        case PaymentResult::fail: return "fail";
        case PaymentResult::unknown: return "unknown";
    }
    return "?";
}

const char* to_string(FailReason r) {
    switch (r) {
        case FailReason::none: return "none";
        case FailReason::no_route: return "no_route";
        case FailReason::unbalanced: return "unbalanced";
        case FailReason::uncooperative: return "uncooperative";
        case FailReason::timeout: return "timeout";
    }
    return "?";
}

std::optional<PaymentResult> parse_payment_result(const std::string& s) {
    for (auto r : {PaymentResult::pending, PaymentResult::success, PaymentResult::fail,
                   PaymentResult::unknown})
        if (s == to_string(r)) return r;
    return std::nullopt;
}

std::optional<FailReason> parse_fail_reason(const std::string& s) {
    for (auto r : {FailReason::none, FailReason::no_route, FailReason::unbalanced,
                   FailReason::uncooperative, FailReason::timeout})
        if (s == to_string(r)) return r;
    return std::nullopt;
}

void Network::rebuild_index() {
    channel_index_.clear();
    channel_index_.reserve(channels.size());
    adjacency_.assign(peers.size(), {});
    for (auto& p : peers) p.open_channel_ids.clear();

    // Deterministic traversal order: ascending channel id.
    std::vector<std::uint32_t> order(channels.size());
    for (std::uint32_t i = 0; i < channels.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return channels[a].id < channels[b].id;
    });

    for (std::uint32_t pos : order) {
        const Channel& c = channels[pos];
        if (!channel_index_.emplace(c.id, pos).second)
            throw std::invalid_argument("duplicate channel id " + std::to_string(c.id));
        if (c.peer1 >= peers.size() || c.peer2 >= peers.size())
            throw std::invalid_argument("channel " + std::to_string(c.id) +
                                        " references unknown peer");
        adjacency_[c.peer1].push_back(pos);
        adjacency_[c.peer2].push_back(pos);
        peers[c.peer1].open_channel_ids.push_back(c.id);
        peers[c.peer2].open_channel_ids.push_back(c.id);
    }
}

std::size_t Network::channel_pos(ChannelId id) const {
    auto it = channel_index_.find(id);
    if (it == channel_index_.end())
        throw std::invalid_argument("unknown channel id " + std::to_string(id));
    return it->second;
}

Sat Network::total_funds() const {
    Sat sum = 0;
    for (const auto& c : channels)
        sum += c.endpoint1.balance + c.endpoint2.balance + pending_total(c);
    return sum;
}

void Network::validate() const {
    for (std::size_t i = 0; i < peers.size(); ++i)
        if (peers[i].id != i)
            throw std::invalid_argument("peer ids must be dense: position " + std::to_string(i) +
                                        " holds id " + std::to_string(peers[i].id));
    for (const auto& c : channels) {
        if (c.peer1 == c.peer2)
            throw std::invalid_argument("channel " + std::to_string(c.id) + " is a self-loop");
        if (c.peer1 >= peers.size() || c.peer2 >= peers.size())
            throw std::invalid_argument("channel " + std::to_string(c.id) +
                                        " references unknown peer");
        if (c.capacity < 0)
            throw std::invalid_argument("channel " + std::to_string(c.id) +
                                        " has negative capacity");
        if (c.endpoint1.owner != c.peer1 || c.endpoint2.owner != c.peer2)
            throw std::invalid_argument("channel " + std::to_string(c.id) +
                                        " endpoint owners do not match its peers");
        if (c.endpoint1.balance < 0 || c.endpoint2.balance < 0)
            throw std::invalid_argument("channel " + std::to_string(c.id) +
                                        " has a negative balance");
        if (c.endpoint1.timelock_delta < 1 || c.endpoint2.timelock_delta < 1)
            throw std::invalid_argument("channel " + std::to_string(c.id) +
                                        " has timelock_delta < 1");
        if (!conservation_holds(c))
            throw std::invalid_argument("channel " + std::to_string(c.id) +
                                        " violates balance conservation");
    }
}

}  // namespace htlcsim
