#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace htlcsim {

using PeerId = std::uint32_t;
using ChannelId = std::uint32_t;
using PaymentId = std::uint64_t;
using Sat = std::int64_t;     // satoshi
using Msat = std::int64_t;    // millisatoshi
using TimeMs = std::int64_t;  // simulated milliseconds
using Blocks = std::int32_t;

inline constexpr PeerId kNoPeer = 0xffffffffu;
inline constexpr ChannelId kNoChannel = 0xffffffffu;
inline constexpr std::uint64_t kDefaultSeed = 42;

struct Peer {
    PeerId id = 0;
    std::vector<ChannelId> open_channel_ids;  // incident channels, ascending id
};

/// Directed half of a channel: the policy and spendable balance of one owner.
struct ChannelEndpoint {
    PeerId owner = kNoPeer;
    Sat balance = 0;
    Msat base_fee_msat = 0;
    std::int64_t prop_fee_ppm = 0;  // parts-per-million of the forwarded amount
    Blocks timelock_delta = 1;
    Sat min_htlc = 0;
};

/// In-flight conditional payment: `amount` was debited from `from_peer`'s
/// endpoint when the HTLC was established and stays locked until it is
/// settled (credited to the other side) or refunded.
struct PendingHtlc {
    PaymentId payment_id = 0;
    PeerId from_peer = kNoPeer;
    Sat amount = 0;
};

struct Channel {
    ChannelId id = 0;
    PeerId peer1 = kNoPeer;
    PeerId peer2 = kNoPeer;
    Sat capacity = 0;
    ChannelEndpoint endpoint1;  // direction peer1 -> peer2
    ChannelEndpoint endpoint2;  // direction peer2 -> peer1
    bool closed = false;        // closed channels never reopen
    std::vector<PendingHtlc> pending;

    PeerId other_peer(PeerId p) const { return p == peer1 ? peer2 : peer1; }
    bool has_peer(PeerId p) const { return p == peer1 || p == peer2; }
};

/// Endpoint owned by `from_peer`, i.e. the one that establishes HTLCs in the
/// from_peer -> other direction. Throws std::invalid_argument if `from_peer`
/// is not on the channel.
ChannelEndpoint& endpoint_for_direction(Channel& channel, PeerId from_peer);
const ChannelEndpoint& endpoint_for_direction(const Channel& channel, PeerId from_peer);

Sat pending_total(const Channel& channel);

/// endpoint1.balance + endpoint2.balance + sum of pending HTLC amounts ==
/// capacity. Must hold for every channel at every event boundary.
bool conservation_holds(const Channel& channel);

/// Debits `amount` from `from_peer`'s endpoint and records the pending HTLC.
/// Throws std::invalid_argument on insufficient balance.
void establish_htlc(Channel& channel, PaymentId payment, PeerId from_peer, Sat amount);

/// Removes the pending HTLC of `payment` and credits its amount to the
/// endpoint opposite the debited one. Throws if no such HTLC is pending.
void settle_htlc(Channel& channel, PaymentId payment);

/// Removes the pending HTLC of `payment` and restores the debited amount to
/// the originating endpoint. Throws if no such HTLC is pending.
void refund_htlc(Channel& channel, PaymentId payment);

/// Settles the first pending HTLC matching (from_peer, amount).
void apply_hop_settlement(Channel& channel, PeerId from_peer, Sat amount);

struct RouteHop {
    ChannelId channel_id = kNoChannel;
    PeerId from_peer = kNoPeer;
    PeerId to_peer = kNoPeer;
    Sat forward_amount = 0;          // amount entering this hop, downstream fees included
    Blocks cumulative_timelock = 0;  // strictly decreasing toward the receiver
};

struct Route {
    std::vector<RouteHop> hops;  // sender side first
};

struct Blacklist {
    std::unordered_set<ChannelId> excluded_channel_ids;
    std::unordered_set<PeerId> excluded_peer_ids;

    bool empty() const { return excluded_channel_ids.empty() && excluded_peer_ids.empty(); }
    bool has_channel(ChannelId c) const { return excluded_channel_ids.contains(c); }
    bool has_peer(PeerId p) const { return excluded_peer_ids.contains(p); }
};

enum class PaymentResult : std::uint8_t { pending, success, fail, unknown };
enum class FailReason : std::uint8_t { none, no_route, unbalanced, uncooperative, timeout };

const char* to_string(PaymentResult r);
const char* to_string(FailReason r);
std::optional<PaymentResult> parse_payment_result(const std::string& s);
std::optional<FailReason> parse_fail_reason(const std::string& s);

struct Payment {
    PaymentId id = 0;
    PeerId sender = kNoPeer;
    PeerId receiver = kNoPeer;
    Sat amount = 0;
    TimeMs start_time = 0;

    // Execution record, filled by the engine.
    std::optional<TimeMs> end_time;
    PaymentResult result = PaymentResult::pending;
    FailReason fail_reason = FailReason::none;
    std::uint32_t attempts = 0;
    bool encountered_uncooperative = false;
    std::optional<Route> route;  // last route found, if any
    Blacklist blacklist;         // accumulated across this payment's re-attempts
};

/// The channel graph. Peers must have dense ids [0, n); channel ids only
/// need to be unique (positions are resolved through an index map).
class Network {
public:
    std::vector<Peer> peers;
    std::vector<Channel> channels;

    /// Rebuilds the channel index, per-peer adjacency and open_channel_ids
    /// from `channels`. Call after any structural change.
    void rebuild_index();

    std::size_t channel_pos(ChannelId id) const;
    Channel& channel_by_id(ChannelId id) { return channels[channel_pos(id)]; }
    const Channel& channel_by_id(ChannelId id) const { return channels[channel_pos(id)]; }

    /// Positions into `channels` of the channels incident to `peer`,
    /// ascending by channel id.
    const std::vector<std::uint32_t>& adjacent_channels(PeerId peer) const {
        return adjacency_[peer];
    }

    Sat total_funds() const;  // balances plus locked HTLC amounts

    /// Structural invariants: dense peer ids, valid channel endpoints,
    /// per-channel conservation. Throws std::invalid_argument on violation.
    void validate() const;

private:
    std::unordered_map<ChannelId, std::uint32_t> channel_index_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
};

}  // namespace htlcsim
