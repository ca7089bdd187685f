#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "htlcsim/model.hpp"
#include "htlcsim/rng.hpp"
#include "htlcsim/routing.hpp"

namespace htlcsim {

enum class EventKind : std::uint8_t {
    find_route,
    send_payment,
    forward_payment,
    receive_payment,
    forward_success,
    forward_fail,
    receive_success,
    receive_fail,
};

const char* to_string(EventKind k);

struct Event {
    TimeMs time = 0;
    std::uint64_t seq = 0;  // FIFO among equal times
    EventKind kind = EventKind::find_route;
    std::uint32_t payment_index = 0;  // position in the run's payment list
    std::uint32_t hop_index = 0;      // hop acted on; unused for find_route
    bool close_channel = false;       // forward_fail after an expired timelock
};

/// Min-ordered on (time, insertion sequence).
class EventQueue {
public:
    void push(TimeMs time, EventKind kind, std::uint32_t payment_index, std::uint32_t hop_index = 0,
              bool close_channel = false);
    Event pop();
    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    TimeMs next_time() const { return heap_.top().time; }

private:
    struct After {
        bool operator()(const Event& a, const Event& b) const {
            return a.time > b.time || (a.time == b.time && a.seq > b.seq);
        }
    };
    std::priority_queue<Event, std::vector<Event>, After> heap_;
    std::uint64_t next_seq_ = 0;
};

struct SimConfig {
    TimeMs latency_min_ms = 10;   // per message hop
    TimeMs latency_max_ms = 100;
    TimeMs payment_timeout_ms = 60'000;
    TimeMs block_interval_ms = 600'000;
    double p_uncoop_before = 0.0;
    double p_uncoop_after = 0.0;
    DistanceWeights weights;
    Blocks final_timelock = 144;
    TimeMs validity_window_ms = 900'000;  // results past this are reported unknown
    std::uint64_t seed = kDefaultSeed;

    void validate() const;  // throws std::invalid_argument
};

enum class Cooperation : std::uint8_t { cooperative, uncoop_before, uncoop_after };

/// One uniform draw partitioned as [0, p_before) -> uncoop_before,
/// [p_before, p_before + p_after) -> uncoop_after, rest cooperative.
Cooperation sample_uncooperative(double p_before, double p_after, Rng& rng);

/// Balance-movement and lifecycle hooks, used by tests to check atomicity
/// and conservation from outside the engine.
class SimObserver {
public:
    virtual ~SimObserver() = default;
    virtual void on_event(const Event& /*event*/) {}
    virtual void on_htlc_debit(TimeMs /*time*/, ChannelId /*channel*/, PeerId /*from*/,
                               PaymentId /*payment*/, std::uint32_t /*attempt*/, Sat /*amount*/) {}
    virtual void on_htlc_settle(TimeMs /*time*/, ChannelId /*channel*/, PeerId /*from*/,
                                PaymentId /*payment*/, std::uint32_t /*attempt*/, Sat /*amount*/) {}
    virtual void on_htlc_refund(TimeMs /*time*/, ChannelId /*channel*/, PeerId /*from*/,
                                PaymentId /*payment*/, std::uint32_t /*attempt*/, Sat /*amount*/) {}
    virtual void on_payment_finalized(TimeMs /*time*/, const Payment& /*payment*/) {}
};

struct SimSummary {
    std::uint64_t route_searches = 0;  // Dijkstra invocations
    std::uint64_t events_processed = 0;
    TimeMs final_time = 0;
};

/// Executes the payment script on the network: one find_route event per
/// payment at its start time, then events until the queue drains. Mutates
/// the network (balances, pending HTLCs, closures) and fills each payment's
/// execution record; every payment ends success, fail or unknown.
/// Payments must be sorted by start_time.
SimSummary run(Network& net, std::vector<Payment>& payments, const SimConfig& config,
               SimObserver* observer = nullptr);

}  // namespace htlcsim
