#include "htlcsim/engine.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace htlcsim {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::find_route: return "find_route";
        case EventKind::send_payment: return "send_payment";
        case EventKind::forward_payment: return "forward_payment";
        case EventKind::receive_payment: return "receive_payment";
        case EventKind::forward_success: return "forward_success";
        case EventKind::forward_fail: return "forward_fail";
        case EventKind::receive_success: return "receive_success";
        case EventKind::receive_fail: return "receive_fail";
    }
    return "?";
}

void EventQueue::push(TimeMs time, EventKind kind, std::uint32_t payment_index,
                      std::uint32_t hop_index, bool close_channel) {
    Event e;
    e.time = time;
    e.seq = next_seq_++;
    e.kind = kind;
    e.payment_index = payment_index;
    e.hop_index = hop_index;
    e.close_channel = close_channel;
    heap_.push(e);
}

Event EventQueue::pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
}

void SimConfig::validate() const {
    if (latency_min_ms < 0 || latency_max_ms < latency_min_ms)
        throw std::invalid_argument("need 0 <= latency_min <= latency_max");
    if (payment_timeout_ms <= 0) throw std::invalid_argument("payment_timeout must be positive");
    if (block_interval_ms <= 0) throw std::invalid_argument("block_interval must be positive");
    if (p_uncoop_before < 0 || p_uncoop_before > 1 || p_uncoop_after < 0 || p_uncoop_after > 1 ||
        p_uncoop_before + p_uncoop_after > 1)
        throw std::invalid_argument(
            "uncooperative probabilities must be in [0,1] with sum at most 1");
    if (final_timelock < 1) throw std::invalid_argument("final_timelock must be at least 1");
    if (validity_window_ms <= 0) throw std::invalid_argument("validity_window must be positive");
    weights.validate();
}

Cooperation sample_uncooperative(double p_before, double p_after, Rng& rng) {
    const double u = rng.uniform01();
    if (u < p_before) return Cooperation::uncoop_before;
    if (u < p_before + p_after) return Cooperation::uncoop_after;
    return Cooperation::cooperative;
}

namespace {

class Simulator {
public:
    Simulator(Network& net, std::vector<Payment>& payments, const SimConfig& cfg,
              SimObserver* obs)
        : net_(net),
          payments_(payments),
          cfg_(cfg),
          obs_(obs),
          router_(net),
          rng_(cfg.seed),
          state_(payments.size()) {}

    SimSummary run() {
        validate_inputs();
        for (std::uint32_t i = 0; i < payments_.size(); ++i)
            queue_.push(payments_[i].start_time, EventKind::find_route, i);

        while (!queue_.empty()) {
            const Event e = queue_.pop();
            assert(e.time >= now_);
            now_ = e.time;
            ++summary_.events_processed;
            if (obs_) obs_->on_event(e);
            dispatch(e);
        }

        summary_.route_searches = router_.searches();
        summary_.final_time = now_;
        for (const Payment& p : payments_)
            if (p.result == PaymentResult::pending)
                throw std::logic_error("payment left pending after the event queue drained");
        return summary_;
    }

private:
    struct PaymentState {
        FailReason last_fail_reason = FailReason::none;
        ChannelId culprit_channel = kNoChannel;
        PeerId culprit_peer = kNoPeer;
    };

    void validate_inputs() {
        cfg_.validate();
        net_.validate();
        TimeMs prev = 0;
        for (const Payment& p : payments_) {
            if (p.sender == p.receiver)
                throw std::invalid_argument("payment " + std::to_string(p.id) +
                                            " has sender == receiver");
            if (p.sender >= net_.peers.size() || p.receiver >= net_.peers.size())
                throw std::invalid_argument("payment " + std::to_string(p.id) +
                                            " references unknown peer");
            if (p.amount <= 0)
                throw std::invalid_argument("payment " + std::to_string(p.id) +
                                            " has non-positive amount");
            if (p.result != PaymentResult::pending)
                throw std::invalid_argument("payment " + std::to_string(p.id) +
                                            " was already executed");
            if (p.start_time < prev)
                throw std::invalid_argument("payments must be sorted by start_time");
            prev = p.start_time;
        }
    }

    void dispatch(const Event& e) {
        assert(payments_[e.payment_index].result == PaymentResult::pending);
        switch (e.kind) {
            case EventKind::find_route: return handle_find_route(e);
            case EventKind::send_payment: return handle_send_payment(e);
            case EventKind::forward_payment: return handle_forward_payment(e);
            case EventKind::receive_payment: return handle_receive_payment(e);
            case EventKind::forward_success: return handle_forward_success(e);
            case EventKind::forward_fail: return handle_forward_fail(e);
            case EventKind::receive_success: return handle_receive_success(e);
            case EventKind::receive_fail: return handle_receive_fail(e);
        }
    }

    TimeMs latency() {
        return static_cast<TimeMs>(rng_.uniform_int(cfg_.latency_min_ms, cfg_.latency_max_ms));
    }

    // Results landing past the validity window are reported unknown: the
    // observation ended before the outcome was known.
    void finalize(Payment& p, PaymentResult result, FailReason reason) {
        if (now_ > cfg_.validity_window_ms) {
            p.result = PaymentResult::unknown;
            p.fail_reason = FailReason::none;
            p.end_time.reset();
        } else {
            p.result = result;
            p.fail_reason = reason;
            p.end_time = now_;
        }
        if (obs_) obs_->on_payment_finalized(now_, p);
    }

    void record_unbalanced(std::uint32_t pi, ChannelId channel) {
        state_[pi].last_fail_reason = FailReason::unbalanced;
        state_[pi].culprit_channel = channel;
        state_[pi].culprit_peer = kNoPeer;
    }

    void record_uncooperative(std::uint32_t pi, PeerId peer) {
        payments_[pi].encountered_uncooperative = true;
        state_[pi].last_fail_reason = FailReason::uncooperative;
        state_[pi].culprit_peer = peer;
        state_[pi].culprit_channel = kNoChannel;
    }

    // First event of a fail cascade: refund hops[j] at an intermediary, or
    // hand the failure to the sender when only its own hop is left.
    void start_fail(std::uint32_t pi, std::uint32_t j, TimeMs at, bool close_channel = false) {
        if (j >= 1)
            queue_.push(at, EventKind::forward_fail, pi, j, close_channel);
        else
            queue_.push(at, EventKind::receive_fail, pi, 0, close_channel);
    }

    void establish(Payment& p, const RouteHop& hop) {
        Channel& c = net_.channel_by_id(hop.channel_id);
        establish_htlc(c, p.id, hop.from_peer, hop.forward_amount);
        if (obs_)
            obs_->on_htlc_debit(now_, hop.channel_id, hop.from_peer, p.id, p.attempts,
                                hop.forward_amount);
    }

    void settle(Payment& p, const RouteHop& hop) {
        Channel& c = net_.channel_by_id(hop.channel_id);
        settle_htlc(c, p.id);
        if (obs_)
            obs_->on_htlc_settle(now_, hop.channel_id, hop.from_peer, p.id, p.attempts,
                                 hop.forward_amount);
    }

    void refund(Payment& p, const RouteHop& hop) {
        Channel& c = net_.channel_by_id(hop.channel_id);
        refund_htlc(c, p.id);
        if (obs_)
            obs_->on_htlc_refund(now_, hop.channel_id, hop.from_peer, p.id, p.attempts,
                                 hop.forward_amount);
    }

    void handle_find_route(const Event& e) {
        Payment& p = payments_[e.payment_index];
        if (now_ - p.start_time > cfg_.payment_timeout_ms) {
            finalize(p, PaymentResult::fail, FailReason::timeout);
            return;
        }
        // Zero-latency configs can re-attempt without the clock moving
        // (an uncooperative receiver adds no blacklist entry); cap those
        // same-instant retries so the run still terminates.
        if (now_ == p.start_time &&
            p.attempts > net_.peers.size() + net_.channels.size() + 64) {
            finalize(p, PaymentResult::fail, FailReason::timeout);
            return;
        }
        ++p.attempts;
        auto route = router_.find_route(p, p.blacklist, cfg_.weights, cfg_.final_timelock);
        if (route) {
            p.route = std::move(*route);
            queue_.push(now_, EventKind::send_payment, e.payment_index);
        } else {
            const FailReason reason = state_[e.payment_index].last_fail_reason == FailReason::none
                                          ? FailReason::no_route
                                          : state_[e.payment_index].last_fail_reason;
            finalize(p, PaymentResult::fail, reason);
        }
    }

    void handle_send_payment(const Event& e) {
        Payment& p = payments_[e.payment_index];
        const Route& route = *p.route;
        const RouteHop& hop = route.hops[0];
        const Channel& c = net_.channel_by_id(hop.channel_id);
        if (endpoint_for_direction(c, p.sender).balance < hop.forward_amount) {
            record_unbalanced(e.payment_index, hop.channel_id);
            queue_.push(now_, EventKind::receive_fail, e.payment_index);  // local failure
            return;
        }
        establish(p, hop);
        if (route.hops.size() > 1)
            queue_.push(now_ + latency(), EventKind::forward_payment, e.payment_index, 1);
        else
            queue_.push(now_ + latency(), EventKind::receive_payment, e.payment_index);
    }

    void handle_forward_payment(const Event& e) {
        Payment& p = payments_[e.payment_index];
        const Route& route = *p.route;
        const std::uint32_t i = e.hop_index;
        const RouteHop& hop = route.hops[i];
        Channel& c = net_.channel_by_id(hop.channel_id);
        const ChannelEndpoint& out = endpoint_for_direction(c, hop.from_peer);

        const Cooperation coop =
            sample_uncooperative(cfg_.p_uncoop_before, cfg_.p_uncoop_after, rng_);
        if (coop == Cooperation::uncoop_before) {
            record_uncooperative(e.payment_index, hop.from_peer);
            start_fail(e.payment_index, i - 1, now_ + latency());
            return;
        }
        if (out.balance < hop.forward_amount || hop.forward_amount < out.min_htlc) {
            // Applies to the uncooperative-after case too: without balance
            // the HTLC is never established.
            record_unbalanced(e.payment_index, hop.channel_id);
            start_fail(e.payment_index, i - 1, now_ + latency());
            return;
        }
        if (coop == Cooperation::uncoop_after) {
            record_uncooperative(e.payment_index, hop.from_peer);
            establish(p, hop);
            const TimeMs expiry =
                now_ + static_cast<TimeMs>(hop.cumulative_timelock) * cfg_.block_interval_ms;
            start_fail(e.payment_index, i, expiry, /*close_channel=*/true);
            return;
        }
        establish(p, hop);
        if (i + 1 < route.hops.size())
            queue_.push(now_ + latency(), EventKind::forward_payment, e.payment_index, i + 1);
        else
            queue_.push(now_ + latency(), EventKind::receive_payment, e.payment_index);
    }

    void handle_receive_payment(const Event& e) {
        Payment& p = payments_[e.payment_index];
        const Route& route = *p.route;
        const std::uint32_t last = static_cast<std::uint32_t>(route.hops.size()) - 1;

        // A receiver that never reveals the preimage; only the before-kind
        // probability applies to it.
        const Cooperation coop = sample_uncooperative(cfg_.p_uncoop_before, 0.0, rng_);
        if (coop == Cooperation::uncoop_before) {
            record_uncooperative(e.payment_index, p.receiver);
            start_fail(e.payment_index, last, now_ + latency());
            return;
        }
        settle(p, route.hops[last]);
        if (route.hops.size() > 1)
            queue_.push(now_ + latency(), EventKind::forward_success, e.payment_index, last - 1);
        else
            queue_.push(now_ + latency(), EventKind::receive_success, e.payment_index);
    }

    void handle_forward_success(const Event& e) {
        Payment& p = payments_[e.payment_index];
        const std::uint32_t i = e.hop_index;
        settle(p, p.route->hops[i]);
        if (i >= 1)
            queue_.push(now_ + latency(), EventKind::forward_success, e.payment_index, i - 1);
        else
            queue_.push(now_ + latency(), EventKind::receive_success, e.payment_index);
    }

    void handle_forward_fail(const Event& e) {
        Payment& p = payments_[e.payment_index];
        const std::uint32_t i = e.hop_index;
        refund(p, p.route->hops[i]);
        if (e.close_channel) net_.channel_by_id(p.route->hops[i].channel_id).closed = true;
        start_fail(e.payment_index, i - 1, now_ + latency());
    }

    void handle_receive_success(const Event& e) {
        finalize(payments_[e.payment_index], PaymentResult::success, FailReason::none);
    }

    void handle_receive_fail(const Event& e) {
        Payment& p = payments_[e.payment_index];
        PaymentState& st = state_[e.payment_index];

        // The sender's own HTLC, unless the send itself failed locally.
        if (p.route) {
            Channel& c = net_.channel_by_id(p.route->hops[0].channel_id);
            const auto pending = std::find_if(c.pending.begin(), c.pending.end(),
                                              [&](const PendingHtlc& h) { return h.payment_id == p.id; });
            if (pending != c.pending.end()) refund(p, p.route->hops[0]);
        }

        if (st.culprit_channel != kNoChannel)
            p.blacklist.excluded_channel_ids.insert(st.culprit_channel);
        if (st.culprit_peer != kNoPeer && st.culprit_peer != p.sender &&
            st.culprit_peer != p.receiver)
            p.blacklist.excluded_peer_ids.insert(st.culprit_peer);
        st.culprit_channel = kNoChannel;
        st.culprit_peer = kNoPeer;

        queue_.push(now_, EventKind::find_route, e.payment_index);
    }

    Network& net_;
    std::vector<Payment>& payments_;
    const SimConfig& cfg_;
    SimObserver* obs_;
    Router router_;
    Rng rng_;
    EventQueue queue_;
    TimeMs now_ = 0;
    std::vector<PaymentState> state_;
    SimSummary summary_;
};

}  // namespace

SimSummary run(Network& net, std::vector<Payment>& payments, const SimConfig& config,
               SimObserver* observer) {
    Simulator sim(net, payments, config, observer);
    return sim.run();
}

}  // namespace htlcsim
