#include "htlcsim/netgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "htlcsim/rng.hpp"

namespace htlcsim {

namespace {

constexpr std::uint64_t kTopologyStream = 1;
constexpr std::uint64_t kCapacityStream = 2;
constexpr std::uint64_t kEndpointStream = 3;
constexpr std::uint64_t kPaymentStream = 4;

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void GenerationParams::validate() const {
    require(n_peers >= 2, "n_peers must be at least 2");
    require(avg_channels_per_peer > 0, "avg_channels_per_peer must be positive");
    require(topology_sigma >= 0, "topology_sigma must be non-negative");
    require(p_uncoop_before >= 0 && p_uncoop_before <= 1, "p_uncoop_before must be in [0,1]");
    require(p_uncoop_after >= 0 && p_uncoop_after <= 1, "p_uncoop_after must be in [0,1]");
    require(p_uncoop_before + p_uncoop_after <= 1, "p_uncoop_before + p_uncoop_after must be <= 1");
    require(avg_channel_capacity > 0, "avg_channel_capacity must be positive");
    require(capacity_gini >= 0 && capacity_gini < 1, "capacity_gini must be in [0,1)");
    require(payment_rate > 0, "payment_rate must be positive");
    require(amount_sigma >= 0, "amount_sigma must be non-negative");
    require(same_recipient_fraction >= 0 && same_recipient_fraction <= 1,
            "same_recipient_fraction must be in [0,1]");
    require(default_base_fee_msat >= 0, "default_base_fee_msat must be non-negative");
    require(default_prop_fee_ppm >= 0, "default_prop_fee_ppm must be non-negative");
    require(default_timelock_delta >= 1, "default_timelock_delta must be at least 1");
    require(default_min_htlc >= 0, "default_min_htlc must be non-negative");
}

double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf needs p in (0,1)");

    // Acklam's coefficients.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};

    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against the exact CDF.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

double lognormal_sigma_for_gini(double g) {
    if (g < 0.0 || g >= 1.0) throw std::invalid_argument("gini target must be in [0,1)");
    if (g == 0.0) return 0.0;
    return std::sqrt(2.0) * inverse_normal_cdf((g + 1.0) / 2.0);
}

double gini(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("gini of empty list");
    double sum = 0.0;
    for (double v : values) {
        if (v < 0.0) throw std::invalid_argument("gini needs non-negative values");
        sum += v;
    }
    if (sum <= 0.0) throw std::invalid_argument("gini undefined for all-zero values");

    // Sorted equivalent of the pairwise-difference form.
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double weighted = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i)
        weighted += (2.0 * static_cast<double>(i + 1) - n - 1.0) * sorted[i];
    return weighted / (n * n * (sum / n));
}

Network generate_topology(const GenerationParams& params) {
    params.validate();
    Rng rng = Rng::substream(params.seed, kTopologyStream);
    const std::uint32_t n = params.n_peers;

    Network net;
    net.peers.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) net.peers[i].id = i;

    ChannelId next_id = 0;
    for (std::uint32_t initiator = 0; initiator < n; ++initiator) {
        const std::uint64_t count =
            std::max<std::uint64_t>(1, rng.poisson(params.avg_channels_per_peer));
        for (std::uint64_t k = 0; k < count; ++k) {
            PeerId counterparty = kNoPeer;
            for (int attempt = 0; attempt < 64; ++attempt) {
                double x = std::fabs(rng.normal(0.0, params.topology_sigma));
                x = std::min(x, 4.0e18);  // keep llround defined
                const PeerId cand = static_cast<PeerId>(
                    static_cast<std::uint64_t>(std::llround(x)) % n);
                if (cand != initiator) {
                    counterparty = cand;
                    break;
                }
            }
            if (counterparty == kNoPeer) {
                // Degenerate sigma keeps hitting the initiator (e.g. the hub
                // anchor itself at sigma 0); pick uniformly among the rest.
                PeerId cand = static_cast<PeerId>(rng.uniform_below(n - 1));
                if (cand >= initiator) ++cand;
                counterparty = cand;
            }
            Channel c;
            c.id = next_id++;
            c.peer1 = initiator;
            c.peer2 = counterparty;
            net.channels.push_back(std::move(c));
        }
    }
    return net;
}

void generate_capacities(std::vector<Channel>& channels, Sat avg_capacity, double gini_target,
                         std::uint64_t seed) {
    if (avg_capacity <= 0) throw std::invalid_argument("avg_capacity must be positive");
    const double sigma = lognormal_sigma_for_gini(gini_target);
    const double mu = std::log(static_cast<double>(avg_capacity)) - sigma * sigma / 2.0;

    Rng rng = Rng::substream(seed, kCapacityStream);
    for (auto& c : channels) {
        const double cap = std::exp(rng.normal(mu, sigma));
        c.capacity = std::max<Sat>(1, std::llround(std::min(cap, 9.0e17)));
    }
}

std::pair<Sat, Sat> split_balance(Sat capacity, double fraction) {
    Sat first = static_cast<Sat>(std::llround(static_cast<double>(capacity) * fraction));
    first = std::clamp<Sat>(first, 0, capacity);
    return {first, capacity - first};
}

void generate_endpoints(std::vector<Channel>& channels, const GenerationParams& params) {
    Rng rng = Rng::substream(params.seed, kEndpointStream);
    for (auto& c : channels) {
        auto [b1, b2] = split_balance(c.capacity, rng.uniform01());
        for (auto* ep : {&c.endpoint1, &c.endpoint2}) {
            ep->base_fee_msat = params.default_base_fee_msat;
            ep->prop_fee_ppm = params.default_prop_fee_ppm;
            ep->timelock_delta = params.default_timelock_delta;
            ep->min_htlc = params.default_min_htlc;
        }
        c.endpoint1.owner = c.peer1;
        c.endpoint2.owner = c.peer2;
        c.endpoint1.balance = b1;
        c.endpoint2.balance = b2;
    }
}

std::vector<Payment> generate_payments(const GenerationParams& params) {
    params.validate();
    Rng rng = Rng::substream(params.seed, kPaymentStream);
    const std::uint32_t n = params.n_peers;

    const PeerId designated = static_cast<PeerId>(rng.uniform_below(n));

    std::vector<Payment> payments;
    payments.reserve(params.n_payments);
    double clock_ms = 0.0;
    for (std::uint32_t i = 0; i < params.n_payments; ++i) {
        clock_ms += rng.exponential(params.payment_rate) * 1000.0;

        PeerId sender = static_cast<PeerId>(rng.uniform_below(n));
        PeerId receiver;
        if (rng.bernoulli(params.same_recipient_fraction)) {
            receiver = designated;
            if (sender == designated) {
                PeerId cand = static_cast<PeerId>(rng.uniform_below(n - 1));
                if (cand >= designated) ++cand;
                sender = cand;
            }
        } else {
            PeerId cand = static_cast<PeerId>(rng.uniform_below(n - 1));
            if (cand >= sender) ++cand;
            receiver = cand;
        }

        const double x = std::fabs(rng.normal(0.0, params.amount_sigma));
        const int exponent = static_cast<int>(std::min(std::floor(x), 15.0));
        const Sat mantissa = rng.uniform_int(1, 9);
        Sat amount = mantissa;
        for (int e = 0; e < exponent; ++e) amount *= 10;

        Payment p;
        p.id = i;
        p.sender = sender;
        p.receiver = receiver;
        p.amount = amount;
        p.start_time = static_cast<TimeMs>(std::llround(clock_ms));
        payments.push_back(std::move(p));
    }
    return payments;
}

Network generate_network(const GenerationParams& params) {
    Network net = generate_topology(params);
    generate_capacities(net.channels, params.avg_channel_capacity, params.capacity_gini,
                        params.seed);
    generate_endpoints(net.channels, params);
    net.rebuild_index();
    net.validate();
    return net;
}

}  // namespace htlcsim
