#pragma once

#include <span>
#include <utility>
#include <vector>

#include "htlcsim/model.hpp"

namespace htlcsim {

/// Statistical description of a synthetic network and payment script.
struct GenerationParams {
    std::uint32_t n_peers = 2;
    double avg_channels_per_peer = 1.0;  // mean channels initiated per peer
    double topology_sigma = 0.0;         // 0 concentrates every channel on a hub
    double p_uncoop_before = 0.0;
    double p_uncoop_after = 0.0;
    Sat avg_channel_capacity = 1'000'000;
    double capacity_gini = 0.0;  // [0, 1)
    double payment_rate = 1.0;   // payments per second
    std::uint32_t n_payments = 0;
    double amount_sigma = 0.0;           // widens the payment amount magnitudes
    double same_recipient_fraction = 0.0;
    std::uint64_t seed = kDefaultSeed;

    // Endpoint policy defaults applied to every generated channel.
    Msat default_base_fee_msat = 1000;
    std::int64_t default_prop_fee_ppm = 1000;
    Blocks default_timelock_delta = 144;
    Sat default_min_htlc = 1;

    void validate() const;  // throws std::invalid_argument
};

/// Peers plus channel end-pairs; capacities and endpoints still unset.
/// Each peer initiates max(1, Poisson(avg_channels_per_peer)) channels whose
/// counterparty index is round(|Normal(0, sigma)|) mod n_peers, re-drawn on
/// self-loop. Parallel channels between a pair are allowed.
Network generate_topology(const GenerationParams& params);

/// Draws i.i.d. log-normal capacities with mean `avg_capacity` and Gini
/// index `gini_target`, rounded to satoshi with a floor of 1.
void generate_capacities(std::vector<Channel>& channels, Sat avg_capacity, double gini_target,
                         std::uint64_t seed);

/// Splits each capacity between the two endpoint balances by a uniform
/// fraction and applies the default policies.
void generate_endpoints(std::vector<Channel>& channels, const GenerationParams& params);

/// Payment script sorted by start time: exponential inter-arrivals, uniform
/// senders, a single designated recipient for the same-recipient fraction,
/// and amounts m * 10^e with e from the tail of a centered Gaussian.
std::vector<Payment> generate_payments(const GenerationParams& params);

/// All three network stages composed, index rebuilt, invariants checked.
Network generate_network(const GenerationParams& params);

/// Gini index: sum_i sum_j |x_i - x_j| / (2 n^2 mean). Values must be
/// non-negative with a positive sum; throws std::invalid_argument otherwise.
double gini(std::span<const double> values);

/// Inverse standard normal CDF (Acklam's rational approximation plus one
/// Halley refinement step; ~1e-15 absolute error).
double inverse_normal_cdf(double p);

/// Log-normal shape parameter that yields a given Gini index:
/// sigma = sqrt(2) * Phi^-1((g + 1) / 2).
double lognormal_sigma_for_gini(double g);

/// Deterministic balance split used by generate_endpoints.
std::pair<Sat, Sat> split_balance(Sat capacity, double fraction);

}  // namespace htlcsim
