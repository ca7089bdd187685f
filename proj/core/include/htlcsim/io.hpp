#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "htlcsim/model.hpp"
#include "htlcsim/stats.hpp"

namespace htlcsim {

/// Parse or schema failure; the message carries file, line and column.
struct FileFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kPeersFile = "peers.csv";
inline constexpr const char* kChannelsFile = "channels.csv";
inline constexpr const char* kEndpointsFile = "endpoints.csv";
inline constexpr const char* kPaymentsFile = "payments.csv";
inline constexpr const char* kRawResultsFile = "raw-per-payment-data.csv";
inline constexpr const char* kStatisticsFile = "payments-statistics.json";

void write_peers_csv(const std::filesystem::path& file, const std::vector<Peer>& peers);
std::vector<Peer> read_peers_csv(const std::filesystem::path& file);

void write_channels_csv(const std::filesystem::path& file, const std::vector<Channel>& channels);
/// Channels with id/peers/capacity set; endpoints still default.
std::vector<Channel> read_channels_csv(const std::filesystem::path& file);

void write_endpoints_csv(const std::filesystem::path& file, const std::vector<Channel>& channels);
/// Applies endpoint rows onto the channels; each channel needs exactly one
/// row per side and balances summing to its capacity.
void read_endpoints_csv(const std::filesystem::path& file, std::vector<Channel>& channels);

void write_payments_csv(const std::filesystem::path& file, const std::vector<Payment>& payments);
std::vector<Payment> read_payments_csv(const std::filesystem::path& file);

void write_raw_results_csv(const std::filesystem::path& file,
                           const std::vector<Payment>& records);
std::vector<Payment> read_raw_results_csv(const std::filesystem::path& file);

/// peers.csv + channels.csv + endpoints.csv from one directory, fully
/// validated and indexed.
Network read_network(const std::filesystem::path& dir);
void write_network(const std::filesystem::path& dir, const Network& net);

/// Deterministic key/value listing echoed into the statistics file.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

void write_statistics_json(const std::filesystem::path& file, const SimStatistics& stats,
                           std::uint32_t n_batches, std::uint32_t warmup_batches,
                           const ConfigEcho& config);

}  // namespace htlcsim
