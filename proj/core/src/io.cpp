#include "htlcsim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace htlcsim {

namespace {

[[noreturn]] void fail_at(const std::filesystem::path& file, std::size_t line, std::size_t column,
                          const std::string& message) {
    throw FileFormatError(file.string() + ":" + std::to_string(line) + ":" +
                          std::to_string(column) + ": " + message);
}

struct CsvReader {
    std::filesystem::path file;
    std::ifstream in;
    std::size_t line_no = 0;
    std::vector<std::string> fields;

    explicit CsvReader(const std::filesystem::path& f, const std::vector<std::string>& header)
        : file(f), in(f) {
        if (!in) throw FileFormatError(f.string() + ": cannot open for reading");
        if (!next_row())
            fail_at(file, 1, 1, "missing header");
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i >= fields.size() || fields[i] != header[i])
                fail_at(file, 1, i + 1,
                        "expected header column '" + header[i] + "'" +
                            (i < fields.size() ? ", found '" + fields[i] + "'" : ""));
        }
        if (fields.size() != header.size()) fail_at(file, 1, header.size() + 1, "extra column");
    }

    bool next_row() {
        std::string row;
        if (!std::getline(in, row)) return false;
        ++line_no;
        if (!row.empty() && row.back() == '\r') row.pop_back();
        fields.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = row.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(row.substr(start));
                break;
            }
            fields.push_back(row.substr(start, comma - start));
            start = comma + 1;
        }
        return true;
    }

    void expect_fields(std::size_t n) {
        if (fields.size() != n)
            fail_at(file, line_no, fields.size(),
                    "expected " + std::to_string(n) + " fields, found " +
                        std::to_string(fields.size()));
    }

    std::int64_t int_field(std::size_t col, std::int64_t min_value,
                           std::int64_t max_value = std::numeric_limits<std::int64_t>::max()) {
        const std::string& s = fields[col];
        std::int64_t value = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || s[0] == '+')
            fail_at(file, line_no, col + 1, "invalid integer '" + s + "'");
        if (value < min_value || value > max_value)
            fail_at(file, line_no, col + 1, "integer " + s + " out of range");
        return value;
    }

    [[noreturn]] void fail(std::size_t col, const std::string& message) {
        fail_at(file, line_no, col + 1, message);
    }
};

std::ofstream open_out(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw FileFormatError(file.string() + ": cannot open for writing");
    return out;
}

}  // namespace

void write_peers_csv(const std::filesystem::path& file, const std::vector<Peer>& peers) {
    auto out = open_out(file);
    out << "id\n";
    for (const Peer& p : peers) out << p.id << "\n";
}

std::vector<Peer> read_peers_csv(const std::filesystem::path& file) {
    CsvReader r(file, {"id"});
    std::vector<Peer> peers;
    while (r.next_row()) {
        r.expect_fields(1);
        Peer p;
        p.id = static_cast<PeerId>(r.int_field(0, 0, kNoPeer - 1));
        if (p.id != peers.size()) r.fail(0, "peer ids must be dense and ascending from 0");
        peers.push_back(std::move(p));
    }
    return peers;
}

void write_channels_csv(const std::filesystem::path& file, const std::vector<Channel>& channels) {
    auto out = open_out(file);
    out << "id,peer1,peer2,capacity\n";
    for (const Channel& c : channels)
        out << c.id << ',' << c.peer1 << ',' << c.peer2 << ',' << c.capacity << "\n";
}

std::vector<Channel> read_channels_csv(const std::filesystem::path& file) {
    CsvReader r(file, {"id", "peer1", "peer2", "capacity"});
    std::vector<Channel> channels;
    std::unordered_set<ChannelId> ids;
    while (r.next_row()) {
        r.expect_fields(4);
        Channel c;
        c.id = static_cast<ChannelId>(r.int_field(0, 0, kNoChannel - 1));
        c.peer1 = static_cast<PeerId>(r.int_field(1, 0, kNoPeer - 1));
        c.peer2 = static_cast<PeerId>(r.int_field(2, 0, kNoPeer - 1));
        c.capacity = r.int_field(3, 0);
        if (!ids.insert(c.id).second) r.fail(0, "duplicate channel id");
        if (c.peer1 == c.peer2) r.fail(2, "channel endpoints must differ");
        channels.push_back(std::move(c));
    }
    return channels;
}

void write_endpoints_csv(const std::filesystem::path& file, const std::vector<Channel>& channels) {
    auto out = open_out(file);
    out << "channel_id,owner_peer,balance,base_fee_msat,prop_fee_ppm,timelock_delta,min_htlc\n";
    for (const Channel& c : channels)
        for (const ChannelEndpoint* ep : {&c.endpoint1, &c.endpoint2})
            out << c.id << ',' << ep->owner << ',' << ep->balance << ',' << ep->base_fee_msat
                << ',' << ep->prop_fee_ppm << ',' << ep->timelock_delta << ',' << ep->min_htlc
                << "\n";
}

void read_endpoints_csv(const std::filesystem::path& file, std::vector<Channel>& channels) {
    std::unordered_map<ChannelId, std::size_t> pos;
    for (std::size_t i = 0; i < channels.size(); ++i) pos.emplace(channels[i].id, i);

    CsvReader r(file, {"channel_id", "owner_peer", "balance", "base_fee_msat", "prop_fee_ppm",
                       "timelock_delta", "min_htlc"});
    std::unordered_set<std::uint64_t> seen;  // (channel, side) pairs
    std::size_t rows = 0;
    while (r.next_row()) {
        r.expect_fields(7);
        const auto id = static_cast<ChannelId>(r.int_field(0, 0, kNoChannel - 1));
        const auto it = pos.find(id);
        if (it == pos.end()) r.fail(0, "endpoint references unknown channel");
        Channel& c = channels[it->second];

        const auto owner = static_cast<PeerId>(r.int_field(1, 0, kNoPeer - 1));
        if (owner != c.peer1 && owner != c.peer2)
            r.fail(1, "owner is not a peer of channel " + std::to_string(id));
        if (!seen.insert((static_cast<std::uint64_t>(id) << 1) | (owner == c.peer2)).second)
            r.fail(1, "duplicate endpoint row");

        ChannelEndpoint& ep = owner == c.peer1 ? c.endpoint1 : c.endpoint2;
        ep.owner = owner;
        ep.balance = r.int_field(2, 0);
        ep.base_fee_msat = r.int_field(3, 0);
        ep.prop_fee_ppm = r.int_field(4, 0);
        ep.timelock_delta = static_cast<Blocks>(r.int_field(5, 1, std::numeric_limits<Blocks>::max()));
        ep.min_htlc = r.int_field(6, 0);
        ++rows;
    }
    if (rows != channels.size() * 2)
        throw FileFormatError(file.string() + ": expected " +
                              std::to_string(channels.size() * 2) + " endpoint rows (two per channel), found " +
                              std::to_string(rows));
    for (const Channel& c : channels)
        if (c.endpoint1.balance + c.endpoint2.balance != c.capacity)
            throw FileFormatError(file.string() + ": channel " + std::to_string(c.id) +
                                  " endpoint balances sum to " +
                                  std::to_string(c.endpoint1.balance + c.endpoint2.balance) +
                                  ", capacity is " + std::to_string(c.capacity));
}

void write_payments_csv(const std::filesystem::path& file, const std::vector<Payment>& payments) {
    auto out = open_out(file);
    out << "id,sender,receiver,amount,start_time_ms\n";
    for (const Payment& p : payments)
        out << p.id << ',' << p.sender << ',' << p.receiver << ',' << p.amount << ','
            << p.start_time << "\n";
}

std::vector<Payment> read_payments_csv(const std::filesystem::path& file) {
    CsvReader r(file, {"id", "sender", "receiver", "amount", "start_time_ms"});
    std::vector<Payment> payments;
    std::unordered_set<PaymentId> ids;
    while (r.next_row()) {
        r.expect_fields(5);
        Payment p;
        p.id = static_cast<PaymentId>(r.int_field(0, 0));
        p.sender = static_cast<PeerId>(r.int_field(1, 0, kNoPeer - 1));
        p.receiver = static_cast<PeerId>(r.int_field(2, 0, kNoPeer - 1));
        p.amount = r.int_field(3, 1);
        p.start_time = r.int_field(4, 0);
        if (!ids.insert(p.id).second) r.fail(0, "duplicate payment id");
        if (p.sender == p.receiver) r.fail(2, "sender and receiver must differ");
        payments.push_back(std::move(p));
    }
    return payments;
}

void write_raw_results_csv(const std::filesystem::path& file,
                           const std::vector<Payment>& records) {
    auto out = open_out(file);
    out << "id,sender,receiver,amount,start_time_ms,end_time_ms,result,fail_reason,attempts,"
           "uncooperative_encountered,route\n";
    for (const Payment& p : records) {
        out << p.id << ',' << p.sender << ',' << p.receiver << ',' << p.amount << ','
            << p.start_time << ',';
        if (p.end_time) out << *p.end_time;
        out << ',' << to_string(p.result) << ',' << to_string(p.fail_reason) << ',' << p.attempts
            << ',' << (p.encountered_uncooperative ? 1 : 0) << ',';
        if (p.route) {
            for (std::size_t i = 0; i < p.route->hops.size(); ++i) {
                if (i) out << '-';
                out << p.route->hops[i].channel_id;
            }
        }
        out << "\n";
    }
}

std::vector<Payment> read_raw_results_csv(const std::filesystem::path& file) {
    CsvReader r(file, {"id", "sender", "receiver", "amount", "start_time_ms", "end_time_ms",
                       "result", "fail_reason", "attempts", "uncooperative_encountered", "route"});
    std::vector<Payment> records;
    std::unordered_set<PaymentId> ids;
    while (r.next_row()) {
        r.expect_fields(11);
        Payment p;
        p.id = static_cast<PaymentId>(r.int_field(0, 0));
        if (!ids.insert(p.id).second) r.fail(0, "duplicate payment id");
        p.sender = static_cast<PeerId>(r.int_field(1, 0, kNoPeer - 1));
        p.receiver = static_cast<PeerId>(r.int_field(2, 0, kNoPeer - 1));
        p.amount = r.int_field(3, 1);
        p.start_time = r.int_field(4, 0);
        if (!r.fields[5].empty()) p.end_time = r.int_field(5, 0);

        const auto result = parse_payment_result(r.fields[6]);
        if (!result || *result == PaymentResult::pending)
            r.fail(6, "invalid result '" + r.fields[6] + "'");
        p.result = *result;
        const auto reason = parse_fail_reason(r.fields[7]);
        if (!reason) r.fail(7, "invalid fail_reason '" + r.fields[7] + "'");
        p.fail_reason = *reason;
        p.attempts = static_cast<std::uint32_t>(r.int_field(8, 0, 0xffffffffll));
        p.encountered_uncooperative = r.int_field(9, 0, 1) == 1;

        if (!r.fields[10].empty()) {
            Route route;
            std::stringstream ss(r.fields[10]);
            std::string part;
            while (std::getline(ss, part, '-')) {
                ChannelId cid = 0;
                const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), cid);
                if (ec != std::errc() || ptr != part.data() + part.size())
                    r.fail(10, "invalid route entry '" + part + "'");
                RouteHop hop;
                hop.channel_id = cid;
                route.hops.push_back(hop);
            }
            p.route = std::move(route);
        }
        if (p.result == PaymentResult::success && (!p.route || !p.end_time))
            r.fail(6, "successful record needs a route and an end time");
        records.push_back(std::move(p));
    }
    return records;
}

Network read_network(const std::filesystem::path& dir) {
    Network net;
    net.peers = read_peers_csv(dir / kPeersFile);
    net.channels = read_channels_csv(dir / kChannelsFile);
    for (const Channel& c : net.channels)
        if (c.peer1 >= net.peers.size() || c.peer2 >= net.peers.size())
            throw FileFormatError((dir / kChannelsFile).string() + ": channel " +
                                  std::to_string(c.id) + " references unknown peer");
    read_endpoints_csv(dir / kEndpointsFile, net.channels);
    net.rebuild_index();
    net.validate();
    return net;
}

void write_network(const std::filesystem::path& dir, const Network& net) {
    std::filesystem::create_directories(dir);
    write_peers_csv(dir / kPeersFile, net.peers);
    write_channels_csv(dir / kChannelsFile, net.channels);
    write_endpoints_csv(dir / kEndpointsFile, net.channels);
}

namespace {

nlohmann::ordered_json measure_json(const MeasureStats& m) {
    nlohmann::ordered_json j;
    const auto number = [](double v) {
        return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
    };
    j["mean"] = number(m.mean);
    j["variance"] = number(m.variance);
    j["ci95_low"] = number(m.ci95_low);
    j["ci95_high"] = number(m.ci95_high);
    j["n_batches"] = m.n_batches;
    return j;
}

}  // namespace

void write_statistics_json(const std::filesystem::path& file, const SimStatistics& stats,
                           std::uint32_t n_batches, std::uint32_t warmup_batches,
                           const ConfigEcho& config) {
    nlohmann::ordered_json j;
    j["p_success"] = measure_json(stats.p_success);
    j["p_fail_no_route"] = measure_json(stats.p_fail_no_route);
    j["p_fail_unbalanced"] = measure_json(stats.p_fail_unbalanced);
    j["p_fail_uncooperative"] = measure_json(stats.p_fail_uncooperative);
    j["p_fail_timeout"] = measure_json(stats.p_fail_timeout);
    j["p_unknown"] = measure_json(stats.p_unknown);
    j["payment_time_ms"] = measure_json(stats.payment_time_ms);
    j["attempts"] = measure_json(stats.attempts);
    j["route_length"] = measure_json(stats.route_length);
    j["n_batches"] = n_batches;
    j["warmup_batches"] = warmup_batches;
    nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
    for (const auto& [key, value] : config) cfg[key] = value;
    j["config"] = std::move(cfg);

    auto out = open_out(file);
    out << j.dump(2) << "\n";
}

}  // namespace htlcsim
