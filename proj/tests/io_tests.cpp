#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "htlcsim/io.hpp"
#include "htlcsim/netgen.hpp"
#include "htlcsim/rng.hpp"

using namespace htlcsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("htlcsim_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Network sample_network() {
    GenerationParams params;
    params.n_peers = 40;
    params.avg_channels_per_peer = 3;
    params.topology_sigma = 15;
    params.avg_channel_capacity = 500'000;
    params.capacity_gini = 0.4;
    params.seed = 11;
    return generate_network(params);
}

}  // namespace

TEST_CASE("network round-trips through the three CSV files") {
    TempDir dir;
    Network net = sample_network();
    write_network(dir.path, net);
    Network loaded = read_network(dir.path);

    REQUIRE(loaded.peers.size() == net.peers.size());
    REQUIRE(loaded.channels.size() == net.channels.size());
    for (std::size_t i = 0; i < net.channels.size(); ++i) {
        const Channel& a = net.channels[i];
        const Channel& b = loaded.channels[i];
        CHECK(a.id == b.id);
        CHECK(a.peer1 == b.peer1);
        CHECK(a.peer2 == b.peer2);
        CHECK(a.capacity == b.capacity);
        for (auto member : {&Channel::endpoint1, &Channel::endpoint2}) {
            CHECK((a.*member).owner == (b.*member).owner);
            CHECK((a.*member).balance == (b.*member).balance);
            CHECK((a.*member).base_fee_msat == (b.*member).base_fee_msat);
            CHECK((a.*member).prop_fee_ppm == (b.*member).prop_fee_ppm);
            CHECK((a.*member).timelock_delta == (b.*member).timelock_delta);
            CHECK((a.*member).min_htlc == (b.*member).min_htlc);
        }
    }
    for (std::size_t i = 0; i < net.peers.size(); ++i)
        CHECK(loaded.peers[i].open_channel_ids == net.peers[i].open_channel_ids);

    // A second write of the loaded network is byte-identical.
    TempDir dir2;
    write_network(dir2.path, loaded);
    for (const char* name : {kPeersFile, kChannelsFile, kEndpointsFile})
        CHECK(read_file(dir.path / name) == read_file(dir2.path / name));
}

TEST_CASE("payments round-trip") {
    TempDir dir;
    GenerationParams params;
    params.n_peers = 40;
    params.n_payments = 500;
    params.payment_rate = 50;
    params.amount_sigma = 1.0;
    params.seed = 3;
    const auto payments = generate_payments(params);
    write_payments_csv(dir.path / kPaymentsFile, payments);
    const auto loaded = read_payments_csv(dir.path / kPaymentsFile);
    REQUIRE(loaded.size() == payments.size());
    for (std::size_t i = 0; i < payments.size(); ++i) {
        CHECK(loaded[i].id == payments[i].id);
        CHECK(loaded[i].sender == payments[i].sender);
        CHECK(loaded[i].receiver == payments[i].receiver);
        CHECK(loaded[i].amount == payments[i].amount);
        CHECK(loaded[i].start_time == payments[i].start_time);
    }
}

TEST_CASE("raw results round-trip with routes and empty fields") {
    TempDir dir;
    std::vector<Payment> records;
    {
        Payment success;
        success.id = 0;
        success.sender = 1;
        success.receiver = 2;
        success.amount = 5000;
        success.start_time = 10;
        success.end_time = 210;
        success.result = PaymentResult::success;
        success.attempts = 2;
        success.encountered_uncooperative = true;
        Route r;
        for (ChannelId c : {4u, 9u, 1u}) {
            RouteHop hop;
            hop.channel_id = c;
            r.hops.push_back(hop);
        }
        success.route = r;
        records.push_back(success);

        Payment fail;
        fail.id = 1;
        fail.sender = 3;
        fail.receiver = 4;
        fail.amount = 77;
        fail.start_time = 20;
        fail.end_time = 20;
        fail.result = PaymentResult::fail;
        fail.fail_reason = FailReason::no_route;
        fail.attempts = 1;
        records.push_back(fail);

        Payment unknown;
        unknown.id = 2;
        unknown.sender = 5;
        unknown.receiver = 6;
        unknown.amount = 900;
        unknown.start_time = 30;
        unknown.result = PaymentResult::unknown;
        unknown.attempts = 1;
        records.push_back(unknown);
    }
    write_raw_results_csv(dir.path / kRawResultsFile, records);
    const auto loaded = read_raw_results_csv(dir.path / kRawResultsFile);
    REQUIRE(loaded.size() == 3);
    CHECK(loaded[0].result == PaymentResult::success);
    CHECK(loaded[0].end_time == 210);
    CHECK(loaded[0].encountered_uncooperative);
    REQUIRE(loaded[0].route.has_value());
    REQUIRE(loaded[0].route->hops.size() == 3);
    CHECK(loaded[0].route->hops[1].channel_id == 9);
    CHECK(loaded[1].fail_reason == FailReason::no_route);
    CHECK(!loaded[1].route.has_value());
    CHECK(loaded[2].result == PaymentResult::unknown);
    CHECK(!loaded[2].end_time.has_value());
}

TEST_CASE("empty payments file loads zero payments") {
    TempDir dir;
    write_file(dir.path / kPaymentsFile, "id,sender,receiver,amount,start_time_ms\n");
    CHECK(read_payments_csv(dir.path / kPaymentsFile).empty());
}

TEST_CASE("loader rejects malformed and inconsistent inputs") {
    TempDir dir;
    Network net = sample_network();
    write_network(dir.path, net);

    SUBCASE("balances not summing to capacity") {
        std::string endpoints = read_file(dir.path / kEndpointsFile);
        const auto first_row = endpoints.find('\n') + 1;
        const auto id_end = endpoints.find(',', first_row);
        const auto owner_end = endpoints.find(',', id_end + 1);
        const auto balance_end = endpoints.find(',', owner_end + 1);
        endpoints.replace(owner_end + 1, balance_end - owner_end - 1, "1");
        write_file(dir.path / kEndpointsFile, endpoints);
        CHECK_THROWS_AS(read_network(dir.path), FileFormatError);
    }
    SUBCASE("dangling channel peer reference") {
        write_file(dir.path / kChannelsFile, "id,peer1,peer2,capacity\n0,0,999,100\n");
        CHECK_THROWS_AS(read_network(dir.path), FileFormatError);
    }
    SUBCASE("duplicate channel id") {
        write_file(dir.path / kChannelsFile,
                   "id,peer1,peer2,capacity\n0,0,1,100\n0,1,2,100\n");
        CHECK_THROWS_AS(read_network(dir.path), FileFormatError);
    }
    SUBCASE("missing endpoint row") {
        write_file(dir.path / kChannelsFile, "id,peer1,peer2,capacity\n0,0,1,100\n");
        write_file(dir.path / kEndpointsFile,
                   "channel_id,owner_peer,balance,base_fee_msat,prop_fee_ppm,timelock_delta,"
                   "min_htlc\n0,0,100,0,0,144,0\n");
        CHECK_THROWS_AS(read_network(dir.path), FileFormatError);
    }
    SUBCASE("sparse peer ids") {
        write_file(dir.path / kPeersFile, "id\n0\n2\n");
        CHECK_THROWS_AS(read_network(dir.path), FileFormatError);
    }
    SUBCASE("wrong header") {
        write_file(dir.path / kPeersFile, "peer\n0\n");
        CHECK_THROWS_AS(read_network(dir.path), FileFormatError);
    }
}

TEST_CASE("parse errors carry file, line and column") {
    TempDir dir;
    write_file(dir.path / kPaymentsFile,
               "id,sender,receiver,amount,start_time_ms\n0,1,2,abc,5\n");
    try {
        read_payments_csv(dir.path / kPaymentsFile);
        FAIL("expected a FileFormatError");
    } catch (const FileFormatError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(kPaymentsFile) != std::string::npos);
        CHECK(msg.find(":2:4:") != std::string::npos);
        CHECK(msg.find("abc") != std::string::npos);
    }
}

TEST_CASE("negative amounts are rejected") {
    TempDir dir;
    write_file(dir.path / kPaymentsFile,
               "id,sender,receiver,amount,start_time_ms\n0,1,2,-5,5\n");
    CHECK_THROWS_AS(read_payments_csv(dir.path / kPaymentsFile), FileFormatError);
}

TEST_CASE("statistics JSON is deterministic and carries the config echo") {
    TempDir dir;
    SimStatistics stats;
    stats.p_success = {0.9, 0.01, 0.65, 1.0, 3};
    stats.payment_time_ms = {std::nan(""), std::nan(""), std::nan(""), std::nan(""), 0};
    const ConfigEcho echo{{"seed", "42"}, {"peers", "100"}};
    write_statistics_json(dir.path / kStatisticsFile, stats, 3, 1, echo);
    const std::string first = read_file(dir.path / kStatisticsFile);
    write_statistics_json(dir.path / kStatisticsFile, stats, 3, 1, echo);
    CHECK(first == read_file(dir.path / kStatisticsFile));

    CHECK(first.find("\"p_success\"") != std::string::npos);
    CHECK(first.find("\"mean\": 0.9") != std::string::npos);
    CHECK(first.find("\"n_batches\": 3") != std::string::npos);
    CHECK(first.find("\"seed\": \"42\"") != std::string::npos);
    // Undefined measures serialize as null, not NaN.
    CHECK(first.find("null") != std::string::npos);
    CHECK(first.find("nan") == std::string::npos);
}
