#include <doctest.h>

#include <bit>
#include <fstream>
#include <random>
#include <sstream>

#include "olaf/errors.hpp"
#include "olaf/wire.hpp"

using namespace olaf;
using namespace olaf::wire;

namespace {

std::string golden(const std::string& name) {
    std::ifstream in(std::string(OLAF_GOLDEN_DIR) + "/" + name);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    std::string s = ss.str();
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    return s;
}

Header random_header(std::mt19937_64& rng) {
    Header h;
    h.cluster = static_cast<std::uint16_t>(rng());
    h.worker = static_cast<std::uint16_t>(rng());
    h.gen_timestamp = rng();
    h.agg_count = static_cast<std::uint16_t>(rng());
    // Any bit pattern, NaNs included.
    h.reward = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    return h;
}

std::vector<float> random_payload(std::mt19937_64& rng) {
    std::vector<float> g(rng() % 64);
    for (auto& x : g) x = std::bit_cast<float>(static_cast<std::uint32_t>(rng()));
    return g;
}

}  // namespace

TEST_CASE("update frame matches the golden bytes") {
    UpdateFrame f;
    f.header.cluster = 3;
    f.header.worker = 7;
    f.header.gen_timestamp = 51'200;
    f.header.agg_count = 2;
    f.header.reward = 1.5f;
    f.gradient = {1.0f, -2.0f};
    const auto bytes = encode_update(f);
    CHECK(bytes.size() == kHeaderBytes + 8);
    CHECK(to_hex(bytes) == golden("update_basic.hex"));
    CHECK(same_bits(decode_update(from_hex(golden("update_basic.hex"))), f));
}

TEST_CASE("ack frame matches the golden bytes") {
    AckFrame f;
    f.header.cluster = 0x0102;
    f.header.worker = 0x0304;
    f.header.gen_timestamp = 0x1122334455667788ull;
    f.header.agg_count = 0xFFFF;
    f.header.reward = -0.25f;
    f.queue_utilization = 0xABCDEF;
    f.active_clusters = 300;
    f.gradient = {0.5f};
    const auto bytes = encode_ack(f);
    CHECK(bytes.size() == kHeaderBytes + kAckExtensionBytes + 4);
    CHECK(to_hex(bytes) == golden("ack_basic.hex"));
    CHECK(same_bits(decode_ack(bytes), f));
}

TEST_CASE("header is 304 bits") { CHECK(kHeaderBytes * 8 == 304); }

TEST_CASE("random round trips") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 10'000; ++i) {
        if (i % 2 == 0) {
            UpdateFrame f{random_header(rng), random_payload(rng)};
            const auto b = encode_update(f);
            CHECK(same_bits(decode_update(b), f));
            CHECK(encode_update(decode_update(b)) == b);
        } else {
            AckFrame f;
            f.header = random_header(rng);
            f.queue_utilization = static_cast<std::uint32_t>(rng()) & kMaxQueueUtilization;
            f.active_clusters = static_cast<std::uint16_t>(rng());
            f.gradient = random_payload(rng);
            const auto b = encode_ack(f);
            CHECK(same_bits(decode_ack(b), f));
            CHECK(encode_ack(decode_ack(b)) == b);
        }
    }
}

TEST_CASE("decode errors report offsets") {
    const auto good = from_hex(golden("update_basic.hex"));
    auto offset_of = [](auto fn) -> std::size_t {
        try {
            fn();
        } catch (const DecodeError& e) {
            return e.offset();
        }
        FAIL("no DecodeError");
        return 0;
    };
    std::vector<std::uint8_t> cut(good.begin(), good.begin() + 10);
    CHECK(offset_of([&] { decode_update(cut); }) == 5);
    std::vector<std::uint8_t> short_payload(good.begin(), good.end() - 1);
    CHECK(offset_of([&] { decode_update(short_payload); }) == kHeaderBytes);
    auto extra = good;
    extra.push_back(0);
    CHECK(offset_of([&] { decode_update(extra); }) == good.size());
    auto bad_version = good;
    bad_version[0] = 9;
    CHECK(offset_of([&] { decode_update(bad_version); }) == 0);
    CHECK_THROWS_AS(decode_update(std::vector<std::uint8_t>(kMaxFrameBytes + 1)), DecodeError);
    CHECK_THROWS_AS(decode_ack(good), DecodeError);
    CHECK_THROWS_AS(from_hex("0g"), DecodeError);
    CHECK_THROWS_AS(from_hex("abc"), DecodeError);
}

TEST_CASE("encode rejects out-of-range fields") {
    AckFrame a;
    a.queue_utilization = kMaxQueueUtilization + 1;
    CHECK_THROWS_AS(encode_ack(a), EncodeError);
    UpdateFrame big;
    big.gradient.resize((kMaxFrameBytes - kHeaderBytes) / 4 + 1);
    CHECK_THROWS_AS(encode_update(big), EncodeError);
    big.gradient.resize((kMaxFrameBytes - kHeaderBytes) / 4);
    CHECK(encode_update(big).size() <= kMaxFrameBytes);

    ModelUpdate u;
    u.cluster = 70'000;
    CHECK_THROWS_AS(to_frame(u), EncodeError);
    u.cluster = 1;
    u.agg_count = 70'000;
    CHECK_THROWS_AS(to_frame(u), EncodeError);
}

TEST_CASE("model update conversion") {
    ModelUpdate u;
    u.cluster = 4;
    u.worker = {4, 2};
    u.gen_time = SimTime::from_ticks(123'456'789);
    u.agg_count = 3;
    u.reward = 0.75;
    u.gradient = {0.5, -1.25};
    const auto back = from_frame(decode_update(encode_update(to_frame(u))), 2048);
    CHECK(back.cluster == 4);
    CHECK(back.worker == WorkerId{4, 2});
    CHECK(back.gen_time == u.gen_time);
    CHECK(back.agg_count == 3);
    CHECK(back.reward == 0.75);
    CHECK(back.gradient == u.gradient);
    CHECK(back.size_bits == 2048);
}
