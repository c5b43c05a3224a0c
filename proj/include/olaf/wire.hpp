#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "olaf/core.hpp"

// Frame layout, all multi-byte fields big-endian:
//
//   off  size  field
//     0     1  version (kWireVersion)
//     1     2  cluster
//     3     2  worker index within the cluster
//     5     8  gen_timestamp (picoseconds)
//    13     2  agg_count
//    15     4  reward, IEEE-754 binary32
//    19     2  payload length d (floats)
//    21    17  reserved, zero
//    38        -- end of the 304-bit header
//
// An ACK inserts a 5-byte queue-status extension after the header:
//    38     3  queue_utilization
//    41     2  active_clusters
// The payload of d binary32 values follows.
namespace olaf::wire {

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kHeaderBytes = 38;
inline constexpr std::size_t kAckExtensionBytes = 5;
inline constexpr std::size_t kMaxFrameBytes = 9036;
inline constexpr std::uint32_t kMaxQueueUtilization = (1u << 24) - 1;

struct Header {
    std::uint8_t version = kWireVersion;
    std::uint16_t cluster = 0;
    std::uint16_t worker = 0;
    std::uint64_t gen_timestamp = 0;
    std::uint16_t agg_count = 0;
    float reward = 0.0f;
    friend bool operator==(const Header&, const Header&) = default;
};

struct UpdateFrame {
    Header header;
    std::vector<float> gradient;
};

struct AckFrame {
    Header header;
    std::uint32_t queue_utilization = 0;  // 24 bits
    std::uint16_t active_clusters = 0;
    std::vector<float> gradient;
};

// Bitwise equality, so NaN payloads compare equal to themselves.
bool same_bits(const UpdateFrame& a, const UpdateFrame& b);
bool same_bits(const AckFrame& a, const AckFrame& b);

std::vector<std::uint8_t> encode_update(const UpdateFrame& f);
UpdateFrame decode_update(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ack(const AckFrame& f);
AckFrame decode_ack(std::span<const std::uint8_t> bytes);

// Conversions from simulator values; throw EncodeError on fields that do not fit.
UpdateFrame to_frame(const ModelUpdate& u);
ModelUpdate from_frame(const UpdateFrame& f, std::int64_t size_bits);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(const std::string& hex);

}  // namespace olaf::wire
