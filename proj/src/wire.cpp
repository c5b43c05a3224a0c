#include "olaf/wire.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <string>

#include "olaf/errors.hpp"

namespace olaf::wire {

namespace {

class Writer {
public:
    explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void be(std::uint64_t v, int bytes) {
        for (int i = bytes - 1; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f32(float f) { be(std::bit_cast<std::uint32_t>(f), 4); }
    void zeros(std::size_t n) { buf_.insert(buf_.end(), n, 0); }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
    std::uint64_t be(int bytes) {
        need(bytes);
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v = (v << 8) | b_[pos_++];
        return v;
    }
    float f32() { return std::bit_cast<float>(static_cast<std::uint32_t>(be(4))); }
    void skip(std::size_t n) {
        need(n);
        pos_ += n;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return b_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n) throw DecodeError("truncated frame", pos_);
    }
    std::span<const std::uint8_t> b_;
    std::size_t pos_ = 0;
};

void write_header(Writer& w, const Header& h, std::size_t dim) {
    if (dim > 0xFFFF) throw EncodeError("payload dimension exceeds 16 bits");
    w.u8(h.version);
    w.be(h.cluster, 2);
    w.be(h.worker, 2);
    w.be(h.gen_timestamp, 8);
    w.be(h.agg_count, 2);
    w.f32(h.reward);
    w.be(dim, 2);
    w.zeros(kHeaderBytes - 21);
}

Header read_header(Reader& r, std::size_t& dim) {
    Header h;
    h.version = static_cast<std::uint8_t>(r.be(1));
    if (h.version != kWireVersion) throw DecodeError("unsupported version " + std::to_string(h.version), 0);
    h.cluster = static_cast<std::uint16_t>(r.be(2));
    h.worker = static_cast<std::uint16_t>(r.be(2));
    h.gen_timestamp = r.be(8);
    h.agg_count = static_cast<std::uint16_t>(r.be(2));
    h.reward = r.f32();
    dim = r.be(2);
    r.skip(kHeaderBytes - 21);
    return h;
}

std::vector<float> read_payload(Reader& r, std::size_t dim) {
    if (r.remaining() < dim * 4) throw DecodeError("truncated payload", r.pos());
    if (r.remaining() > dim * 4) throw DecodeError("trailing bytes after payload", r.pos() + dim * 4);
    std::vector<float> g(dim);
    for (auto& x : g) x = r.f32();
    return g;
}

void check_size(std::size_t total) {
    if (total > kMaxFrameBytes)
        throw EncodeError("frame of " + std::to_string(total) + " bytes exceeds " + std::to_string(kMaxFrameBytes));
}

bool same_floats(const std::vector<float>& a, const std::vector<float>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

bool same_header(const Header& a, const Header& b) {
    return a.version == b.version && a.cluster == b.cluster && a.worker == b.worker &&
           a.gen_timestamp == b.gen_timestamp && a.agg_count == b.agg_count &&
           std::bit_cast<std::uint32_t>(a.reward) == std::bit_cast<std::uint32_t>(b.reward);
}

}  // namespace

bool same_bits(const UpdateFrame& a, const UpdateFrame& b) {
    return same_header(a.header, b.header) && same_floats(a.gradient, b.gradient);
}

bool same_bits(const AckFrame& a, const AckFrame& b) {
    return same_header(a.header, b.header) && a.queue_utilization == b.queue_utilization &&
           a.active_clusters == b.active_clusters && same_floats(a.gradient, b.gradient);
}

std::vector<std::uint8_t> encode_update(const UpdateFrame& f) {
    const std::size_t total = kHeaderBytes + 4 * f.gradient.size();
    check_size(total);
    Writer w(total);
    write_header(w, f.header, f.gradient.size());
    for (float x : f.gradient) w.f32(x);
    return w.take();
}

UpdateFrame decode_update(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > kMaxFrameBytes) throw DecodeError("frame exceeds jumbo size", kMaxFrameBytes);
    Reader r(bytes);
    UpdateFrame f;
    std::size_t dim = 0;
    f.header = read_header(r, dim);
    f.gradient = read_payload(r, dim);
    return f;
}

std::vector<std::uint8_t> encode_ack(const AckFrame& f) {
    if (f.queue_utilization > kMaxQueueUtilization) throw EncodeError("queue_utilization exceeds 24 bits");
    const std::size_t total = kHeaderBytes + kAckExtensionBytes + 4 * f.gradient.size();
    check_size(total);
    Writer w(total);
    write_header(w, f.header, f.gradient.size());
    w.be(f.queue_utilization, 3);
    w.be(f.active_clusters, 2);
    for (float x : f.gradient) w.f32(x);
    return w.take();
}

AckFrame decode_ack(std::span<const std::uint8_t> bytes) {
    if (bytes.size() > kMaxFrameBytes) throw DecodeError("frame exceeds jumbo size", kMaxFrameBytes);
    Reader r(bytes);
    AckFrame f;
    std::size_t dim = 0;
    f.header = read_header(r, dim);
    f.queue_utilization = static_cast<std::uint32_t>(r.be(3));
    f.active_clusters = static_cast<std::uint16_t>(r.be(2));
    f.gradient = read_payload(r, dim);
    return f;
}

UpdateFrame to_frame(const ModelUpdate& u) {
    if (u.cluster > 0xFFFF) throw EncodeError("cluster id exceeds 16 bits");
    if (u.worker.index > 0xFFFF) throw EncodeError("worker index exceeds 16 bits");
    if (u.agg_count > 0xFFFF) throw EncodeError("agg_count exceeds 16 bits");
    if (u.gen_time.ticks < 0) throw EncodeError("negative gen_time");
    UpdateFrame f;
    f.header.cluster = static_cast<std::uint16_t>(u.cluster);
    f.header.worker = static_cast<std::uint16_t>(u.worker.index);
    f.header.gen_timestamp = static_cast<std::uint64_t>(u.gen_time.ticks);
    f.header.agg_count = static_cast<std::uint16_t>(u.agg_count);
    f.header.reward = static_cast<float>(u.reward);
    f.gradient.assign(u.gradient.begin(), u.gradient.end());
    return f;
}

ModelUpdate from_frame(const UpdateFrame& f, std::int64_t size_bits) {
    ModelUpdate u;
    u.cluster = f.header.cluster;
    u.worker = {f.header.cluster, f.header.worker};
    u.gen_time = SimTime{static_cast<std::int64_t>(f.header.gen_timestamp)};
    u.agg_count = f.header.agg_count;
    u.reward = f.header.reward;
    u.gradient.assign(f.gradient.begin(), f.gradient.end());
    u.size_bits = size_bits;
    return u;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(bytes.size() * 2);
    for (auto b : bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 15]);
    }
    return s;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
    std::vector<std::uint8_t> out;
    int hi = -1;
    for (char c : hex) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        int v;
        if (c >= '0' && c <= '9') v = c - '0';
        else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
        else throw DecodeError(std::string("bad hex digit '") + c + "'", out.size());
        if (hi < 0) hi = v;
        else {
            out.push_back(static_cast<std::uint8_t>(hi << 4 | v));
            hi = -1;
        }
    }
    if (hi >= 0) throw DecodeError("odd number of hex digits", out.size());
    return out;
}

}  // namespace olaf::wire
