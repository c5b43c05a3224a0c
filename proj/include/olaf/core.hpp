#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace olaf {

// Fixed-point time. One tick is a picosecond: a 2048-bit frame at 40 Gb/s
// takes 51.2 ns, which nanosecond ticks cannot represent.
inline constexpr std::int64_t kTicksPerSecond = 1'000'000'000'000;

struct Duration {
    std::int64_t ticks = 0;

    static constexpr Duration from_ticks(std::int64_t t) { return Duration{t}; }
    static Duration from_seconds(double s);
    double seconds() const { return static_cast<double>(ticks) / static_cast<double>(kTicksPerSecond); }

    friend constexpr auto operator<=>(Duration, Duration) = default;
    friend constexpr Duration operator+(Duration a, Duration b) { return {a.ticks + b.ticks}; }
    friend constexpr Duration operator-(Duration a, Duration b) { return {a.ticks - b.ticks}; }
    friend constexpr Duration operator*(Duration a, std::int64_t k) { return {a.ticks * k}; }
    friend constexpr Duration operator*(std::int64_t k, Duration a) { return {a.ticks * k}; }
    friend constexpr Duration operator/(Duration a, std::int64_t k) { return {a.ticks / k}; }
};

struct SimTime {
    std::int64_t ticks = 0;

    static constexpr SimTime from_ticks(std::int64_t t) { return SimTime{t}; }
    static SimTime from_seconds(double s);
    static constexpr SimTime max() { return SimTime{std::numeric_limits<std::int64_t>::max()}; }
    double seconds() const { return static_cast<double>(ticks) / static_cast<double>(kTicksPerSecond); }

    friend constexpr auto operator<=>(SimTime, SimTime) = default;
    friend constexpr SimTime operator+(SimTime a, Duration d) { return {a.ticks + d.ticks}; }
    friend constexpr SimTime operator-(SimTime a, Duration d) { return {a.ticks - d.ticks}; }
    friend constexpr Duration operator-(SimTime a, SimTime b) { return {a.ticks - b.ticks}; }
};

// Time needed to push `bits` through a link of `bps`, rounded to the nearest tick.
Duration transmission_time(std::int64_t bits, double bps);

using ClusterId = std::uint32_t;

struct WorkerId {
    ClusterId cluster = 0;
    std::uint32_t index = 0;
    friend constexpr auto operator<=>(const WorkerId&, const WorkerId&) = default;
};

std::string to_string(const WorkerId& w);

// One original worker update folded into a (possibly merged) ModelUpdate.
// Used by the simulator to count distinct contributions reaching the PS.
struct Contribution {
    WorkerId worker;
    std::uint64_t seq = 0;
    friend constexpr bool operator==(const Contribution&, const Contribution&) = default;
};

struct ModelUpdate {
    WorkerId worker;
    ClusterId cluster = 0;
    SimTime gen_time;
    std::vector<double> gradient;
    double reward = 0.0;
    std::uint32_t agg_count = 1;
    std::int64_t size_bits = 2048;
    std::uint64_t seq = 0;                    // per-worker generation number
    std::uint32_t merges = 0;                 // updates absorbed into this entry at the current queue
    std::vector<Contribution> contributors;   // simulator bookkeeping
};

struct QueueFeedback {
    std::uint32_t active_clusters = 0;
    std::uint32_t q_max = 0;
    std::uint32_t q_now = 0;
    SimTime emitted_at;
};

inline std::pair<ClusterId, WorkerId> update_key(const ModelUpdate& u) { return {u.cluster, u.worker}; }

// agg_count-weighted element-wise mean.
std::vector<double> merge_gradients(const ModelUpdate& a, const ModelUpdate& b);

enum class RewardMerge { Max, WeightedMean, Newest };
enum class GenTimeMerge { Max, Newest };

struct MergePolicy {
    RewardMerge reward = RewardMerge::Max;
    GenTimeMerge gen_time = GenTimeMerge::Max;
};

// Fold `incoming` into `resident` in place. `resident` keeps its worker id.
void merge_into(ModelUpdate& resident, const ModelUpdate& incoming, const MergePolicy& policy = {});

}  // namespace olaf
