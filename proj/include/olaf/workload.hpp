#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "olaf/core.hpp"

namespace olaf {

// Reward = base + slope * t + noise * N(0,1): a slowly rising noisy ramp.
struct RewardModel {
    double base = 0.0;
    double slope_per_s = 0.0;
    double noise = 0.0;
};

// Synthetic schedule: every cluster emits one burst per period, one update
// per worker spaced worker_spacing apart. Burst phases are spread evenly
// over phase_spread * period in cluster order, then jittered per round by
// a Gaussian of phase_jitter * period.
struct WorkloadSpec {
    std::int64_t update_bits = 2048;
    std::uint32_t gradient_dim = 8;
    std::uint64_t updates_per_worker = 0;  // 0: generate until the horizon
    Duration period = Duration::from_seconds(0.1);
    std::vector<Duration> cluster_periods;  // optional per-cluster override
    std::optional<double> offered_bps;      // derives period from offered load
    double phase_spread = 0.0;
    double phase_jitter = 0.0;
    double worker_jitter = 0.0;  // uniform [0, x*period) per update
    Duration worker_jitter_abs;  // uniform [0, d) per update, same for every period
    Duration worker_spacing;
    RewardModel reward;
    std::string trace_path;
};

struct TraceRecord {
    WorkerId worker;
    SimTime gen_time;
    double reward = 0.0;
    std::uint64_t gradient_seed = 0;
    std::vector<double> gradient;  // empty: expand from gradient_seed
};

// One sorted list of generations per worker, indexed cluster-major.
using Schedule = std::vector<std::vector<TraceRecord>>;

Duration cluster_period(const WorkloadSpec& w, std::uint32_t clusters, std::uint32_t workers_per_cluster,
                        ClusterId c);

Schedule synthesize(const WorkloadSpec& w, std::uint32_t clusters, std::uint32_t workers_per_cluster,
                    std::optional<SimTime> horizon, std::uint64_t seed);

std::vector<double> expand_gradient(std::uint64_t seed, std::uint32_t dim);

// CSV: cluster,worker,gen_time_s,reward,gradient where gradient is
// "seed:<n>" or semicolon-separated values.
Schedule read_trace(const std::string& path, std::uint32_t clusters, std::uint32_t workers_per_cluster);
void write_trace(const std::string& path, const Schedule& s);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace olaf
