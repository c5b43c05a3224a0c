#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "olaf/aom.hpp"
#include "olaf/core.hpp"
#include "olaf/endpoint.hpp"
#include "olaf/queue.hpp"
#include "olaf/workload.hpp"

namespace olaf::sim {

struct SwitchSpec {
    std::string name;
    Discipline discipline = Discipline::Olaf;
    std::uint32_t q_max = 8;
    double capacity_bps = 40e9;
    Duration delay;            // propagation on the link to `next`
    std::string next = "ps";   // another switch name, or "ps"
    bool feedback = true;      // stamps QueueFeedback onto passing ACKs
};

struct Topology {
    std::uint32_t clusters = 1;
    std::uint32_t workers_per_cluster = 1;
    std::vector<SwitchSpec> switches;
    std::vector<std::string> ingress;  // first switch per cluster; empty: all at switches[0]
    Duration access_delay;
    double access_capacity_bps = 0.0;  // 0: no serialization at the worker NIC
};

struct TxSpec {
    bool enabled = false;
    TxControlParams params;
    Duration activity_window = Duration::from_seconds(1.0);
};

struct RetransmitSpec {
    bool enabled = false;
    double rtt_multiplier = 3.0;
    Duration initial_rtt = Duration::from_seconds(1e-6);
};

struct RunSpec {
    std::optional<SimTime> horizon;  // AoM window and generation cutoff
    Duration drain;                  // extra time to empty the network after the horizon
    std::uint64_t seed = 1;
    std::uint32_t repetitions = 1;
    std::uint64_t stop_after_contributions = 0;  // speedup: stop once every worker has this many delivered
    bool keep_event_log = false;
};

struct Group {
    std::string name;
    std::vector<ClusterId> clusters;
};

struct Scenario {
    Topology topology;
    WorkloadSpec workload;
    TxSpec tx;
    PsParams ps;
    double theta = 0.1;
    MergePolicy merge;
    RetransmitSpec retransmit;
    RunSpec run;
    std::vector<Group> groups;
};

struct ClusterCounters {
    std::uint64_t generated = 0;
    std::uint64_t sent = 0;
    std::uint64_t retransmissions = 0;
    std::uint64_t tx_skipped = 0;
    std::uint64_t locally_replaced = 0;
    std::uint64_t received_at_ps = 0;
    std::uint64_t aggregations = 0;
    std::uint64_t replaced = 0;
    std::uint64_t dropped_full = 0;
    std::uint64_t dropped_low_reward = 0;
    std::uint64_t in_flight_at_end = 0;

    ClusterCounters& operator+=(const ClusterCounters& o);
    bool conserved() const {
        return sent == received_at_ps + aggregations + replaced + dropped_full + dropped_low_reward + in_flight_at_end;
    }
};

struct RunMetrics {
    std::vector<ClusterCounters> clusters;
    std::vector<aom::Series> aom;
    std::vector<std::string> switch_names;
    std::vector<std::vector<std::uint32_t>> merges_per_departure;  // per switch
    std::vector<std::uint64_t> distinct_contributions;             // per worker, cluster-major
    std::optional<SimTime> target_reached_at;
    SimTime end_time;
    std::uint64_t events = 0;
    std::uint64_t event_digest = 0;  // FNV-1a over the event records
    double wall_seconds = 0.0;

    ClusterCounters totals() const;
    double loss_fraction() const;  // (dropped_full + dropped_low_reward) / sent
    aom::FairnessReport fairness() const;
    double group_avg_aom(const std::vector<ClusterId>& clusters) const;
};

struct EventLog {
    std::vector<std::string> lines;
};

struct RunResult {
    RunMetrics metrics;
    EventLog log;
};

// Applies a discipline to every switch and toggles transmission control.
Scenario with_variant(Scenario s, Discipline d, bool tx_enabled);

RunResult run(const Scenario& s, std::uint64_t seed);

struct SpeedupResult {
    std::optional<SimTime> t_fifo;
    std::optional<SimTime> t_olaf;
    bool censored = false;
    double ratio = 0.0;  // T_FIFO / T_Olaf; valid when not censored
};

SpeedupResult compare_speedup(const Scenario& s, std::uint64_t n_updates, std::uint64_t seed);

// Runs each (scenario, seed) job, at most `threads` at once; results in job order.
std::vector<RunResult> run_parallel(const std::vector<std::pair<Scenario, std::uint64_t>>& jobs, unsigned threads);

unsigned thread_budget();  // OLAF_THREADS, else hardware concurrency

}  // namespace olaf::sim
