#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "olaf/aom.hpp"
#include "olaf/core.hpp"
#include "olaf/endpoint.hpp"

namespace olaf::verify {

// How the pairwise gap between average peak AoMs is compared with epsilon.
enum class EpsilonMode {
    Absolute,           // seconds
    ServiceNormalized,  // in units of the service time p/C
    PeriodNormalized,   // each cluster's average divided by its mean generation period
};

struct ClusterSchedule {
    std::vector<SimTime> arrivals;  // generation instants, sorted
    Duration period;                // generation interval; derived from arrivals when zero
};

struct VerifierConfig {
    std::uint32_t cluster_count = 1;
    Duration service = Duration::from_seconds(0.002);
    std::uint32_t q_max = 8;
    TxControlParams tx;
    double epsilon = 0.1;
    EpsilonMode epsilon_mode = EpsilonMode::PeriodNormalized;
    Duration ack_delay;  // R
    std::vector<ClusterSchedule> schedules;
    std::uint32_t branch_cap = 24;
    unsigned threads = 1;

    // Appends a periodic schedule of `horizon` updates.
    void add_periodic(Duration period, Duration phase, std::uint32_t horizon);
};

struct UpdateRecord {
    SimTime gen;
    std::optional<SimTime> sent;
    bool dropped = false;
    bool absorbed = false;
    std::optional<SimTime> departure;
    std::uint32_t queue_at_arrival = 0;  // other-cluster updates in the system
    std::uint32_t ack_queue = 0;         // occupancy reported by this update's ACK
};

struct ClusterTrajectory {
    std::vector<UpdateRecord> updates;
    aom::Series series;  // departed updates only
    std::vector<Duration> peaks;
    double avg_peak = 0.0;  // in epsilon units
};

struct Trajectory {
    std::vector<ClusterTrajectory> clusters;
    std::size_t gated = 0;  // decisions consumed
};

// decisions[i] resolves the i-th gated opportunity: true = send.
Trajectory trajectory(const VerifierConfig& cfg, const std::vector<bool>& decisions);

enum class Result { ObjectiveHolds, Violated };

struct Witness {
    std::vector<bool> decisions;
    Trajectory trajectory;
    ClusterId u = 0, v = 0;
    double gap = 0.0;
};

struct Verdict {
    Result result = Result::ObjectiveHolds;
    std::optional<Witness> witness;
    std::uint64_t leaves = 0;
    std::uint64_t pruned = 0;
    double max_gap = 0.0;  // largest gap seen over explored leaves
};

// Throws BoundTooLarge when a branch needs more than branch_cap gated decisions.
Verdict check_fairness(const VerifierConfig& cfg);

class BoundTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Worst pairwise gap of a finished trajectory, with the offending pair.
struct Gap {
    ClusterId u = 0, v = 0;
    double gap = 0.0;
};
Gap worst_gap(const Trajectory& t);

std::string witness_log(const Witness& w);

VerifierConfig load_config(const std::string& path);
VerifierConfig parse_config(const std::string& json_text);

}  // namespace olaf::verify
