#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "olaf/core.hpp"

namespace olaf {

enum class VMode { Urgency, Fairness, Custom };

// v is a slope per second of staleness beyond delta_T.
struct TxControlParams {
    Duration delta_T = Duration::from_seconds(0.4);
    double v = 2.5;
    VMode mode = VMode::Urgency;

    static TxControlParams make(Duration delta_T, VMode mode, double custom_v = 0.0);
};

// since_ack absent means no ACK was ever received: treated as infinitely stale.
double tx_probability(const QueueFeedback& fb, std::optional<Duration> since_ack, const TxControlParams& p);

struct AckMessage {
    ClusterId cluster = 0;
    std::vector<double> weights;
    std::optional<QueueFeedback> feedback;
    std::vector<Contribution> delivered;
    SimTime emitted_at;
};

struct WorkerState {
    WorkerId id;
    Duration gen_period;
    std::optional<SimTime> last_ack_time;
    std::optional<QueueFeedback> latest_feedback;
    std::optional<ModelUpdate> pending_update;
    std::mt19937_64 rng;
    std::vector<double> weights;
    std::optional<std::vector<double>> staged_weights;
    std::uint64_t locally_replaced = 0;

    WorkerState(WorkerId w, Duration period, std::uint64_t seed) : id(w), gen_period(period), rng(seed) {}

    std::optional<Duration> since_ack(SimTime now) const {
        if (!last_ack_time) return std::nullopt;
        return now - *last_ack_time;
    }
};

// Makes `u` the pending update, discarding an unsent older one, and adopts
// weights staged by an earlier ACK (iteration boundary).
void worker_on_generate(WorkerState& w, ModelUpdate u);

struct TickResult {
    std::optional<ModelUpdate> send;
    std::optional<SimTime> retry_at;
    double p_send = 1.0;
};

// tc = nullptr disables transmission control (always send).
TickResult worker_on_tick(WorkerState& w, SimTime now, const TxControlParams* tc);

void worker_on_ack(WorkerState& w, const AckMessage& ack, SimTime now);

struct PsParams {
    double gamma = 0.001;
    bool track_best = true;   // r_g <- r on acceptance; otherwise r_g stays fixed
    bool weighted_avg = false;
    double initial_reward = -std::numeric_limits<double>::infinity();
};

struct ParameterServerState {
    std::vector<double> w;
    double r_g = -std::numeric_limits<double>::infinity();
    std::vector<double> g_a;
    std::uint64_t g_a_count = 0;
    bool initialized = false;
    std::uint64_t accepted = 0;

    explicit ParameterServerState(const PsParams& p = {}) : r_g(p.initial_reward) {}
};

AckMessage ps_receive(ParameterServerState& ps, const PsParams& p, const ModelUpdate& u, SimTime now);

}  // namespace olaf
