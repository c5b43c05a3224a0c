#include "olaf/endpoint.hpp"

#include <algorithm>

#include "olaf/errors.hpp"

namespace olaf {

TxControlParams TxControlParams::make(Duration delta_T, VMode mode, double custom_v) {
    if (delta_T.ticks <= 0) throw ConfigError("tx control: delta_T must be positive");
    TxControlParams p;
    p.delta_T = delta_T;
    p.mode = mode;
    switch (mode) {
        case VMode::Urgency: p.v = 1.0 / delta_T.seconds(); break;
        case VMode::Fairness: p.v = delta_T.seconds(); break;
        case VMode::Custom:
            if (custom_v < 0) throw ConfigError("tx control: v must be non-negative");
            p.v = custom_v;
            break;
    }
    return p;
}

double tx_probability(const QueueFeedback& fb, std::optional<Duration> since_ack, const TxControlParams& p) {
    if (fb.active_clusters == 0) throw ContractViolation("tx_probability: active cluster count is zero");
    if (fb.active_clusters <= fb.q_max) return 1.0;
    if (!since_ack) return 1.0;
    const double base = static_cast<double>(fb.q_max) / fb.active_clusters;
    const double excess = std::max((*since_ack - p.delta_T).seconds(), 0.0);
    return std::min(base + p.v * excess, 1.0);
}

void worker_on_generate(WorkerState& w, ModelUpdate u) {
    if (w.pending_update) ++w.locally_replaced;
    if (w.staged_weights) {
        w.weights = std::move(*w.staged_weights);
        w.staged_weights.reset();
    }
    w.pending_update = std::move(u);
}

TickResult worker_on_tick(WorkerState& w, SimTime now, const TxControlParams* tc) {
    TickResult r;
    if (!w.pending_update) return r;
    if (tc && w.latest_feedback) r.p_send = tx_probability(*w.latest_feedback, w.since_ack(now), *tc);
    // Always draw so the stream position depends only on the tick sequence.
    const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(w.rng);
    if (draw < r.p_send) {
        r.send = std::move(w.pending_update);
        w.pending_update.reset();
    } else {
        const Duration half = tc->delta_T / 2;
        r.retry_at = now + std::min(w.gen_period, half);
    }
    return r;
}

void worker_on_ack(WorkerState& w, const AckMessage& ack, SimTime now) {
    w.last_ack_time = now;
    if (ack.feedback) w.latest_feedback = ack.feedback;
    if (!ack.weights.empty()) w.staged_weights = ack.weights;
}

AckMessage ps_receive(ParameterServerState& ps, const PsParams& p, const ModelUpdate& u, SimTime now) {
    if (!ps.initialized) {
        ps.w = u.gradient;
        ps.initialized = true;
    } else {
        if (u.gradient.size() != ps.w.size())
            throw StructuralError("ps_receive: gradient dimension " + std::to_string(u.gradient.size()) +
                                  " does not match model dimension " + std::to_string(ps.w.size()));
        if (u.reward > ps.r_g) {
            if (ps.g_a.empty()) {
                ps.g_a = u.gradient;
                ps.g_a_count = u.agg_count;
            } else if (p.weighted_avg) {
                const double a = static_cast<double>(ps.g_a_count), b = u.agg_count;
                for (std::size_t i = 0; i < ps.g_a.size(); ++i)
                    ps.g_a[i] = (a * ps.g_a[i] + b * u.gradient[i]) / (a + b);
                ps.g_a_count += u.agg_count;
            } else {
                for (std::size_t i = 0; i < ps.g_a.size(); ++i) ps.g_a[i] = 0.5 * (ps.g_a[i] + u.gradient[i]);
                ps.g_a_count += u.agg_count;
            }
            for (std::size_t i = 0; i < ps.w.size(); ++i) ps.w[i] += p.gamma * ps.g_a[i];
            if (p.track_best) ps.r_g = u.reward;
            ++ps.accepted;
        }
    }
    AckMessage ack;
    ack.cluster = u.cluster;
    ack.weights = ps.w;
    ack.delivered = u.contributors;
    ack.emitted_at = now;
    return ack;
}

}  // namespace olaf
