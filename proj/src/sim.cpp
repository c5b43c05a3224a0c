#include "olaf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <thread>
#include <tuple>
#include <variant>

#include "olaf/errors.hpp"

namespace olaf::sim {

ClusterCounters& ClusterCounters::operator+=(const ClusterCounters& o) {
    generated += o.generated;
    sent += o.sent;
    retransmissions += o.retransmissions;
    tx_skipped += o.tx_skipped;
    locally_replaced += o.locally_replaced;
    received_at_ps += o.received_at_ps;
    aggregations += o.aggregations;
    replaced += o.replaced;
    dropped_full += o.dropped_full;
    dropped_low_reward += o.dropped_low_reward;
    in_flight_at_end += o.in_flight_at_end;
    return *this;
}

ClusterCounters RunMetrics::totals() const {
    ClusterCounters t;
    for (const auto& c : clusters) t += c;
    return t;
}

double RunMetrics::loss_fraction() const {
    const auto t = totals();
    return t.sent ? static_cast<double>(t.dropped_full + t.dropped_low_reward) / t.sent : 0.0;
}

aom::FairnessReport RunMetrics::fairness() const { return aom::fairness(aom); }

double RunMetrics::group_avg_aom(const std::vector<ClusterId>& cs) const {
    if (cs.empty()) return 0.0;
    double sum = 0;
    for (auto c : cs) sum += aom::avg_aom_seconds(aom.at(c));
    return sum / cs.size();
}

Scenario with_variant(Scenario s, Discipline d, bool tx_enabled) {
    for (auto& sw : s.topology.switches) sw.discipline = d;
    s.tx.enabled = tx_enabled;
    return s;
}

namespace {

enum class Kind : std::uint8_t { ServiceComplete, AckArrive, ArriveAtPS, ArriveAtQueue, Generate, RetryTx };

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::ServiceComplete: return "ServiceComplete";
        case Kind::AckArrive: return "AckArrive";
        case Kind::ArriveAtPS: return "ArriveAtPS";
        case Kind::ArriveAtQueue: return "ArriveAtQueue";
        case Kind::Generate: return "Generate";
        case Kind::RetryTx: return "RetryTx";
    }
    return "?";
}

constexpr std::uint32_t kRetryGate = 0, kRetryTimeout = 1;
constexpr std::uint32_t kAckAtCluster = 0xFFFFFFFFu;

enum class NodeType : std::uint8_t { Worker, Switch, Ps, Cluster };

struct NodeRef {
    NodeType type;
    std::uint32_t index;
};

struct Event {
    SimTime t;
    Kind kind;
    std::uint32_t node;
    std::uint64_t seq;
    std::uint64_t token = 0;
    std::uint32_t aux = 0;
    std::variant<std::monostate, ModelUpdate, AckMessage> payload;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const {
        return std::tie(a.t, a.kind, a.node, a.seq) > std::tie(b.t, b.kind, b.node, b.seq);
    }
};

struct WorkerRt {
    WorkerState st;
    const std::vector<TraceRecord>* gens = nullptr;
    std::size_t next_gen = 0;
    std::uint64_t next_seq = 0;
    std::uint64_t gate_token = 0;
    std::uint64_t timeout_token = 0;
    std::optional<ModelUpdate> last_sent;
    SimTime sent_at;
    bool acked = true;
    std::optional<Duration> rtt;
    SimTime nic_free;
    std::vector<std::uint8_t> delivered;
    std::uint64_t distinct = 0;
};

struct SwitchRt {
    SwitchSpec spec;
    std::unique_ptr<QueueDiscipline> q;
    Duration tx;
    int next = -1;  // -1: parameter server
    std::vector<std::optional<SimTime>> last_seen;
};

std::uint64_t fnv1a(std::uint64_t h, const char* s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(s[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Engine {
public:
    Engine(const Scenario& s, std::uint64_t seed) : sc_(s), seed_(seed) { build(); }
    RunResult run();

private:
    void build();
    void push(SimTime t, Kind k, std::uint32_t node, std::uint64_t token = 0, std::uint32_t aux = 0,
              std::variant<std::monostate, ModelUpdate, AckMessage> payload = {});
    void log(SimTime t, NodeRef node, Kind k, std::optional<ClusterId> c, std::optional<WorkerId> w,
             std::string_view outcome, std::int64_t detail = -1);
    std::string worker_name(std::uint32_t w) const;
    std::uint32_t worker_index(const WorkerId& w) const { return w.cluster * sc_.topology.workers_per_cluster + w.index; }

    void on_generate(SimTime now, std::uint32_t w);
    void tick(SimTime now, std::uint32_t w);
    void transmit(SimTime now, std::uint32_t w, ModelUpdate u, bool retransmission);
    void on_arrive_queue(SimTime now, std::uint32_t s, ModelUpdate u);
    void start_service(SimTime now, std::uint32_t s);
    void on_service_complete(SimTime now, std::uint32_t s);
    void forward(SimTime now, std::uint32_t s, ModelUpdate u);
    void on_arrive_ps(SimTime now, ModelUpdate u);
    void on_ack(SimTime now, std::uint32_t node, std::uint32_t hop, AckMessage ack);
    void on_retry(SimTime now, std::uint32_t w, std::uint64_t token, std::uint32_t why);
    std::uint32_t active_clusters(std::uint32_t s, SimTime now) const;

    const Scenario& sc_;
    std::uint64_t seed_;
    Schedule schedule_;
    std::vector<WorkerRt> workers_;
    std::vector<SwitchRt> switches_;
    std::vector<std::vector<int>> paths_;
    std::vector<ParameterServerState> ps_;
    std::vector<Event> heap_;
    std::uint64_t seq_ = 0;
    SimTime horizon_;
    SimTime limit_ = SimTime::max();
    SimTime last_t_;
    bool stopped_ = false;
    std::uint64_t reached_ = 0;
    RunResult out_;
    std::uint64_t digest_ = 0xcbf29ce484222325ULL;
};

void Engine::build() {
    const Topology& topo = sc_.topology;
    if (topo.clusters == 0 || topo.workers_per_cluster == 0) throw ConfigError("topology: no workers");
    if (topo.switches.empty()) throw ConfigError("topology: no switch between workers and the parameter server");
    std::map<std::string, int> by_name;
    for (std::size_t i = 0; i < topo.switches.size(); ++i) {
        if (!by_name.emplace(topo.switches[i].name, static_cast<int>(i)).second)
            throw ConfigError("topology: duplicate switch name '" + topo.switches[i].name + "'");
    }
    for (std::size_t i = 0; i < topo.switches.size(); ++i) {
        const auto& spec = topo.switches[i];
        SwitchRt rt;
        rt.spec = spec;
        if (spec.capacity_bps <= 0) throw ConfigError("switch " + spec.name + ": capacity must be positive");
        if (spec.next != "ps") {
            auto it = by_name.find(spec.next);
            if (it == by_name.end()) throw ConfigError("switch " + spec.name + ": unknown next hop '" + spec.next + "'");
            rt.next = it->second;
        }
        OlafParams op{spec.q_max, topo.clusters, sc_.theta, sc_.merge};
        rt.q = make_queue(spec.discipline, op);
        rt.tx = transmission_time(sc_.workload.update_bits, spec.capacity_bps);
        rt.last_seen.assign(topo.clusters, std::nullopt);
        switches_.push_back(std::move(rt));
    }
    if (!topo.ingress.empty() && topo.ingress.size() != topo.clusters)
        throw ConfigError("topology: ingress must name one switch per cluster");
    for (ClusterId c = 0; c < topo.clusters; ++c) {
        int cur = 0;
        if (!topo.ingress.empty()) {
            auto it = by_name.find(topo.ingress[c]);
            if (it == by_name.end())
                throw ConfigError("topology: cluster " + std::to_string(c) + " enters unknown switch '" + topo.ingress[c] + "'");
            cur = it->second;
        }
        std::vector<int> path;
        while (cur >= 0) {
            if (std::find(path.begin(), path.end(), cur) != path.end())
                throw ConfigError("topology: no path to the parameter server from cluster " + std::to_string(c) + " (loop)");
            path.push_back(cur);
            cur = switches_[cur].next;
        }
        paths_.push_back(std::move(path));
    }

    horizon_ = sc_.run.horizon.value_or(SimTime{});
    schedule_ = synthesize(sc_.workload, topo.clusters, topo.workers_per_cluster, sc_.run.horizon, seed_);
    if (!sc_.run.horizon) {
        SimTime last{};
        Duration longest{};
        for (ClusterId c = 0; c < topo.clusters; ++c)
            longest = std::max(longest, cluster_period(sc_.workload, topo.clusters, topo.workers_per_cluster, c));
        for (const auto& v : schedule_)
            if (!v.empty()) last = std::max(last, v.back().gen_time);
        horizon_ = last + longest;
    }
    if (horizon_.ticks <= 0) throw ConfigError("run: horizon must be positive");
    if (sc_.run.drain.ticks > 0) limit_ = horizon_ + sc_.run.drain;

    for (ClusterId c = 0; c < topo.clusters; ++c)
        for (std::uint32_t i = 0; i < topo.workers_per_cluster; ++i) {
            const WorkerId id{c, i};
            const Duration period = cluster_period(sc_.workload, topo.clusters, topo.workers_per_cluster, c);
            WorkerRt w{WorkerState(id, period, mix_seed(seed_, 0xACE0000ULL + c * 65536ULL + i))};
            w.gens = &schedule_[c * topo.workers_per_cluster + i];
            w.delivered.assign(w.gens->size(), 0);
            w.rtt = std::nullopt;
            workers_.push_back(std::move(w));
        }
    ps_.assign(topo.clusters, ParameterServerState(sc_.ps));

    auto& m = out_.metrics;
    m.clusters.assign(topo.clusters, {});
    m.aom.resize(topo.clusters);
    for (ClusterId c = 0; c < topo.clusters; ++c) {
        m.aom[c].cluster = c;
        m.aom[c].horizon = horizon_;
    }
    for (const auto& s : switches_) m.switch_names.push_back(s.spec.name);
    m.merges_per_departure.resize(switches_.size());
    m.distinct_contributions.assign(workers_.size(), 0);
}

void Engine::push(SimTime t, Kind k, std::uint32_t node, std::uint64_t token, std::uint32_t aux,
                  std::variant<std::monostate, ModelUpdate, AckMessage> payload) {
    heap_.push_back(Event{t, k, node, seq_++, token, aux, std::move(payload)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
}

std::string Engine::worker_name(std::uint32_t w) const { return "w" + to_string(workers_[w].st.id); }

void Engine::log(SimTime t, NodeRef node, Kind k, std::optional<ClusterId> c, std::optional<WorkerId> w,
                 std::string_view outcome, std::int64_t detail) {
    std::uint64_t rec[6] = {static_cast<std::uint64_t>(t.ticks),
                            (static_cast<std::uint64_t>(node.type) << 32) | node.index,
                            static_cast<std::uint64_t>(k),
                            c ? *c : 0xFFFFFFFFull,
                            w ? (static_cast<std::uint64_t>(w->cluster) << 32 | w->index) : ~0ull,
                            static_cast<std::uint64_t>(detail)};
    digest_ = fnv1a(digest_, reinterpret_cast<const char*>(rec), sizeof rec);
    digest_ = fnv1a(digest_, outcome.data(), outcome.size());
    if (!sc_.run.keep_event_log) return;
    std::string name;
    switch (node.type) {
        case NodeType::Worker: name = worker_name(node.index); break;
        case NodeType::Switch: name = switches_[node.index].spec.name; break;
        case NodeType::Ps: name = "ps"; break;
        case NodeType::Cluster: name = "c" + std::to_string(node.index); break;
    }
    std::string line = std::to_string(t.ticks) + ' ' + name + ' ' + kind_name(k) + ' ' +
                       (c ? std::to_string(*c) : "-") + ' ' + (w ? to_string(*w) : "-") + ' ' + std::string(outcome);
    if (detail >= 0) line += "=" + std::to_string(detail);
    out_.log.lines.push_back(std::move(line));
}

void Engine::on_generate(SimTime now, std::uint32_t wi) {
    WorkerRt& w = workers_[wi];
    const TraceRecord& rec = (*w.gens)[w.next_gen];
    ModelUpdate u;
    u.worker = w.st.id;
    u.cluster = w.st.id.cluster;
    u.gen_time = now;
    u.gradient = rec.gradient.empty() ? expand_gradient(rec.gradient_seed, sc_.workload.gradient_dim) : rec.gradient;
    u.reward = rec.reward;
    u.size_bits = sc_.workload.update_bits;
    u.seq = w.next_seq++;
    u.contributors = {Contribution{u.worker, u.seq}};
    auto& cc = out_.metrics.clusters[u.cluster];
    ++cc.generated;
    if (w.st.pending_update) ++cc.locally_replaced;
    worker_on_generate(w.st, std::move(u));
    log(now, {NodeType::Worker, wi}, Kind::Generate, w.st.id.cluster, w.st.id, "ok");
    if (++w.next_gen < w.gens->size()) {
        const SimTime t = (*w.gens)[w.next_gen].gen_time;
        if (!sc_.run.horizon || t < horizon_) push(t, Kind::Generate, wi);
    }
    tick(now, wi);
}

void Engine::tick(SimTime now, std::uint32_t wi) {
    WorkerRt& w = workers_[wi];
    TickResult r = worker_on_tick(w.st, now, sc_.tx.enabled ? &sc_.tx.params : nullptr);
    if (r.send) {
        transmit(now, wi, std::move(*r.send), false);
    } else if (r.retry_at) {
        ++out_.metrics.clusters[w.st.id.cluster].tx_skipped;
        log(now, {NodeType::Worker, wi}, Kind::RetryTx, w.st.id.cluster, w.st.id, "skipped");
        push(*r.retry_at, Kind::RetryTx, wi, ++w.gate_token, kRetryGate);
    }
}

void Engine::transmit(SimTime now, std::uint32_t wi, ModelUpdate u, bool retransmission) {
    WorkerRt& w = workers_[wi];
    auto& cc = out_.metrics.clusters[u.cluster];
    ++cc.sent;
    if (retransmission) ++cc.retransmissions;
    SimTime depart = now;
    if (sc_.topology.access_capacity_bps > 0) {
        depart = std::max(now, w.nic_free) + transmission_time(u.size_bits, sc_.topology.access_capacity_bps);
        w.nic_free = depart;
    }
    if (sc_.retransmit.enabled) {
        w.last_sent = u;
        w.sent_at = now;
        w.acked = false;
        const Duration base = w.rtt.value_or(sc_.retransmit.initial_rtt);
        const Duration rto = Duration::from_ticks(
            static_cast<std::int64_t>(static_cast<double>(base.ticks) * sc_.retransmit.rtt_multiplier));
        push(now + rto, Kind::RetryTx, wi, ++w.timeout_token, kRetryTimeout);
    }
    const auto s = static_cast<std::uint32_t>(paths_[u.cluster].front());
    push(depart + sc_.topology.access_delay, Kind::ArriveAtQueue, s, 0, 0, std::move(u));
}

std::uint32_t Engine::active_clusters(std::uint32_t s, SimTime now) const {
    std::uint32_t n = 0;
    const SimTime cutoff = now - sc_.tx.activity_window;
    for (const auto& t : switches_[s].last_seen)
        if (t && *t >= cutoff) ++n;
    return std::max<std::uint32_t>(n, 1);
}

void Engine::on_arrive_queue(SimTime now, std::uint32_t s, ModelUpdate u) {
    SwitchRt& sw = switches_[s];
    sw.last_seen[u.cluster] = now;
    const ClusterId c = u.cluster;
    const WorkerId wid = u.worker;
    const EnqueueOutcome r = sw.q->enqueue(u, now);
    auto& cc = out_.metrics.clusters[c];
    switch (r.kind) {
        case Outcome::Appended: break;
        case Outcome::Aggregated: ++cc.aggregations; break;
        case Outcome::Replaced: ++cc.replaced; break;
        case Outcome::DroppedFull: ++cc.dropped_full; break;
        case Outcome::DroppedLowReward: ++cc.dropped_low_reward; break;
    }
    log(now, {NodeType::Switch, s}, Kind::ArriveAtQueue, c, wid, to_string(r.kind));
    start_service(now, s);
}

void Engine::start_service(SimTime now, std::uint32_t s) {
    SwitchRt& sw = switches_[s];
    if (sw.q->busy()) return;
    if (sw.q->begin_service(now)) push(now + sw.tx, Kind::ServiceComplete, s);
}

void Engine::on_service_complete(SimTime now, std::uint32_t s) {
    SwitchRt& sw = switches_[s];
    ModelUpdate u = sw.q->complete_service(now);
    out_.metrics.merges_per_departure[s].push_back(u.merges);
    log(now, {NodeType::Switch, s}, Kind::ServiceComplete, u.cluster, u.worker, "agg", u.agg_count);
    forward(now, s, std::move(u));
    start_service(now, s);
}

void Engine::forward(SimTime now, std::uint32_t s, ModelUpdate u) {
    const SwitchRt& sw = switches_[s];
    const SimTime t = now + sw.spec.delay;
    if (sw.next < 0)
        push(t, Kind::ArriveAtPS, 0, 0, 0, std::move(u));
    else
        push(t, Kind::ArriveAtQueue, static_cast<std::uint32_t>(sw.next), 0, 0, std::move(u));
}

void Engine::on_arrive_ps(SimTime now, ModelUpdate u) {
    auto& m = out_.metrics;
    const ClusterId c = u.cluster;
    ++m.clusters[c].received_at_ps;
    if (now <= horizon_) m.aom[c].deliveries.push_back({u.gen_time, now, false});
    const std::uint64_t target = sc_.run.stop_after_contributions;
    for (const auto& k : u.contributors) {
        WorkerRt& w = workers_[worker_index(k.worker)];
        if (k.seq < w.delivered.size() && !w.delivered[k.seq]) {
            w.delivered[k.seq] = 1;
            if (++w.distinct == target && target) ++reached_;
        }
    }
    log(now, {NodeType::Ps, 0}, Kind::ArriveAtPS, c, u.worker, "agg", u.agg_count);
    AckMessage ack = ps_receive(ps_[c], sc_.ps, u, now);
    const auto& path = paths_[c];
    const std::uint32_t last = static_cast<std::uint32_t>(path.size() - 1);
    push(now + switches_[path[last]].spec.delay, Kind::AckArrive, static_cast<std::uint32_t>(path[last]), 0, last,
         std::move(ack));
    if (target && reached_ == workers_.size() && !m.target_reached_at) {
        m.target_reached_at = now;
        stopped_ = true;
    }
}

void Engine::on_ack(SimTime now, std::uint32_t node, std::uint32_t hop, AckMessage ack) {
    const ClusterId c = ack.cluster;
    if (node != kAckAtCluster) {
        const SwitchRt& sw = switches_[node];
        if (sw.spec.feedback) {
            const auto snap = sw.q->snapshot();
            QueueFeedback fb{active_clusters(node, now), snap.q_max, snap.q_now, now};
            auto pressure = [](const QueueFeedback& f) { return static_cast<double>(f.active_clusters) / f.q_max; };
            if (!ack.feedback || pressure(fb) > pressure(*ack.feedback)) ack.feedback = fb;
        }
        log(now, {NodeType::Switch, node}, Kind::AckArrive, c, std::nullopt, "stamp");
        if (hop == 0) {
            push(now + sc_.topology.access_delay, Kind::AckArrive, kAckAtCluster, 0, 0, std::move(ack));
        } else {
            const int prev = paths_[c][hop - 1];
            push(now + switches_[prev].spec.delay, Kind::AckArrive, static_cast<std::uint32_t>(prev), 0, hop - 1,
                 std::move(ack));
        }
        return;
    }
    log(now, {NodeType::Cluster, c}, Kind::AckArrive, c, std::nullopt, "multicast");
    const std::uint32_t wpc = sc_.topology.workers_per_cluster;
    for (std::uint32_t i = 0; i < wpc; ++i) {
        WorkerRt& w = workers_[c * wpc + i];
        worker_on_ack(w.st, ack, now);
        if (!w.last_sent || w.acked) continue;
        for (const auto& k : ack.delivered)
            if (k.worker == w.st.id && k.seq == w.last_sent->seq) {
                w.acked = true;
                const Duration sample = now - w.sent_at;
                w.rtt = w.rtt ? Duration::from_ticks((7 * w.rtt->ticks + sample.ticks) / 8) : sample;
                break;
            }
    }
}

void Engine::on_retry(SimTime now, std::uint32_t wi, std::uint64_t token, std::uint32_t why) {
    WorkerRt& w = workers_[wi];
    if (why == kRetryGate) {
        if (token != w.gate_token) return;
        tick(now, wi);
        return;
    }
    if (token != w.timeout_token || w.acked) return;
    log(now, {NodeType::Worker, wi}, Kind::RetryTx, w.st.id.cluster, w.st.id, "timeout");
    if (w.st.pending_update) {
        ModelUpdate u = std::move(*w.st.pending_update);
        w.st.pending_update.reset();
        transmit(now, wi, std::move(u), true);
    } else if (w.last_sent) {
        ModelUpdate u = *w.last_sent;
        transmit(now, wi, std::move(u), true);
    }
}

RunResult Engine::run() {
    const auto wall0 = std::chrono::steady_clock::now();
    for (std::uint32_t wi = 0; wi < workers_.size(); ++wi) {
        const auto& g = *workers_[wi].gens;
        if (!g.empty() && (!sc_.run.horizon || g.front().gen_time < horizon_)) push(g.front().gen_time, Kind::Generate, wi);
    }
    auto& m = out_.metrics;
    while (!heap_.empty() && !stopped_) {
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Event e = std::move(heap_.back());
        heap_.pop_back();
        if (e.t > limit_) {
            heap_.push_back(std::move(e));
            std::push_heap(heap_.begin(), heap_.end(), Later{});
            break;
        }
        if (e.t < last_t_) throw ContractViolation("event processed out of order");
        last_t_ = e.t;
        ++m.events;
        switch (e.kind) {
            case Kind::Generate: on_generate(e.t, e.node); break;
            case Kind::RetryTx: on_retry(e.t, e.node, e.token, e.aux); break;
            case Kind::ArriveAtQueue: on_arrive_queue(e.t, e.node, std::get<ModelUpdate>(std::move(e.payload))); break;
            case Kind::ServiceComplete: on_service_complete(e.t, e.node); break;
            case Kind::ArriveAtPS: on_arrive_ps(e.t, std::get<ModelUpdate>(std::move(e.payload))); break;
            case Kind::AckArrive: on_ack(e.t, e.node, e.aux, std::get<AckMessage>(std::move(e.payload))); break;
        }
    }
    m.end_time = last_t_;
    for (const auto& e : heap_)
        if (const auto* u = std::get_if<ModelUpdate>(&e.payload)) ++m.clusters[u->cluster].in_flight_at_end;
    for (const auto& sw : switches_)
        for (const auto& u : sw.q->contents()) ++m.clusters[u.cluster].in_flight_at_end;
    for (std::size_t i = 0; i < workers_.size(); ++i) m.distinct_contributions[i] = workers_[i].distinct;
    m.event_digest = digest_;
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
    return std::move(out_);
}

}  // namespace

RunResult run(const Scenario& s, std::uint64_t seed) {
    Engine e(s, seed);
    return e.run();
}

SpeedupResult compare_speedup(const Scenario& s, std::uint64_t n_updates, std::uint64_t seed) {
    Scenario base = s;
    base.run.stop_after_contributions = n_updates;
    const auto fifo = run(with_variant(base, Discipline::Fifo, false), seed);
    const auto olaf = run(with_variant(base, Discipline::Olaf, false), seed);
    SpeedupResult r;
    r.t_fifo = fifo.metrics.target_reached_at;
    r.t_olaf = olaf.metrics.target_reached_at;
    r.censored = !r.t_fifo || !r.t_olaf;
    if (!r.censored && r.t_olaf->ticks > 0) r.ratio = static_cast<double>(r.t_fifo->ticks) / r.t_olaf->ticks;
    return r;
}

unsigned thread_budget() {
    if (const char* env = std::getenv("OLAF_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunResult> run_parallel(const std::vector<std::pair<Scenario, std::uint64_t>>& jobs, unsigned threads) {
    std::vector<RunResult> results(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            try {
                results[i] = run(jobs[i].first, jobs[i].second);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace olaf::sim
