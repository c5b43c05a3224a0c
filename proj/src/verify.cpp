#include "olaf/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "olaf/errors.hpp"

namespace olaf::verify {

void VerifierConfig::add_periodic(Duration period, Duration phase, std::uint32_t horizon) {
    ClusterSchedule s;
    s.period = period;
    for (std::uint32_t k = 0; k < horizon; ++k) s.arrivals.push_back(SimTime{} + phase + period * k);
    schedules.push_back(std::move(s));
}

namespace {

Duration period_of(const ClusterSchedule& s, Duration fallback) {
    if (s.period.ticks > 0) return s.period;
    if (s.arrivals.size() >= 2)
        return (s.arrivals.back() - s.arrivals.front()) / static_cast<std::int64_t>(s.arrivals.size() - 1);
    return fallback;
}

void validate(const VerifierConfig& c) {
    if (c.cluster_count == 0) throw ConfigError("verifier: cluster_count must be at least 1");
    if (c.schedules.size() != c.cluster_count) throw ConfigError("verifier: need one schedule per cluster");
    if (!(c.epsilon > 0)) throw ConfigError("verifier: epsilon must be positive");
    if (c.service.ticks <= 0) throw ConfigError("verifier: service time must be positive");
    if (c.q_max == 0) throw ConfigError("verifier: q_max must be positive");
    for (const auto& s : c.schedules)
        if (!std::is_sorted(s.arrivals.begin(), s.arrivals.end()))
            throw ConfigError("verifier: schedules must be sorted");
}

struct Entry {
    ClusterId c;
    SimTime gen;
    std::vector<std::uint32_t> recs;  // generation indices folded into this entry
    std::uint32_t newest = 0;         // the one that represents the departure
};

struct CState {
    std::size_t next_gen = 0;
    std::optional<std::uint32_t> pending;
    std::optional<SimTime> retry_at;
    std::optional<SimTime> last_ack;
    std::deque<SimTime> acks;
    // Running peak statistics.
    std::optional<SimTime> last_departed_gen;
    std::int64_t peak_sum = 0;
    std::uint32_t peak_count = 0;
};

struct State {
    std::vector<CState> cs;
    std::deque<Entry> queue;  // front is in service when busy
    bool busy = false;
    SimTime busy_until;
    std::size_t gated = 0;
    // An opportunity awaiting a decision.
    std::optional<std::pair<ClusterId, SimTime>> waiting;
};

class Machine {
public:
    Machine(const VerifierConfig& cfg, Trajectory* rec) : cfg_(cfg), rec_(rec) {
        for (ClusterId c = 0; c < cfg.cluster_count; ++c) periods_.push_back(period_of(cfg.schedules[c], cfg.service));
        SimTime last{};
        Duration longest{};
        for (ClusterId c = 0; c < cfg.cluster_count; ++c) {
            if (!cfg.schedules[c].arrivals.empty()) last = std::max(last, cfg.schedules[c].arrivals.back());
            longest = std::max(longest, periods_[c]);
        }
        end_ = last + longest;
        if (rec_) {
            rec_->clusters.resize(cfg.cluster_count);
            for (ClusterId c = 0; c < cfg.cluster_count; ++c) {
                rec_->clusters[c].series.cluster = c;
                rec_->clusters[c].series.horizon = end_;
                for (auto t : cfg.schedules[c].arrivals) rec_->clusters[c].updates.push_back(UpdateRecord{t});
            }
        }
    }

    State initial() const {
        State s;
        s.cs.resize(cfg_.cluster_count);
        return s;
    }

    // Runs until a gated decision is needed (returns true) or the schedule is exhausted.
    bool advance(State& s) const {
        for (;;) {
            if (s.waiting) return true;
            // Candidate times per class; ties resolve completion, then ACK, then opportunities by cluster.
            std::optional<SimTime> t_done = s.busy ? std::optional<SimTime>(s.busy_until) : std::nullopt;
            std::optional<std::pair<SimTime, ClusterId>> t_ack, t_opp;
            for (ClusterId c = 0; c < cfg_.cluster_count; ++c) {
                const CState& k = s.cs[c];
                if (!k.acks.empty() && (!t_ack || k.acks.front() < t_ack->first)) t_ack = {{k.acks.front(), c}};
                std::optional<SimTime> o;
                if (k.next_gen < cfg_.schedules[c].arrivals.size()) o = cfg_.schedules[c].arrivals[k.next_gen];
                if (k.retry_at && (!o || *k.retry_at < *o)) o = k.retry_at;
                if (o && (!t_opp || *o < t_opp->first)) t_opp = {{*o, c}};
            }
            if (!t_done && !t_ack && !t_opp) return false;
            auto before = [](const std::optional<SimTime>& a, const std::optional<SimTime>& b) {
                return a && (!b || *a <= *b);
            };
            std::optional<SimTime> ta = t_ack ? std::optional<SimTime>(t_ack->first) : std::nullopt;
            std::optional<SimTime> to = t_opp ? std::optional<SimTime>(t_opp->first) : std::nullopt;
            if (before(t_done, ta) && before(t_done, to)) {
                complete(s);
            } else if (before(ta, to)) {
                CState& k = s.cs[t_ack->second];
                k.last_ack = k.acks.front();
                k.acks.pop_front();
            } else {
                opportunity(s, t_opp->second, t_opp->first);
            }
        }
    }

    void decide(State& s, bool send) const {
        const auto [c, t] = *s.waiting;
        s.waiting.reset();
        ++s.gated;
        CState& k = s.cs[c];
        const std::uint32_t idx = *k.pending;
        if (send) {
            k.pending.reset();
            k.retry_at.reset();
            arrive(s, c, idx, t);
        } else {
            k.retry_at = t + std::min(periods_[c], cfg_.tx.delta_T / 2);
            // The horizon bounds the tree: an update still skipped at the end is never sent.
            if (*k.retry_at > end_) {
                k.retry_at.reset();
                k.pending.reset();
            }
        }
    }

    double avg_peak(const State& s, ClusterId c) const {
        const CState& k = s.cs[c];
        const double raw = k.peak_count ? static_cast<double>(k.peak_sum) / k.peak_count / kTicksPerSecond
                                        : end_.seconds();
        switch (cfg_.epsilon_mode) {
            case EpsilonMode::Absolute: return raw;
            case EpsilonMode::ServiceNormalized: return raw / cfg_.service.seconds();
            case EpsilonMode::PeriodNormalized: return raw / periods_[c].seconds();
        }
        return raw;
    }

    Gap gap(const State& s) const {
        Gap g;
        for (ClusterId u = 0; u < cfg_.cluster_count; ++u)
            for (ClusterId v = u + 1; v < cfg_.cluster_count; ++v) {
                const double d = std::abs(avg_peak(s, u) - avg_peak(s, v));
                if (d > g.gap) g = {u, v, d};
            }
        return g;
    }

    std::string key(const State& s) const {
        std::ostringstream o;
        o << s.busy << ':' << s.busy_until.ticks << '|';
        for (const auto& e : s.queue) o << e.c << ',' << e.gen.ticks << ';';
        o << '|';
        for (const auto& k : s.cs) {
            o << k.next_gen << ',' << (k.pending ? static_cast<long long>(*k.pending) : -1) << ','
              << (k.retry_at ? k.retry_at->ticks : -1) << ',' << (k.last_ack ? k.last_ack->ticks : -1) << ','
              << (k.last_departed_gen ? k.last_departed_gen->ticks : -1) << ',' << k.peak_sum << ',' << k.peak_count;
            for (auto a : k.acks) o << '/' << a.ticks;
            o << ';';
        }
        if (s.waiting) o << 'w' << s.waiting->first << ',' << s.waiting->second.ticks;
        return o.str();
    }

private:
    double p_send(const State& s, ClusterId c, SimTime t) const {
        if (cfg_.cluster_count <= cfg_.q_max) return 1.0;
        const CState& k = s.cs[c];
        QueueFeedback fb{cfg_.cluster_count, cfg_.q_max, 0, t};
        std::optional<Duration> since;
        if (k.last_ack) since = t - *k.last_ack;
        return tx_probability(fb, since, cfg_.tx);
    }

    void opportunity(State& s, ClusterId c, SimTime t) const {
        CState& k = s.cs[c];
        const auto& arr = cfg_.schedules[c].arrivals;
        const bool is_gen = k.next_gen < arr.size() && arr[k.next_gen] <= t && (!k.retry_at || arr[k.next_gen] <= *k.retry_at);
        if (is_gen) {
            k.pending = static_cast<std::uint32_t>(k.next_gen++);
            k.retry_at.reset();
        } else {
            k.retry_at.reset();
        }
        if (!k.pending) return;
        if (p_send(s, c, t) >= 1.0) {
            const std::uint32_t idx = *k.pending;
            k.pending.reset();
            arrive(s, c, idx, t);
            return;
        }
        s.waiting = {{c, t}};
    }

    void arrive(State& s, ClusterId c, std::uint32_t idx, SimTime t) const {
        const SimTime gen = cfg_.schedules[c].arrivals[idx];
        std::uint32_t others = 0;
        for (const auto& e : s.queue) others += e.c != c;
        if (rec_) {
            auto& r = rec_->clusters[c].updates[idx];
            r.sent = t;
            r.queue_at_arrival = others;
        }
        const std::size_t first_unlocked = s.busy ? 1 : 0;
        for (std::size_t i = first_unlocked; i < s.queue.size(); ++i) {
            Entry& e = s.queue[i];
            if (e.c != c) continue;
            if (gen >= e.gen) {
                e.gen = gen;
                e.newest = idx;
            }
            e.recs.push_back(idx);
            return;
        }
        if (s.queue.size() >= cfg_.q_max) {
            if (rec_) rec_->clusters[c].updates[idx].dropped = true;
            return;
        }
        s.queue.push_back(Entry{c, gen, {idx}, idx});
        if (!s.busy) {
            s.busy = true;
            s.busy_until = t + cfg_.service;
        }
    }

    void complete(State& s) const {
        const SimTime t = s.busy_until;
        Entry e = std::move(s.queue.front());
        s.queue.pop_front();
        CState& k = s.cs[e.c];
        const std::uint32_t occupancy = static_cast<std::uint32_t>(s.queue.size());
        k.peak_sum += (t - (k.last_departed_gen ? *k.last_departed_gen : e.gen)).ticks;
        ++k.peak_count;
        if (!k.last_departed_gen || e.gen > *k.last_departed_gen) k.last_departed_gen = e.gen;
        k.acks.push_back(t + cfg_.ack_delay);
        if (rec_) {
            auto& ct = rec_->clusters[e.c];
            for (auto idx : e.recs) {
                auto& r = ct.updates[idx];
                r.departure = t;
                r.absorbed = idx != e.newest;
                r.ack_queue = occupancy;
            }
            ct.series.deliveries.push_back({e.gen, t, false});
        }
        if (!s.queue.empty()) {
            s.busy_until = t + cfg_.service;
        } else {
            s.busy = false;
        }
    }

    const VerifierConfig& cfg_;
    Trajectory* rec_;
    std::vector<Duration> periods_;
    SimTime end_;
};

struct Search {
    const VerifierConfig& cfg;
    Machine machine;
    std::atomic<bool> found{false};
    std::atomic<std::uint64_t> leaves{0}, pruned{0};
    std::mutex mu;
    std::optional<Witness> witness;
    double max_gap = 0.0;
    bool bound_exceeded = false;

    explicit Search(const VerifierConfig& c) : cfg(c), machine(c, nullptr) {}

    void leaf(const State& s, const std::vector<bool>& path) {
        ++leaves;
        const Gap g = machine.gap(s);
        std::lock_guard<std::mutex> lock(mu);
        max_gap = std::max(max_gap, g.gap);
        if (g.gap > cfg.epsilon && !found.exchange(true)) {
            Witness w;
            w.decisions = path;
            w.u = g.u;
            w.v = g.v;
            w.gap = g.gap;
            witness = std::move(w);
        }
    }

    void dfs(State s, std::vector<bool>& path, std::unordered_set<std::string>& seen) {
        if (found) return;
        if (!machine.advance(s)) {
            leaf(s, path);
            return;
        }
        if (path.size() >= cfg.branch_cap) {
            std::lock_guard<std::mutex> lock(mu);
            bound_exceeded = true;
            found = true;
            return;
        }
        if (seen.size() < 2'000'000 && !seen.insert(machine.key(s)).second) {
            ++pruned;
            return;
        }
        for (bool send : {false, true}) {
            State next = s;
            machine.decide(next, send);
            path.push_back(send);
            dfs(std::move(next), path, seen);
            path.pop_back();
            if (found) return;
        }
    }
};

}  // namespace

Trajectory trajectory(const VerifierConfig& cfg, const std::vector<bool>& decisions) {
    validate(cfg);
    Trajectory out;
    Machine m(cfg, &out);
    State s = m.initial();
    std::size_t used = 0;
    while (m.advance(s)) {
        if (used >= decisions.size())
            throw ContractViolation("trajectory: decision list exhausted at gated opportunity " + std::to_string(used));
        m.decide(s, decisions[used++]);
    }
    if (used != decisions.size())
        throw ContractViolation("trajectory: " + std::to_string(decisions.size() - used) +
                                " decisions left over with no gated opportunity to resolve");
    out.gated = used;
    for (ClusterId c = 0; c < cfg.cluster_count; ++c) {
        auto& ct = out.clusters[c];
        ct.peaks = aom::peak_aom(ct.series);
        ct.avg_peak = m.avg_peak(s, c);
    }
    return out;
}

Gap worst_gap(const Trajectory& t) {
    Gap g;
    for (ClusterId u = 0; u < t.clusters.size(); ++u)
        for (ClusterId v = u + 1; v < t.clusters.size(); ++v) {
            const double d = std::abs(t.clusters[u].avg_peak - t.clusters[v].avg_peak);
            if (d > g.gap) g = {u, v, d};
        }
    return g;
}

Verdict check_fairness(const VerifierConfig& cfg) {
    validate(cfg);
    Verdict verdict;
    if (cfg.cluster_count == 1) return verdict;

    Search search(cfg);
    const Machine& m = search.machine;

    // Expand the top of the tree breadth-first to hand subtrees to threads.
    struct Frontier {
        State s;
        std::vector<bool> path;
    };
    std::vector<Frontier> frontier{{m.initial(), {}}};
    const unsigned threads = std::max(1u, cfg.threads);
    while (threads > 1 && frontier.size() < threads && !search.found) {
        std::vector<Frontier> next;
        bool grew = false;
        for (auto& f : frontier) {
            if (!m.advance(f.s)) {
                search.leaf(f.s, f.path);
                continue;
            }
            if (f.path.size() >= cfg.branch_cap) {
                search.bound_exceeded = true;
                search.found = true;
                break;
            }
            for (bool send : {false, true}) {
                Frontier g{f.s, f.path};
                m.decide(g.s, send);
                g.path.push_back(send);
                next.push_back(std::move(g));
            }
            grew = true;
        }
        frontier = std::move(next);
        if (!grew) break;
    }

    std::atomic<std::size_t> idx{0};
    auto work = [&] {
        std::unordered_set<std::string> seen;
        for (std::size_t i; (i = idx.fetch_add(1)) < frontier.size();) {
            auto path = frontier[i].path;
            search.dfs(frontier[i].s, path, seen);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < std::min<std::size_t>(threads, frontier.size()); ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    if (search.bound_exceeded)
        throw BoundTooLarge("verifier: a branch needs more than " + std::to_string(cfg.branch_cap) +
                            " gated send/skip decisions; shorten the horizon or raise branch_cap");
    verdict.leaves = search.leaves;
    verdict.pruned = search.pruned;
    verdict.max_gap = search.max_gap;
    if (search.witness) {
        verdict.result = Result::Violated;
        verdict.witness = std::move(search.witness);
        verdict.witness->trajectory = trajectory(cfg, verdict.witness->decisions);
    }
    return verdict;
}

std::string witness_log(const Witness& w) {
    std::ostringstream o;
    struct Line {
        SimTime t;
        int rank;
        std::string text;
    };
    std::vector<Line> lines;
    const auto& tr = w.trajectory;
    for (ClusterId c = 0; c < tr.clusters.size(); ++c) {
        const std::string cs = std::to_string(c);
        const std::string ws = cs + ":0";
        for (const auto& r : tr.clusters[c].updates) {
            auto line = [&](SimTime t, int rank, const char* node_prefix, const char* kind, const std::string& outcome) {
                std::string node = std::string(node_prefix) == "w" ? "w" + ws : node_prefix;
                lines.push_back({t, rank, std::to_string(t.ticks) + " " + node + " " + kind + " " + cs + " " + ws + " " + outcome});
            };
            line(r.gen, 4, "w", "Generate", r.sent ? "send" : "skip");
            if (r.sent) {
                const char* outcome = r.dropped ? "DroppedFull" : r.absorbed ? "Aggregated" : "Appended";
                line(*r.sent, 3, "accel", "ArriveAtQueue", outcome);
            }
            if (r.departure && !r.absorbed) line(*r.departure, 0, "accel", "ServiceComplete", "agg=1");
        }
    }
    std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return a.t != b.t ? a.t < b.t : a.rank < b.rank;
    });
    o << "# witness: clusters " << w.u << " and " << w.v << " differ by " << w.gap << " in average peak AoM\n";
    o << "# decisions:";
    for (bool d : w.decisions) o << ' ' << (d ? "send" : "skip");
    o << '\n';
    for (const auto& l : lines) o << l.text << '\n';
    return o.str();
}

VerifierConfig parse_config(const std::string& text) {
    using nlohmann::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("verifier config: ") + e.what());
    }
    if (!root.is_object() || !root.contains("verifier") || !root["verifier"].is_object())
        throw ConfigError("verifier config: expected a top-level \"verifier\" object");
    const json& v = root["verifier"];
    static const char* allowed[] = {"clusters", "service_s", "q_max", "delta_T_s", "v_mode", "v", "epsilon",
                                    "epsilon_mode", "ack_delay_s", "horizon", "branch_cap", "schedules"};
    for (auto it = v.begin(); it != v.end(); ++it)
        if (std::find_if(std::begin(allowed), std::end(allowed), [&](const char* a) { return it.key() == a; }) ==
            std::end(allowed))
            throw ConfigError("verifier." + it.key() + ": unknown key");
    for (auto it = root.begin(); it != root.end(); ++it)
        if (it.key() != "verifier" && it.key() != "name" && it.key() != "description")
            throw ConfigError(it.key() + ": unknown key");
    auto need = [&](const char* k) -> const json& {
        if (!v.contains(k)) throw ConfigError(std::string("verifier.") + k + ": missing required key");
        return v.at(k);
    };
    auto number = [&](const char* k, double def) {
        if (!v.contains(k)) return def;
        if (!v.at(k).is_number()) throw ConfigError(std::string("verifier.") + k + ": expected a number");
        return v.at(k).get<double>();
    };
    VerifierConfig c;
    const json& nc = need("clusters");
    if (!nc.is_number_unsigned()) throw ConfigError("verifier.clusters: expected a positive integer");
    c.cluster_count = nc.get<std::uint32_t>();
    c.service = Duration::from_seconds(number("service_s", 0.002));
    c.q_max = static_cast<std::uint32_t>(number("q_max", 8));
    const std::string mode = v.value("v_mode", std::string("urgency"));
    VMode vm = VMode::Urgency;
    if (mode == "fairness") vm = VMode::Fairness;
    else if (mode == "custom") vm = VMode::Custom;
    else if (mode != "urgency") throw ConfigError("verifier.v_mode: expected urgency, fairness or custom");
    c.tx = TxControlParams::make(Duration::from_seconds(number("delta_T_s", 0.4)), vm, number("v", 0.0));
    c.epsilon = number("epsilon", 0.1);
    const std::string em = v.value("epsilon_mode", std::string("period"));
    if (em == "absolute") c.epsilon_mode = EpsilonMode::Absolute;
    else if (em == "service") c.epsilon_mode = EpsilonMode::ServiceNormalized;
    else if (em == "period") c.epsilon_mode = EpsilonMode::PeriodNormalized;
    else throw ConfigError("verifier.epsilon_mode: expected absolute, service or period");
    c.ack_delay = Duration::from_seconds(number("ack_delay_s", 0.0));
    const auto horizon = static_cast<std::uint32_t>(number("horizon", 10));
    c.branch_cap = static_cast<std::uint32_t>(number("branch_cap", 24));
    const json& sch = need("schedules");
    if (!sch.is_array() || sch.size() != c.cluster_count)
        throw ConfigError("verifier.schedules: expected one entry per cluster");
    for (std::size_t i = 0; i < sch.size(); ++i) {
        const json& e = sch[i];
        const std::string where = "verifier.schedules[" + std::to_string(i) + "]";
        if (!e.is_object()) throw ConfigError(where + ": expected an object");
        if (e.contains("arrivals_s")) {
            ClusterSchedule s;
            for (const auto& a : e["arrivals_s"]) {
                if (!a.is_number()) throw ConfigError(where + ".arrivals_s: expected numbers");
                s.arrivals.push_back(SimTime::from_seconds(a.get<double>()));
            }
            if (e.contains("period_s")) s.period = Duration::from_seconds(e["period_s"].get<double>());
            c.schedules.push_back(std::move(s));
        } else if (e.contains("period_s")) {
            c.add_periodic(Duration::from_seconds(e["period_s"].get<double>()),
                           Duration::from_seconds(e.value("phase_s", 0.0)), e.value("horizon", horizon));
        } else {
            throw ConfigError(where + ": needs period_s or arrivals_s");
        }
    }
    validate(c);
    return c;
}

VerifierConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open verifier config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace olaf::verify
