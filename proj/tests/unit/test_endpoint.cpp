#include <doctest.h>

#include <cmath>
#include <limits>

#include "olaf/endpoint.hpp"
#include "olaf/errors.hpp"

using namespace olaf;

namespace {

TxControlParams urgency() { return TxControlParams::make(Duration::from_seconds(0.4), VMode::Urgency); }

QueueFeedback fb(std::uint32_t n, std::uint32_t q) { return QueueFeedback{n, q, 0, SimTime{}}; }

ModelUpdate upd(std::uint64_t seq, double g = 1.0) {
    ModelUpdate u;
    u.worker = {0, 0};
    u.seq = seq;
    u.gen_time = SimTime::from_seconds(0.1 * seq);
    u.gradient = {g, g};
    return u;
}

}  // namespace

TEST_CASE("tx_probability examples") {
    const auto p = urgency();
    CHECK(tx_probability(fb(100, 8), Duration::from_seconds(0.1), p) == doctest::Approx(0.08));
    CHECK(tx_probability(fb(100, 8), Duration::from_seconds(0.4), p) == doctest::Approx(0.08));
    CHECK(tx_probability(fb(8, 8), Duration::from_seconds(0.1), p) == 1.0);
    CHECK(tx_probability(fb(3, 8), Duration::from_seconds(0.0), p) == 1.0);
    CHECK(tx_probability(fb(16, 8), Duration::from_seconds(0.8), p) == 1.0);
    // Just past the threshold: 0.5 + 2.5 * 0.1.
    CHECK(tx_probability(fb(16, 8), Duration::from_seconds(0.5), p) == doctest::Approx(0.75));
    CHECK(tx_probability(fb(16, 8), std::nullopt, p) == 1.0);
    CHECK_THROWS_AS(tx_probability(fb(0, 8), Duration{}, p), ContractViolation);
}

TEST_CASE("v modes") {
    CHECK(TxControlParams::make(Duration::from_seconds(0.4), VMode::Urgency).v == doctest::Approx(2.5));
    CHECK(TxControlParams::make(Duration::from_seconds(0.4), VMode::Fairness).v == doctest::Approx(0.4));
    CHECK(TxControlParams::make(Duration::from_seconds(0.4), VMode::Custom, 7.0).v == 7.0);
    CHECK_THROWS_AS(TxControlParams::make(Duration{}, VMode::Urgency), ConfigError);
    CHECK_THROWS_AS(TxControlParams::make(Duration::from_seconds(1), VMode::Custom, -1.0), ConfigError);
}

TEST_CASE("P_s is monotone in staleness and active clusters") {
    const auto p = urgency();
    for (int n = 1; n <= 64; ++n) {
        double prev = -1;
        for (int ms = 0; ms <= 1000; ms += 25) {
            const double ps = tx_probability(fb(n, 8), Duration::from_seconds(ms / 1000.0), p);
            CHECK(ps >= 0.0);
            CHECK(ps <= 1.0);
            CHECK(ps >= prev);
            prev = ps;
            if (n > 1) CHECK(ps <= tx_probability(fb(n - 1, 8), Duration::from_seconds(ms / 1000.0), p));
        }
    }
}

TEST_CASE("worker send rate follows P_s") {
    const auto p = urgency();
    WorkerState w({0, 0}, Duration::from_seconds(0.1), 42);
    w.latest_feedback = fb(100, 8);
    const SimTime now = SimTime::from_seconds(1.0);
    w.last_ack_time = now;
    int sent = 0;
    const int trials = 10'000;
    for (int i = 0; i < trials; ++i) {
        worker_on_generate(w, upd(i));
        auto r = worker_on_tick(w, now, &p);
        CHECK(r.p_send == doctest::Approx(0.08));
        if (r.send) {
            ++sent;
        } else {
            CHECK(r.retry_at == now + Duration::from_seconds(0.1));
            w.pending_update.reset();
        }
    }
    CHECK(std::abs(sent / double(trials) - 0.08) < 0.01);
}

TEST_CASE("retry epoch is half the threshold when periods are long") {
    const auto p = urgency();
    WorkerState w({0, 0}, Duration::from_seconds(1.0), 1);
    w.latest_feedback = QueueFeedback{1'000'000, 1, 0, SimTime{}};
    w.last_ack_time = SimTime{};
    worker_on_generate(w, upd(0));
    auto r = worker_on_tick(w, SimTime{}, &p);
    if (!r.send) CHECK(r.retry_at == SimTime::from_seconds(0.2));
}

TEST_CASE("P_s = 1 always emits, and no tc means always send") {
    const auto p = urgency();
    WorkerState w({0, 0}, Duration::from_seconds(0.1), 3);
    w.latest_feedback = fb(2, 8);
    for (int i = 0; i < 100; ++i) {
        worker_on_generate(w, upd(i));
        CHECK(worker_on_tick(w, SimTime{}, &p).send);
        worker_on_generate(w, upd(i));
        CHECK(worker_on_tick(w, SimTime{}, nullptr).send);
    }
    CHECK_FALSE(worker_on_tick(w, SimTime{}, &p).send);
}

TEST_CASE("local replacement keeps only the newest pending update") {
    WorkerState w({0, 0}, Duration::from_seconds(0.1), 3);
    worker_on_generate(w, upd(1));
    worker_on_generate(w, upd(2));
    CHECK(w.locally_replaced == 1);
    auto r = worker_on_tick(w, SimTime{}, nullptr);
    REQUIRE(r.send);
    CHECK(r.send->seq == 2);
    CHECK_FALSE(w.pending_update);
}

TEST_CASE("identical seeds give identical send decisions") {
    const auto p = urgency();
    auto run = [&](std::uint64_t seed) {
        WorkerState w({0, 0}, Duration::from_seconds(0.1), seed);
        w.latest_feedback = fb(40, 8);
        w.last_ack_time = SimTime{};
        std::vector<bool> d;
        for (int i = 0; i < 500; ++i) {
            worker_on_generate(w, upd(i));
            d.push_back(worker_on_tick(w, SimTime{}, &p).send.has_value());
            w.pending_update.reset();
        }
        return d;
    };
    CHECK(run(9) == run(9));
    CHECK(run(9) != run(10));
}

TEST_CASE("ack handling") {
    WorkerState w({0, 0}, Duration::from_seconds(0.1), 3);
    AckMessage a;
    a.feedback = fb(20, 8);
    a.weights = {1.0, 2.0};
    worker_on_ack(w, a, SimTime::from_seconds(10));
    CHECK(w.since_ack(SimTime::from_seconds(10)) == Duration{});
    CHECK(w.latest_feedback->active_clusters == 20);
    // Weights wait for the next generation boundary.
    CHECK(w.weights.empty());
    REQUIRE(w.staged_weights);

    AckMessage b;
    b.feedback = fb(5, 8);
    worker_on_ack(w, b, SimTime::from_seconds(11));
    CHECK(w.latest_feedback->active_clusters == 5);
    CHECK(w.since_ack(SimTime::from_seconds(11.5))->seconds() == doctest::Approx(0.5));

    worker_on_generate(w, upd(0));
    CHECK(w.weights == std::vector<double>{1.0, 2.0});
    CHECK_FALSE(w.staged_weights);
}

TEST_CASE("ps_receive") {
    PsParams p;
    SUBCASE("first update initializes the model") {
        ParameterServerState ps(p);
        auto u = upd(0, 5.0);
        u.reward = 100;
        auto ack = ps_receive(ps, p, u, SimTime{});
        CHECK(ps.initialized);
        CHECK(ps.w == std::vector<double>{5.0, 5.0});
        CHECK(std::isinf(ps.r_g));
        CHECK(ack.weights == ps.w);
        auto v = upd(1, 9.0);
        v.reward = -std::numeric_limits<double>::infinity();
        ps_receive(ps, p, v, SimTime{});
        CHECK(ps.w == std::vector<double>{5.0, 5.0});
    }
    SUBCASE("hand example") {
        ParameterServerState ps(p);
        ps.initialized = true;
        ps.w = {0, 0};
        ps.g_a = {1, 1};
        ps.g_a_count = 1;
        ps.r_g = 0.0;
        auto u = upd(0, 3.0);
        u.reward = 1.0;
        u.cluster = 4;
        auto ack = ps_receive(ps, p, u, SimTime{});
        CHECK(ps.g_a[0] == doctest::Approx(2.0));
        CHECK(ps.g_a[1] == doctest::Approx(2.0));
        CHECK(ps.w[0] == doctest::Approx(0.002));
        CHECK(ps.w[1] == doctest::Approx(0.002));
        CHECK(ps.r_g == 1.0);
        CHECK(ack.cluster == 4);
    }
    SUBCASE("closed gate still acks") {
        ParameterServerState ps(p);
        ps.initialized = true;
        ps.w = {1, 1};
        ps.r_g = 5.0;
        auto u = upd(0, 3.0);
        u.reward = 5.0;
        auto ack = ps_receive(ps, p, u, SimTime{});
        CHECK(ps.w == std::vector<double>{1, 1});
        CHECK(ack.weights == ps.w);
        CHECK(ps.accepted == 0);
    }
    SUBCASE("r_g never decreases") {
        ParameterServerState ps(p);
        std::mt19937_64 rng(5);
        std::normal_distribution<double> n;
        double prev = ps.r_g;
        for (int i = 0; i < 1000; ++i) {
            auto u = upd(i, n(rng));
            u.reward = n(rng);
            ps_receive(ps, p, u, SimTime{});
            CHECK(ps.r_g >= prev);
            prev = ps.r_g;
        }
    }
    SUBCASE("dimension mismatch") {
        ParameterServerState ps(p);
        ps_receive(ps, p, upd(0), SimTime{});
        auto u = upd(1);
        u.gradient = {1, 2, 3};
        CHECK_THROWS_AS(ps_receive(ps, p, u, SimTime{}), StructuralError);
    }
}
