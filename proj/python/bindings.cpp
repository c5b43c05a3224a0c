#include <filesystem>
#include <fstream>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "olaf/aom.hpp"
#include "olaf/config.hpp"
#include "olaf/endpoint.hpp"
#include "olaf/errors.hpp"
#include "olaf/report.hpp"
#include "olaf/sim.hpp"
#include "olaf/verify.hpp"
#include "olaf/wire.hpp"

namespace py = pybind11;
using namespace olaf;

namespace {

// Round-trip through the json module; the structures are small.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

bool looks_like_json(const std::string& s) {
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        return c == '{';
    }
    return false;
}

config::ScenarioConfig scenario_from(const std::string& path_or_text) {
    if (looks_like_json(path_or_text)) return config::parse(path_or_text);
    return config::load(path_or_text);
}

verify::VerifierConfig verifier_from(const std::string& path_or_text) {
    if (looks_like_json(path_or_text)) return verify::parse_config(path_or_text);
    return verify::load_config(path_or_text);
}

py::dict simulate(const std::string& source, std::optional<std::uint64_t> seed, std::optional<std::uint32_t> reps) {
    const auto cfg = scenario_from(source);
    const std::uint64_t base = seed.value_or(cfg.scenario.run.seed);
    const std::uint32_t k = reps.value_or(cfg.scenario.run.repetitions);
    std::vector<std::pair<std::string, sim::Scenario>> variants;
    if (cfg.variants.empty()) variants.emplace_back("run", cfg.scenario);
    for (const auto& v : cfg.variants)
        variants.emplace_back(v.name, sim::with_variant(cfg.scenario, v.discipline, v.tx_control));
    std::vector<std::pair<sim::Scenario, std::uint64_t>> jobs;
    for (const auto& [name, s] : variants)
        for (std::uint32_t r = 0; r < k; ++r) jobs.emplace_back(s, base + r);
    std::vector<sim::RunResult> results;
    {
        py::gil_scoped_release release;
        results = sim::run_parallel(jobs, sim::thread_budget());
    }
    py::dict out;
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
        py::list runs;
        for (std::uint32_t r = 0; r < k; ++r) {
            const auto& m = results[vi * k + r].metrics;
            auto j = report::scalars(m, variants[vi].second);
            j["per_cluster_avg_aom_s"] = m.fairness().per_cluster_avg_aom;
            j["event_digest"] = m.event_digest;
            runs.append(to_py(j));
        }
        out[py::str(variants[vi].first)] = runs;
    }
    return out;
}

py::object verify_config(const std::string& source) {
    const auto cfg = verifier_from(source);
    verify::Verdict v;
    {
        py::gil_scoped_release release;
        v = verify::check_fairness(cfg);
    }
    return to_py(report::verdict_json(v));
}

double tx_prob(std::uint32_t active, std::uint32_t q_max, std::optional<double> since_ack_s, double delta_T_s,
               const std::string& mode, double v) {
    VMode m = VMode::Urgency;
    if (mode == "fairness") m = VMode::Fairness;
    else if (mode == "custom") m = VMode::Custom;
    else if (mode != "urgency") throw ConfigError("mode must be urgency, fairness or custom");
    const auto p = TxControlParams::make(Duration::from_seconds(delta_T_s), m, v);
    std::optional<Duration> since;
    if (since_ack_s) since = Duration::from_seconds(*since_ack_s);
    return tx_probability(QueueFeedback{active, q_max, 0, SimTime{}}, since, p);
}

aom::Series series_from(const std::vector<std::pair<double, double>>& gen_deliver, double horizon_s) {
    std::vector<std::pair<SimTime, SimTime>> gd;
    for (auto [a, d] : gen_deliver) gd.push_back({SimTime::from_seconds(a), SimTime::from_seconds(d)});
    aom::Series s;
    s.deliveries = aom::from_arrivals(gd);
    s.horizon = SimTime::from_seconds(horizon_s);
    return s;
}

py::dict header_dict(const wire::Header& h) {
    py::dict d;
    d["cluster"] = h.cluster;
    d["worker"] = h.worker;
    d["gen_timestamp"] = h.gen_timestamp;
    d["agg_count"] = h.agg_count;
    d["reward"] = h.reward;
    return d;
}

wire::Header header_from(std::uint16_t cluster, std::uint16_t worker, std::uint64_t gen, std::uint16_t agg,
                         float reward) {
    wire::Header h;
    h.cluster = cluster;
    h.worker = worker;
    h.gen_timestamp = gen;
    h.agg_count = agg;
    h.reward = reward;
    return h;
}

std::span<const std::uint8_t> as_span(const py::bytes& b, std::string& hold) {
    hold = b;
    return {reinterpret_cast<const std::uint8_t*>(hold.data()), hold.size()};
}

py::bytes to_bytes(const std::vector<std::uint8_t>& v) { return py::bytes(reinterpret_cast<const char*>(v.data()), v.size()); }

}  // namespace

PYBIND11_MODULE(_olaf, m) {
    m.doc() = "Olaf queue simulator, AoM metrics, wire codec and bounded verifier";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<EncodeError>(m, "EncodeError", PyExc_ValueError);
    py::register_exception<verify::BoundTooLarge>(m, "BoundTooLarge", PyExc_RuntimeError);
    static py::exception<DecodeError> decode_error(m, "DecodeError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const DecodeError& e) {
            py::object err = py::reinterpret_borrow<py::object>(decode_error.ptr())(e.what());
            err.attr("offset") = e.offset();
            PyErr_SetObject(decode_error.ptr(), err.ptr());
        } catch (const ContractViolation& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        }
    });

    m.def("load_config", [](const std::string& source) {
        return py::module_::import("json").attr("loads")(config::serialize(scenario_from(source)));
    }, py::arg("source"), "Parse a scenario (path or JSON text) and return it with defaults filled in.");

    m.def("simulate", &simulate, py::arg("source"), py::arg("seed") = py::none(), py::arg("repetitions") = py::none(),
          "Run every variant of a scenario; returns {variant: [per-run scalars]}.");

    m.def("verify", &verify_config, py::arg("source"), "Run the bounded fairness verifier on a config.");

    m.def("tx_probability", &tx_prob, py::arg("active_clusters"), py::arg("q_max"), py::arg("since_ack_s"),
          py::arg("delta_T_s") = 0.4, py::arg("mode") = "urgency", py::arg("v") = 0.0);

    m.def("jain_fairness", &aom::jain_fairness, py::arg("values"));

    m.def("avg_aom", [](const std::vector<std::pair<double, double>>& gd, double horizon_s) {
        return aom::avg_aom_seconds(series_from(gd, horizon_s));
    }, py::arg("gen_deliver"), py::arg("horizon_s"), "Time-averaged age in seconds for (gen, deliver) pairs.");

    m.def("peak_aom", [](const std::vector<std::pair<double, double>>& gd, double horizon_s) {
        std::vector<double> out;
        for (auto d : aom::peak_aom(series_from(gd, horizon_s))) out.push_back(d.seconds());
        return out;
    }, py::arg("gen_deliver"), py::arg("horizon_s"));

    m.def("encode_update", [](std::uint16_t cluster, std::uint16_t worker, std::uint64_t gen_ps, std::uint16_t agg,
                              float reward, std::vector<float> gradient) {
        return to_bytes(wire::encode_update({header_from(cluster, worker, gen_ps, agg, reward), std::move(gradient)}));
    }, py::arg("cluster"), py::arg("worker"), py::arg("gen_timestamp"), py::arg("agg_count"), py::arg("reward"),
       py::arg("gradient"));

    m.def("decode_update", [](const py::bytes& b) {
        std::string hold;
        const auto f = wire::decode_update(as_span(b, hold));
        py::dict d = header_dict(f.header);
        d["gradient"] = f.gradient;
        return d;
    }, py::arg("frame"));

    m.def("encode_ack", [](std::uint16_t cluster, std::uint16_t worker, std::uint64_t gen_ps, std::uint16_t agg,
                           float reward, std::uint32_t queue_utilization, std::uint16_t active_clusters,
                           std::vector<float> gradient) {
        wire::AckFrame f;
        f.header = header_from(cluster, worker, gen_ps, agg, reward);
        f.queue_utilization = queue_utilization;
        f.active_clusters = active_clusters;
        f.gradient = std::move(gradient);
        return to_bytes(wire::encode_ack(f));
    }, py::arg("cluster"), py::arg("worker"), py::arg("gen_timestamp"), py::arg("agg_count"), py::arg("reward"),
       py::arg("queue_utilization"), py::arg("active_clusters"), py::arg("gradient"));

    m.def("decode_ack", [](const py::bytes& b) {
        std::string hold;
        const auto f = wire::decode_ack(as_span(b, hold));
        py::dict d = header_dict(f.header);
        d["queue_utilization"] = f.queue_utilization;
        d["active_clusters"] = f.active_clusters;
        d["gradient"] = f.gradient;
        return d;
    }, py::arg("frame"));
}
