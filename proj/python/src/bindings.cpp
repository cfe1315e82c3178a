#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "afcsim/afc_memory.hpp"
#include "afcsim/analysis.hpp"
#include "afcsim/config.hpp"
#include "afcsim/runner.hpp"
#include "afcsim/simulation.hpp"

namespace py = pybind11;
using namespace afcsim;

namespace {

ExperimentConfig config_from_text(const std::string& text) {
    auto doc = ConfigDocument::parse(text);
    return make_scenario(std::move(doc)).config;
}

py::dict correlation_dict(const CorrelationResult& r) {
    py::dict d;
    d["g2"] = r.g2;
    d["sigma_g2"] = r.sigma_g2;
    d["coincidences"] = r.coincidences;
    d["noise_counts"] = r.noise_counts;
    d["accidentals"] = r.accidentals;
    d["center_ns"] = to_ns(r.center);
    d["width_ns"] = to_ns(r.window);
    d["p_i"] = r.p_i;
    d["p_si"] = r.p_si;
    d["p_s"] = r.p_s;
    return d;
}

py::dict report_dict(const AnalysisReport& r) {
    py::dict d;
    d["acquisition_s"] = r.acquisition_s;
    d["heralds"] = r.heralds;
    d["signal_clicks"] = r.signal_clicks;
    d["input"] = correlation_dict(r.input);
    d["echo"] = r.echo ? py::object(correlation_dict(*r.echo)) : py::none();
    d["auto_signal"] = r.auto_signal ? py::object(correlation_dict(*r.auto_signal)) : py::none();
    d["auto_idler"] = r.auto_idler ? py::object(correlation_dict(*r.auto_idler)) : py::none();
    d["net_coincidence_rate"] = r.net_coincidence_rate;
    return d;
}

std::vector<std::pair<int, std::int64_t>> record_pairs(const std::vector<TimestampRecord>& records) {
    std::vector<std::pair<int, std::int64_t>> out;
    out.reserve(records.size());
    for (const auto& r : records) out.emplace_back(r.channel, r.time.count());
    return out;
}

TimestampFormat parse_format(const std::string& text) {
    if (text == "csv") return TimestampFormat::csv;
    if (text == "binary") return TimestampFormat::binary;
    throw ConfigError("format must be csv or binary, got '" + text + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Heralded single-photon storage simulator core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
    py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_RuntimeError);

    m.def(
        "afc_efficiency",
        [](double gamma_khz, double delta_khz, double depth, double background) {
            CombParams c;
            c.gamma_khz = gamma_khz;
            c.delta_khz = delta_khz;
            c.depth = depth;
            c.background = background;
            c.validate();
            return afc_efficiency_analytic(c);
        },
        py::arg("gamma_khz"), py::arg("delta_khz"), py::arg("depth"), py::arg("background"));
    m.def(
        "afc_efficiency_numeric",
        [](double gamma_khz, double delta_khz, double depth, double background) {
            CombParams c;
            c.gamma_khz = gamma_khz;
            c.delta_khz = delta_khz;
            c.depth = depth;
            c.background = background;
            c.validate();
            return afc_efficiency_numeric(comb_profile(c, gamma_khz / 40.0), c.storage_time());
        },
        py::arg("gamma_khz"), py::arg("delta_khz"), py::arg("depth"), py::arg("background"));
    m.def("cauchy_schwarz_R", &cauchy_schwarz_R, py::arg("g2_si"), py::arg("g2_ss"), py::arg("g2_ii"));
    m.def("visibility_from_g2", &visibility_from_g2, py::arg("g2_si"));
    m.def("g2_input_prediction", &g2_input_prediction, py::arg("g2_echo"), py::arg("ratio"));

    m.def(
        "simulate",
        [](const std::string& config_text) {
            const auto config = config_from_text(config_text);
            SimulationOutput out;
            {
                py::gil_scoped_release release;
                out = simulate(config);
            }
            py::dict d;
            d["records"] = record_pairs(out.records);
            d["pair_candidates"] = out.tally.pair_candidates;
            d["echoes_at_detector"] = out.tally.echoes_at_detector;
            d["pump_off_intervals"] = out.pump_off.intervals().size();
            return d;
        },
        py::arg("config_text"),
        "Runs one acquisition from configuration text. Records are (channel, time_ps) pairs.");

    m.def(
        "run_point",
        [](const std::string& config_text) {
            const auto config = config_from_text(config_text);
            std::optional<PointResult> p;
            {
                py::gil_scoped_release release;
                p = run_point(config);
            }
            py::dict d;
            d["report"] = report_dict(p->report);
            d["input"] = report_dict(p->input_report());
            d["ratio_nonresonant"] = p->input_truth().ratio_nonresonant;
            if (const auto eta = measured_efficiency(*p)) d["eta_measured"] = py::make_tuple(eta->eta, eta->sigma);
            return d;
        },
        py::arg("config_text"), "Simulates and analyzes one operating point.");

    m.def(
        "run_scenario",
        [](const std::filesystem::path& config, std::optional<std::filesystem::path> out_dir,
           std::optional<std::uint64_t> seed, std::optional<std::string> format) {
            Overrides o;
            o.out_dir = std::move(out_dir);
            o.seed = seed;
            o.format = std::move(format);
            const auto scenario = load_scenario(config, o);
            RunResult r;
            {
                py::gil_scoped_release release;
                r = run_scenario(scenario);
            }
            return r.files;
        },
        py::arg("config"), py::arg("out_dir") = py::none(), py::arg("seed") = py::none(),
        py::arg("format") = py::none(), "Runs a scenario file like the command-line tool and returns the written files.");

    m.def(
        "read_timestamps",
        [](const std::filesystem::path& path, const std::string& format) {
            return record_pairs(read_timestamps(path, parse_format(format)).records);
        },
        py::arg("path"), py::arg("format") = "csv");
    m.def(
        "write_timestamps",
        [](const std::vector<std::pair<int, std::int64_t>>& records, const std::filesystem::path& path,
           const std::string& format) {
            std::vector<TimestampRecord> out;
            out.reserve(records.size());
            for (const auto& [ch, t] : records) {
                if (ch < 0 || ch > 255) throw FormatError("channel out of range: " + std::to_string(ch));
                if (t < 0) throw FormatError("negative time: " + std::to_string(t));
                out.push_back({static_cast<std::uint8_t>(ch), Time{t}});
            }
            write_timestamps(out, path, parse_format(format));
        },
        py::arg("records"), py::arg("path"), py::arg("format") = "csv");
}
