#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "rve/airmodel.hpp"
#include "rve/config.hpp"
#include "rve/emitter.hpp"
#include "rve/eventheap.hpp"
#include "rve/geokit.hpp"
#include "rve/macsim.hpp"
#include "rve/telemetry.hpp"

namespace py = pybind11;
using namespace rve;

namespace {

py::tuple as_tuple(const geo::GeodeticCoord& g) { return py::make_tuple(g.lat, g.lon, g.height); }
py::tuple as_tuple(const geo::EcefCoord& p) { return py::make_tuple(p.x, p.y, p.z); }
py::tuple as_tuple(const geo::EnuCoord& p) { return py::make_tuple(p.e, p.n, p.u); }

air::LossModel parse_loss(const std::string& text) {
  if (text == "freespace") return air::FreeSpace{};
  if (text.rfind("logdist:", 0) == 0) return air::LogDistance{std::stod(text.substr(8))};
  throw py::value_error("loss model must be 'freespace' or 'logdist:<k>'");
}

// Config and trace setters live on a SimConfig so Python can use the same
// KEY=VALUE vocabulary as config files.
void set_key(mac::EngineConfig& cfg, const std::string& key, const std::string& value) {
  config::SimConfig sc{cfg, {}};
  config::apply(sc, key, value);
  cfg = sc.engine;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vehicular CSMA/CA channel emulator core";

  py::register_exception<mac::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<geo::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<mac::RealtimeOverrun>(m, "RealtimeOverrun", PyExc_RuntimeError);
  py::register_exception<EmptyQueueError>(m, "EmptyQueueError", PyExc_IndexError);

  // geodesy -----------------------------------------------------------------
  m.def("geodetic_to_ecef", [](double lat, double lon, double h) {
    return as_tuple(geo::geodetic_to_ecef(geo::make_geodetic(lat, lon, h)));
  }, py::arg("lat"), py::arg("lon"), py::arg("height"));
  m.def("ecef_to_geodetic", [](double x, double y, double z) {
    return as_tuple(geo::ecef_to_geodetic({x, y, z}));
  }, py::arg("x"), py::arg("y"), py::arg("z"));
  m.def("enu_to_ecef", [](double e, double n, double u, double lat, double lon, double h) {
    return as_tuple(geo::enu_to_ecef({e, n, u}, geo::make_geodetic(lat, lon, h)));
  }, py::arg("e"), py::arg("n"), py::arg("u"), py::arg("ref_lat"), py::arg("ref_lon"),
     py::arg("ref_height"));
  m.def("enu_to_geodetic", [](double e, double n, double u, double lat, double lon, double h) {
    return as_tuple(geo::enu_to_geodetic({e, n, u}, geo::make_geodetic(lat, lon, h)));
  }, py::arg("e"), py::arg("n"), py::arg("u"), py::arg("ref_lat"), py::arg("ref_lon"),
     py::arg("ref_height"));
  m.def("geodetic_to_enu", [](double lat, double lon, double h, double rlat, double rlon,
                              double rh) {
    return as_tuple(geo::geodetic_to_enu(geo::make_geodetic(lat, lon, h),
                                         geo::make_geodetic(rlat, rlon, rh)));
  }, py::arg("lat"), py::arg("lon"), py::arg("height"), py::arg("ref_lat"), py::arg("ref_lon"),
     py::arg("ref_height"));

  // traces ------------------------------------------------------------------
  py::class_<geo::BsmRecord>(m, "BsmRecord")
      .def_readonly("node_id", &geo::BsmRecord::node_id)
      .def_readonly("t", &geo::BsmRecord::t)
      .def_property_readonly("lat", [](const geo::BsmRecord& r) { return r.pos.lat; })
      .def_property_readonly("lon", [](const geo::BsmRecord& r) { return r.pos.lon; })
      .def_property_readonly("height", [](const geo::BsmRecord& r) { return r.pos.height; })
      .def_readonly("speed", &geo::BsmRecord::speed)
      .def_readonly("heading", &geo::BsmRecord::heading);

  py::class_<geo::MobilityTrace>(m, "MobilityTrace")
      .def_readonly("duration", &geo::MobilityTrace::duration)
      .def_property_readonly("node_ids", [](const geo::MobilityTrace& t) {
        std::vector<std::uint32_t> ids;
        for (const auto& n : t.nodes) ids.push_back(n.node_id);
        return ids;
      })
      .def("records", [](const geo::MobilityTrace& t, std::uint32_t id) {
        for (const auto& n : t.nodes)
          if (n.node_id == id) return n.records;
        throw py::key_error(std::to_string(id));
      }, py::arg("node_id"))
      .def("merged", &geo::MobilityTrace::merged)
      .def("__len__", [](const geo::MobilityTrace& t) { return t.nodes.size(); })
      .def("record_count", &geo::MobilityTrace::record_count);

  m.def("generate_grid_mobility", [](std::size_t n, double spacing, std::optional<std::size_t> row,
                                     std::optional<double> side, double speed, double heading,
                                     double duration, double period) {
    geo::GridOptions o;
    o.n = n;
    o.spacing = spacing;
    if (side && !row) {
      o.side = *side;
    } else {
      o.row_length = row.value_or(geo::kDefaultRowLength);
    }
    o.speed = speed;
    o.heading = heading;
    o.duration = duration;
    o.period = period;
    return geo::generate_grid_mobility(o);
  }, py::arg("n"), py::arg("spacing") = 2.0, py::arg("row_length") = py::none(),
     py::arg("side") = py::none(), py::arg("speed") = 0.0, py::arg("heading") = 90.0,
     py::arg("duration") = 40.0, py::arg("period") = 0.2);

  m.def("grid_footprint", [](std::size_t n, double spacing, std::optional<std::size_t> row,
                             std::optional<double> side) {
    geo::GridOptions o;
    o.n = n;
    o.spacing = spacing;
    if (side && !row) {
      o.side = *side;
    } else {
      o.row_length = row.value_or(geo::kDefaultRowLength);
    }
    const auto l = geo::grid_layout(o);
    return py::dict(py::arg("row_length") = l.row_length, py::arg("rows") = l.rows,
                    py::arg("width") = l.width, py::arg("height") = l.height,
                    py::arg("diagonal") = l.diagonal);
  }, py::arg("n"), py::arg("spacing") = 2.0, py::arg("row_length") = py::none(),
     py::arg("side") = py::none());

  m.def("generate_disc_mobility", [](std::size_t n, double radius, double vmin, double vmax,
                                     double change_period, double duration, double period,
                                     std::uint64_t seed) {
    geo::DiscOptions o;
    o.n = n;
    o.radius = radius;
    o.speed_range = {vmin, vmax};
    o.change_period = change_period;
    o.duration = duration;
    o.period = period;
    o.seed = seed;
    return geo::generate_disc_mobility(o);
  }, py::arg("n"), py::arg("radius") = 150.0, py::arg("min_speed") = 0.0,
     py::arg("max_speed") = 20.0, py::arg("change_period") = 1.0, py::arg("duration") = 40.0,
     py::arg("period") = 0.2, py::arg("seed") = 1);

  m.def("parse_ns2_trace", [](const std::string& text, double period) {
    geo::Ns2Options o;
    o.period = period;
    return geo::parse_ns2_trace(text, o);
  }, py::arg("text"), py::arg("period") = 0.1);
  m.def("split_per_node", &geo::split_per_node, py::arg("trace"), py::arg("directory"));
  m.def("load_trace_dir", &geo::load_trace_dir, py::arg("directory"));

  // heap --------------------------------------------------------------------
  py::class_<PacketQueue>(m, "PacketQueue")
      .def(py::init<>())
      .def("insert", [](PacketQueue& q, std::uint32_t node, Ticks tx) {
        ScheduledPacket p;
        p.bsm.node_id = node;
        p.tx_time = tx;
        q.insert(std::move(p));
      }, py::arg("node_id"), py::arg("tx_ns"))
      .def("pop_min", [](PacketQueue& q) {
        const auto p = q.pop_min();
        return py::make_tuple(p.node_id(), p.tx_time);
      })
      .def("peek", [](const PacketQueue& q) {
        const auto& p = q.peek();
        return py::make_tuple(p.node_id(), p.tx_time);
      })
      .def("is_heap", &PacketQueue::is_heap)
      .def("__len__", &PacketQueue::size);

  // receiver model ----------------------------------------------------------
  m.def("path_loss_db", [](double d, const std::string& model) {
    return air::path_loss_db(d, parse_loss(model), air::RadioParams{});
  }, py::arg("distance_m"), py::arg("model") = "freespace");
  m.def("rssi_dbm", [](double d, const std::string& model, double tx_dbm, double cable_db) {
    air::RadioParams r;
    r.tx_power_dbm = tx_dbm;
    r.cable_loss_db = cable_db;
    return air::rssi_dbm(r, d, parse_loss(model));
  }, py::arg("distance_m"), py::arg("model") = "freespace", py::arg("tx_power_dbm") = 20.0,
     py::arg("cable_loss_db") = 3.0);
  m.def("sinr_db", [](double s, double i, double n) { return air::sinr_db({s, i, n}); },
        py::arg("signal_mw"), py::arg("interference_mw"), py::arg("noise_mw") = 0.0);
  m.def("resolve_reception", [](const std::vector<std::pair<std::uint32_t, double>>& parts,
                                double threshold_db, const std::string& model) {
    std::vector<air::Contender> c;
    for (const auto& [id, d] : parts) c.push_back({id, d, 0});
    return air::resolve_reception(c, air::RadioParams{}, parse_loss(model), threshold_db);
  }, py::arg("participants"), py::arg("sinr_th_db") = 3.0, py::arg("model") = "freespace");

  // engine ------------------------------------------------------------------
  py::enum_<mac::JitterMode>(m, "JitterMode")
      .value("NONE", mac::JitterMode::None)
      .value("SYNC", mac::JitterMode::Sync)
      .value("UNSYNC", mac::JitterMode::Unsync);

  py::class_<mac::EngineConfig>(m, "EngineConfig")
      .def(py::init<>())
      .def_readwrite("n_nodes", &mac::EngineConfig::n_nodes)
      .def_readwrite("slot_ns", &mac::EngineConfig::slot)
      .def_readwrite("sifs_ns", &mac::EngineConfig::sifs)
      .def_readwrite("aifsn", &mac::EngineConfig::aifsn)
      .def_readwrite("cw", &mac::EngineConfig::cw)
      .def_readwrite("pd_ns", &mac::EngineConfig::pd)
      .def_readwrite("ptxtime_ns", &mac::EngineConfig::ptxtime)
      .def_readwrite("tx_rate_hz", &mac::EngineConfig::tx_rate_hz)
      .def_readwrite("sinr_th_db", &mac::EngineConfig::sinr_th_db)
      .def_readwrite("jitter_mode", &mac::EngineConfig::jitter_mode)
      .def_readwrite("jitter_step_ns", &mac::EngineConfig::jitter_step)
      .def_readwrite("seed", &mac::EngineConfig::seed)
      .def_readwrite("receiver_model_enabled", &mac::EngineConfig::receiver_model_enabled)
      .def_readwrite("log_enabled", &mac::EngineConfig::log_enabled)
      .def_readwrite("duration_ns", &mac::EngineConfig::duration)
      .def("set", &set_key, py::arg("key"), py::arg("value"),
           "Apply a config-file KEY=VALUE setting, e.g. set('LOSS_MODEL', 'freespace').")
      .def("validate", &mac::EngineConfig::validate)
      .def("__repr__", [](const mac::EngineConfig& c) {
        return config::to_text(config::SimConfig{c, {}});
      });

  m.def("compute_aifs", &mac::compute_aifs, py::arg("config"));

  py::class_<TransmissionRecord>(m, "TransmissionRecord")
      .def_readonly("start_ns", &TransmissionRecord::start)
      .def_readonly("duration_ns", &TransmissionRecord::duration)
      .def_readonly("damaged", &TransmissionRecord::damaged)
      .def_readonly("winner", &TransmissionRecord::winner)
      .def_property_readonly("participants", [](const TransmissionRecord& r) {
        py::list out;
        for (const auto& p : r.participants)
          out.append(py::make_tuple(p.node_id, p.tx_time, p.outcome == Outcome::Success));
        return out;
      })
      .def("__eq__", [](const TransmissionRecord& a, const TransmissionRecord& b) { return a == b; });

  py::class_<telemetry::MetricsWindow>(m, "MetricsWindow")
      .def_readonly("start_ns", &telemetry::MetricsWindow::window_start)
      .def_readonly("length_ns", &telemetry::MetricsWindow::window_len)
      .def_readonly("busy_ns", &telemetry::MetricsWindow::busy)
      .def_readonly("tx_count", &telemetry::MetricsWindow::tx_count)
      .def_readonly("error_count", &telemetry::MetricsWindow::error_count)
      .def_property_readonly("cbr", [](const telemetry::MetricsWindow& w) { return telemetry::cbr(w); })
      .def_property_readonly("per", [](const telemetry::MetricsWindow& w) { return telemetry::per(w); });

  py::class_<telemetry::RunSummary>(m, "RunSummary")
      .def_readonly("mean_cbr", &telemetry::RunSummary::mean_cbr)
      .def_readonly("mean_per", &telemetry::RunSummary::mean_per)
      .def_readonly("tx_total", &telemetry::RunSummary::tx_total)
      .def_readonly("error_total", &telemetry::RunSummary::error_total)
      .def_readonly("records", &telemetry::RunSummary::records)
      .def_readonly("flushed_records", &telemetry::RunSummary::flushed_records)
      .def_readonly("flushed_packets", &telemetry::RunSummary::flushed_packets)
      .def_readonly("clamped_distances", &telemetry::RunSummary::clamped_distances)
      .def_readonly("wall_clock_s", &telemetry::RunSummary::wall_clock_s)
      .def_readonly("virtual_duration_s", &telemetry::RunSummary::virtual_duration_s);

  py::class_<mac::RunResult>(m, "RunResult")
      .def_readonly("records", &mac::RunResult::records)
      .def_readonly("windows", &mac::RunResult::windows)
      .def_readonly("summary", &mac::RunResult::summary)
      .def("export_csv", [](const mac::RunResult& r, const std::filesystem::path& p) {
        telemetry::export_csv(p, r.summary, r.windows);
      }, py::arg("path"))
      .def("csv_text", [](const mac::RunResult& r) {
        std::ostringstream out;
        telemetry::export_csv(out, r.summary, r.windows);
        return out.str();
      });

  m.def("run", [](const mac::EngineConfig& cfg, const geo::MobilityTrace& trace, bool with_log) {
    std::ostringstream log;
    mac::RunResult result;
    {
      py::gil_scoped_release release;
      auto c = cfg;
      if (with_log) c.log_enabled = true;
      result = mac::run(c, trace, with_log ? &log : nullptr);
    }
    py::object text = py::none();
    if (with_log) text = py::str(log.str());
    return py::make_tuple(std::move(result), text);
  }, py::arg("config"), py::arg("trace"), py::arg("with_log") = false,
     "Run in virtual time. Returns (RunResult, log text or None).");

  m.def("run_realtime", [](const mac::EngineConfig& cfg, const geo::MobilityTrace& trace,
                           std::function<void(const TransmissionRecord&)> consumer, double speed,
                           double max_lag_ms) {
    mac::RealtimeOptions opts;
    opts.speed = speed;
    opts.max_lag = std::chrono::microseconds(static_cast<std::int64_t>(max_lag_ms * 1000));
    // Copies of the callback made while the GIL is released must not touch
    // Python reference counts, so share one owner.
    auto fn = std::make_shared<std::function<void(const TransmissionRecord&)>>(std::move(consumer));
    auto wrapped = [fn](const TransmissionRecord& r) {
      py::gil_scoped_acquire acquire;
      (*fn)(r);
    };
    py::gil_scoped_release release;
    return mac::run_realtime(cfg, trace, wrapped, opts);
  }, py::arg("config"), py::arg("trace"), py::arg("consumer"), py::arg("speed") = 1.0,
     py::arg("max_lag_ms") = 50.0);

  m.def("read_telemetry_csv", [](const std::filesystem::path& p) {
    const auto s = telemetry::read_csv(p);
    return py::dict(py::arg("t_ms") = s.t_ms, py::arg("cbr") = s.cbr, py::arg("per") = s.per,
                    py::arg("footer") = s.footer);
  }, py::arg("path"));
}
