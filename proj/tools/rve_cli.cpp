// rve: mobility generation, coordinate conversion, trace splitting,
// channel simulation and plotting.

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "rve/config.hpp"
#include "rve/emitter.hpp"
#include "rve/geokit.hpp"
#include "rve/macsim.hpp"
#include "rve/plot.hpp"
#include "rve/telemetry.hpp"

namespace fs = std::filesystem;
using namespace rve;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Raised for bad invocations detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RefFlags {
  double lat = geo::kDefaultReference.lat;
  double lon = geo::kDefaultReference.lon;
  double h = geo::kDefaultReference.height;

  void add(CLI::App* cmd, bool required) {
    auto* a = cmd->add_option("--ref-lat", lat, "Reference latitude, degrees");
    auto* b = cmd->add_option("--ref-lon", lon, "Reference longitude, degrees");
    auto* c = cmd->add_option("--ref-h", h, "Reference height, m");
    if (required) {
      a->required();
      b->required();
      c->required();
    }
  }
  geo::GeodeticCoord coord() const { return geo::make_geodetic(lat, lon, h); }
};

std::vector<geo::BsmRecord> read_rows(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read {}", path.string()));
  return geo::read_trace_csv(in);
}

bool looks_like_csv(const fs::path& path) { return path.extension() == ".csv"; }

geo::MobilityTrace load_input(const fs::path& path, const std::string& from, double period,
                              const geo::GeodeticCoord& ref) {
  const bool ns2 = from == "ns2" || (from == "auto" && !looks_like_csv(path));
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot read {}", path.string()));
  if (ns2) return geo::parse_ns2_trace(in, {period, ref, std::nullopt});
  if (from == "local" || from == "auto") {
    std::vector<geo::BsmRecord> rows;
    for (const auto& r : geo::read_local_csv(in)) rows.push_back(geo::to_geodetic(r, ref));
    return geo::group_by_node(std::move(rows));
  }
  return geo::group_by_node(geo::read_trace_csv(in));
}

template <class F>
void with_output(const std::string& path, F&& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
  body(out);
  if (!out) throw std::runtime_error(fmt::format("failed writing {}", path));
}

// One datagram per stream line, to a HOST:PORT given on the command line.
class UdpSink {
 public:
  explicit UdpSink(const std::string& target) {
    const auto colon = target.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == target.size())
      throw UsageError(fmt::format("--udp expects HOST:PORT, got '{}'", target));
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_DGRAM;
    addrinfo* res = nullptr;
    const int rc = getaddrinfo(target.substr(0, colon).c_str(), target.substr(colon + 1).c_str(), &hints, &res);
    if (rc != 0) throw UsageError(fmt::format("--udp {}: {}", target, gai_strerror(rc)));
    fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
      ::close(fd_);
      fd_ = -1;
    }
    freeaddrinfo(res);
    if (fd_ < 0) throw std::runtime_error(fmt::format("cannot open datagram socket to {}", target));
  }
  UdpSink(const UdpSink&) = delete;
  UdpSink& operator=(const UdpSink&) = delete;
  ~UdpSink() { ::close(fd_); }

  // Datagrams are fire-and-forget; a receiver that is not listening yet is
  // not an error.
  void send(const std::string& line) const { (void)::send(fd_, line.data(), line.size(), 0); }

 private:
  int fd_ = -1;
};

std::string stream_line(const TransmissionRecord& rec) {
  std::string ids;
  for (const auto& p : rec.participants) {
    if (!ids.empty()) ids += ';';
    ids += std::to_string(p.node_id);
  }
  const char* status = !rec.damaged ? "success" : rec.winner ? "captured" : "damaged";
  return fmt::format("{},{},{},{}\n", to_us(rec.start), to_us(rec.duration), status, ids);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicular CSMA/CA channel emulator"};
  app.require_subcommand(1);

  // gen ---------------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate synthetic mobility traces");
  gen->require_subcommand(1);

  geo::GridOptions grid;
  std::size_t grid_row = geo::kDefaultRowLength;
  std::optional<double> grid_side;
  std::string grid_out = "traces";
  RefFlags grid_ref;
  auto* gen_grid = gen->add_subcommand("grid", "Constant-velocity grid");
  gen_grid->add_option("--nodes", grid.n, "Node count")->required()->check(CLI::PositiveNumber);
  gen_grid->add_option("--spacing", grid.spacing, "Spacing between nodes, m")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* row_opt = gen_grid->add_option("--row-length", grid_row, "Nodes per row")
                      ->capture_default_str()
                      ->check(CLI::PositiveNumber);
  gen_grid->add_option("--side", grid_side, "Square side, m; sets row length to floor(side/spacing)+1")
      ->excludes(row_opt);
  gen_grid->add_option("--speed", grid.speed, "Common speed, m/s")->capture_default_str();
  gen_grid->add_option("--heading", grid.heading, "Common heading, degrees")->capture_default_str();
  gen_grid->add_option("--duration", grid.duration, "Trace length, s")->capture_default_str();
  gen_grid->add_option("--period", grid.period, "Sampling period, s")->capture_default_str();
  gen_grid->add_option("--out", grid_out, "Output directory")->capture_default_str();
  grid_ref.add(gen_grid, false);

  geo::DiscOptions disc;
  std::string disc_out = "traces";
  RefFlags disc_ref;
  auto* gen_disc = gen->add_subcommand("disc", "Random walk inside a disc");
  gen_disc->add_option("--nodes", disc.n, "Node count")->required()->check(CLI::PositiveNumber);
  gen_disc->add_option("--radius", disc.radius, "Disc radius, m")->capture_default_str();
  gen_disc->add_option("--min-speed", disc.speed_range.first, "m/s")->capture_default_str();
  gen_disc->add_option("--max-speed", disc.speed_range.second, "m/s")->capture_default_str();
  gen_disc->add_option("--change-period", disc.change_period, "Seconds between velocity redraws")
      ->capture_default_str();
  gen_disc->add_option("--duration", disc.duration, "Trace length, s")->capture_default_str();
  gen_disc->add_option("--period", disc.period, "Sampling period, s")->capture_default_str();
  gen_disc->add_option("--seed", disc.seed, "RNG seed")->capture_default_str();
  gen_disc->add_option("--out", disc_out, "Output directory")->capture_default_str();
  disc_ref.add(gen_disc, false);

  // convert -----------------------------------------------------------------
  std::string conv_in, conv_out, conv_from = "auto";
  double conv_period = 0.1;
  bool conv_inverse = false;
  RefFlags conv_ref;
  auto* convert = app.add_subcommand("convert", "Convert local (ENU) traces to geodetic CSV");
  convert->add_option("input", conv_in, "NS2 trace or local CSV")->required();
  convert->add_option("-o,--output", conv_out, "Output CSV (default stdout)");
  convert->add_option("--from", conv_from, "Input format")
      ->check(CLI::IsMember({"auto", "ns2", "local"}))
      ->capture_default_str();
  convert->add_option("--period", conv_period, "NS2 sampling period, s")->capture_default_str();
  convert->add_flag("--inverse", conv_inverse, "Geodetic CSV to local CSV");
  conv_ref.add(convert, true);

  // split -------------------------------------------------------------------
  std::string split_in, split_out = "traces", split_from = "auto";
  double split_period = 0.1;
  RefFlags split_ref;
  auto* split = app.add_subcommand("split", "Split a trace into node_<id>.csv files");
  split->add_option("input", split_in, "NS2 trace or geodetic CSV")->required();
  split->add_option("--out", split_out, "Output directory")->capture_default_str();
  split->add_option("--from", split_from, "Input format")
      ->check(CLI::IsMember({"auto", "ns2", "geodetic"}))
      ->capture_default_str();
  split->add_option("--period", split_period, "NS2 sampling period, s")->capture_default_str();
  split_ref.add(split, false);

  // sim ---------------------------------------------------------------------
  std::string sim_config, sim_scenario, sim_csv = "telemetry.csv", sim_log;
  std::vector<std::string> sim_sets;
  bool sim_realtime = false, sim_print_config = false;
  double rt_speed = 1.0, rt_max_lag_ms = 50.0;
  auto* sim = app.add_subcommand("sim", "Run the channel emulator");
  sim->add_option("-c,--config", sim_config, "KEY=VALUE config file");
  sim->add_option("--set", sim_sets, "Override a config key (KEY=VALUE), repeatable");
  sim->add_option("--scenario", sim_scenario, "Trace directory (overrides SCENARIO)");
  sim->add_option("--csv", sim_csv, "Telemetry CSV output")->capture_default_str();
  sim->add_option("--log", sim_log, "Event log output (enables LOG)");
  auto* rt_flag = sim->add_flag("--realtime", sim_realtime, "Stream records to stdout at wall-clock pace");
  std::string sim_udp;
  sim->add_option("--udp", sim_udp, "Also send each streamed record as a datagram to HOST:PORT")
      ->needs(rt_flag);
  sim->add_option("--speed", rt_speed, "Realtime speed factor")->capture_default_str();
  sim->add_option("--max-lag-ms", rt_max_lag_ms, "Realtime overrun threshold")->capture_default_str();
  sim->add_flag("--print-config", sim_print_config, "Print the effective config and exit");

  // plot --------------------------------------------------------------------
  std::vector<std::string> plot_in;
  std::string plot_out = ".";
  auto* plot_cmd = app.add_subcommand("plot", "Render telemetry CSVs as cbr.svg and per.svg");
  plot_cmd->add_option("csv", plot_in, "Telemetry CSV files")->required();
  plot_cmd->add_option("--out", plot_out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_grid) {
      grid.ref = grid_ref.coord();
      if (grid_side) {
        grid.side = *grid_side;
        grid.row_length.reset();
      } else {
        grid.row_length = grid_row;
      }
      const auto layout = geo::grid_layout(grid);
      const auto files = geo::split_per_node(geo::generate_grid_mobility(grid), grid_out);
      fmt::print("{} files written to {}\n", files.size(), grid_out);
      fmt::print("footprint {} x {} m ({} per row, {} rows), max separation {:.4g} m\n",
                 layout.width, layout.height, layout.row_length, layout.rows, layout.diagonal);
    } else if (*gen_disc) {
      disc.ref = disc_ref.coord();
      const auto files = geo::split_per_node(geo::generate_disc_mobility(disc), disc_out);
      fmt::print("{} files written to {}\n", files.size(), disc_out);
    } else if (*convert) {
      const auto ref = conv_ref.coord();
      if (conv_inverse) {
        const auto rows = read_rows(conv_in);
        std::vector<geo::LocalRecord> local;
        local.reserve(rows.size());
        for (const auto& r : rows) local.push_back(geo::to_local(r, ref));
        with_output(conv_out, [&](std::ostream& o) { geo::write_local_csv(o, local); });
      } else {
        const auto trace = load_input(conv_in, conv_from, conv_period, ref);
        with_output(conv_out, [&](std::ostream& o) { geo::write_trace_csv(o, trace.merged()); });
      }
    } else if (*split) {
      const std::string from =
          split_from == "auto" && looks_like_csv(split_in) ? "geodetic" : split_from;
      const auto trace = load_input(split_in, from, split_period, split_ref.coord());
      const auto files = geo::split_per_node(trace, split_out);
      fmt::print("{} files written to {}\n", files.size(), split_out);
    } else if (*sim) {
      config::SimConfig cfg;
      if (!sim_config.empty()) cfg = config::load(sim_config);
      for (const auto& s : sim_sets) {
        const auto [k, v] = config::split_assignment(s);
        config::apply(cfg, k, v);
        if (k == "SCENARIO" && !sim_config.empty() && cfg.scenario.is_relative())
          cfg.scenario = fs::path(sim_config).parent_path() / cfg.scenario;
      }
      if (!sim_scenario.empty()) cfg.scenario = sim_scenario;
      if (!sim_log.empty()) cfg.engine.log_enabled = true;
      config::validate(cfg);
      if (sim_print_config) {
        fmt::print("{}", config::to_text(cfg));
        return kExitOk;
      }
      if (cfg.scenario.empty()) throw UsageError("no scenario given (SCENARIO or --scenario)");
      if (!fs::is_directory(cfg.scenario))
        throw UsageError(fmt::format("scenario directory {} not found", cfg.scenario.string()));
      auto trace = geo::load_trace_dir(cfg.scenario);
      if (trace.nodes.empty())
        throw UsageError(fmt::format("no node_<id>.csv files in {}", cfg.scenario.string()));

      std::ofstream log_file;
      std::ostream* log = nullptr;
      if (cfg.engine.log_enabled) {
        if (sim_log.empty()) {
          log = &std::cerr;
        } else {
          log_file.open(sim_log, std::ios::binary);
          if (!log_file) throw std::runtime_error(fmt::format("cannot write {}", sim_log));
          log = &log_file;
        }
      }

      mac::RunResult result;
      if (sim_realtime) {
        mac::RealtimeOptions opts;
        opts.speed = rt_speed;
        opts.max_lag = std::chrono::microseconds(static_cast<std::int64_t>(rt_max_lag_ms * 1000));
        std::optional<UdpSink> udp;
        if (!sim_udp.empty()) udp.emplace(sim_udp);
        result = mac::run_realtime(
            cfg.engine, std::move(trace),
            [&udp](const TransmissionRecord& r) {
              const auto line = stream_line(r);
              std::fwrite(line.data(), 1, line.size(), stdout);
              std::fflush(stdout);
              if (udp) udp->send(line);
            },
            opts, log);
      } else {
        result = mac::run(cfg.engine, std::move(trace), log);
      }
      telemetry::export_csv(fs::path(sim_csv), result.summary, result.windows);
      const auto& s = result.summary;
      fmt::print(std::cerr,
                 "mean CBR {:.4f}, mean PER {:.4f}, {} packets in {} records ({} flushed), "
                 "{:.3f} s wall\n",
                 s.mean_cbr, s.mean_per, s.tx_total, s.records, s.flushed_records, s.wall_clock_s);
    } else if (*plot_cmd) {
      std::vector<fs::path> paths(plot_in.begin(), plot_in.end());
      for (const auto& p : rve::plot::plot_csvs(paths, plot_out)) fmt::print("{}\n", p.string());
    }
  } catch (const UsageError& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitUsage;
  } catch (const mac::ConfigError& e) {
    fmt::print(std::cerr, "config error: {}\n", e.what());
    return kExitUsage;
  } catch (const geo::ParseError& e) {
    fmt::print(std::cerr, "parse error: {}\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
