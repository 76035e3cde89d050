#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qsdc/format.hpp"
#include "qsdc/frequency_codec.hpp"
#include "qsdc/protocol_engine.hpp"
#include "qsdc/run_config.hpp"
#include "qsdc/security_analysis.hpp"
#include "qsdc/transcript_json.hpp"

namespace qsdc::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Options common to the config-driven commands. Overrides are written into the config
/// document before parsing, so diagnostics always name the config key.
struct ConfigOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::function<void(json&)>> patches;

  template <class T>
  void bind(CLI::App* app, const std::string& flag, std::string section, std::string key,
            const std::string& help) {
    auto slot = std::make_shared<std::optional<T>>();
    app->add_option(flag, *slot, help);
    patches.push_back([slot, section = std::move(section), key = std::move(key)](json& doc) {
      if (*slot) doc[section][key] = **slot;
    });
  }

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "Master seed (u64)");
    app->add_option("--out", out_dir, "Output directory");
  }

  void attach_channel(CLI::App* app) {
    bind<double>(app, "--mu", "channel", "mu", "Mean photon number per pulse");
    bind<double>(app, "--alpha", "channel", "alpha_db_per_km", "Fiber loss, dB/km");
    bind<double>(app, "--l1", "channel", "l1_km", "Alice-Bob distance, km");
    bind<double>(app, "--l2", "channel", "l2_km", "Delay line at Bob, km");
    bind<double>(app, "--eta-det", "channel", "eta_det", "Detector efficiency");
    bind<double>(app, "--error-rate", "channel", "error_rate", "Channel bit error rate e");
    bind<double>(app, "--check-fraction", "channel", "check_fraction", "Check fraction C");
    bind<double>(app, "--f-rep", "channel", "f_rep_hz", "Repetition frequency, Hz");
  }

  void attach_block(CLI::App* app) {
    bind<double>(app, "--f-min", "grid", "f_min_hz", "Lowest modulation channel, Hz");
    bind<double>(app, "--f-max", "grid", "f_max_hz", "Highest modulation channel, Hz");
    bind<double>(app, "--f-b", "grid", "f_b_hz", "Channel spacing, Hz");
    bind<std::uint64_t>(app, "--n2", "block", "n2", "Pulses per block");
    bind<double>(app, "--threshold", "block", "error_threshold", "QBER abort threshold");
    bind<std::uint64_t>(app, "--tones", "block", "tones", "Tones per block (r)");
    bind<double>(app, "--t-span", "block", "t_span_s", "Block time span, s");
    bind<double>(app, "--snr-threshold", "block", "snr_threshold", "Peak/floor acceptance ratio");
    bind<std::uint64_t>(app, "--oversample", "block", "oversample", "Spectrum points per channel");
    bind<std::string>(app, "--attack", "block", "attack", "none | intercept_resend | flip_backward");
    bind<bool>(app, "--force-detection", "block", "force_detection", "Ideal one-photon lossless channel");
  }

  RunConfig load() const {
    json doc;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("<file>", "cannot open " + config_path);
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
      }
    } else {
      doc = json{{"schema_version", kConfigSchemaVersion}};
    }
    if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
    if (seed) doc["seed"] = *seed;
    if (out_dir) doc["out_dir"] = *out_dir;
    for (const auto& p : patches) p(doc);
    return parse_run_config(doc);
  }
};

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
}

int simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (auto w = linearization_warning(cfg.block.channel)) err << "warning: " << *w << '\n';
  const std::vector<std::uint8_t> message(cfg.message.begin(), cfg.message.end());
  const auto report = run_session(cfg.block, message, cfg.max_retries);

  auto doc = nlohmann::ordered_json::object();
  doc["schema_version"] = kConfigSchemaVersion;
  doc["command"] = "simulate";
  doc["seed"] = cfg.block.seed;
  doc["session"] = session_to_json(report);
  const fs::path path = fs::path(cfg.out_dir) / "transcript.json";
  write_file(path, doc.dump(2) + "\n");

  out << "status: " << to_string(report.status) << '\n'
      << "bits per block: " << report.bits_per_block << '\n'
      << "blocks sent: " << report.blocks_sent << " (delivered " << report.blocks_delivered
      << ", retransmitted " << report.retransmissions << ")\n"
      << "throughput: " << format_number(report.throughput_bps) << " bps\n";
  if (!report.blocks.empty()) {
    const auto& last = report.blocks.back();
    out << "last block: verdict " << to_string(last.verdict) << ", N = " << last.stream.records.size()
        << ", forward qber " << format_number(last.forward_check.result.qber) << ", backward qber "
        << format_number(last.backward_check.result.qber) << '\n';
  }
  if (report.failed_block) out << "failed at block " << *report.failed_block << '\n';
  out << "transcript: " << path.string() << '\n';

  switch (report.status) {
    case SessionStatus::Delivered:
      return kOk;
    case SessionStatus::Aborted:
      return kProtocolAbort;
    case SessionStatus::DecodeFailed:
      break;
  }
  return kDecodeFailure;
}

std::string hz_tag(double f) {
  std::ostringstream s;
  s << std::llround(f);
  return s.str();
}

int spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (auto w = linearization_warning(cfg.block.channel)) err << "warning: " << *w << '\n';
  const auto& grid = cfg.block.grid;
  const std::size_t n_c = channel_count(grid);
  const fs::path dir = fs::path(cfg.out_dir);

  std::ostringstream combined;
  combined << "commanded_hz,frequency_hz,magnitude\n";
  std::ostringstream summary;
  summary << "commanded_hz,verdict,attempts,n,argmax_hz,peak_snr,empty\n";

  int code = kOk;
  for (std::size_t ch = 0; ch < n_c; ++ch) {
    const double f = grid.frequency(ch);
    BlockTranscript tr;
    std::size_t attempts = 0;
    do {
      auto block_cfg = cfg.block;
      block_cfg.seed = derive_seed(cfg.block.seed, ch, attempts);
      tr = run_block_with_tones(block_cfg, {f});
      ++attempts;
    } while (tr.verdict == Verdict::DecodeFailed && attempts <= cfg.max_retries);

    const auto spec = dtft(tr.stream, grid, cfg.block.oversample);
    std::ostringstream csv;
    write_spectrum_csv(csv, spec);
    write_file(dir / ("spectrum_" + hz_tag(f) + "hz.csv"), csv.str());
    for (std::size_t k = 0; k < spec.frequencies.size(); ++k)
      combined << format_number(f) << ',' << format_number(spec.frequencies[k]) << ','
               << format_number(spec.magnitudes[k]) << '\n';

    const auto peak = std::max_element(spec.magnitudes.begin(), spec.magnitudes.end());
    const double argmax = spec.frequencies[static_cast<std::size_t>(peak - spec.magnitudes.begin())];
    const double snr = tr.tone_snr.empty() ? 0.0 : tr.tone_snr.front();
    summary << format_number(f) << ',' << to_string(tr.verdict) << ',' << attempts << ','
            << tr.stream.records.size() << ',' << format_number(spec.empty_stream ? 0.0 : argmax) << ','
            << format_number(snr) << ',' << (spec.empty_stream ? 1 : 0) << '\n';

    out << format_number(f) << " Hz: " << to_string(tr.verdict) << ", N = " << tr.stream.records.size();
    if (spec.empty_stream) {
      out << ", empty spectrum";
    } else {
      out << ", argmax " << format_number(argmax) << " Hz, snr " << format_number(snr);
    }
    out << '\n';

    if (tr.verdict == Verdict::AbortedForward || tr.verdict == Verdict::AbortedBackward) {
      code = kProtocolAbort;
    } else if (tr.verdict == Verdict::DecodeFailed && code == kOk) {
      code = kDecodeFailure;
    }
  }
  write_file(dir / "spectrum_all.csv", combined.str());
  write_file(dir / "spectrum_summary.csv", summary.str());
  return code;
}

int security(const RunConfig& cfg, std::ostream& out) {
  const auto budget = cfg.link_budget();
  const auto l1 = linear_grid(cfg.l1_start_km, cfg.l1_stop_km, cfg.l1_step_km);
  const auto sweep = security_sweep(cfg.block.channel, cfg.mu_list, l1, budget);
  std::ostringstream csv;
  write_sweep_csv(csv, sweep);
  const fs::path path = fs::path(cfg.out_dir) / "security.csv";
  write_file(path, csv.str());

  out << "security condition: R_Alice / R_Eve > N / b = " << format_number(budget.photons_per_block)
      << " / " << format_number(budget.bits_per_block) << '\n';
  for (double mu : cfg.mu_list) {
    const auto d = secure_distance(sweep, mu);
    ChannelParams at0 = cfg.block.channel;
    at0.mu = mu;
    at0.l1_km = at0.l2_km = cfg.l1_start_km;
    out << "mu " << format_number(mu) << ": secure distance "
        << (d ? format_number(*d) + " km" : std::string("none")) << " (ratio at "
        << format_number(cfg.l1_start_km) << " km: " << format_number(assess(at0, budget).ratio) << ")\n";
  }
  out << "sweep: " << path.string() << '\n';
  return kOk;
}

struct CapacityOptions {
  double f_min = 25e3;
  std::optional<double> f_max;
  std::optional<double> bandwidth;
  double f_b = 25e3;
  std::size_t r = 1;
  double t_span = 1e-3;
  std::string out_dir = "out";
};

int capacity(const CapacityOptions& o, std::ostream& out) {
  FrequencyGrid grid;
  try {
    if (o.bandwidth) {
      grid = FrequencyGrid::from_bandwidth(o.f_min, *o.bandwidth, o.f_b);
    } else {
      grid = FrequencyGrid{o.f_min, o.f_max.value_or(400e3), o.f_b};
    }
    grid.validate();
    if (!(o.t_span > 0.0)) throw std::invalid_argument("t_span: must be > 0");
  } catch (const std::invalid_argument& e) {
    throw ConfigError("grid", e.what());
  }
  const std::size_t n_c = channel_count(grid);
  Capacity cap;
  try {
    cap = combinatorial_capacity(n_c, o.r);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("r", e.what());
  }
  const double rate = transmission_rate(cap, o.t_span);

  auto doc = nlohmann::ordered_json::object();
  doc["f_min_hz"] = round_sig9(grid.f_min);
  doc["f_max_hz"] = round_sig9(grid.f_max);
  doc["f_b_hz"] = round_sig9(grid.f_b);
  doc["r"] = o.r;
  doc["t_span_s"] = round_sig9(o.t_span);
  doc["n_c"] = n_c;
  if (cap.n_max) {
    doc["n_max"] = *cap.n_max;
  } else {
    doc["n_max"] = nullptr;
  }
  doc["log2_n_max"] = round_sig9(cap.log2_n_max);
  doc["b"] = cap.bits;
  doc["rate_bps"] = round_sig9(rate);
  write_file(fs::path(o.out_dir) / "capacity.json", doc.dump(2) + "\n");

  out << "N_c = " << n_c << '\n'
      << "N_max = " << (cap.n_max ? std::to_string(*cap.n_max) : std::string("> 2^64")) << '\n'
      << "log2 N_max = " << format_number(cap.log2_n_max) << '\n'
      << "b = " << cap.bits << " bits per block\n"
      << "I = " << format_number(rate) << " bps\n";
  const bool wideband_example = n_c == 333334 && o.r == 3 && std::abs(o.t_span - 1e-3) < 1e-15;
  if (wideband_example)
    out << "note: 42.5 kbps is sometimes quoted for this 500 MHz / 1.5 kHz / r=3 / 1 ms configuration; "
           "direct evaluation of the channel count, binomial capacity and rate gives the value above.\n";
  out << "json: " << (fs::path(o.out_dir) / "capacity.json").string() << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frequency-coded two-way single-photon secure direct communication simulator", "qsdc"};
  app.require_subcommand(1);

  ConfigOptions sim_opts;
  auto* sim = app.add_subcommand("simulate", "Run a message through the protocol, write transcript.json");
  sim_opts.attach(sim);
  sim_opts.attach_channel(sim);
  sim_opts.attach_block(sim);
  sim_opts.bind<std::string>(sim, "--message", "session", "message", "Message text");
  sim_opts.bind<std::uint64_t>(sim, "--max-retries", "session", "max_retries", "Retries per failed block");

  ConfigOptions spec_opts;
  auto* spec = app.add_subcommand("spectrum", "One block per grid channel, one spectrum CSV each");
  spec_opts.attach(spec);
  spec_opts.attach_channel(spec);
  spec_opts.attach_block(spec);
  spec_opts.bind<std::uint64_t>(spec, "--max-retries", "session", "max_retries", "Retries per failed block");

  ConfigOptions sec_opts;
  auto* sec = app.add_subcommand("security", "Bits per pulse and security verdict versus distance");
  sec_opts.attach(sec);
  sec_opts.attach_channel(sec);
  sec_opts.bind<std::vector<double>>(sec, "--mu-list", "security", "mu_list", "Mean photon numbers to sweep");
  sec_opts.bind<double>(sec, "--l1-start", "security", "l1_start_km", "First distance, km");
  sec_opts.bind<double>(sec, "--l1-stop", "security", "l1_stop_km", "Last distance, km");
  sec_opts.bind<double>(sec, "--l1-step", "security", "l1_step_km", "Distance step, km");
  sec_opts.bind<double>(sec, "--photons-per-block", "security", "photons_per_block", "N");

  CapacityOptions cap_opts;
  auto* cap = app.add_subcommand("capacity", "Channel count, combinations, bits per block and rate");
  cap->add_option("--f-min", cap_opts.f_min, "Lowest channel, Hz");
  auto* fmax = cap->add_option("--f-max", cap_opts.f_max, "Highest channel, Hz");
  cap->add_option("--bandwidth", cap_opts.bandwidth, "Modulation bandwidth, Hz")->excludes(fmax);
  cap->add_option("--f-b", cap_opts.f_b, "Channel spacing, Hz");
  cap->add_option("-r,--tones", cap_opts.r, "Tones per block");
  cap->add_option("--t-span", cap_opts.t_span, "Block time span, s");
  cap->add_option("--out", cap_opts.out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*sim) return simulate(sim_opts.load(), out, err);
    if (*spec) return spectrum(spec_opts.load(), out, err);
    if (*sec) return security(sec_opts.load(), out);
    if (*cap) return capacity(cap_opts, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kConfigError;
}

}  // namespace qsdc::cli
