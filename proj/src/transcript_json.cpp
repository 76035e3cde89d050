#include "qsdc/transcript_json.hpp"

#include "qsdc/format.hpp"

namespace qsdc {

using nlohmann::ordered_json;

namespace {

ordered_json reals(const std::vector<double>& v) {
  auto out = ordered_json::array();
  for (double x : v) out.push_back(round_sig9(x));
  return out;
}

std::string bit_text(const BitString& bits) {
  std::string s;
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

void add_check(ordered_json& j, const CheckResult& r) {
  j["sampled"] = r.sampled;
  j["mismatches"] = r.mismatches;
  j["qber"] = round_sig9(r.qber);
  j["status"] = std::string(to_string(r.status));
}

}  // namespace

ordered_json transcript_to_json(const BlockTranscript& t) {
  ordered_json j;
  j["n2"] = t.n2;
  j["n1"] = t.n1;
  j["n_encoded"] = t.n_encoded;
  j["alice_clicks"] = t.alice_clicks;
  j["alice_photons"] = t.alice_photons;

  ordered_json fwd;
  fwd["positions"] = t.forward_check.positions;
  auto bases = ordered_json::array();
  for (auto b : t.forward_check.bases) bases.push_back(std::string(to_string(b)));
  fwd["bases"] = bases;
  fwd["outcomes"] = t.forward_check.outcomes;
  add_check(fwd, t.forward_check.result);
  j["forward_check"] = fwd;

  ordered_json bwd;
  bwd["positions"] = t.backward_check.positions;
  auto ops = ordered_json::array();
  for (auto op : t.backward_check.ops) ops.push_back(std::string(to_string(op)));
  bwd["ops"] = ops;
  auto outcomes = ordered_json::array();
  for (const auto& x : t.backward_check.outcomes) {
    if (x) {
      outcomes.push_back(*x);
    } else {
      outcomes.push_back(nullptr);
    }
  }
  bwd["outcomes"] = outcomes;
  add_check(bwd, t.backward_check.result);
  j["backward_check"] = bwd;

  j["encoding_positions"] = t.encoding_positions;

  ordered_json stream;
  stream["t_span"] = round_sig9(t.stream.t_span);
  stream["n"] = t.stream.records.size();
  auto records = ordered_json::array();
  for (const auto& r : t.stream.records) records.push_back(ordered_json::array({r.x, round_sig9(r.tau)}));
  stream["records"] = records;
  j["stream"] = stream;

  j["decoded_tones"] = reals(t.decoded_tones);
  j["tone_snr"] = reals(t.tone_snr);
  j["noise_floor"] = round_sig9(t.noise_floor);
  j["decoded_bits"] = bit_text(t.decoded_bits);
  j["verdict"] = std::string(to_string(t.verdict));
  j["events"] = t.events;
  return j;
}

ordered_json session_to_json(const SessionReport& report) {
  ordered_json j;
  j["status"] = std::string(to_string(report.status));
  j["message_bits"] = report.message_bits;
  j["bits_per_block"] = report.bits_per_block;
  j["blocks_sent"] = report.blocks_sent;
  j["blocks_delivered"] = report.blocks_delivered;
  j["retransmissions"] = report.retransmissions;
  if (report.failed_block) {
    j["failed_block"] = *report.failed_block;
  } else {
    j["failed_block"] = nullptr;
  }
  j["throughput_bps"] = round_sig9(report.throughput_bps);
  j["bit_errors"] = report.bit_errors;
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (auto byte : report.received) {
    hex.push_back(kHex[byte >> 4]);
    hex.push_back(kHex[byte & 0xF]);
  }
  j["received_hex"] = hex;
  auto blocks = ordered_json::array();
  for (const auto& b : report.blocks) blocks.push_back(transcript_to_json(b));
  j["blocks"] = blocks;
  return j;
}

}  // namespace qsdc
