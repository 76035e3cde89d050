#include "qsdc/run_config.hpp"

#include <fstream>
#include <map>
#include <set>

namespace qsdc {

using nlohmann::json;

LinkBudget RunConfig::link_budget() const {
  const Codebook book(block.grid, block.tones);
  return LinkBudget{photons_per_block, static_cast<double>(book.bits()), block.t_span};
}

namespace {

class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  const json* find(const std::string& name) {
    seen_.insert(name);
    auto it = obj_.find(name);
    return it == obj_.end() ? nullptr : &*it;
  }

  void number(const std::string& name, double& out) {
    if (const auto* v = find(name)) {
      if (!v->is_number()) throw ConfigError(key(name), "expected a number");
      out = v->get<double>();
    }
  }

  template <class Int>
  void integer(const std::string& name, Int& out) {
    if (const auto* v = find(name)) {
      const bool ok = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0);
      if (!ok) throw ConfigError(key(name), "expected a non-negative integer");
      out = static_cast<Int>(v->get<std::uint64_t>());
    }
  }

  void boolean(const std::string& name, bool& out) {
    if (const auto* v = find(name)) {
      if (!v->is_boolean()) throw ConfigError(key(name), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& name, std::string& out) {
    if (const auto* v = find(name)) {
      if (!v->is_string()) throw ConfigError(key(name), "expected a string");
      out = v->get<std::string>();
    }
  }

  std::optional<Section> child(const std::string& name) {
    if (const auto* v = find(name)) return Section(*v, key(name));
    return std::nullopt;
  }

  void reject_unknown() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

// Struct field names that differ from their config keys.
const std::map<std::string, std::string> kFieldKeys = {
    {"alpha", "alpha_db_per_km"}, {"e", "error_rate"},  {"f_rep", "f_rep_hz"},
    {"t_span", "t_span_s"},       {"l1_km", "l1_km"},   {"l2_km", "l2_km"},
};

template <class Fn>
void validated(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    std::string msg = e.what();
    std::string key = prefix;
    // Library messages start with "<field>: ..."; fold the field into the key path.
    if (auto colon = msg.find(": "); colon != std::string::npos && msg.find(' ') > colon) {
      std::string field = msg.substr(0, colon);
      if (auto it = kFieldKeys.find(field); it != kFieldKeys.end()) field = it->second;
      key = field == prefix ? prefix : prefix + "." + field;
      msg = msg.substr(colon + 2);
    }
    throw ConfigError(key, msg);
  }
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  RunConfig cfg;
  Section root(doc, "");
  const auto* version = root.find("schema_version");
  if (version == nullptr) throw ConfigError("schema_version", "missing");
  if (!version->is_number_integer() || version->get<int>() != kConfigSchemaVersion)
    throw ConfigError("schema_version", "unsupported version (expected " +
                                            std::to_string(kConfigSchemaVersion) + ")");
  root.integer("seed", cfg.block.seed);
  root.string("out_dir", cfg.out_dir);

  auto& ch = cfg.block.channel;
  if (auto s = root.child("channel")) {
    s->number("mu", ch.mu);
    s->number("alpha_db_per_km", ch.alpha);
    s->number("l1_km", ch.l1_km);
    s->number("l2_km", ch.l2_km);
    s->number("eta_det", ch.eta_det);
    s->number("error_rate", ch.e);
    s->number("check_fraction", ch.check_fraction);
    s->number("f_rep_hz", ch.f_rep);
    s->reject_unknown();
  }
  if (auto s = root.child("grid")) {
    s->number("f_min_hz", cfg.block.grid.f_min);
    s->number("f_max_hz", cfg.block.grid.f_max);
    s->number("f_b_hz", cfg.block.grid.f_b);
    s->reject_unknown();
  }
  if (auto s = root.child("block")) {
    s->integer("n2", cfg.block.n2);
    s->number("error_threshold", cfg.block.error_threshold);
    s->integer("tones", cfg.block.tones);
    s->number("t_span_s", cfg.block.t_span);
    s->number("snr_threshold", cfg.block.snr_threshold);
    s->integer("oversample", cfg.block.oversample);
    s->boolean("force_detection", cfg.block.force_detection);
    std::string attack{to_string(cfg.block.attack)};
    s->string("attack", attack);
    const auto a = parse_attack(attack);
    if (!a) throw ConfigError(s->key("attack"), "expected none, intercept_resend or flip_backward");
    cfg.block.attack = *a;
    s->reject_unknown();
  }
  if (auto s = root.child("session")) {
    s->string("message", cfg.message);
    s->integer("max_retries", cfg.max_retries);
    s->reject_unknown();
  }
  if (auto s = root.child("security")) {
    if (const auto* v = s->find("mu_list")) {
      if (!v->is_array() || v->empty()) throw ConfigError(s->key("mu_list"), "expected a non-empty array");
      cfg.mu_list.clear();
      for (const auto& m : *v) {
        if (!m.is_number() || !(m.get<double>() > 0.0))
          throw ConfigError(s->key("mu_list"), "entries must be positive numbers");
        cfg.mu_list.push_back(m.get<double>());
      }
    }
    s->number("l1_start_km", cfg.l1_start_km);
    s->number("l1_stop_km", cfg.l1_stop_km);
    s->number("l1_step_km", cfg.l1_step_km);
    s->number("photons_per_block", cfg.photons_per_block);
    s->reject_unknown();
  }
  root.reject_unknown();

  validated("channel", [&] { ch.validate(); });
  validated("grid", [&] { cfg.block.grid.validate(); });
  validated("block", [&] { cfg.block.validate(); });
  validated("security", [&] {
    if (!(cfg.photons_per_block > 0.0)) throw std::invalid_argument("photons_per_block: must be > 0");
    if (!(cfg.l1_step_km > 0.0) || cfg.l1_stop_km < cfg.l1_start_km || cfg.l1_start_km < 0.0)
      throw std::invalid_argument("l1_step_km: need 0 <= start <= stop and step > 0");
  });
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

json default_config_json() {
  const RunConfig d;
  const auto& ch = d.block.channel;
  json doc = json::object();
  doc["schema_version"] = kConfigSchemaVersion;
  doc["seed"] = d.block.seed;
  doc["out_dir"] = d.out_dir;
  doc["channel"] = {{"mu", ch.mu},
                    {"alpha_db_per_km", ch.alpha},
                    {"l1_km", ch.l1_km},
                    {"l2_km", ch.l2_km},
                    {"eta_det", ch.eta_det},
                    {"error_rate", ch.e},
                    {"check_fraction", ch.check_fraction},
                    {"f_rep_hz", ch.f_rep}};
  doc["grid"] = {{"f_min_hz", d.block.grid.f_min}, {"f_max_hz", d.block.grid.f_max}, {"f_b_hz", d.block.grid.f_b}};
  doc["block"] = {{"n2", d.block.n2},
                  {"error_threshold", d.block.error_threshold},
                  {"tones", d.block.tones},
                  {"t_span_s", d.block.t_span},
                  {"snr_threshold", d.block.snr_threshold},
                  {"oversample", d.block.oversample},
                  {"force_detection", d.block.force_detection},
                  {"attack", std::string(to_string(d.block.attack))}};
  doc["session"] = {{"message", d.message}, {"max_retries", d.max_retries}};
  doc["security"] = {{"mu_list", d.mu_list},
                     {"l1_start_km", d.l1_start_km},
                     {"l1_stop_km", d.l1_stop_km},
                     {"l1_step_km", d.l1_step_km},
                     {"photons_per_block", d.photons_per_block}};
  return doc;
}

}  // namespace qsdc
