#include "rejuv/cli/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace rejuv::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void field_error(const std::string& path, std::string_view what) {
  throw Error(Errc::kParseError, fmt::format("field '{}': {}", path, what));
}

/// Reads keys of one JSON object and rejects any key left unread.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json* find(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void unsigned_field(const char* key, std::uint64_t& out) {
    if (const json* v = find(key)) out = as_unsigned(*v, path(key));
  }
  template <typename Narrow>
  void narrow_field(const char* key, Narrow& out) {
    if (const json* v = find(key)) {
      const std::uint64_t value = as_unsigned(*v, path(key));
      if (value > std::numeric_limits<Narrow>::max()) field_error(path(key), "value out of range");
      out = static_cast<Narrow>(value);
    }
  }
  void optional_unsigned(const char* key, std::optional<std::uint64_t>& out) {
    if (const json* v = find(key)) {
      out = v->is_null() ? std::nullopt : std::optional(as_unsigned(*v, path(key)));
    }
  }
  void int_field(const char* key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) field_error(path(key), "expected an integer");
      const auto value = v->get<std::int64_t>();
      if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
        field_error(path(key), "value out of range");
      }
      out = static_cast<int>(value);
    }
  }
  void bool_field(const char* key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) field_error(path(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void string_field(const char* key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) field_error(path(key), "expected a string");
      out = v->get<std::string>();
    }
  }
  template <typename Enum, typename Parse>
  void enum_field(const char* key, Enum& out, Parse parse) {
    if (const json* v = find(key)) {
      if (!v->is_string()) field_error(path(key), "expected a string");
      const auto parsed = parse(v->get<std::string>());
      if (!parsed) field_error(path(key), fmt::format("unknown value \"{}\"", v->get<std::string>()));
      out = *parsed;
    }
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) field_error(path(key.c_str()), "unknown key");
    }
  }

 private:
  static std::uint64_t as_unsigned(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    field_error(path, "expected a non-negative integer");
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::optional<Arrival> parse_arrival(std::string_view name) {
  if (name == "periodic") return Arrival::kPeriodic;
  if (name == "random") return Arrival::kRandom;
  return std::nullopt;
}

std::optional<fabric::PortKind> parse_port(std::string_view name) {
  if (name == "pcap") return fabric::PortKind::kPcap;
  if (name == "icap") return fabric::PortKind::kIcap;
  return std::nullopt;
}

std::optional<adversary::Behavior> parse_behavior(std::string_view name) {
  if (name == "silent") return adversary::Behavior::kSilent;
  if (name == "divergent") return adversary::Behavior::kDivergent;
  if (name == "equivocating") return adversary::Behavior::kEquivocating;
  return std::nullopt;
}

std::optional<adversary::AnalysisMemory> parse_memory(std::string_view name) {
  if (name == "epoch") return adversary::AnalysisMemory::kEpoch;
  if (name == "permanent") return adversary::AnalysisMemory::kPermanent;
  return std::nullopt;
}

[[noreturn]] void invalid(std::string_view what) { throw Error(Errc::kValidationError, std::string(what)); }

}  // namespace

std::string_view arrival_name(Arrival arrival) noexcept {
  return arrival == Arrival::kPeriodic ? "periodic" : "random";
}

std::string_view port_name(fabric::PortKind port) noexcept {
  return port == fabric::PortKind::kPcap ? "pcap" : "icap";
}

std::string_view behavior_name(adversary::Behavior behavior) noexcept {
  switch (behavior) {
    case adversary::Behavior::kSilent: return "silent";
    case adversary::Behavior::kDivergent: return "divergent";
    case adversary::Behavior::kEquivocating: return "equivocating";
  }
  return "?";
}

std::string_view memory_name(adversary::AnalysisMemory memory) noexcept {
  return memory == adversary::AnalysisMemory::kEpoch ? "epoch" : "permanent";
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw Error(Errc::kParseError, fmt::format("line {}: {}", line, e.what()));
  }

  Scenario s;
  ObjectReader root(doc, "");
  root.unsigned_field("seed", s.seed);
  root.unsigned_field("horizon", s.horizon);
  root.narrow_field("pblocks", s.pblocks);

  if (const json* list = root.find("templates")) {
    if (!list->is_array()) field_error("templates", "expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      ObjectReader r((*list)[i], fmt::format("templates[{}]", i));
      fabric::SoftcoreTemplate tmpl;
      r.string_field("id", tmpl.id);
      r.string_field("family", tmpl.family);
      r.unsigned_field("bitstream_size", tmpl.bitstream_size);
      r.unsigned_field("analysis_threshold", tmpl.analysis_threshold);
      r.unsigned_field("exploit_latency", tmpl.exploit_latency);
      r.finish();
      if (tmpl.id.empty()) field_error(r.path("id"), "required");
      s.templates.push_back(std::move(tmpl));
    }
  }

  if (const json* node = root.find("ports")) {
    ObjectReader r(*node, "ports");
    r.unsigned_field("pcap_bandwidth", s.ports.pcap_bandwidth);
    r.unsigned_field("icap_bandwidth", s.ports.icap_bandwidth);
    r.enum_field("use", s.ports.use, parse_port);
    r.finish();
  }

  if (const json* node = root.find("bus")) {
    ObjectReader r(*node, "bus");
    r.unsigned_field("d_min", s.bus.d_min);
    r.unsigned_field("d_max", s.bus.d_max);
    r.unsigned_field("state_bandwidth", s.bus.state_bandwidth);
    r.finish();
  }

  if (const json* node = root.find("quorum")) {
    ObjectReader r(*node, "quorum");
    r.int_field("t", s.quorum.t);
    r.enum_field("mode", s.quorum.mode, core::parse_mode);
    r.finish();
  }

  if (const json* node = root.find("workload")) {
    ObjectReader r(*node, "workload");
    auto& w = s.workload;
    r.unsigned_field("start", w.start);
    r.enum_field("arrival", w.arrival, parse_arrival);
    r.unsigned_field("period", w.period);
    r.unsigned_field("a_min", w.a_min);
    r.unsigned_field("a_max", w.a_max);
    r.optional_unsigned("op_count", w.op_count);
    r.unsigned_field("op_min", w.op_min);
    r.unsigned_field("op_max", w.op_max);
    r.string_field("op_kind", w.op_kind);
    r.finish();
  }

  if (const json* node = root.find("trigger")) {
    ObjectReader r(*node, "trigger");
    auto& tr = s.trigger;
    r.enum_field("policy", tr.policy, policies::parse_policy);
    r.unsigned_field("T", tr.max_delay);
    r.optional_unsigned("P", tr.period);
    r.narrow_field("k", tr.suspicion_threshold);
    if (const json* weights = r.find("weights")) {
      ObjectReader wr(*weights, "trigger.weights");
      wr.unsigned_field("exposure", tr.weights.exposure);
      wr.unsigned_field("suspicion", tr.weights.suspicion);
      wr.finish();
    }
    r.finish();
  }
  if (!s.trigger.period) s.trigger.period = s.trigger.effective_period();

  if (const json* node = root.find("adversary")) {
    ObjectReader r(*node, "adversary");
    auto& a = s.adversary;
    r.bool_field("enabled", a.enabled);
    r.enum_field("behavior", a.behavior, parse_behavior);
    r.unsigned_field("T_a", a.reference_window);
    std::optional<std::uint64_t> cap;
    r.optional_unsigned("compromise_cap", cap);
    if (cap) {
      if (*cap > std::numeric_limits<std::uint32_t>::max()) field_error("adversary.compromise_cap", "value out of range");
      a.compromise_cap = static_cast<std::uint32_t>(*cap);
    }
    r.enum_field("analysis_memory", a.memory, parse_memory);
    r.finish();
  }

  if (const json* list = root.find("resize")) {
    if (!list->is_array()) field_error("resize", "expected an array");
    for (std::size_t i = 0; i < list->size(); ++i) {
      ObjectReader r((*list)[i], fmt::format("resize[{}]", i));
      ResizeStep step;
      r.unsigned_field("at", step.at);
      r.int_field("t", step.t);
      r.finish();
      s.resize.push_back(step);
    }
  }
  root.finish();

  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, fmt::format("cannot open {}", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

void validate(const Scenario& s) {
  if (s.horizon == 0) invalid("horizon must be positive");
  if (s.templates.empty()) invalid("templates: at least one template is required");
  std::set<std::string> ids;
  for (const auto& tmpl : s.templates) {
    if (!ids.insert(tmpl.id).second) invalid(fmt::format("templates: duplicate id \"{}\"", tmpl.id));
    if (tmpl.bitstream_size == 0 || tmpl.analysis_threshold == 0 || tmpl.exploit_latency == 0) {
      invalid(fmt::format("templates: \"{}\" needs positive bitstream_size, analysis_threshold, exploit_latency",
                          tmpl.id));
    }
  }
  if (s.ports.pcap_bandwidth == 0) invalid("ports: pcap_bandwidth must be positive");
  if (s.ports.icap_bandwidth <= s.ports.pcap_bandwidth) {
    invalid("ports: icap_bandwidth must exceed pcap_bandwidth");
  }
  if (s.bus.d_min > s.bus.d_max) invalid("bus: d_min must not exceed d_max");
  if (s.bus.state_bandwidth == 0) invalid("bus: state_bandwidth must be positive");
  if (s.quorum.t < 0) invalid("quorum: t must be non-negative");

  const auto n = static_cast<std::uint32_t>(s.quorum.n());
  if (s.pblocks < n) invalid(fmt::format("pblocks: {} cannot host the {} initial replicas", s.pblocks, n));
  if (s.trigger.policy != policies::Policy::kNone && s.pblocks < n + 1) {
    invalid(fmt::format("pblocks: rejuvenation needs a spare pblock ({} < n + 1 = {})", s.pblocks, n + 1));
  }

  const auto& w = s.workload;
  if (w.op_kind != "counter") invalid(fmt::format("workload: unsupported op_kind \"{}\"", w.op_kind));
  if (w.arrival == Arrival::kPeriodic && w.period == 0) invalid("workload: period must be positive");
  if (w.arrival == Arrival::kRandom && (w.a_min == 0 || w.a_min > w.a_max)) {
    invalid("workload: need 0 < a_min <= a_max");
  }
  if (w.op_min > w.op_max) invalid("workload: op_min must not exceed op_max");

  try {
    s.trigger.validate();
  } catch (const Error& e) {
    invalid(e.what());
  }
  if (s.adversary.reference_window == 0) invalid("adversary: T_a must be positive");
  for (const auto& step : s.resize) {
    if (step.t < 0) invalid("resize: t must be non-negative");
  }
}

std::string serialize_scenario(const Scenario& s) {
  ordered_json doc;
  doc["seed"] = s.seed;
  doc["horizon"] = s.horizon;
  ordered_json templates = ordered_json::array();
  for (const auto& tmpl : s.templates) {
    ordered_json t;
    t["id"] = tmpl.id;
    t["family"] = tmpl.family;
    t["bitstream_size"] = tmpl.bitstream_size;
    t["analysis_threshold"] = tmpl.analysis_threshold;
    t["exploit_latency"] = tmpl.exploit_latency;
    templates.push_back(std::move(t));
  }
  doc["templates"] = std::move(templates);
  doc["pblocks"] = s.pblocks;
  doc["ports"] = {{"pcap_bandwidth", s.ports.pcap_bandwidth},
                  {"icap_bandwidth", s.ports.icap_bandwidth},
                  {"use", port_name(s.ports.use)}};
  doc["bus"] = {{"d_min", s.bus.d_min}, {"d_max", s.bus.d_max}, {"state_bandwidth", s.bus.state_bandwidth}};
  doc["quorum"] = {{"t", s.quorum.t}, {"mode", core::mode_name(s.quorum.mode)}};

  const auto& w = s.workload;
  ordered_json workload;
  workload["start"] = w.start;
  workload["arrival"] = arrival_name(w.arrival);
  workload["period"] = w.period;
  workload["a_min"] = w.a_min;
  workload["a_max"] = w.a_max;
  workload["op_count"] = w.op_count ? ordered_json(*w.op_count) : ordered_json(nullptr);
  workload["op_min"] = w.op_min;
  workload["op_max"] = w.op_max;
  workload["op_kind"] = w.op_kind;
  doc["workload"] = std::move(workload);

  ordered_json trigger;
  trigger["policy"] = policies::policy_name(s.trigger.policy);
  trigger["T"] = s.trigger.max_delay;
  trigger["P"] = s.trigger.effective_period();
  trigger["k"] = s.trigger.suspicion_threshold;
  trigger["weights"] = {{"exposure", s.trigger.weights.exposure}, {"suspicion", s.trigger.weights.suspicion}};
  doc["trigger"] = std::move(trigger);

  ordered_json adv;
  adv["enabled"] = s.adversary.enabled;
  adv["behavior"] = behavior_name(s.adversary.behavior);
  adv["T_a"] = s.adversary.reference_window;
  adv["compromise_cap"] =
      s.adversary.compromise_cap ? ordered_json(*s.adversary.compromise_cap) : ordered_json(nullptr);
  adv["analysis_memory"] = memory_name(s.adversary.memory);
  doc["adversary"] = std::move(adv);

  ordered_json resize = ordered_json::array();
  for (const auto& step : s.resize) resize.push_back({{"at", step.at}, {"t", step.t}});
  doc["resize"] = std::move(resize);
  return doc.dump();
}

}  // namespace rejuv::cli
