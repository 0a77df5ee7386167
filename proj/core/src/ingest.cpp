#include "emsim/ingest.hpp"

#include "emsim/csv.hpp"
#include "emsim/error.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace emsim {

namespace {

const std::vector<std::string> kMissionColumns{
    "call_id",      "ts_call_start",   "ts_triage_end",  "ts_assigned", "ts_depart",
    "ts_arrive_scene", "ts_depart_scene", "ts_arrive_ed", "ts_offload_start", "ts_offload_end",
    "ts_mission_end", "zone",           "x",              "y",           "triage_tag",
    "onscene_tag",  "ed_id",           "outcome"};

std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

DispatchOrigin parse_origin(const std::string& s, std::size_t line) {
  if (s.empty()) return DispatchOrigin::None;
  if (s == "base") return DispatchOrigin::Base;
  if (s == "field") return DispatchOrigin::Field;
  throw SchemaViolation("origin", "expected 'base' or 'field', got '" + s + "'", line);
}

void push_diff(std::vector<double>& out, const std::optional<double>& from, const std::optional<double>& to) {
  if (!from || !to) return;
  const double d = *to - *from;
  if (d >= 0.0) out.push_back(d);
}

std::string sample_name(ServicePhase p, UrgencyClass u) {
  return std::string(to_string(p)) + "_" + std::string(to_string(u));
}

}  // namespace

std::vector<MissionRow> read_missions_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  std::vector<std::size_t> c;
  for (const auto& name : kMissionColumns) c.push_back(t.require_column(name));
  const auto c_base = t.column("base_id");
  const auto c_origin = t.column("origin");
  const auto c_san0 = t.column("ts_sanitization_start");
  const auto c_san1 = t.column("ts_sanitization_end");

  std::vector<MissionRow> out;
  out.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    const std::size_t line = r + 2;
    MissionRow m;
    const auto id = t.integer(r, c[0]);
    if (id < 0) throw SchemaViolation("call_id", "must be non-negative", line);
    m.call_id = static_cast<std::uint64_t>(id);
    m.call_start = t.number(r, c[1]);
    m.triage_end = t.optional_number(r, c[2]);
    m.assigned = t.optional_number(r, c[3]);
    m.depart = t.optional_number(r, c[4]);
    m.arrive_scene = t.optional_number(r, c[5]);
    m.depart_scene = t.optional_number(r, c[6]);
    m.arrive_ed = t.optional_number(r, c[7]);
    m.offload_start = t.optional_number(r, c[8]);
    m.offload_end = t.optional_number(r, c[9]);
    m.mission_end = t.optional_number(r, c[10]);
    m.zone = t.text(r, c[11]);
    if (m.zone.empty()) throw SchemaViolation("zone", "empty", line);
    m.x = t.number(r, c[12]);
    m.y = t.number(r, c[13]);
    try {
      m.triage_tag = parse_severity_tag(t.text(r, c[14]), "triage_tag");
      if (!t.text(r, c[15]).empty()) m.onscene_tag = parse_severity_tag(t.text(r, c[15]), "onscene_tag");
      m.outcome = parse_call_status(t.text(r, c[17]));
    } catch (const SchemaViolation& e) {
      throw SchemaViolation(e.field(), e.reason(), line);
    }
    m.ed_id = t.text(r, c[16]);
    if (m.outcome == CallStatus::Transported && m.ed_id.empty()) {
      throw SchemaViolation("ed_id", "transported mission without destination ED", line);
    }
    if (c_base) m.base_id = t.text(r, *c_base);
    if (c_origin) m.origin = parse_origin(t.text(r, *c_origin), line);
    if (c_san0) m.sanitization_start = t.optional_number(r, *c_san0);
    if (c_san1) m.sanitization_end = t.optional_number(r, *c_san1);
    out.push_back(std::move(m));
  }
  return out;
}

void write_missions_csv(const std::filesystem::path& path, const std::vector<MissionRow>& rows) {
  std::ostringstream out;
  CsvWriter w(out);
  auto header = kMissionColumns;
  for (const char* extra : {"base_id", "origin", "ts_sanitization_start", "ts_sanitization_end"}) {
    header.emplace_back(extra);
  }
  w.row(header);
  for (const auto& m : rows) {
    w.row({std::to_string(m.call_id), format_double(m.call_start), opt(m.triage_end), opt(m.assigned),
           opt(m.depart), opt(m.arrive_scene), opt(m.depart_scene), opt(m.arrive_ed), opt(m.offload_start),
           opt(m.offload_end), opt(m.mission_end), m.zone, format_double(m.x), format_double(m.y),
           std::string(to_string(m.triage_tag)),
           m.onscene_tag ? std::string(to_string(*m.onscene_tag)) : std::string(), m.ed_id,
           std::string(to_string(m.outcome)), m.base_id, std::string(to_string(m.origin)),
           opt(m.sanitization_start), opt(m.sanitization_end)});
  }
  write_text_file(path, out.str());
}

std::vector<MissionRow> missions_from_records(const SimulationInstance& inst,
                                              const std::vector<MissionRecord>& records) {
  std::vector<MissionRow> out;
  for (const auto& r : records) {
    const auto& c = r.call;
    if (r.in_warmup || r.censored || !is_terminal(c.status)) continue;
    MissionRow m;
    m.call_id = c.call_id;
    m.call_start = c.arrival_minute;
    m.triage_end = c.ts.triage_done;
    m.assigned = c.ts.assigned;
    m.depart = c.ts.depart_base;
    m.arrive_scene = c.ts.arrive_scene;
    m.depart_scene = c.ts.depart_scene;
    m.arrive_ed = c.ts.arrive_ed;
    m.offload_start = c.ts.offload_start;
    m.offload_end = c.ts.offload_done;
    m.mission_end = c.ts.mission_end;
    m.zone = inst.demand.zones.at(c.zone).id;
    const auto& p = inst.network.at(c.scene_point);
    m.x = p.x;
    m.y = p.y;
    m.triage_tag = c.triage_tag;
    m.onscene_tag = c.onscene_tag;
    m.ed_id = r.ed;
    m.outcome = c.status;
    m.base_id = r.home_base;
    m.origin = r.origin;
    m.sanitization_start = r.sanitization_start;
    m.sanitization_end = r.sanitization_end;
    out.push_back(std::move(m));
  }
  return out;
}

PhaseSamples extract_phase_samples(const std::vector<MissionRow>& rows) {
  PhaseSamples s;
  auto at = [&](ServicePhase p, UrgencyClass u) -> std::vector<double>& { return s[index_of(p)][index_of(u)]; };
  for (const auto& m : rows) {
    const auto tu = m.triage_urgency();
    const auto su = m.scene_urgency();
    push_diff(at(ServicePhase::TelephoneTriage, tu), m.call_start, m.triage_end);
    push_diff(at(ServicePhase::AmbulanceAssignment, tu), m.triage_end, m.assigned);
    if (m.origin != DispatchOrigin::Field) push_diff(at(ServicePhase::AmbulancePreparation, tu), m.assigned, m.depart);
    if (m.outcome == CallStatus::ClosedOnSite) {
      push_diff(at(ServicePhase::TreatmentOnSite, su), m.arrive_scene, m.depart_scene);
    } else if (m.outcome == CallStatus::Transported) {
      push_diff(at(ServicePhase::PatientLoad, su), m.arrive_scene, m.depart_scene);
      push_diff(at(ServicePhase::PatientDischarge, su), m.offload_start, m.offload_end);
    }
    push_diff(at(ServicePhase::Sanitization, su), m.sanitization_start, m.sanitization_end);
  }
  return s;
}

std::vector<AodEstimate> extract_aod(const std::vector<MissionRow>& rows) {
  std::map<std::string, AodEstimate> by_ed;
  for (const auto& m : rows) {
    if (m.ed_id.empty() || !m.arrive_ed || !m.offload_start) continue;
    auto& e = by_ed[m.ed_id];
    e.ed = m.ed_id;
    ++e.arrivals;
    const double d = *m.offload_start - *m.arrive_ed;
    if (d > 0.0) e.delays.push_back(d);
  }
  std::vector<AodEstimate> out;
  for (auto& [id, e] : by_ed) {
    std::sort(e.delays.begin(), e.delays.end());
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::vector<std::size_t>> zone_slot_counts(const std::vector<MissionRow>& rows,
                                                       const std::vector<std::string>& zones,
                                                       const DemandTimeSlotScheme& scheme) {
  std::vector<std::vector<std::size_t>> counts(zones.size(), std::vector<std::size_t>(scheme.size(), 0));
  for (const auto& m : rows) {
    auto it = std::find(zones.begin(), zones.end(), m.zone);
    if (it == zones.end()) continue;
    ++counts[static_cast<std::size_t>(it - zones.begin())][scheme.slot_at(m.call_start)];
  }
  return counts;
}

std::size_t nearest_square(const SimulationInstance& inst, double x, double y) {
  const auto& squares = inst.demand.squares;
  if (squares.empty()) throw InvariantViolation("instance has no call squares");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < squares.size(); ++i) {
    const auto& p = inst.network.at(squares[i].point_index);
    const double d = (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::vector<std::size_t> square_weights(const SimulationInstance& inst, const std::vector<MissionRow>& rows) {
  std::vector<std::size_t> w(inst.demand.squares.size(), 0);
  for (const auto& m : rows) ++w[nearest_square(inst, m.x, m.y)];
  return w;
}

std::vector<CalibrationObservation> extract_observations(const SimulationInstance& inst,
                                                         const std::vector<MissionRow>& rows) {
  const auto& travel = inst.travel;
  auto slot_id = [&](double minute) { return travel.slots().at(travel.slot_index_at(minute)).id; };
  std::vector<CalibrationObservation> out;
  for (const auto& m : rows) {
    const std::size_t scene = inst.demand.squares[nearest_square(inst, m.x, m.y)].point_index;
    if (!m.base_id.empty() && m.origin != DispatchOrigin::Field && m.depart && m.arrive_scene) {
      if (auto base = inst.network.find(m.base_id); base && travel.has(*base, scene, TravelLeg::BaseToScene)) {
        const double obs = *m.arrive_scene - *m.depart;
        if (obs > 0.0) {
          out.push_back({TravelLeg::BaseToScene, slot_id(*m.depart), m.triage_urgency(),
                         travel.nominal(*base, scene, TravelLeg::BaseToScene), obs});
        }
      }
    }
    if (!m.ed_id.empty() && m.depart_scene && m.arrive_ed) {
      if (auto ed = inst.network.find(m.ed_id); ed && travel.has(scene, *ed, TravelLeg::SceneToED)) {
        const double obs = *m.arrive_ed - *m.depart_scene;
        if (obs > 0.0) {
          out.push_back({TravelLeg::SceneToED, slot_id(*m.depart_scene), m.scene_urgency(),
                         travel.nominal(scene, *ed, TravelLeg::SceneToED), obs});
        }
      }
    }
  }
  return out;
}

void write_observations_csv(const std::filesystem::path& path, const std::vector<CalibrationObservation>& obs) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"leg", "slot", "urgency", "t_rs", "t_obs"});
  for (const auto& o : obs) {
    w.row({std::string(to_string(o.leg)), o.slot, std::string(to_string(o.urgency)), format_double(o.t_rs),
           format_double(o.t_obs)});
  }
  write_text_file(path, out.str());
}

std::vector<CalibrationObservation> read_observations_csv(const std::filesystem::path& path) {
  const auto t = read_csv(path);
  const auto c_leg = t.require_column("leg");
  const auto c_slot = t.require_column("slot");
  const auto c_urg = t.require_column("urgency");
  const auto c_rs = t.require_column("t_rs");
  const auto c_obs = t.require_column("t_obs");
  std::vector<CalibrationObservation> out;
  out.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    CalibrationObservation o;
    try {
      o.leg = parse_leg(t.text(r, c_leg), "leg");
      o.urgency = parse_urgency(t.text(r, c_urg), "urgency");
    } catch (const SchemaViolation& e) {
      throw SchemaViolation(e.field(), e.reason(), r + 2);
    }
    o.slot = t.text(r, c_slot);
    o.t_rs = t.number(r, c_rs);
    o.t_obs = t.number(r, c_obs);
    if (!(o.t_rs > 0.0) || !(o.t_obs > 0.0)) throw SchemaViolation("t_rs/t_obs", "must be positive", r + 2);
    out.push_back(std::move(o));
  }
  return out;
}

IngestResult ingest(const SimulationInstance& inst, const std::vector<MissionRow>& rows,
                    const IngestOptions& options) {
  IngestResult res;
  res.samples = extract_phase_samples(rows);

  std::vector<std::string> missing;
  for (auto p : kAllPhases) {
    for (auto u : kAllUrgencies) {
      if (res.samples[index_of(p)][index_of(u)].empty()) missing.push_back(sample_name(p, u));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw SchemaViolation("missions", "no usable samples for " + list +
                                          "; provide missions with the timestamps that bound these phases");
  }

  for (auto p : kAllPhases) {
    for (auto u : kAllUrgencies) {
      const auto& sample = res.samples[index_of(p)][index_of(u)];
      FitResult fit;
      if (sample.size() < kMinFitSample) {
        fit.distribution = Distribution::empirical(sample);
        fit.fitted = fit.distribution;
      } else {
        fit = fit_or_empirical(sample, options.family, options.ks_alpha);
      }
      res.audit.record(std::string(to_string(p)), std::string(to_string(u)), fit);
      res.catalog.set(p, u, fit.distribution);
    }
  }

  res.aod = extract_aod(rows);
  std::vector<std::string> zones;
  for (const auto& z : inst.demand.zones) zones.push_back(z.id);
  res.zone_slot = zone_slot_counts(rows, zones, inst.demand.scheme);
  res.square_weights = square_weights(inst, rows);
  res.observations = extract_observations(inst, rows);
  return res;
}

std::vector<std::filesystem::path> write_ingest_outputs(const std::filesystem::path& dir,
                                                        const SimulationInstance& inst,
                                                        const IngestResult& result) {
  std::vector<std::filesystem::path> written;
  auto note = [&](const std::filesystem::path& p) { written.push_back(p); };

  detail::json services = detail::json::array();
  for (auto p : kAllPhases) {
    for (auto u : kAllUrgencies) {
      const auto name = sample_name(p, u);
      const auto path = dir / "samples" / (name + ".csv");
      detail::write_sample_file(path, result.samples[index_of(p)][index_of(u)]);
      note(path);
      detail::json e;
      e["phase"] = std::string(to_string(p));
      e["urgency"] = std::string(to_string(u));
      e["distribution"] = detail::distribution_to_json(result.catalog.get(p, u), dir, "fitted_" + name);
      services.push_back(e);
    }
  }
  detail::write_json(dir / "service_times.json", detail::json{{"service_times", services}});
  note(dir / "service_times.json");

  {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"ed", "arrivals", "delayed", "probability"});
    for (const auto& e : result.aod) {
      w.row({e.ed, std::to_string(e.arrivals), std::to_string(e.delays.size()), format_double(e.probability())});
      const auto path = dir / "aod" / (e.ed + ".csv");
      detail::write_sample_file(path, e.delays);
      note(path);
    }
    write_text_file(dir / "aod.csv", out.str());
    note(dir / "aod.csv");
  }
  {
    std::ostringstream out;
    CsvWriter w(out);
    std::vector<std::string> header{"zone"};
    for (std::size_t s = 0; s < inst.demand.scheme.size(); ++s) header.push_back(inst.demand.scheme.label(s));
    w.row(header);
    for (std::size_t z = 0; z < result.zone_slot.size(); ++z) {
      std::vector<std::string> row{inst.demand.zones[z].id};
      for (auto n : result.zone_slot[z]) row.push_back(std::to_string(n));
      w.row(row);
    }
    write_text_file(dir / "zone_slot_counts.csv", out.str());
    note(dir / "zone_slot_counts.csv");
  }
  {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"square_id", "zone", "weight"});
    for (std::size_t i = 0; i < inst.demand.squares.size(); ++i) {
      const auto& sq = inst.demand.squares[i];
      w.row({sq.id, sq.zone, std::to_string(result.square_weights[i])});
    }
    write_text_file(dir / "square_weights.csv", out.str());
    note(dir / "square_weights.csv");
  }
  write_observations_csv(dir / "observations.csv", result.observations);
  note(dir / "observations.csv");
  {
    std::ostringstream out;
    result.audit.write(out);
    write_text_file(dir / "fit_audit.csv", out.str());
    note(dir / "fit_audit.csv");
  }
  return written;
}

void write_calibration_csv(const std::filesystem::path& path, const CalibrationTable& table) {
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"leg", "slot", "urgency", "alpha", "n_obs"});
  for (const auto& [key, entry] : table.entries()) {
    w.row({std::string(to_string(key.leg)), key.slot, std::string(to_string(key.urgency)),
           format_double(entry.alpha), std::to_string(entry.n_obs)});
  }
  write_text_file(path, out.str());
}

void write_calibration_report(const std::filesystem::path& path, const BuildTableResult& result) {
  struct Row {
    std::size_t n = 0;
    std::optional<double> alpha;
  };
  std::map<CalibrationKey, Row> rows;
  for (const auto& [key, entry] : result.table.entries()) rows[key] = {entry.n_obs, entry.alpha};
  for (const auto& [key, n] : result.defaulted) rows[key] = {n, std::nullopt};
  std::ostringstream out;
  CsvWriter w(out);
  w.row({"leg", "slot", "urgency", "n_obs", "alpha", "defaulted"});
  for (const auto& [key, r] : rows) {
    w.row({std::string(to_string(key.leg)), key.slot, std::string(to_string(key.urgency)), std::to_string(r.n),
           format_double(r.alpha.value_or(1.0)), r.alpha ? "0" : "1"});
  }
  write_text_file(path, out.str());
}

}  // namespace emsim
