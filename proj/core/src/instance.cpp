#include "emsim/instance.hpp"

#include "emsim/csv.hpp"
#include "emsim/error.hpp"
#include "json_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace emsim {

using detail::json;

namespace {

constexpr double kStochasticTolerance = 1e-9;

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvariantViolation(what + " must lie in [0,1]");
}

void check_row_sum(double sum, const std::string& what) {
  if (std::abs(sum - 1.0) > kStochasticTolerance) {
    std::ostringstream msg;
    msg.precision(12);
    msg << what << " sums to " << sum << ", expected 1";
    throw InvariantViolation(msg.str());
  }
}

std::string fleet_id(const std::string& base, const char* kind, unsigned k) {
  return base + "-" + kind + "-" + std::to_string(k);
}

}  // namespace

unsigned FleetScenario::total_vehicles() const noexcept {
  unsigned n = 0;
  for (const auto& a : allocations) n += a.h24 + a.h12;
  return n;
}

double FleetScenario::threshold_for(UrgencyClass urgency) const noexcept {
  const auto& o = urgency == UrgencyClass::Urgent ? threshold_urgent : threshold_nonurgent;
  return o.value_or(dispatch_threshold_minutes);
}

unsigned FleetScenario::h24_at(std::string_view base) const noexcept {
  unsigned n = 0;
  for (const auto& a : allocations) {
    if (a.base == base) n += a.h24;
  }
  return n;
}

unsigned FleetScenario::h12_at(std::string_view base) const noexcept {
  unsigned n = 0;
  for (const auto& a : allocations) {
    if (a.base == base) n += a.h12;
  }
  return n;
}

bool is_on_shift(const Ambulance& amb, double minute) noexcept {
  if (amb.schedule == Schedule::H24) return true;
  const double m = std::fmod(minute, kMinutesPerDay);
  return m >= amb.on_minute && m < amb.off_minute;
}

TransitionMatrix identity_transition() noexcept {
  TransitionMatrix m{};
  for (std::size_t i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

std::vector<Ambulance> build_fleet(const FleetScenario& scenario, const NetworkModel& network) {
  std::vector<Ambulance> fleet;
  for (const auto& alloc : scenario.allocations) {
    const auto point = network.require(alloc.base, PointKind::Base,
                                       "scenario '" + scenario.name + "' allocation");
    for (unsigned k = 1; k <= alloc.h24; ++k) {
      Ambulance a;
      a.index = fleet.size();
      a.id = fleet_id(alloc.base, "H24", k);
      a.home_base = alloc.base;
      a.home_point = point;
      fleet.push_back(std::move(a));
    }
    for (unsigned k = 1; k <= alloc.h12; ++k) {
      Ambulance a;
      a.index = fleet.size();
      a.id = fleet_id(alloc.base, "H12", k);
      a.home_base = alloc.base;
      a.home_point = point;
      a.schedule = Schedule::H12;
      a.on_minute = scenario.h12_on_minute;
      a.off_minute = scenario.h12_off_minute;
      fleet.push_back(std::move(a));
    }
  }
  if (fleet.empty()) throw InvariantViolation("scenario '" + scenario.name + "' has no vehicles");
  return fleet;
}

std::vector<std::string> SimulationInstance::referral_groups() const {
  std::set<std::string> groups;
  for (const auto& ed : eds) groups.insert(ed.referral_groups.begin(), ed.referral_groups.end());
  return {groups.begin(), groups.end()};
}

const FleetScenario& SimulationInstance::find_scenario(std::string_view wanted) const {
  for (const auto& s : scenarios) {
    if (s.name == wanted) return s;
  }
  throw CrossRefError(std::string(wanted), "scenario list");
}

void SimulationInstance::activate(std::string_view wanted) {
  scenario = find_scenario(wanted);
  fleet = build_fleet(scenario, network);
}

bool SimulationInstance::operator==(const SimulationInstance& o) const {
  return name == o.name && network == o.network && travel == o.travel && demand == o.demand &&
         service_times == o.service_times && eds == o.eds &&
         severity_transition == o.severity_transition && outcome_model == o.outcome_model &&
         sanitization == o.sanitization && scenarios == o.scenarios && scenario == o.scenario &&
         fleet == o.fleet && settings == o.settings;
}

void SimulationInstance::validate() const {
  // Stochastic inputs.
  for (auto from : kAllTags) {
    double sum = 0.0;
    for (double p : severity_transition[index_of(from)]) {
      check_probability(p, "severity transition entry");
      sum += p;
    }
    check_row_sum(sum, "severity transition row " + std::string(to_string(from)));
    const auto& o = outcome_model[index_of(from)];
    check_probability(o.cancel_en_route, "cancel_en_route");
    check_probability(o.treat_on_site, "treat_on_site");
    check_probability(o.transport, "transport");
    check_row_sum(o.cancel_en_route + o.treat_on_site + o.transport,
                  "outcome probabilities of " + std::string(to_string(from)));
    if (o.treat_on_site + o.transport <= 0.0) {
      throw InvariantViolation("outcome model of " + std::string(to_string(from)) +
                               " has no on-scene ending");
    }
  }
  check_probability(sanitization.probability, "sanitization probability");
  service_times.require_complete();

  // Simulation settings.
  if (!(settings.horizon_minutes > 0.0) || !std::isfinite(settings.horizon_minutes)) {
    throw InvariantViolation("horizon_minutes must be positive");
  }
  if (!(settings.warmup_minutes >= 0.0 && settings.warmup_minutes < settings.horizon_minutes)) {
    throw InvariantViolation("warmup_minutes must satisfy 0 <= warmup < horizon");
  }
  if (settings.replications < 1) throw InvariantViolation("replications must be at least 1");

  // Facilities.
  if (eds.empty()) throw InvariantViolation("no emergency departments declared");
  std::set<std::string> ed_points;
  for (const auto& ed : eds) {
    network.require(ed.point, PointKind::EmergencyDept, "ED list");
    if (!ed_points.insert(ed.point).second) throw InvariantViolation("duplicate ED " + ed.point);
    if (ed.referral_groups.empty()) {
      throw InvariantViolation("ED " + ed.point + " belongs to no referral group");
    }
    check_probability(ed.aod_probability, "aod_probability of " + ed.point);
  }
  const auto groups = referral_groups();

  // Demand.
  if (demand.scheme.size() == 0) throw InvariantViolation("demand time-slot scheme is empty");
  if (demand.zones.empty()) throw InvariantViolation("no generation zones declared");
  std::vector<int> owner(demand.squares.size(), -1);
  for (std::size_t z = 0; z < demand.zones.size(); ++z) {
    const auto& zone = demand.zones[z];
    if (zone.interarrival.size() != demand.scheme.size()) {
      throw InvariantViolation("zone " + zone.id + " needs one interarrival distribution per slot");
    }
    if (zone.squares.empty()) throw InvariantViolation("zone " + zone.id + " has no call squares");
    for (const auto& ws : zone.squares) {
      if (!(ws.weight > 0.0)) throw InvariantViolation("non-positive square weight in " + zone.id);
      if (ws.square >= demand.squares.size()) throw InvariantViolation("square index out of range");
      if (owner[ws.square] != -1) {
        throw InvariantViolation("square " + demand.squares[ws.square].id +
                                 " belongs to more than one zone");
      }
      owner[ws.square] = static_cast<int>(z);
      if (demand.squares[ws.square].zone != zone.id) {
        throw CrossRefError(demand.squares[ws.square].zone, "square " + demand.squares[ws.square].id);
      }
    }
    double tag_sum = 0.0;
    for (double p : zone.tag_probabilities) {
      check_probability(p, "tag probability in " + zone.id);
      tag_sum += p;
    }
    check_row_sum(tag_sum, "tag probabilities of zone " + zone.id);
    if (zone.referral.empty()) throw InvariantViolation("zone " + zone.id + " has no referral rule");
    double ref_sum = 0.0;
    for (const auto& [group, p] : zone.referral) {
      check_probability(p, "referral probability in " + zone.id);
      ref_sum += p;
      if (p > 0.0 && !std::binary_search(groups.begin(), groups.end(), group)) {
        throw NoEligibleED(group);
      }
    }
    check_row_sum(ref_sum, "referral probabilities of zone " + zone.id);
  }
  for (std::size_t s = 0; s < owner.size(); ++s) {
    if (owner[s] == -1) throw CrossRefError(demand.squares[s].zone, "square " + demand.squares[s].id);
  }

  // Scenarios.
  if (scenarios.empty()) throw InvariantViolation("no scenarios declared");
  std::set<std::string> names;
  for (const auto& s : scenarios) {
    if (!names.insert(s.name).second) throw InvariantViolation("duplicate scenario " + s.name);
    for (double t : {s.dispatch_threshold_minutes, s.threshold_urgent.value_or(1.0),
                     s.threshold_nonurgent.value_or(1.0)}) {
      if (!(t > 0.0)) throw InvariantViolation("dispatch threshold must be positive in " + s.name);
    }
    if (!(s.h12_on_minute >= 0.0 && s.h12_on_minute < s.h12_off_minute &&
          s.h12_off_minute <= kMinutesPerDay)) {
      throw InvariantViolation("H12 shift must satisfy 0 <= on < off <= 1440 in " + s.name);
    }
    build_fleet(s, network);
  }

  // Travel-time completeness for every leg the engine may query.
  std::vector<std::size_t> bases, squares, ed_idx;
  for (std::size_t i = 0; i < network.size(); ++i) {
    switch (network.at(i).kind) {
      case PointKind::Base: bases.push_back(i); break;
      case PointKind::DemandSquare: squares.push_back(i); break;
      case PointKind::EmergencyDept: ed_idx.push_back(i); break;
    }
  }
  auto need = [&](std::size_t o, std::size_t d, TravelLeg leg) {
    if (!travel.has(o, d, leg)) {
      throw UnknownPair(network.at(o).id, network.at(d).id, std::string(to_string(leg)));
    }
  };
  for (auto s : squares) {
    for (auto b : bases) {
      need(b, s, TravelLeg::BaseToScene);
      need(s, b, TravelLeg::ReturnToBase);
    }
    for (auto e : ed_idx) {
      need(s, e, TravelLeg::SceneToED);
      need(e, s, TravelLeg::EDToScene);
    }
    for (auto s2 : squares) need(s, s2, TravelLeg::SceneToScene);
  }
  for (auto e : ed_idx) {
    for (auto b : bases) need(e, b, TravelLeg::ReturnToBase);
  }
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

namespace {

std::vector<TimeSlot> slots_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "five_period") return five_period_week_scheme();
    throw SchemaViolation("travel_slots", "unknown named scheme '" + j.get<std::string>() + "'");
  }
  if (!j.is_array()) throw SchemaViolation("travel_slots", "expected a name or an array");
  std::vector<TimeSlot> slots;
  for (const auto& s : j) {
    TimeSlot slot;
    slot.id = detail::get_string(s, "id", "travel_slots");
    if (auto it = s.find("week_pattern"); it != s.end()) slot.week_pattern = it->get<std::string>();
    for (const auto& r : detail::require(s, "ranges", "travel_slots." + slot.id)) {
      if (!r.is_array() || r.size() != 2) {
        throw SchemaViolation("travel_slots." + slot.id + ".ranges", "expected [start, end] pairs");
      }
      slot.minute_ranges.push_back({detail::number_value(r[0], "range start"),
                                    detail::number_value(r[1], "range end")});
    }
    slots.push_back(std::move(slot));
  }
  return slots;
}

SeverityTag tag_key(const std::string& key, const std::string& context) {
  return parse_severity_tag(key, context);
}

}  // namespace

SimulationInstance load_instance(const std::filesystem::path& config_path,
                                 std::optional<std::string> scenario) {
  const json root = detail::read_json(config_path);
  const auto dir = config_path.parent_path();
  SimulationInstance inst;
  if (auto it = root.find("name"); it != root.end()) inst.name = it->get<std::string>();

  // Points.
  {
    const auto table = read_csv(dir / detail::get_string(root, "points", "root"));
    const auto c_id = table.require_column("id");
    const auto c_kind = table.require_column("kind");
    const auto c_x = table.require_column("x");
    const auto c_y = table.require_column("y");
    const auto c_label = table.column("label");
    std::vector<GeoPoint> points;
    points.reserve(table.size());
    for (std::size_t r = 0; r < table.size(); ++r) {
      GeoPoint p;
      p.id = table.text(r, c_id);
      try {
        p.kind = parse_point_kind(table.text(r, c_kind), "points.kind");
      } catch (const SchemaViolation& e) {
        throw SchemaViolation(e.field(), e.reason(), r + 2);
      }
      p.x = table.number(r, c_x);
      p.y = table.number(r, c_y);
      if (c_label) p.label = table.text(r, *c_label);
      points.push_back(std::move(p));
    }
    inst.network = NetworkModel(std::move(points));
  }

  // Travel times.
  {
    std::vector<TimeSlot> slots =
        root.contains("travel_slots") ? slots_from_json(root["travel_slots"]) : five_period_week_scheme();
    const auto issues = validate_week_partition(slots);
    if (!issues.empty()) throw InvariantViolation("travel slots: " + describe(issues.front()));

    CalibrationTable calibration;
    if (auto it = root.find("calibration"); it != root.end() && !it->is_null()) {
      const auto table = read_csv(dir / it->get<std::string>());
      const auto c_leg = table.require_column("leg");
      const auto c_slot = table.require_column("slot");
      const auto c_urg = table.require_column("urgency");
      const auto c_alpha = table.require_column("alpha");
      const auto c_n = table.column("n_obs");
      for (std::size_t r = 0; r < table.size(); ++r) {
        CalibrationKey key{parse_leg(table.text(r, c_leg), "calibration.leg"), table.text(r, c_slot),
                           parse_urgency(table.text(r, c_urg), "calibration.urgency")};
        CalibrationEntry entry{table.number(r, c_alpha),
                               c_n ? static_cast<std::size_t>(table.integer(r, *c_n)) : 0};
        calibration.set(key, entry);
      }
    }

    std::array<double, kLegCount> delta{};
    if (auto it = root.find("noise_delta"); it != root.end()) {
      for (const auto& [leg, value] : it->items()) {
        delta[index_of(parse_leg(leg, "noise_delta"))] =
            detail::number_value(value, "noise_delta." + leg);
      }
    }

    const auto table = read_csv(dir / detail::get_string(root, "travel_times", "root"));
    const auto c_o = table.require_column("origin");
    const auto c_d = table.require_column("destination");
    const auto c_leg = table.require_column("leg");
    const auto c_min = table.require_column("minutes");
    std::vector<NominalTravel> rows;
    rows.reserve(table.size());
    for (std::size_t r = 0; r < table.size(); ++r) {
      TravelLeg leg;
      try {
        leg = parse_leg(table.text(r, c_leg), "travel_times.leg");
      } catch (const SchemaViolation& e) {
        throw SchemaViolation(e.field(), e.reason(), r + 2);
      }
      rows.push_back({table.text(r, c_o), table.text(r, c_d), leg, table.number(r, c_min)});
    }
    inst.travel = TravelTimeModel(inst.network, std::move(rows), std::move(calibration), delta,
                                  std::move(slots));
  }

  // Demand.
  {
    const auto& d = detail::require(root, "demand", "root");
    std::vector<double> bounds;
    for (const auto& b : detail::require(d, "slot_boundaries", "demand")) {
      bounds.push_back(detail::number_value(b, "demand.slot_boundaries"));
    }
    inst.demand.scheme = DemandTimeSlotScheme(std::move(bounds));
    if (auto it = d.find("slot_boundary_policy"); it != d.end()) {
      inst.demand.policy = parse_slot_boundary_policy(it->get<std::string>());
    }
    if (auto it = d.find("location_rule"); it != d.end()) {
      inst.demand.location_rule = parse_location_rule(it->get<std::string>());
    }

    const auto table = read_csv(dir / detail::get_string(d, "squares", "demand"));
    const auto c_id = table.require_column("square_id");
    const auto c_zone = table.require_column("zone");
    const auto c_point = table.require_column("point");
    const auto c_weight = table.require_column("weight");
    const auto c_area = table.column("area_km2");
    const auto c_samples = table.column("sample_points");
    std::vector<double> weights;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < table.size(); ++r) {
      CallSquare sq;
      sq.id = table.text(r, c_id);
      if (!seen.insert(sq.id).second) {
        throw SchemaViolation("squares.square_id", "duplicate id '" + sq.id + "'", r + 2);
      }
      sq.zone = table.text(r, c_zone);
      sq.point = table.text(r, c_point);
      sq.point_index = inst.network.require(sq.point, PointKind::DemandSquare, "square " + sq.id);
      if (c_area && !table.text(r, *c_area).empty()) sq.area_km2 = table.number(r, *c_area);
      if (c_samples) {
        std::stringstream ss(table.text(r, *c_samples));
        std::string id;
        while (std::getline(ss, id, ';')) {
          if (id.empty()) continue;
          sq.sample_point_indices.push_back(
              inst.network.require(id, PointKind::DemandSquare, "square " + sq.id + " samples"));
          sq.sample_points.push_back(id);
        }
      }
      weights.push_back(table.number(r, c_weight));
      inst.demand.squares.push_back(std::move(sq));
    }

    for (const auto& zj : detail::require(d, "zones", "demand")) {
      GenerationZone zone;
      zone.id = detail::get_string(zj, "id", "demand.zones");
      const std::string ctx = "zone " + zone.id;
      std::size_t slot = 0;
      for (const auto& dj : detail::require(zj, "interarrival", ctx)) {
        zone.interarrival.push_back(detail::distribution_from_json(
            dj, dir, ctx + ".interarrival[" + std::to_string(slot++) + "]"));
      }
      for (const auto& [tag, p] : detail::require(zj, "tag_probabilities", ctx).items()) {
        zone.tag_probabilities[index_of(tag_key(tag, ctx + ".tag_probabilities"))] =
            detail::number_value(p, ctx + ".tag_probabilities." + tag);
      }
      for (const auto& [group, p] : detail::require(zj, "referral", ctx).items()) {
        zone.referral.emplace_back(group, detail::number_value(p, ctx + ".referral." + group));
      }
      for (std::size_t s = 0; s < inst.demand.squares.size(); ++s) {
        if (inst.demand.squares[s].zone == zone.id) zone.squares.push_back({s, weights[s]});
      }
      inst.demand.zones.push_back(std::move(zone));
    }
    for (const auto& sq : inst.demand.squares) {
      const bool known = std::any_of(inst.demand.zones.begin(), inst.demand.zones.end(),
                                     [&](const GenerationZone& z) { return z.id == sq.zone; });
      if (!known) throw CrossRefError(sq.zone, "square " + sq.id);
    }
  }

  // Service times.
  for (const auto& sj : detail::require(root, "service_times", "root")) {
    const auto phase = parse_phase(detail::get_string(sj, "phase", "service_times"), "service_times");
    const auto urgency =
        parse_urgency(detail::get_string(sj, "urgency", "service_times"), "service_times");
    const std::string ctx = "service_times." + std::string(to_string(phase)) + "." +
                            std::string(to_string(urgency));
    inst.service_times.set(phase, urgency,
                           detail::distribution_from_json(detail::require(sj, "distribution", ctx), dir, ctx));
  }

  // EDs.
  for (const auto& ej : detail::require(root, "eds", "root")) {
    EDFacility ed;
    ed.point = detail::get_string(ej, "point", "eds");
    ed.point_index = inst.network.require(ed.point, PointKind::EmergencyDept, "ED list");
    for (const auto& g : detail::require(ej, "referral_groups", "ED " + ed.point)) {
      ed.referral_groups.push_back(g.get<std::string>());
    }
    if (auto it = ej.find("aod_probability"); it != ej.end()) {
      ed.aod_probability = detail::number_value(*it, "ED " + ed.point + ".aod_probability");
    }
    if (auto it = ej.find("aod_delay"); it != ej.end()) {
      ed.aod_delay = detail::distribution_from_json(*it, dir, "ED " + ed.point + ".aod_delay");
    }
    inst.eds.push_back(std::move(ed));
  }

  // Severity revision and mission endings.
  if (auto it = root.find("severity_transition"); it != root.end()) {
    inst.severity_transition = TransitionMatrix{};
    for (const auto& [from, row] : it->items()) {
      const auto f = tag_key(from, "severity_transition");
      for (const auto& [to, p] : row.items()) {
        inst.severity_transition[index_of(f)][index_of(tag_key(to, "severity_transition." + from))] =
            detail::number_value(p, "severity_transition." + from + "." + to);
      }
    }
  }
  for (const auto& [tag, oj] : detail::require(root, "outcome_model", "root").items()) {
    const std::string ctx = "outcome_model." + tag;
    auto& o = inst.outcome_model[index_of(tag_key(tag, "outcome_model"))];
    o.cancel_en_route = detail::get_number(oj, "cancel_en_route", ctx);
    o.treat_on_site = detail::get_number(oj, "treat_on_site", ctx);
    o.transport = detail::get_number(oj, "transport", ctx);
  }
  if (auto it = root.find("sanitization"); it != root.end()) {
    inst.sanitization.probability = detail::get_number(*it, "probability", "sanitization");
  }

  // Scenarios.
  for (const auto& sj : detail::require(root, "scenarios", "root")) {
    FleetScenario s;
    s.name = detail::get_string(sj, "name", "scenarios");
    const std::string ctx = "scenario " + s.name;
    s.dispatch_threshold_minutes = detail::get_number(sj, "dispatch_threshold_minutes", ctx);
    if (auto it = sj.find("threshold_overrides"); it != sj.end()) {
      for (const auto& [urg, t] : it->items()) {
        const double v = detail::number_value(t, ctx + ".threshold_overrides." + urg);
        if (parse_urgency(urg, ctx + ".threshold_overrides") == UrgencyClass::Urgent) {
          s.threshold_urgent = v;
        } else {
          s.threshold_nonurgent = v;
        }
      }
    }
    if (auto it = sj.find("h12_on_minute"); it != sj.end()) s.h12_on_minute = detail::number_value(*it, ctx);
    if (auto it = sj.find("h12_off_minute"); it != sj.end()) s.h12_off_minute = detail::number_value(*it, ctx);
    for (const auto& aj : detail::require(sj, "allocations", ctx)) {
      BaseAllocation a;
      a.base = detail::get_string(aj, "base", ctx + ".allocations");
      const double h24 = aj.contains("h24") ? detail::number_value(aj["h24"], ctx + ".h24") : 0.0;
      const double h12 = aj.contains("h12") ? detail::number_value(aj["h12"], ctx + ".h12") : 0.0;
      if (h24 < 0 || h12 < 0 || h24 != std::floor(h24) || h12 != std::floor(h12)) {
        throw SchemaViolation(ctx + ".allocations", "vehicle counts must be non-negative integers");
      }
      a.h24 = static_cast<unsigned>(h24);
      a.h12 = static_cast<unsigned>(h12);
      s.allocations.push_back(std::move(a));
    }
    inst.scenarios.push_back(std::move(s));
  }
  if (inst.scenarios.empty()) throw InvariantViolation("no scenarios declared");

  // Run settings.
  if (auto it = root.find("simulation"); it != root.end()) {
    const auto& sim = *it;
    if (sim.contains("horizon_minutes")) inst.settings.horizon_minutes = detail::get_number(sim, "horizon_minutes", "simulation");
    if (sim.contains("warmup_minutes")) inst.settings.warmup_minutes = detail::get_number(sim, "warmup_minutes", "simulation");
    if (sim.contains("replications")) {
      const double r = detail::get_number(sim, "replications", "simulation");
      if (r < 1 || r != std::floor(r)) throw SchemaViolation("simulation.replications", "expected a positive integer");
      inst.settings.replications = static_cast<std::size_t>(r);
    }
    if (sim.contains("base_seed")) {
      const auto& seed = sim["base_seed"];
      if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
        throw SchemaViolation("simulation.base_seed", "expected a non-negative integer");
      }
      inst.settings.base_seed = seed.get<std::uint64_t>();
    }
  }

  std::string active = scenario.value_or(
      root.contains("default_scenario") ? root["default_scenario"].get<std::string>()
                                        : inst.scenarios.front().name);
  inst.activate(active);
  inst.validate();
  return inst;
}

// ---------------------------------------------------------------------------
// Saving
// ---------------------------------------------------------------------------

std::filesystem::path save_instance(const SimulationInstance& inst, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json root;
  root["name"] = inst.name;

  {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"id", "kind", "x", "y", "label"});
    for (const auto& p : inst.network.points()) {
      w.row({p.id, std::string(to_string(p.kind)), format_double(p.x), format_double(p.y), p.label});
    }
    write_text_file(dir / "points.csv", out.str());
    root["points"] = "points.csv";
  }
  {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"origin", "destination", "leg", "minutes"});
    for (const auto& r : inst.travel.nominal_rows()) {
      w.row({r.origin, r.destination, std::string(to_string(r.leg)), format_double(r.minutes)});
    }
    write_text_file(dir / "travel_times.csv", out.str());
    root["travel_times"] = "travel_times.csv";
  }
  {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"leg", "slot", "urgency", "alpha", "n_obs"});
    for (const auto& [key, entry] : inst.travel.calibration().entries()) {
      w.row({std::string(to_string(key.leg)), key.slot, std::string(to_string(key.urgency)),
             format_double(entry.alpha), std::to_string(entry.n_obs)});
    }
    write_text_file(dir / "calibration.csv", out.str());
    root["calibration"] = "calibration.csv";
  }
  {
    json slots = json::array();
    for (const auto& s : inst.travel.slots()) {
      json sj;
      sj["id"] = s.id;
      sj["week_pattern"] = s.week_pattern;
      json ranges = json::array();
      for (const auto& r : s.minute_ranges) ranges.push_back({r.start, r.end});
      sj["ranges"] = ranges;
      slots.push_back(sj);
    }
    root["travel_slots"] = slots;
    json delta = json::object();
    for (auto leg : kAllLegs) delta[std::string(to_string(leg))] = inst.travel.delta(leg);
    root["noise_delta"] = delta;
  }

  {
    json d;
    d["slot_boundaries"] = inst.demand.scheme.boundaries();
    d["slot_boundary_policy"] = std::string(to_string(inst.demand.policy));
    d["location_rule"] = std::string(to_string(inst.demand.location_rule));
    d["squares"] = "squares.csv";
    std::vector<double> weights(inst.demand.squares.size(), 0.0);
    json zones = json::array();
    for (const auto& z : inst.demand.zones) {
      for (const auto& ws : z.squares) weights[ws.square] = ws.weight;
      json zj;
      zj["id"] = z.id;
      json ia = json::array();
      for (std::size_t s = 0; s < z.interarrival.size(); ++s) {
        ia.push_back(detail::distribution_to_json(z.interarrival[s], dir,
                                                  "interarrival_" + z.id + "_" + std::to_string(s)));
      }
      zj["interarrival"] = ia;
      json tags = json::object();
      for (auto t : kAllTags) tags[std::string(to_string(t))] = z.tag_probabilities[index_of(t)];
      zj["tag_probabilities"] = tags;
      json ref = json::object();
      for (const auto& [g, p] : z.referral) ref[g] = p;
      zj["referral"] = ref;
      zones.push_back(zj);
    }
    d["zones"] = zones;
    root["demand"] = d;

    std::ostringstream out;
    CsvWriter w(out);
    w.row({"square_id", "zone", "point", "weight", "area_km2", "sample_points"});
    for (std::size_t s = 0; s < inst.demand.squares.size(); ++s) {
      const auto& sq = inst.demand.squares[s];
      std::string samples;
      for (const auto& p : sq.sample_points) samples += (samples.empty() ? "" : ";") + p;
      w.row({sq.id, sq.zone, sq.point, format_double(weights[s]), format_double(sq.area_km2), samples});
    }
    write_text_file(dir / "squares.csv", out.str());
  }

  {
    json st = json::array();
    for (auto phase : kAllPhases) {
      for (auto u : kAllUrgencies) {
        if (!inst.service_times.has(phase, u)) continue;
        json sj;
        sj["phase"] = std::string(to_string(phase));
        sj["urgency"] = std::string(to_string(u));
        sj["distribution"] = detail::distribution_to_json(
            inst.service_times.get(phase, u), dir,
            std::string(to_string(phase)) + "_" + std::string(to_string(u)));
        st.push_back(sj);
      }
    }
    root["service_times"] = st;
  }

  {
    json eds = json::array();
    for (const auto& ed : inst.eds) {
      json ej;
      ej["point"] = ed.point;
      ej["referral_groups"] = ed.referral_groups;
      ej["aod_probability"] = ed.aod_probability;
      ej["aod_delay"] = detail::distribution_to_json(ed.aod_delay, dir, "aod_" + ed.point);
      eds.push_back(ej);
    }
    root["eds"] = eds;
  }

  {
    json st = json::object();
    json om = json::object();
    for (auto from : kAllTags) {
      json row = json::object();
      for (auto to : kAllTags) {
        row[std::string(to_string(to))] = inst.severity_transition[index_of(from)][index_of(to)];
      }
      st[std::string(to_string(from))] = row;
      const auto& o = inst.outcome_model[index_of(from)];
      om[std::string(to_string(from))] = {{"cancel_en_route", o.cancel_en_route},
                                          {"treat_on_site", o.treat_on_site},
                                          {"transport", o.transport}};
    }
    root["severity_transition"] = st;
    root["outcome_model"] = om;
    root["sanitization"] = {{"probability", inst.sanitization.probability}};
  }

  {
    json scenarios = json::array();
    for (const auto& s : inst.scenarios) {
      json sj;
      sj["name"] = s.name;
      sj["dispatch_threshold_minutes"] = s.dispatch_threshold_minutes;
      if (s.threshold_urgent || s.threshold_nonurgent) {
        json o = json::object();
        if (s.threshold_urgent) o["Urgent"] = *s.threshold_urgent;
        if (s.threshold_nonurgent) o["NonUrgent"] = *s.threshold_nonurgent;
        sj["threshold_overrides"] = o;
      }
      sj["h12_on_minute"] = s.h12_on_minute;
      sj["h12_off_minute"] = s.h12_off_minute;
      json allocs = json::array();
      for (const auto& a : s.allocations) allocs.push_back({{"base", a.base}, {"h24", a.h24}, {"h12", a.h12}});
      sj["allocations"] = allocs;
      scenarios.push_back(sj);
    }
    root["scenarios"] = scenarios;
    root["default_scenario"] = inst.scenario.name;
    root["simulation"] = {{"horizon_minutes", inst.settings.horizon_minutes},
                          {"warmup_minutes", inst.settings.warmup_minutes},
                          {"replications", inst.settings.replications},
                          {"base_seed", inst.settings.base_seed}};
  }

  const auto path = dir / "instance.json";
  detail::write_json(path, root);
  return path;
}

}  // namespace emsim
