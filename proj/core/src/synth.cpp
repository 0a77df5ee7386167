#include "emsim/synth.hpp"

#include "emsim/csv.hpp"
#include "emsim/error.hpp"
#include "emsim/ingest.hpp"
#include "emsim/kpi.hpp"
#include "emsim/results_io.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace emsim {

namespace {

struct Site {
  const char* id;
  const char* label;
  double x_km;
  double y_km;
};

// Territory is a disc of radius 28.15 km centred at (30, 30) km.
constexpr double kCx = 30.0, kCy = 30.0, kRadius = 28.15;

constexpr std::array<Site, 12> kBases{{
    {"Amatrice", "Amatrice", 44.0, 54.0},
    {"BorgoSPietro", "Borgo S. Pietro", 44.0, 20.0},
    {"Leonessa", "Leonessa", 33.0, 50.0},
    {"Magliano", "Magliano Sabina", 8.0, 34.0},
    {"OsteriaNuova", "Osteria Nuova", 22.0, 12.0},
    {"Paganico", "Paganico", 36.0, 12.0},
    {"PassoCorese", "Passo Corese", 18.0, 6.0},
    {"PoggioMirteto", "Poggio Mirteto", 12.0, 16.0},
    {"Posta", "Posta", 42.0, 44.0},
    {"Rieti", "Rieti", 30.0, 30.0},
    {"StimiglianoScalo", "Stimigliano Scalo", 6.0, 20.0},
    {"TorriInSabina", "Torri in Sabina", 10.0, 26.0},
}};

constexpr std::array<Site, 3> kCandidates{{
    {"PoggioMirtetoFS", "Poggio Mirteto fire station", 13.0, 17.5},
    {"PostaFS", "Posta fire station", 41.0, 43.0},
    {"RietiFS", "Rieti fire station", 31.5, 28.5},
}};

struct EdSite {
  Site site;
  std::array<const char*, 2> groups;
  double aod_probability;
};

constexpr std::array<EdSite, 13> kEds{{
    {{"ED01", "Rieti S. Camillo de Lellis", 30.5, 30.5}, {"general", nullptr}, 0.15},
    {{"ED02", "Policlinico A. Gemelli", -22.0, -30.0}, {"hub", "pediatric"}, 0.25},
    {{"ED03", "San Pietro Fatebenefratelli", -20.0, -24.0}, {"general", nullptr}, 0.20},
    {{"ED04", "Civita Castellana", -12.0, 24.0}, {"general", nullptr}, 0.10},
    {{"ED05", "SS. Gonfalone", 12.0, -8.0}, {"general", nullptr}, 0.10},
    {{"ED06", "Viterbo Belcolle", -30.0, 40.0}, {"general", nullptr}, 0.15},
    {{"ED07", "Sant'Andrea", -14.0, -20.0}, {"hub", nullptr}, 0.25},
    {{"ED08", "San Camillo-Forlanini", -18.0, -38.0}, {"hub", nullptr}, 0.25},
    {{"ED09", "Bambino Gesu", -16.0, -34.0}, {"pediatric", nullptr}, 0.10},
    {{"ED10", "San Filippo Neri", -20.0, -28.0}, {"general", nullptr}, 0.20},
    {{"ED11", "San Giovanni Evangelista", 18.0, -28.0}, {"general", nullptr}, 0.10},
    {{"ED12", "Policlinico Umberto I", -10.0, -32.0}, {"hub", nullptr}, 0.30},
    {{"ED13", "Campus Bio-Medico", -8.0, -44.0}, {"hub", nullptr}, 0.20},
}};

/// Zone seeds; each territory point belongs to the nearest seed.
constexpr std::array<std::pair<double, double>, 5> kZoneSeeds{{
    {42.0, 42.0},  // Antrodoco
    {10.0, 24.0},  // Mirtense
    {30.0, 30.0},  // Rieti
    {42.0, 16.0},  // S_Elpidio
    {20.0, 8.0},   // Salario
}};

/// Extra historical calls around each base town (kBases order).
constexpr std::array<int, 12> kTownCalls{60, 120, 90, 150, 200, 110, 220, 260, 80, 2400, 160, 180};

constexpr int kBackgroundCalls = 2600;

std::string zone_of(double x_km, double y_km) {
  std::size_t best = 0;
  double best_d = 1e300;
  for (std::size_t z = 0; z < kZoneSeeds.size(); ++z) {
    const double dx = x_km - kZoneSeeds[z].first, dy = y_km - kZoneSeeds[z].second;
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = z;
    }
  }
  return std::string(rieti::kZones[best]);
}

bool inside(double x_km, double y_km) {
  return std::hypot(x_km - kCx, y_km - kCy) <= kRadius;
}

std::vector<HistoricalCall> historical_calls(std::uint64_t seed) {
  RngStream rng(seed, 0, "synth/history");
  std::vector<HistoricalCall> calls;
  auto add = [&](double x_km, double y_km) {
    calls.push_back({x_km * 1000.0, y_km * 1000.0, zone_of(x_km, y_km)});
  };
  for (int i = 0; i < kBackgroundCalls; ++i) {
    const double r = kRadius * std::sqrt(rng.uniform());
    const double a = 2.0 * std::numbers::pi * rng.uniform();
    add(kCx + r * std::cos(a), kCy + r * std::sin(a));
  }
  for (std::size_t b = 0; b < kBases.size(); ++b) {
    const double sigma = b == 9 ? 3.0 : 1.5;
    for (int i = 0; i < kTownCalls[b]; ++i) {
      // Box-Muller
      const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
      const double g = std::sqrt(-2.0 * std::log(u1));
      const double x = kBases[b].x_km + sigma * g * std::cos(2.0 * std::numbers::pi * u2);
      const double y = kBases[b].y_km + sigma * g * std::sin(2.0 * std::numbers::pi * u2);
      if (inside(x, y)) add(x, y);
    }
  }
  return calls;
}

/// Road time in minutes for a crow-fly distance, with a per-pair detour
/// factor in [1.6, 2.0] at 60 km/h plus a fixed 2-minute overhead.
double road_minutes(double dist_km, double u) { return 2.0 + dist_km * (1.6 + 0.4 * u); }

FleetScenario scenario(std::string name, std::map<std::string, std::pair<unsigned, unsigned>> changes) {
  FleetScenario s;
  s.name = std::move(name);
  for (const auto& b : kBases) {
    unsigned h24 = std::string_view(b.id) == "Rieti" ? 2 : 1, h12 = 0;
    if (auto it = changes.find(b.id); it != changes.end()) std::tie(h24, h12) = it->second;
    s.allocations.push_back({b.id, h24, h12});
  }
  for (const auto& c : kCandidates) {
    unsigned h24 = 0, h12 = 0;
    if (auto it = changes.find(c.id); it != changes.end()) std::tie(h24, h12) = it->second;
    s.allocations.push_back({c.id, h24, h12});
  }
  return s;
}

std::vector<FleetScenario> scenarios() {
  return {
      scenario("as-is", {}),
      scenario("S1", {{"Rieti", {2, 1}}}),
      scenario("S2", {{"Rieti", {1, 1}}}),
      scenario("S3", {{"PoggioMirtetoFS", {1, 0}}}),
      scenario("S4", {{"PostaFS", {1, 0}}}),
      scenario("S5", {{"RietiFS", {1, 0}}}),
      scenario("S6", {{"PoggioMirtetoFS", {1, 0}}, {"PoggioMirteto", {0, 0}}}),
      scenario("S7", {{"PostaFS", {1, 0}}, {"Posta", {0, 0}}}),
      scenario("S8", {{"RietiFS", {1, 0}}, {"Rieti", {1, 0}}}),
      scenario("add-h24-rieti", {{"Rieti", {3, 0}}}),
      scenario("remove-h24-rieti", {{"Rieti", {1, 0}}}),
  };
}

void service_times(ServiceTimeCatalog& cat) {
  using U = UrgencyClass;
  auto tri = [](double a, double m, double b) { return Distribution::triangular(a, m, b); };
  cat.set(ServicePhase::TelephoneTriage, U::Urgent, tri(1.0, 2.0, 5.0));
  cat.set(ServicePhase::TelephoneTriage, U::NonUrgent, tri(1.0, 3.0, 8.0));
  cat.set(ServicePhase::AmbulanceAssignment, U::Urgent, tri(0.5, 1.0, 4.0));
  cat.set(ServicePhase::AmbulanceAssignment, U::NonUrgent, tri(1.0, 3.0, 15.0));
  cat.set(ServicePhase::AmbulancePreparation, U::Urgent, tri(1.0, 2.0, 5.0));
  cat.set(ServicePhase::AmbulancePreparation, U::NonUrgent, tri(1.0, 3.0, 8.0));
  cat.set(ServicePhase::TreatmentOnSite, U::Urgent, tri(10.0, 20.0, 45.0));
  cat.set(ServicePhase::TreatmentOnSite, U::NonUrgent, tri(8.0, 15.0, 35.0));
  cat.set(ServicePhase::PatientLoad, U::Urgent, tri(8.0, 15.0, 30.0));
  cat.set(ServicePhase::PatientLoad, U::NonUrgent, tri(6.0, 12.0, 25.0));
  cat.set(ServicePhase::PatientDischarge, U::Urgent, tri(10.0, 20.0, 45.0));
  cat.set(ServicePhase::PatientDischarge, U::NonUrgent, tri(8.0, 15.0, 35.0));
  cat.set(ServicePhase::Sanitization, U::Urgent, tri(20.0, 30.0, 60.0));
  cat.set(ServicePhase::Sanitization, U::NonUrgent, tri(20.0, 30.0, 60.0));
}

}  // namespace

SimulationInstance make_rieti_like(std::uint64_t seed, std::vector<HistoricalCall>* history) {
  SimulationInstance inst;
  inst.name = "rieti-like";

  const auto calls = historical_calls(seed);
  const auto grid = build_demand_grid(calls, 10.0, bounding_box(calls));

  // Points: bases, candidate sites, EDs, squares.
  std::vector<GeoPoint> points;
  for (const auto& b : kBases) points.push_back({b.id, PointKind::Base, b.x_km * 1000.0, b.y_km * 1000.0, b.label});
  for (const auto& c : kCandidates) {
    points.push_back({c.id, PointKind::Base, c.x_km * 1000.0, c.y_km * 1000.0, c.label});
  }
  for (const auto& e : kEds) {
    points.push_back({e.site.id, PointKind::EmergencyDept, e.site.x_km * 1000.0, e.site.y_km * 1000.0, e.site.label});
  }
  for (const auto& g : grid) points.push_back({"P_" + g.id, PointKind::DemandSquare, g.rep_x, g.rep_y, ""});
  inst.network = NetworkModel(points);

  // Nominal times between every pair the engine can request.
  std::vector<std::size_t> bases, eds, squares;
  for (std::size_t i = 0; i < points.size(); ++i) {
    switch (points[i].kind) {
      case PointKind::Base: bases.push_back(i); break;
      case PointKind::EmergencyDept: eds.push_back(i); break;
      case PointKind::DemandSquare: squares.push_back(i); break;
    }
  }
  RngStream roads(seed, 0, "synth/roads");
  std::vector<NominalTravel> rows;
  auto add = [&](std::size_t o, std::size_t d, TravelLeg leg) {
    const double km = std::hypot(points[o].x - points[d].x, points[o].y - points[d].y) / 1000.0;
    rows.push_back({points[o].id, points[d].id, leg, road_minutes(km, roads.uniform())});
  };
  for (auto b : bases) {
    for (auto s : squares) add(b, s, TravelLeg::BaseToScene);
  }
  for (auto s : squares) {
    for (auto e : eds) add(s, e, TravelLeg::SceneToED);
    for (auto t : squares) add(s, t, TravelLeg::SceneToScene);
    for (auto b : bases) add(s, b, TravelLeg::ReturnToBase);
  }
  for (auto e : eds) {
    for (auto s : squares) add(e, s, TravelLeg::EDToScene);
    for (auto b : bases) add(e, b, TravelLeg::ReturnToBase);
  }

  CalibrationTable calibration;
  for (std::size_t p = 0; p < rieti::kPeriods.size(); ++p) {
    const std::string slot(rieti::kPeriods[p]);
    const auto& f = rieti::kCorrection[p];
    calibration.set({TravelLeg::BaseToScene, slot, UrgencyClass::NonUrgent}, {f[0], 0});
    calibration.set({TravelLeg::SceneToED, slot, UrgencyClass::NonUrgent}, {f[1], 0});
    calibration.set({TravelLeg::BaseToScene, slot, UrgencyClass::Urgent}, {f[2], 0});
    calibration.set({TravelLeg::SceneToED, slot, UrgencyClass::Urgent}, {f[3], 0});
  }
  std::array<double, kLegCount> delta{};
  delta[index_of(TravelLeg::BaseToScene)] = rieti::kNoiseDelta;
  delta[index_of(TravelLeg::SceneToScene)] = rieti::kNoiseDelta;
  delta[index_of(TravelLeg::EDToScene)] = rieti::kNoiseDelta;
  inst.travel = TravelTimeModel(inst.network, std::move(rows), std::move(calibration), delta,
                                five_period_week_scheme());

  // Demand.
  auto& demand = inst.demand;
  demand.scheme = DemandTimeSlotScheme({rieti::kSlotBoundaries.begin(), rieti::kSlotBoundaries.end()});
  demand.policy = SlotBoundaryPolicy::Resample;
  demand.location_rule = LocationRule::RepresentativePoint;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CallSquare sq;
    sq.id = grid[i].id;
    sq.zone = grid[i].zone;
    sq.point = "P_" + grid[i].id;
    sq.area_km2 = 10.0;
    sq.point_index = inst.network.require(sq.point);
    demand.squares.push_back(std::move(sq));
  }
  const double s = rieti::kUrgentShare;
  for (std::size_t z = 0; z < rieti::kZones.size(); ++z) {
    GenerationZone zone;
    zone.id = std::string(rieti::kZones[z]);
    for (std::size_t k = 0; k < 4; ++k) {
      const double days_minutes = rieti::kMeasuredDays * demand.scheme.slot_length(k);
      zone.interarrival.push_back(Distribution::exponential(days_minutes / rieti::kAnnualCalls[z][k]));
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (grid[i].zone == zone.id) zone.squares.push_back({i, static_cast<double>(grid[i].weight)});
    }
    zone.tag_probabilities[index_of(SeverityTag::Red)] = 0.3 * s;
    zone.tag_probabilities[index_of(SeverityTag::Yellow)] = 0.7 * s;
    zone.tag_probabilities[index_of(SeverityTag::Green)] = 0.8 * (1.0 - s);
    zone.tag_probabilities[index_of(SeverityTag::White)] = 0.2 * (1.0 - s);
    zone.referral = {{"general", 0.88}, {"hub", 0.10}, {"pediatric", 0.02}};
    demand.zones.push_back(std::move(zone));
  }

  service_times(inst.service_times);

  for (const auto& e : kEds) {
    EDFacility ed;
    ed.point = e.site.id;
    for (const char* g : e.groups) {
      if (g) ed.referral_groups.emplace_back(g);
    }
    ed.aod_probability = e.aod_probability;
    ed.aod_delay = Distribution::triangular(5.0, 15.0, 60.0);
    ed.point_index = inst.network.require(ed.point);
    inst.eds.push_back(std::move(ed));
  }

  // Rows: triage tag (by tag value White, Green, Yellow, Red); columns the
  // on-scene tag in the same order.
  inst.severity_transition = {{
      {0.80, 0.15, 0.05, 0.00},
      {0.10, 0.75, 0.15, 0.00},
      {0.00, 0.10, 0.80, 0.10},
      {0.00, 0.00, 0.15, 0.85},
  }};
  inst.outcome_model[index_of(SeverityTag::Red)] = {0.01, 0.04, 0.95};
  inst.outcome_model[index_of(SeverityTag::Yellow)] = {0.03, 0.12, 0.85};
  inst.outcome_model[index_of(SeverityTag::Green)] = {0.05, 0.25, 0.70};
  inst.outcome_model[index_of(SeverityTag::White)] = {0.08, 0.37, 0.55};
  inst.sanitization.probability = 0.05;

  inst.scenarios = scenarios();
  inst.settings = SimulationSettings{};
  inst.settings.base_seed = 42;
  inst.activate("as-is");
  inst.validate();
  if (history) *history = calls;
  return inst;
}

SynthFiles write_synth(const std::filesystem::path& dir, std::string_view profile, std::uint64_t seed) {
  if (profile != "rieti-like") {
    throw SchemaViolation("profile", "unknown synthetic profile '" + std::string(profile) + "'");
  }
  std::vector<HistoricalCall> history;
  const auto inst = make_rieti_like(seed, &history);

  SynthFiles files;
  files.instance = save_instance(inst, dir);

  {
    std::ostringstream out;
    CsvWriter w(out);
    w.row({"x", "y", "zone"});
    for (const auto& c : history) w.row({format_double(c.x), format_double(c.y), c.zone});
    files.history = dir / "historical_calls.csv";
    write_text_file(files.history, out.str());
  }

  // The "historical" year comes from a seed stream no simulation run uses.
  SimulationInstance past = inst;
  past.settings.base_seed = splitmix64(seed ^ 0x68697374ULL);
  const auto year = run_replication(past, 0);

  const auto missions = missions_from_records(past, year.records);
  files.missions = dir / "missions.csv";
  write_missions_csv(files.missions, missions);

  files.observations = dir / "observations.csv";
  write_observations_csv(files.observations, extract_observations(past, missions));

  SummaryOptions opts;
  opts.warmup_minutes = past.settings.warmup_minutes;
  const auto bases = fleet_bases(past.fleet);
  const auto summary = summarize_replication(0, year.records, bases, opts);
  std::map<std::string, double> targets(summary.kpis.begin(), summary.kpis.end());
  files.targets = dir / "targets.csv";
  write_targets_csv(files.targets, targets);
  return files;
}

}  // namespace emsim
