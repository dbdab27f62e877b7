#include "semmatch/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "semmatch/errors.hpp"

namespace semmatch::sim {
namespace {

std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// sqrt(pi/2): mean of a Rayleigh variable per unit sigma.
constexpr double kRayleighMean = 1.2533141373155003;

class Jitter {
 public:
  Jitter(double err_mean_m, std::mt19937_64& rng) : sigma_(err_mean_m / kRayleighMean), rng_(rng) {}

  GeoPoint apply(const GeoPoint& p) {
    if (sigma_ <= 0.0) return p;
    std::normal_distribution<double> n(0.0, sigma_);
    const double east = n(rng_);
    const double north = n(rng_);
    const double dist = std::hypot(east, north);
    if (dist == 0.0) return p;
    return destination(p, std::atan2(east, north) * 180.0 / std::numbers::pi, dist);
  }

 private:
  double sigma_;
  std::mt19937_64& rng_;
};

// Replaces locations by earlier emitted ones with the model's probability.
class PingPong {
 public:
  PingPong(const NoiseModel& m, std::mt19937_64& rng) : prob_(m.pingpong_prob), depth_(m.pingpong_depth), rng_(rng) {}

  bool maybe_repeat(std::vector<GeoPoint>& emitted, GeoPoint& loc) {
    const std::size_t reach = std::min<std::size_t>(static_cast<std::size_t>(std::max(depth_, 0)), emitted.size());
    bool repeated = false;
    if (prob_ > 0.0 && reach > 0) {
      std::bernoulli_distribution coin(prob_);
      if (coin(rng_)) {
        std::uniform_int_distribution<std::size_t> back(1, reach);
        loc = emitted[emitted.size() - back(rng_)];
        repeated = true;
      }
    }
    emitted.push_back(loc);
    return repeated;
  }

 private:
  double prob_;
  int depth_;
  std::mt19937_64& rng_;
};

double travel_heading(const RoadNetwork& network, const RouteLeg& leg, double offset) {
  const double h = network.heading_at(leg.segment, offset);
  return leg.forward() ? h : wrap_unsigned_deg(h + 180.0);
}

}  // namespace

void NoiseModel::validate() const {
  if (!std::isfinite(err_mean_m) || err_mean_m < 0.0) throw ConfigError("noise err_mean_m must be >= 0");
  if (!std::isfinite(updates_per_km) || updates_per_km <= 0.0) throw ConfigError("noise updates_per_km must be > 0");
  if (!(pingpong_prob >= 0.0 && pingpong_prob < 1.0)) throw ConfigError("noise pingpong_prob must be in [0, 1)");
  if (pingpong_depth < 0) throw ConfigError("noise pingpong_depth must be >= 0");
}

NoiseModel NoiseModel::preset(std::string_view name) {
  if (name == "cellular") return {"cellular", 1900.0, 1.4, 0.1, 2};
  if (name == "network") return {"network", 162.0, 6.8, 0.25, 2};
  if (name == "gps_sparse") return {"gps_sparse", 19.0, 0.6, 0.0, 0};
  throw ConfigError("unknown noise preset '" + std::string(name) + "' (expected cellular, network or gps_sparse)");
}

std::array<double, kLandmarkTypeCount> default_type_mix() noexcept {
  std::array<double, kLandmarkTypeCount> mix{};
  const auto& counts = default_confusion_counts();
  for (std::size_t r = 0; r < kLandmarkTypeCount; ++r) {
    for (double c : counts[r]) mix[r] += c;
  }
  return mix;
}

RoadNetwork generate_network(const GridSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1 || spec.rows * spec.cols < 2) {
    throw ConfigError("grid needs at least two nodes");
  }
  if (!std::isfinite(spec.block_m) || spec.block_m <= 0.0) throw ConfigError("grid block_m must be > 0");
  if (!std::isfinite(spec.density_per_km) || spec.density_per_km < 0.0) {
    throw ConfigError("landmark density must be >= 0");
  }
  if (!std::isfinite(spec.speed_limit_kmh) || spec.speed_limit_kmh <= 0.0) {
    throw ConfigError("grid speed limit must be > 0");
  }
  double mix_total = 0.0;
  for (double w : spec.type_mix) {
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("type mix weights must be >= 0");
    mix_total += w;
  }
  if (spec.density_per_km > 0.0 && mix_total <= 0.0) throw ConfigError("type mix has no mass");
  if (!is_valid(spec.origin)) throw ConfigError("grid origin is not a valid coordinate");

  const double deg_per_m = 180.0 / (std::numbers::pi * kEarthRadiusM);
  const double dlat = spec.block_m * deg_per_m;
  const double dlon = dlat / std::cos(spec.origin.lat * std::numbers::pi / 180.0);
  const GeoPoint far{spec.origin.lat + dlat * (spec.rows - 1), spec.origin.lon + dlon * (spec.cols - 1)};
  if (!is_valid(far) || std::abs(far.lat) > 85.0) throw ConfigError("grid extends past valid coordinates");

  auto node = [&](int r, int c) { return GeoPoint{spec.origin.lat + dlat * r, spec.origin.lon + dlon * c}; };

  std::mt19937_64 rng(substream(spec.seed, 0));
  std::exponential_distribution<double> gap(spec.density_per_km > 0.0 ? spec.density_per_km / 1000.0 : 1.0);
  std::discrete_distribution<std::size_t> pick(spec.type_mix.begin(), spec.type_mix.end());

  std::vector<RoadSegment> segments;
  auto add = [&](std::string id, GeoPoint a, GeoPoint b) {
    RoadSegment s;
    s.id = std::move(id);
    s.polyline = {a, b};
    s.speed_limit_mps = spec.speed_limit_kmh / 3.6;
    if (spec.density_per_km > 0.0) {
      const double len = geodesic_distance(a, b);
      for (double pos = gap(rng); pos < len; pos += gap(rng)) {
        s.landmarks.push_back({kLandmarkTypes[pick(rng)], lerp(a, b, pos / len), pos});
      }
    }
    segments.push_back(std::move(s));
  };
  for (int r = 0; r < spec.rows; ++r) {
    for (int c = 0; c < spec.cols; ++c) {
      const std::string suffix = std::to_string(r) + "_" + std::to_string(c);
      if (c + 1 < spec.cols) add("h" + suffix, node(r, c), node(r, c + 1));
      if (r + 1 < spec.rows) add("v" + suffix, node(r, c), node(r + 1, c));
    }
  }
  return RoadNetwork(std::move(segments));
}

SimRoute sample_route(const RoadNetwork& network, const RouteSpec& spec, std::uint64_t seed) {
  if (!std::isfinite(spec.length_km) || spec.length_km <= 0.0) throw ConfigError("route length must be > 0");
  if (!std::isfinite(spec.nominal_speed_mps) || spec.nominal_speed_mps <= 0.0) {
    throw ConfigError("route speed must be > 0");
  }
  if (!(spec.speed_jitter >= 0.0 && spec.speed_jitter < 1.0)) throw ConfigError("speed jitter must be in [0, 1)");

  std::mt19937_64 rng(substream(seed, 1));
  std::uniform_real_distribution<double> jitter(1.0 - spec.speed_jitter, 1.0 + spec.speed_jitter);
  const auto n_segments = static_cast<SegmentIndex>(network.segments().size());

  SimRoute route;
  double remaining = spec.length_km * 1000.0;
  double t = 0.0;

  SegmentIndex seg = std::uniform_int_distribution<SegmentIndex>(0, n_segments - 1)(rng);
  bool forward = std::bernoulli_distribution(0.5)(rng);
  while (true) {
    const double len = network.segment_length(seg);
    const double from = forward ? 0.0 : len;
    const bool last = remaining <= len + 1e-6;
    const double run = last ? std::min(remaining, len) : len;
    const double to = forward ? run : len - run;
    const double speed = spec.nominal_speed_mps * jitter(rng);
    route.legs.push_back({seg, from, to});
    route.leg_speeds.push_back(speed);
    route.leg_start_t.push_back(t);
    t += run / speed;
    remaining -= run;
    if (last) break;

    const NodeIndex at = forward ? network.end_node(seg) : network.start_node(seg);
    std::vector<SegmentIndex> options;
    for (SegmentIndex s : network.incident(at)) {
      if (s != seg) options.push_back(s);
    }
    if (options.empty()) {
      route.truncated = true;
      break;
    }
    const SegmentIndex next = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    forward = network.start_node(next) == at;
    seg = next;
  }

  route.path = path_from_legs(network, route.legs);

  const double total_t = t;
  double travelled_before = 0.0;
  std::size_t leg = 0;
  for (double ts = 0.0; ts <= total_t; ts += 1.0) {
    while (leg + 1 < route.legs.size() && ts >= route.leg_start_t[leg + 1]) {
      travelled_before += route.legs[leg].length_m();
      ++leg;
    }
    const RouteLeg& l = route.legs[leg];
    const double along = std::min((ts - route.leg_start_t[leg]) * route.leg_speeds[leg], l.length_m());
    const double offset = l.forward() ? l.from_offset_m + along : l.from_offset_m - along;
    route.fixes.push_back(
        {ts, network.point_at(l.segment, offset), travel_heading(network, l, offset), travelled_before + along, leg});
  }
  return route;
}

EventDraw emit_semantic_events(const SimRoute& route, const RoadNetwork& network, const ConfusionMatrix& confusion,
                               const NoiseModel& noise, std::uint64_t seed, double heading_noise_deg) {
  noise.validate();
  std::mt19937_64 rng(substream(seed, 2));
  Jitter jitter(noise.err_mean_m, rng);
  PingPong pingpong(noise, rng);
  std::normal_distribution<double> heading_noise(0.0, std::max(heading_noise_deg, 0.0));
  std::vector<GeoPoint> emitted;

  EventDraw draw;
  for (std::size_t i = 0; i < route.legs.size(); ++i) {
    const RouteLeg& leg = route.legs[i];
    const double lo = std::min(leg.from_offset_m, leg.to_offset_m);
    const double hi = std::max(leg.from_offset_m, leg.to_offset_m);
    std::vector<const HiddenState*> passed;
    for (const HiddenState& s : network.states_on(leg.segment)) {
      if (s.offset_m >= lo && s.offset_m <= hi) passed.push_back(&s);
    }
    if (!leg.forward()) std::reverse(passed.begin(), passed.end());

    for (const HiddenState* s : passed) {
      const auto& row = confusion.probabilities()[index_of(s->type)];
      std::discrete_distribution<std::size_t> detect(row.begin(), row.end());
      const auto detected = static_cast<SemanticType>(detect(rng));
      if (detected == SemanticType::NoClass) {
        draw.missed.push_back(s->id);
        continue;
      }
      SemanticEvent e;
      e.t = route.leg_start_t[i] + std::abs(s->offset_m - leg.from_offset_m) / route.leg_speeds[i];
      e.loc = jitter.apply(s->loc);
      pingpong.maybe_repeat(emitted, e.loc);
      e.err_m = noise.err_mean_m;
      e.heading_deg = wrap_unsigned_deg(travel_heading(network, leg, s->offset_m) + heading_noise(rng));
      e.type = detected;
      draw.events.push_back({e, s->id});
    }
  }
  return draw;
}

CorruptedFixes corrupt_positions(std::span<const TruthFix> truth, const NoiseModel& noise, std::uint64_t seed) {
  noise.validate();
  std::mt19937_64 rng(substream(seed, 3));
  Jitter jitter(noise.err_mean_m, rng);
  PingPong pingpong(noise, rng);
  std::vector<GeoPoint> emitted;

  CorruptedFixes out;
  const double spacing = 1000.0 / noise.updates_per_km;
  double next = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].distance_m < next) continue;
    while (next <= truth[i].distance_m) next += spacing;
    GeoPoint loc = jitter.apply(truth[i].loc);
    if (pingpong.maybe_repeat(emitted, loc)) out.pingpong_indices.push_back(out.fixes.size());
    out.fixes.push_back({truth[i].t, loc, noise.err_mean_m});
    out.truth_index.push_back(i);
  }
  return out;
}

std::vector<SensorSample> simulate_sensors(std::span<const TruthFix> truth, double heading_noise_deg,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(substream(seed, 4));
  std::normal_distribution<double> heading(0.0, std::max(heading_noise_deg, 0.0));
  std::normal_distribution<double> gravity(9.81, 0.05);
  std::vector<SensorSample> out;
  out.reserve(truth.size());
  for (const TruthFix& f : truth) {
    out.push_back({f.t, gravity(rng), wrap_unsigned_deg(f.heading_deg + heading(rng))});
  }
  return out;
}

SimTrace simulate_trace(const RoadNetwork& network, const ConfusionMatrix& confusion, const NoiseModel& noise,
                        const RouteSpec& route, std::uint64_t seed) {
  SimTrace trace;
  trace.trace_id = noise.name + "-" + std::to_string(seed);
  trace.route = sample_route(network, route, seed);
  trace.events = emit_semantic_events(trace.route, network, confusion, noise, seed);
  trace.fixes = corrupt_positions(trace.route.fixes, noise, seed);
  trace.sensors = simulate_sensors(trace.route.fixes, 2.0, seed);
  return trace;
}

}  // namespace semmatch::sim
