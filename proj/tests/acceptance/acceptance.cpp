// One line per acceptance criterion; nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "semmatch/eval.hpp"
#include "semmatch/hmm_model.hpp"
#include "semmatch/log_math.hpp"
#include "semmatch/online_viterbi.hpp"
#include "semmatch/pipeline.hpp"
#include "semmatch/preprocess.hpp"
#include "semmatch/sim.hpp"

namespace {

using namespace semmatch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using T = SemanticType;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- 1: online decoder vs exhaustive enumeration

struct Trellis {
  std::vector<double> priors;
  std::vector<std::vector<double>> obs;
  std::vector<std::vector<double>> trans;
};

Trellis random_trellis(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> steps(1, 8);
  std::uniform_int_distribution<std::size_t> width(1, 6);
  std::uniform_int_distribution<int> coarse(-16, 0);
  std::uniform_real_distribution<double> fine(-6.0, 0.0);
  std::bernoulli_distribution use_grid(0.5);
  std::bernoulli_distribution dead(0.1);
  const bool grid = use_grid(rng);  // quarter grid makes exact ties common
  auto value = [&] { return dead(rng) ? kLogZero : (grid ? 0.25 * coarse(rng) : fine(rng)); };
  auto alive = [&] { return grid ? 0.25 * coarse(rng) : fine(rng); };

  Trellis tr;
  std::vector<std::size_t> sizes(steps(rng));
  for (auto& s : sizes) s = width(rng);
  for (std::size_t i = 0; i < sizes[0]; ++i) tr.priors.push_back(value());
  tr.priors[0] = alive();
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    std::vector<double> o(sizes[t]);
    for (auto& v : o) v = value();
    o[0] = alive();
    tr.obs.push_back(o);
    std::vector<double> m;
    if (t > 0) {
      m.resize(sizes[t - 1] * sizes[t]);
      for (auto& v : m) v = value();
      m[0] = alive();
    }
    tr.trans.push_back(m);
  }
  return tr;
}

std::vector<std::size_t> online_decode(const Trellis& tr, std::size_t window) {
  OnlineViterbi v(window);
  std::vector<std::size_t> path(tr.obs.size(), SIZE_MAX);
  auto take = [&](const std::vector<OnlineViterbi::Commit>& cs) {
    for (const auto& c : cs) path[c.step] = c.state;
  };
  take(v.start(tr.priors, tr.obs[0]));
  for (std::size_t t = 1; t < tr.obs.size(); ++t) {
    LogMatrix m(tr.obs[t - 1].size(), tr.obs[t].size(), 0.0);
    m.values = tr.trans[t];
    const auto cs = v.extend(m, tr.obs[t]);
    if (!cs) return {};
    take(*cs);
  }
  take(v.flush());
  return path;
}

Verdict viterbi_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240501);
  int agree = 0;
  for (int i = 0; i < 500; ++i) {
    const Trellis tr = random_trellis(rng);
    const auto expect = oracle::brute_force_viterbi(tr.priors, tr.obs, tr.trans);
    if (online_decode(tr, HmmConfig{}.window) == expect.states) ++agree;
  }
  const double secs = seconds_since(t0);
  return {agree == 500 && secs < 10.0, fmt("%d/500 instances agree, %.2f s", agree, secs)};
}

// ---- 2: observation and transition terms vs independent evaluation

std::vector<RoadSegment> random_tree(std::mt19937_64& rng, int n_segments) {
  std::uniform_real_distribution<double> len(150.0, 1500.0);
  std::uniform_real_distribution<double> dir(0.0, 360.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> n_marks(0, 3);
  std::uniform_int_distribution<std::size_t> type(0, kLandmarkTypeCount - 1);
  std::uniform_real_distribution<double> lat(-60.0, 60.0);
  std::uniform_real_distribution<double> lon(-179.0, 179.0);
  std::vector<GeoPoint> nodes{{lat(rng), lon(rng)}};
  std::vector<RoadSegment> segs;
  for (int s = 0; s < n_segments; ++s) {
    const GeoPoint from = nodes[std::uniform_int_distribution<std::size_t>(0, nodes.size() - 1)(rng)];
    const double l = len(rng);
    const GeoPoint to = destination(from, dir(rng), l);
    nodes.push_back(to);
    const int k = n_marks(rng);
    std::vector<std::pair<T, double>> marks;
    const double span = geodesic_distance(from, to);
    for (int i = 0; i < k; ++i) marks.emplace_back(kLandmarkTypes[type(rng)], span * (i + 0.2 + 0.6 * unit(rng)) / k);
    if (rng() & 1u) {
      for (auto& mk : marks) mk.second = span - mk.second;
      std::reverse(marks.begin(), marks.end());
      segs.push_back(testing::straight("s" + std::to_string(s), to, from, marks));
    } else {
      segs.push_back(testing::straight("s" + std::to_string(s), from, to, marks));
    }
  }
  return segs;
}

bool close_log(double got, double expect) {
  if (std::isinf(expect) || std::isinf(got)) return got == expect;
  return std::abs(got - expect) <= 1e-9 * std::max(1.0, std::abs(expect));
}

Verdict closed_form_terms() {
  std::mt19937_64 rng(777);
  const std::array<double, 4> eps{0.0, 0.1, 0.5, 1.0};
  std::uniform_int_distribution<std::size_t> pick_eps(0, eps.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_type(0, kLandmarkTypeCount - 1);
  std::uniform_real_distribution<double> sigma_m(5.0, 3000.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> dir(0.0, 360.0);
  std::uniform_real_distribution<double> change(-180.0, 180.0);
  std::uniform_real_distribution<double> sigma_h(1.0, 30.0);
  std::uniform_real_distribution<double> budget(300.0, 6000.0);
  const ConfusionCounts counts = default_confusion_counts();

  int obs_ok = 0;
  int obs_n = 0;
  while (obs_n < 1000) {
    const RoadNetwork net(random_tree(rng, 3));
    for (const HiddenState& s : net.states()) {
      if (obs_n == 1000) break;
      const double e = eps[pick_eps(rng)];
      const auto m = ConfusionMatrix::from_counts(counts, e);
      const double sig = sigma_m(rng);
      SemanticEvent z{0.0, destination(s.loc, dir(rng), 3.0 * sig * unit(rng)), sig, 0.0,
                      kLandmarkTypes[pick_type(rng)]};
      const double got = observation_log_prob(z, s, m);
      const double expect = oracle::observation_log(counts, e, z.type, s.type, z.loc, sig, s.loc);
      obs_ok += close_log(got, expect);
      ++obs_n;
    }
  }

  int tr_ok = 0;
  int tr_n = 0;
  int finite = 0;
  while (tr_n < 1000) {
    const RoadNetwork net(random_tree(rng, 6));
    if (net.states().size() < 2) continue;
    PathFinder paths(net);
    std::uniform_int_distribution<StateId> st(0, static_cast<StateId>(net.states().size() - 1));
    for (int k = 0; k < 20 && tr_n < 1000; ++k) {
      const HiddenState& a = net.state(st(rng));
      const HiddenState& b = net.state(st(rng));
      const double e = eps[pick_eps(rng)];
      const auto m = ConfusionMatrix::from_counts(counts, e);
      const double o = change(rng);
      const double sh = sigma_h(rng);
      const double bud = budget(rng);
      const auto& segs = net.segments();
      const auto brg = [&](const HiddenState& s) {
        const auto& poly = segs[s.segment].polyline;
        return oracle::bearing_deg(poly.front(), poly.back());
      };
      const double got = transition_log_prob(paths, a.id, b.id, o, m, sh, bud);
      const double expect = oracle::transition_log(segs, a.segment, a.offset_m, brg(a), b.segment, b.offset_m,
                                                   brg(b), o, counts, e, sh, bud);
      tr_ok += close_log(got, expect);
      finite += std::isfinite(expect);
      ++tr_n;
    }
  }
  return {obs_ok == 1000 && tr_ok == 1000 && finite >= 300,
          fmt("observation %d/1000, transition %d/1000 (%d finite) within 1e-9 relative", obs_ok, tr_ok, finite)};
}

// ---- 3: confusion matrix from the published counts at eps = 0

Verdict confusion_fidelity() {
  const auto m = ConfusionMatrix::from_counts(default_confusion_counts(), 0.0);
  const std::array<double, kLandmarkTypeCount> diag{22.0 / 27.0, 1.0, 1.0, 11.0 / 14.0, 1.0, 1.0, 1.0};
  const std::array<double, kLandmarkTypeCount> miss{5.0 / 27.0, 0.0, 0.0, 3.0 / 14.0, 0.0, 0.0, 0.0};
  int ok = 0;
  for (std::size_t i = 0; i < kLandmarkTypeCount; ++i) {
    const T t = kLandmarkTypes[i];
    ok += m.detection_prob(t, t) == diag[i] && m.miss_prob(t) == miss[i];
  }
  return {ok == 7, fmt("%d/7 classes exact", ok)};
}

// ---- 4: MAD scale estimate

Verdict mad_estimator() {
  int ok = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 8.0);
    std::uniform_real_distribution<double> map(-120.0, 120.0);
    std::vector<HeadingPair> pairs;
    for (int i = 0; i < 10000; ++i) {
      const double m = map(rng);
      pairs.push_back({m + noise(rng), m});
    }
    const double rel = std::abs(estimate_sigma_h(pairs) - 8.0) / 8.0;
    worst = std::max(worst, rel);
    ok += rel <= 0.10;
  }
  return {ok == 20, fmt("%d/20 seeds within 10%%, worst %.2f%%", ok, 100.0 * worst)};
}

// ---- 5: trimmed filter limits

Verdict filter_identities() {
  std::mt19937_64 rng(5150);
  std::uniform_int_distribution<int> half(1, 7);
  std::uniform_real_distribution<double> jitter(-400.0, 400.0);
  std::uniform_real_distribution<double> lat(-70.0, 70.0);
  std::uniform_real_distribution<double> lon(-170.0, 170.0);
  int mean_ok = 0;
  int median_ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 2 * half(rng) + 1;
    const GeoPoint o{lat(rng), lon(rng)};
    std::vector<CleanFix> s;
    for (int i = 0; i < w; ++i) {
      CleanFix f;
      f.t = i;
      f.loc = testing::offset_m(o, 30.0 * i + jitter(rng), jitter(rng));
      s.push_back(f);
    }
    const std::size_t c = static_cast<std::size_t>(w / 2);

    double la = 0.0, lo = 0.0;
    for (const auto& f : s) {
      la += f.loc.lat;
      lo += f.loc.lon;
    }
    const GeoPoint mean{la / w, lo / w};
    mean_ok += trimmed_mean_filter(s, 0.0, w)[c].loc == mean;

    std::vector<GeoPoint> pts;
    for (const auto& f : s) pts.push_back(f.loc);
    const auto keys = oracle::grid_keys(pts);
    std::vector<std::size_t> idx(s.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
    });
    median_ok += trimmed_mean_filter(s, 0.5, w)[c].loc == pts[idx[c]];
  }
  return {mean_ok == 100 && median_ok == 100,
          fmt("alpha=0 mean %d/100, alpha=0.5 median %d/100 exact", mean_ok, median_ok)};
}

// ---- 6: speed and direction outlier rejection on simulated drives

double truth_heading_change(const sim::SimRoute& r, std::size_t from, std::size_t to) {
  double total = 0.0;
  for (std::size_t i = from + 1; i <= to; ++i) {
    total += wrap_signed_deg(r.fixes[i].heading_deg - r.fixes[i - 1].heading_deg);
  }
  return total;
}

Verdict outlier_rejection() {
  sim::GridSpec grid;
  grid.seed = 606;
  const RoadNetwork net = sim::generate_network(grid);
  const SpeedLimitLookup limits = [&net](const GeoPoint& p) { return net.speed_limit_near(p, 50.0); };
  const FilterConfig cfg;
  sim::RouteSpec route;
  route.nominal_speed_mps = 10.0;

  std::size_t teleports = 0, teleports_flagged = 0, clean_fixes = 0, clean_flagged = 0;
  std::size_t false_turns = 0, false_rejected = 0, real_turns = 0, real_passed = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const sim::SimRoute r = sim::sample_route(net, route, seed);
    std::mt19937_64 rng(seed * 7919);

    // teleports
    sim::NoiseModel gps{"gps", 3.0, 10.0, 0.0, 0};
    sim::CorruptedFixes c = sim::corrupt_positions(r.fixes, gps, seed);
    std::vector<bool> injected(c.fixes.size(), false);
    std::bernoulli_distribution hit(0.08);
    std::uniform_real_distribution<double> dir(0.0, 360.0);
    std::uniform_real_distribution<double> jump(3000.0, 10000.0);
    for (std::size_t k = 3; k < c.fixes.size(); ++k) {
      if (injected[k - 1] || injected[k - 2] || injected[k - 3] || !hit(rng)) continue;
      c.fixes[k].loc = destination(c.fixes[k].loc, dir(rng), jump(rng));
      injected[k] = true;
    }
    const auto sf = speed_filter(c.fixes, cfg, limits);
    for (std::size_t k = 0; k < sf.size(); ++k) {
      if (injected[k]) {
        ++teleports;
        teleports_flagged += sf[k].flags.speed_rejected;
      } else {
        ++clean_fixes;
        clean_flagged += sf[k].flags.speed_rejected;
      }
    }

    // ping-pong
    sim::NoiseModel pp{"pp", 3.0, 10.0, 0.15, 3};
    const sim::CorruptedFixes p = sim::corrupt_positions(r.fixes, pp, seed + 1000);
    const auto sensors = sim::simulate_sensors(r.fixes, 3.0, seed + 2000);
    std::vector<bool> is_pp(p.fixes.size(), false);
    for (std::size_t k : p.pingpong_indices) is_pp[k] = true;
    std::vector<CleanFix> fixes;
    for (const RawFix& f : p.fixes) fixes.push_back({f.t, f.loc, f.err_m, {}});
    const auto df = direction_filter(fixes, sensors, cfg);
    for (std::size_t k = 2; k < fixes.size(); ++k) {
      if (is_pp[k - 1] || is_pp[k - 2]) continue;
      const GeoPoint& a = fixes[k - 2].loc;
      const GeoPoint& b = fixes[k - 1].loc;
      const GeoPoint& q = fixes[k].loc;
      if (a == b || b == q) continue;
      const double implied = std::abs(wrap_signed_deg(bearing(b, q) - bearing(a, b)));
      const double truth = std::abs(truth_heading_change(r, p.truth_index[k - 2], p.truth_index[k]));
      if (is_pp[k]) {
        if (implied > cfg.turn_threshold_deg && truth < cfg.confirm_threshold_deg) {
          ++false_turns;
          false_rejected += df[k].flags.direction_rejected;
        }
      } else if (std::abs(truth_heading_change(r, p.truth_index[k - 1], p.truth_index[k])) >= 30.0) {
        ++real_turns;
        real_passed += !df[k].flags.direction_rejected;
      }
    }
  }
  const double t_rate = teleports ? static_cast<double>(teleports_flagged) / teleports : 0.0;
  const double f_rate = false_turns ? static_cast<double>(false_rejected) / false_turns : 0.0;
  const bool pass = teleports >= 50 && t_rate >= 0.95 && clean_flagged == 0 && false_turns >= 50 && f_rate >= 0.90 &&
                    real_turns > 0 && real_passed == real_turns;
  return {pass, fmt("teleports %zu/%zu flagged, clean false flags %zu/%zu; false turns %zu/%zu rejected, "
                    "real turns %zu/%zu passed",
                    teleports_flagged, teleports, clean_flagged, clean_fixes, false_rejected, false_turns, real_passed,
                    real_turns)};
}

// ---- 7 and 8: simulator runs

PipelineConfig sim_pipeline(HmmModel model) {
  PipelineConfig cfg;
  cfg.hmm.err_scale = 3.0;
  cfg.hmm.window = 20;
  cfg.hmm.max_speed_mps = 25.0;
  cfg.hmm.model = model;
  return cfg;
}

RoadNetwork fixed_grid(double density) {
  sim::GridSpec g;
  g.rows = 5;
  g.cols = 5;
  g.block_m = 1250.0;  // 40 segments, 50 km of road
  g.density_per_km = density;
  g.seed = 1000;
  return sim::generate_network(g);
}

double mean_f(const RoadNetwork& net, const PipelineConfig& cfg, int seeds) {
  const auto detect = ConfusionMatrix::from_counts(default_confusion_counts(), 0.0);
  const auto model = ConfusionMatrix::standard();
  const auto noise = sim::NoiseModel::preset("cellular");
  sim::RouteSpec route;
  route.length_km = 10.0;
  double sum = 0.0;
  for (int seed = 1; seed <= seeds; ++seed) {
    const sim::SimTrace st = sim::simulate_trace(net, detect, noise, route, static_cast<std::uint64_t>(seed));
    Trace trace;
    trace.trace_id = st.trace_id;
    trace.fixes = st.fixes.fixes;
    trace.sensors = st.sensors;
    for (const auto& e : st.events.events) {
      trace.events.push_back({e.event.t, e.event.type, std::nullopt, e.event.loc, e.event.err_m, e.event.heading_deg});
    }
    const PipelineResult res = run_pipeline(net, model, trace, cfg);
    sum += score(res.path, st.route.path).f_measure;
  }
  return sum / seeds;
}

Verdict density_trend() {
  const auto t0 = Clock::now();
  const std::array<double, 4> densities{0.5, 1.0, 2.0, 4.0};
  std::array<double, 4> f{};
  for (std::size_t i = 0; i < densities.size(); ++i) {
    f[i] = mean_f(fixed_grid(densities[i]), sim_pipeline(HmmModel::Semantic), 20);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < f.size(); ++i) monotone = monotone && f[i] >= f[i - 1] - 0.02;
  const double secs = seconds_since(t0);
  return {monotone && secs < 300.0,
          fmt("F = %.3f / %.3f / %.3f / %.3f at 0.5 / 1 / 2 / 4 per km, %.1f s", f[0], f[1], f[2], f[3], secs)};
}

Verdict semantics_advantage() {
  const RoadNetwork net = fixed_grid(2.0);
  const double sem = mean_f(net, sim_pipeline(HmmModel::Semantic), 20);
  const double base = mean_f(net, sim_pipeline(HmmModel::LocationOnly), 20);
  const double ratio = base > 0.0 ? sem / base : INFINITY;
  return {ratio >= 2.0, fmt("semantic F %.3f, location-only F %.3f, ratio %.2f", sem, base, ratio)};
}

// ---- 9: route metric

Verdict metric_correctness() {
  const SegmentPath truth({{"A", 100.0}, {"B", 100.0}, {"C", 100.0}, {"D", 100.0}});
  const SegmentPath out({{"A", 100.0}, {"B", 100.0}, {"X", 100.0}, {"D", 100.0}});
  const Score s = score(out, truth);
  const bool example = s.precision == 0.75 && s.recall == 0.75 && s.f_measure == 0.75;

  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> len(1, 30);
  std::uniform_int_distribution<int> id(0, 12);
  std::uniform_real_distribution<double> metres(1.0, 2500.0);
  int self_ok = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<PathElement> el;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) el.push_back({"seg" + std::to_string(id(rng)), metres(rng)});
    const SegmentPath p(el);
    const Score self = score(p, p);
    self_ok += self.precision == 1.0 && self.recall == 1.0 && self.f_measure == 1.0;
  }
  return {example && self_ok == 100,
          fmt("ABXD vs ABCD: P=%.4f R=%.4f F=%.4f; self-score exact on %d/100", s.precision, s.recall, s.f_measure,
              self_ok)};
}

// ---- 10: CLI determinism

Verdict cli_determinism() {
#ifndef SEMMATCH_CLI_PATH
  return {false, "command-line tool was not built"};
#else
  const testing::TempDir dir;
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string("\"") + SEMMATCH_CLI_PATH + "\" " + args + " 2>>\"" +
                            (dir / "log.txt").string() + "\"";
    return std::system(cmd.c_str()) == 0;
  };
  auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
  const std::string sim_args = "simulate --preset cellular --seed 42 --length-km 5 --density 2 --out ";
  bool ok = run(sim_args + q(dir / "a" / "sim")) && run(sim_args + q(dir / "b" / "sim"));
  const std::string net = q(dir / "a" / "sim.network.geojson");
  const std::string trace = q(dir / "a" / "sim.trace.jsonl");
  const std::string match_args = "match --network " + net + " --trace " + trace + " --err-scale 3 --window 20 --out ";
  ok = ok && run(match_args + q(dir / "a" / "m")) && run(match_args + q(dir / "b" / "m"));
  if (!ok) return {false, "a command failed: " + testing::read_file(dir / "log.txt")};

  int same = 0;
  const std::vector<std::string> files{"sim.trace.jsonl", "sim.truth.json", "sim.network.geojson",
                                       "m.matches.jsonl", "m.path.json",    "m.path.geojson"};
  for (const auto& f : files) {
    const std::string a = testing::read_file(dir / "a" / f);
    same += !a.empty() && a == testing::read_file(dir / "b" / f);
  }
  return {same == static_cast<int>(files.size()),
          fmt("%d/%zu output files byte-identical across runs", same, files.size())};
#endif
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria{
      {1, viterbi_equivalence}, {2, closed_form_terms},   {3, confusion_fidelity}, {4, mad_estimator},
      {5, filter_identities},   {6, outlier_rejection},   {7, density_trend},      {8, semantics_advantage},
      {9, metric_correctness},  {10, cli_determinism},
  };
  int failed = 0;
  for (const auto& [n, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("criterion %d: %s  %s\n", n, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
