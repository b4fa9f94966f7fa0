#include "wander/synth.hpp"

#include "wander/geohash.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <memory>
#include <limits>
#include <ostream>
#include <queue>
#include <random>

namespace wander {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double gauss(std::mt19937_64& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(rng);
}

struct Polyline {
  std::vector<Vec2> pts;
  std::vector<double> cum;  // arc length at each vertex

  Polyline(const LocalFrame& frame, const std::vector<LatLon>& geo) {
    for (const auto& p : geo) pts.push_back(frame.to_local(p));
    cum.assign(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) cum[i] = cum[i - 1] + norm(pts[i] - pts[i - 1]);
  }

  double length() const { return cum.back(); }

  Vec2 at(double s) const {
    if (pts.size() == 1 || s <= 0.0) return pts.front();
    if (s >= length()) return pts.back();
    const auto it = std::upper_bound(cum.begin(), cum.end(), s);
    const auto i = static_cast<std::size_t>(it - cum.begin());
    const double seg = cum[i] - cum[i - 1];
    const double f = seg > 0.0 ? (s - cum[i - 1]) / seg : 0.0;
    return pts[i - 1] + f * (pts[i] - pts[i - 1]);
  }

  double distance(Vec2 p) const {
    if (pts.size() == 1) return norm(p - pts.front());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i) best = std::min(best, segment_distance(p, pts[i - 1], pts[i]));
    return best;
  }
};

// Emits noisy samples of one walk; keeps the noise-free positions alongside.
class Walker {
 public:
  Walker(const LocalFrame& frame, const NoiseModel& noise, std::uint64_t seed)
      : frame_(frame), noise_(noise), rng_(seed) {}

  double sample_dt() { return noise_.dt_base_s + std::abs(gauss(rng_, 0.0, noise_.dt_noise_sd)); }

  double sample_speed() {
    double v = gauss(rng_, noise_.speed_mean, noise_.speed_sd);
    while (v <= 0.0) v = gauss(rng_, noise_.speed_mean, noise_.speed_sd);
    return v;
  }

  void emit(Vec2 clean, double t, bool walking) {
    const Vec2 noisy{clean.x + gauss(rng_, 0.0, noise_.pos_noise_sd_m), clean.y + gauss(rng_, 0.0, noise_.pos_noise_sd_m)};
    const LatLon p = frame_.to_geo(noisy);
    points.push_back({p.lat, p.lon, t});
    clean_positions.push_back(clean);
    is_walking.push_back(walking);
  }

  // Stationary samples in [t, t + duration); returns the next sample time.
  double dwell(Vec2 at, double t, double duration) {
    const double end = t + duration;
    while (t < end) {
      emit(at, t, false);
      t += sample_dt();
    }
    return t;
  }

  // Walks the whole polyline starting at time t; returns the arrival time.
  double walk(const Polyline& line, double t) {
    double s = 0.0;
    emit(line.at(0.0), t, true);
    while (s < line.length()) {
      const double dt = sample_dt();
      s = std::min(line.length(), s + dt * sample_speed());
      t += dt;
      emit(line.at(s), t, true);
    }
    return t;
  }

  std::vector<GeoPoint> points;
  std::vector<Vec2> clean_positions;
  std::vector<bool> is_walking;

 private:
  LocalFrame frame_;
  NoiseModel noise_;
  std::mt19937_64 rng_;
};

void check_pair(const WaypointGraph& g, std::size_t pair) {
  if (pair >= g.pairs.size()) throw InputError("synth: unknown region pair");
}

LabeledTrajectory run_walk(const WaypointGraph& g, const std::vector<std::size_t>& path, const NoiseModel& noise,
                           std::uint64_t seed, const WalkOptions& opts, Walker*& out_walker,
                           std::unique_ptr<Walker>& holder, const LocalFrame& frame) {
  holder = std::make_unique<Walker>(frame, noise, seed);
  Walker& w = *holder;
  const Polyline line(frame, path_positions(g, path));
  double t = opts.start_time;
  if (opts.dwell_s > 0.0) t = w.dwell(line.pts.front(), t, opts.dwell_s);
  t = w.walk(line, t);
  if (opts.dwell_s > 0.0) w.dwell(line.pts.back(), t + w.sample_dt(), opts.dwell_s);
  out_walker = &w;
  LabeledTrajectory out;
  out.points = w.points;
  out.seed = seed;
  return out;
}

}  // namespace

std::size_t WaypointGraph::add_node(LatLon p) {
  nodes_.push_back(p);
  adj_.emplace_back();
  return nodes_.size() - 1;
}

void WaypointGraph::add_edge(std::size_t a, std::size_t b) {
  if (a >= nodes_.size() || b >= nodes_.size() || a == b) throw InputError("graph: bad edge");
  const double len = haversine(nodes_[a], nodes_[b]);
  edges_.push_back({a, b, len});
  adj_[a].emplace_back(b, len);
  adj_[b].emplace_back(a, len);
}

bool WaypointGraph::connected() const {
  if (nodes_.empty()) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t n = stack.back();
    stack.pop_back();
    for (const auto& [m, w] : adj_[n]) {
      if (!seen[m]) {
        seen[m] = true;
        ++count;
        stack.push_back(m);
      }
    }
  }
  return count == nodes_.size();
}

std::vector<std::size_t> shortest_path(const WaypointGraph& g, std::size_t from, std::size_t to) {
  const std::size_t n = g.nodes().size();
  if (from >= n || to >= n) throw InputError("shortest_path: unknown node");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, kInf);
  std::vector<std::size_t> prev(n, n);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dist[from] = 0.0;
  queue.emplace(0.0, from);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    if (u == to) break;
    for (const auto& [v, w] : g.neighbours(u)) {
      if (d + w < dist[v]) {
        dist[v] = d + w;
        prev[v] = u;
        queue.emplace(dist[v], v);
      }
    }
  }
  if (dist[to] == kInf) throw UnreachableError("shortest_path: destination unreachable");
  std::vector<std::size_t> path{to};
  while (path.back() != from) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<LatLon> path_positions(const WaypointGraph& g, const std::vector<std::size_t>& path) {
  std::vector<LatLon> out;
  out.reserve(path.size());
  for (std::size_t n : path) out.push_back(g.nodes().at(n));
  return out;
}

WaypointGraph default_waypoint_graph() {
  constexpr int kRows = 14;
  constexpr int kCols = 14;
  constexpr int kLattice = 18;  // streets run through the centres of these cells, two cells apart
  const GridXY base = cell_xy(encode({55.3650, 10.3800}, kLattice));
  const auto cell_centre = [&](std::uint32_t dx, std::uint32_t dy) {
    return decode(cell_from_xy({base.x + dx, base.y + dy}, kLattice)).center;
  };
  const LocalFrame frame(cell_centre(0, 0));
  std::mt19937_64 rng(20210611);

  WaypointGraph g;
  std::vector<Vec2> grid;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols; ++c) {
      const LatLon p = cell_centre(2 * static_cast<std::uint32_t>(c), 2 * static_cast<std::uint32_t>(r));
      grid.push_back(frame.to_local(p));
      g.add_node(p);
    }
  }
  const auto id = [](int r, int c) { return static_cast<std::size_t>(r * kCols + c); };

  // Anchors sit in the middle of a block, reached by a spur from the street
  // midpoint below them.
  const std::vector<std::pair<int, int>> anchor_cells{{1, 1}, {12, 12}, {1, 11}, {12, 2},
                                                      {6, 6}, {7, 1},   {11, 8}, {4, 12}};
  std::vector<std::pair<std::size_t, std::size_t>> spur_streets;
  for (const auto& [r, c] : anchor_cells) spur_streets.emplace_back(id(r, c), id(r, c + 1));

  // Street segments; a few are closed while the network stays connected.
  std::vector<std::pair<std::size_t, std::size_t>> streets;
  for (int r = 0; r < kRows; ++r)
    for (int c = 0; c < kCols; ++c) {
      if (c + 1 < kCols) streets.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < kRows) streets.emplace_back(id(r, c), id(r + 1, c));
    }
  std::vector<bool> open(streets.size(), true);
  std::bernoulli_distribution closed(0.08);
  const auto network_connected = [&] {
    WaypointGraph probe;
    for (std::size_t i = 0; i < grid.size(); ++i) probe.add_node(g.nodes()[i]);
    for (std::size_t i = 0; i < streets.size(); ++i)
      if (open[i]) probe.add_edge(streets[i].first, streets[i].second);
    return probe.connected();
  };
  for (std::size_t i = 0; i < streets.size(); ++i) {
    const bool spur = std::find(spur_streets.begin(), spur_streets.end(), streets[i]) != spur_streets.end();
    if (!closed(rng) || spur) continue;
    open[i] = false;
    if (!network_connected()) open[i] = true;
  }

  std::vector<std::size_t> anchors;
  for (std::size_t k = 0; k < anchor_cells.size(); ++k) {
    const auto [r, c] = anchor_cells[k];
    const auto col = 2 * static_cast<std::uint32_t>(c) + 1;
    const auto row = 2 * static_cast<std::uint32_t>(r);
    const std::size_t mid = g.add_node(cell_centre(col, row));
    const std::size_t a = g.add_node(cell_centre(col, row + 1));
    const auto street = std::find(streets.begin(), streets.end(), spur_streets[k]) - streets.begin();
    open[static_cast<std::size_t>(street)] = false;
    g.add_edge(spur_streets[k].first, mid);
    g.add_edge(mid, spur_streets[k].second);
    g.add_edge(mid, a);
    anchors.push_back(a);
  }
  for (std::size_t i = 0; i < streets.size(); ++i)
    if (open[i]) g.add_edge(streets[i].first, streets[i].second);

  const std::vector<std::pair<int, int>> routes{{0, 4}, {4, 1}, {2, 3}, {5, 6}, {7, 0}, {6, 2}, {3, 5}};
  const std::size_t street_nodes = static_cast<std::size_t>(kRows * kCols);
  for (const auto& [o, d] : routes) {
    RegionPair pair{anchors[o], anchors[d], {}};
    const auto normal = shortest_path(g, pair.origin, pair.destination);
    std::vector<Vec2> line;
    for (std::size_t n : normal) line.push_back(frame.to_local(g.nodes()[n]));
    const auto off_route = [&](Vec2 p) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < line.size(); ++i) best = std::min(best, segment_distance(p, line[i - 1], line[i]));
      return best;
    };
    std::vector<std::size_t> pool;
    for (std::size_t n = 0; n < street_nodes; ++n) {
      const double d = off_route(grid[n]);
      if (d >= 400.0 && d <= 800.0) pool.push_back(n);
    }
    // Farthest-point selection, seeded by the node nearest the route middle.
    const Vec2 middle = 0.5 * (line.front() + line.back());
    std::size_t first = pool.front();
    for (std::size_t n : pool)
      if (norm(grid[n] - middle) < norm(grid[first] - middle)) first = n;
    pair.detour_candidates.push_back(first);
    while (pair.detour_candidates.size() < 4) {
      std::size_t pick = pool.front();
      double pick_gap = -1.0;
      for (std::size_t n : pool) {
        double gap = std::numeric_limits<double>::infinity();
        for (std::size_t s : pair.detour_candidates) gap = std::min(gap, norm(grid[n] - grid[s]));
        if (gap > pick_gap) {
          pick_gap = gap;
          pick = n;
        }
      }
      pair.detour_candidates.push_back(pick);
    }
    g.pairs.push_back(std::move(pair));
  }
  return g;
}

void NoiseModel::validate() const {
  if (!(dt_base_s > 0.0)) throw InputError("noise: dt_base > 0 violated");
  if (!(speed_mean > 0.0)) throw InputError("noise: speed_mean > 0 violated");
  if (dt_noise_sd < 0.0 || speed_sd < 0.0 || pos_noise_sd_m < 0.0)
    throw InputError("noise: scales >= 0 violated");
}

LabeledTrajectory generate_normal(const WaypointGraph& g, std::size_t pair, const NoiseModel& noise,
                                  std::uint64_t seed, const WalkOptions& opts) {
  check_pair(g, pair);
  noise.validate();
  const RegionPair& rp = g.pairs[pair];
  const auto path = shortest_path(g, rp.origin, rp.destination);
  Walker* w = nullptr;
  std::unique_ptr<Walker> holder;
  auto out = run_walk(g, path, noise, seed, opts, w, holder, LocalFrame(g.nodes()[rp.origin]));
  out.label = Label::normal;
  out.pair = pair;
  return out;
}

LabeledTrajectory generate_anomalous(const WaypointGraph& g, std::size_t pair,
                                     const std::vector<std::size_t>& detours, const NoiseModel& noise,
                                     std::uint64_t seed, const WalkOptions& opts) {
  check_pair(g, pair);
  noise.validate();
  if (detours.empty() || detours.size() > 4) throw InputError("synth: 1 to 4 detour nodes required");
  const RegionPair& rp = g.pairs[pair];
  const auto normal = shortest_path(g, rp.origin, rp.destination);
  for (std::size_t d : detours)
    if (std::find(normal.begin(), normal.end(), d) != normal.end())
      throw InputError("synth: detour node lies on the normal route");

  std::vector<std::size_t> path{rp.origin};
  std::vector<std::size_t> stops = detours;
  stops.push_back(rp.destination);
  for (std::size_t stop : stops) {
    const auto leg = shortest_path(g, path.back(), stop);
    path.insert(path.end(), leg.begin() + 1, leg.end());
  }

  const LocalFrame frame(g.nodes()[rp.origin]);
  Walker* w = nullptr;
  std::unique_ptr<Walker> holder;
  auto out = run_walk(g, path, noise, seed, opts, w, holder, frame);
  out.label = Label::anomalous;
  out.pair = pair;
  out.detours = detours;

  const Polyline normal_line(frame, path_positions(g, normal));
  const double envelope = noise.divergence_envelope_m();
  for (std::size_t i = 0; i < w->points.size(); ++i) {
    if (w->is_walking[i] && normal_line.distance(w->clean_positions[i]) > envelope) {
      out.divergence_time = w->points[i].timestamp;
      break;
    }
  }
  if (!out.divergence_time) throw InputError("synth: anomalous walk never leaves the normal route");
  return out;
}

std::size_t Corpus::count(Label l) const {
  return static_cast<std::size_t>(
      std::count_if(trajectories.begin(), trajectories.end(), [&](const auto& t) { return t.label == l; }));
}

Corpus generate_corpus(const WaypointGraph& g, const CorpusSpec& spec, const NoiseModel& noise,
                       std::uint64_t master_seed) {
  if (spec.normal_per_pair.size() != g.pairs.size() || spec.anomalous_per_pair.size() != g.pairs.size())
    throw InputError("corpus: per-pair counts must cover every region pair");

  struct Job {
    std::size_t pair;
    Label label;
    std::size_t k;
  };
  std::vector<Job> jobs;
  for (std::size_t p = 0; p < g.pairs.size(); ++p) {
    for (std::size_t k = 0; k < spec.normal_per_pair[p]; ++k) jobs.push_back({p, Label::normal, k});
    for (std::size_t k = 0; k < spec.anomalous_per_pair[p]; ++k) jobs.push_back({p, Label::anomalous, k});
  }
  std::mt19937_64 order_rng(master_seed);
  std::shuffle(jobs.begin(), jobs.end(), order_rng);

  Corpus corpus;
  corpus.person_id = spec.person_id;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const std::uint64_t seed = splitmix64(master_seed ^ (0x9e3779b97f4a7c15ULL * (i + 1)));
    const WalkOptions opts{spec.start_time + static_cast<double>(i) * spec.spacing_s, spec.dwell_s};
    if (job.label == Label::normal) {
      corpus.trajectories.push_back(generate_normal(g, job.pair, noise, seed, opts));
    } else {
      const auto& cands = g.pairs[job.pair].detour_candidates;
      const std::size_t count = std::min(cands.size(), 1 + (job.k + job.pair) % 4);
      std::vector<std::size_t> detours;
      for (std::size_t m = 0; m < count; ++m) detours.push_back(cands[(job.k + m) % cands.size()]);
      corpus.trajectories.push_back(generate_anomalous(g, job.pair, detours, noise, seed, opts));
    }
  }
  return corpus;
}

std::vector<GeoPoint> case_study_walk(const WaypointGraph& g, const NoiseModel& noise, std::uint64_t seed,
                                      std::size_t legs, double stay_s, double start_time) {
  check_pair(g, 0);
  noise.validate();
  const RegionPair& rp = g.pairs[0];
  const LocalFrame frame(g.nodes()[rp.origin]);
  auto forward = shortest_path(g, rp.origin, rp.destination);
  auto backward = forward;
  std::reverse(backward.begin(), backward.end());
  const Polyline there(frame, path_positions(g, forward));
  const Polyline back(frame, path_positions(g, backward));

  Walker w(frame, noise, seed);
  double t = w.dwell(there.pts.front(), start_time, stay_s);
  for (std::size_t leg = 0; leg < legs; ++leg) {
    const Polyline& line = leg % 2 == 0 ? there : back;
    t = w.walk(line, t);
    t = w.dwell(line.pts.back(), t + w.sample_dt(), stay_s);
  }
  return w.points;
}

std::string to_string(Label l) { return l == Label::normal ? "normal" : "anomalous"; }

void write_corpus(const Corpus& corpus, std::ostream& stream, std::ostream& labels) {
  for (std::size_t i = 0; i < corpus.trajectories.size(); ++i) {
    const auto& t = corpus.trajectories[i];
    for (const auto& p : t.points)
      stream << corpus.person_id << ',' << format_double(p.timestamp) << ',' << format_double(p.lat) << ','
             << format_double(p.lon) << '\n';
    labels << i << ',' << to_string(t.label) << ',' << t.pair << ','
           << (t.divergence_time ? format_double(*t.divergence_time) : std::string{}) << '\n';
  }
}

}  // namespace wander
