#include "wander/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace wander {

namespace {

namespace pt = boost::property_tree;

template <class T>
T parse_number(const std::string& text, const std::string& what) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) throw InputError(what + ": cannot parse '" + text + "'");
  return value;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(s);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string latlon_text(const LatLon& p) { return format_double(p.lat) + ',' + format_double(p.lon); }

LatLon parse_latlon(const std::string& s) {
  const auto f = split(s, ',');
  if (f.size() != 2) throw InputError("regions: bad vertex '" + s + "'");
  return {parse_number<double>(f[0], "regions"), parse_number<double>(f[1], "regions")};
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (const T& v : values) {
    if (!out.empty()) out += ' ';
    if constexpr (std::is_floating_point_v<T>)
      out += format_double(v);
    else
      out += std::to_string(v);
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"preprocess", {"epsilon_s", "gamma_m", "xi_prime_m", "alpha_m", "max_abs_accel"}},
      {"regions", {"tau_s", "xi_double_prime_m"}},
      {"geohash", {"precision"}},
      {"mining", {"eta"}},
      {"detect", {"theta", "match", "mismatch", "gap_open", "gap_extend"}},
      {"ibdd", {"theta_prime", "rule"}},
      {"synth", {"dt_base_s", "dt_noise_sd", "speed_mean", "speed_sd", "pos_noise_sd_m", "seed"}},
      {"eval", {"theta_grid", "theta_prime_grid", "precision_grid"}},
  };
  return keys;
}

}  // namespace

void PipelineConfig::validate() const {
  try {
    preprocess.validate();
    regions.validate();
    validate_precision(precision);
    for (int p : precision_grid) validate_precision(p);
    alignment.validate();
    noise.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (eta < 1) throw ConfigError("mining: eta >= 1 violated");
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("detect: 0 < theta <= 1 violated");
  if (!(theta_prime > 0.0 && theta_prime <= 1.0)) throw ConfigError("ibdd: 0 < theta_prime <= 1 violated");
  for (double t : theta_grid)
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("eval: 0 < theta <= 1 violated in theta_grid");
  for (double t : theta_prime_grid)
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("eval: 0 < theta_prime <= 1 violated in theta_prime_grid");
}

PipelineConfig parse_config(std::istream& is) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end() || body.empty()) throw ConfigError("config: unknown section '" + section + "'");
    for (const auto& [key, value] : body)
      if (!it->second.contains(key)) throw ConfigError("config: unknown key '" + section + "." + key + "'");
  }

  PipelineConfig cfg;
  const auto number = [&]<class T>(const char* path, T& target) {
    if (const auto v = tree.get_optional<std::string>(path)) {
      try {
        target = parse_number<T>(*v, path);
      } catch (const InputError& e) {
        throw ConfigError(std::string("config: ") + e.what());
      }
    }
  };
  const auto list = [&]<class T>(const char* path, std::vector<T>& target) {
    if (const auto v = tree.get_optional<std::string>(path)) {
      target.clear();
      for (const auto& w : words(*v)) {
        try {
          target.push_back(parse_number<T>(w, path));
        } catch (const InputError& e) {
          throw ConfigError(std::string("config: ") + e.what());
        }
      }
      if (target.empty()) throw ConfigError(std::string("config: empty list ") + path);
    }
  };
  number("preprocess.epsilon_s", cfg.preprocess.epsilon_s);
  number("preprocess.gamma_m", cfg.preprocess.gamma_m);
  number("preprocess.xi_prime_m", cfg.preprocess.xi_prime_m);
  number("preprocess.alpha_m", cfg.preprocess.alpha_m);
  number("preprocess.max_abs_accel", cfg.preprocess.max_abs_accel);
  number("regions.tau_s", cfg.regions.tau_s);
  number("regions.xi_double_prime_m", cfg.regions.xi_double_prime_m);
  number("geohash.precision", cfg.precision);
  number("mining.eta", cfg.eta);
  number("detect.theta", cfg.theta);
  number("detect.match", cfg.alignment.match);
  number("detect.mismatch", cfg.alignment.mismatch);
  number("detect.gap_open", cfg.alignment.gap_open);
  number("detect.gap_extend", cfg.alignment.gap_extend);
  number("ibdd.theta_prime", cfg.theta_prime);
  number("synth.dt_base_s", cfg.noise.dt_base_s);
  number("synth.dt_noise_sd", cfg.noise.dt_noise_sd);
  number("synth.speed_mean", cfg.noise.speed_mean);
  number("synth.speed_sd", cfg.noise.speed_sd);
  number("synth.pos_noise_sd_m", cfg.noise.pos_noise_sd_m);
  number("synth.seed", cfg.seed);
  list("eval.theta_grid", cfg.theta_grid);
  list("eval.theta_prime_grid", cfg.theta_prime_grid);
  list("eval.precision_grid", cfg.precision_grid);
  if (const auto rule = tree.get_optional<std::string>("ibdd.rule")) {
    if (*rule == "contiguous")
      cfg.support_rule = SupportRule::contiguous;
    else if (*rule == "subsequence")
      cfg.support_rule = SupportRule::subsequence;
    else
      throw ConfigError("config: ibdd.rule must be contiguous or subsequence");
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& os, const PipelineConfig& cfg) {
  os << "[preprocess]\n"
     << "epsilon_s = " << format_double(cfg.preprocess.epsilon_s) << '\n'
     << "gamma_m = " << format_double(cfg.preprocess.gamma_m) << '\n'
     << "xi_prime_m = " << format_double(cfg.preprocess.xi_prime_m) << '\n'
     << "alpha_m = " << format_double(cfg.preprocess.alpha_m) << '\n'
     << "max_abs_accel = " << format_double(cfg.preprocess.max_abs_accel) << "\n\n"
     << "[regions]\n"
     << "tau_s = " << format_double(cfg.regions.tau_s) << '\n'
     << "xi_double_prime_m = " << format_double(cfg.regions.xi_double_prime_m) << "\n\n"
     << "[geohash]\nprecision = " << cfg.precision << "\n\n"
     << "[mining]\neta = " << cfg.eta << "\n\n"
     << "[detect]\n"
     << "theta = " << format_double(cfg.theta) << '\n'
     << "match = " << format_double(cfg.alignment.match) << '\n'
     << "mismatch = " << format_double(cfg.alignment.mismatch) << '\n'
     << "gap_open = " << format_double(cfg.alignment.gap_open) << '\n'
     << "gap_extend = " << format_double(cfg.alignment.gap_extend) << "\n\n"
     << "[ibdd]\n"
     << "theta_prime = " << format_double(cfg.theta_prime) << '\n'
     << "rule = " << (cfg.support_rule == SupportRule::contiguous ? "contiguous" : "subsequence") << "\n\n"
     << "[synth]\n"
     << "dt_base_s = " << format_double(cfg.noise.dt_base_s) << '\n'
     << "dt_noise_sd = " << format_double(cfg.noise.dt_noise_sd) << '\n'
     << "speed_mean = " << format_double(cfg.noise.speed_mean) << '\n'
     << "speed_sd = " << format_double(cfg.noise.speed_sd) << '\n'
     << "pos_noise_sd_m = " << format_double(cfg.noise.pos_noise_sd_m) << '\n'
     << "seed = " << cfg.seed << "\n\n"
     << "[eval]\n"
     << "theta_grid = " << join(cfg.theta_grid) << '\n'
     << "theta_prime_grid = " << join(cfg.theta_prime_grid) << '\n'
     << "precision_grid = " << join(cfg.precision_grid) << '\n';
}

// ---- stores -------------------------------------------------------------

std::vector<std::pair<std::string, std::vector<GeoPoint>>> read_stream(std::istream& is, StreamReadStats* stats) {
  std::vector<std::pair<std::string, std::vector<GeoPoint>>> out;
  std::map<std::string, std::size_t> index;
  StreamReadStats local;
  std::string line;
  while (std::getline(is, line)) {
    line = trim_cr(line);
    if (line.empty() || line[0] == '#') continue;
    ++local.lines;
    const auto f = split(line, ',');
    GeoPoint p;
    try {
      if (f.size() != 4 || f[0].empty()) throw InputError("bad field count");
      p = {parse_number<double>(f[2], "lat"), parse_number<double>(f[3], "lon"),
           parse_number<double>(f[1], "timestamp")};
      if (!is_valid(p)) throw InputError("invalid point");
    } catch (const InputError&) {
      ++local.skipped;
      continue;
    }
    auto [it, inserted] = index.try_emplace(f[0], out.size());
    if (inserted) out.emplace_back(f[0], std::vector<GeoPoint>{});
    out[it->second].second.push_back(p);
  }
  if (stats) *stats = local;
  return out;
}

void write_stream(std::ostream& os, const std::string& person_id, const std::vector<GeoPoint>& points) {
  for (const auto& p : points)
    os << person_id << ',' << format_double(p.timestamp) << ',' << format_double(p.lat) << ','
       << format_double(p.lon) << '\n';
}

std::vector<LabelRow> read_labels(std::istream& is) {
  std::vector<LabelRow> out;
  std::string line;
  while (std::getline(is, line)) {
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 4) throw InputError("labels: expected 4 fields in '" + line + "'");
    LabelRow row;
    row.id = parse_number<std::size_t>(f[0], "labels");
    if (f[1] == "normal")
      row.label = Label::normal;
    else if (f[1] == "anomalous")
      row.label = Label::anomalous;
    else
      throw InputError("labels: unknown label '" + f[1] + "'");
    row.pair = parse_number<std::size_t>(f[2], "labels");
    if (!f[3].empty()) row.divergence_time = parse_number<double>(f[3], "labels");
    out.push_back(row);
  }
  return out;
}

void write_blocks(std::ostream& os, const std::vector<Block>& blocks) {
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (const StayPoint& p : blocks[b].points)
      os << b << ',' << blocks[b].person_id << ',' << format_double(p.timestamp) << ',' << format_double(p.lat)
         << ',' << format_double(p.lon) << ',' << format_double(p.weight) << '\n';
}

std::vector<Block> read_blocks(std::istream& is) {
  std::vector<Block> out;
  std::string line;
  std::optional<std::size_t> current;
  while (std::getline(is, line)) {
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw InputError("blocks: expected 6 fields in '" + line + "'");
    const auto b = parse_number<std::size_t>(f[0], "blocks");
    if (!current || b != *current) {
      out.push_back({f[1], {}, false});
      current = b;
    }
    out.back().points.push_back({parse_number<double>(f[3], "blocks"), parse_number<double>(f[4], "blocks"),
                                 parse_number<double>(f[2], "blocks"), parse_number<double>(f[5], "blocks")});
  }
  return out;
}

void write_regions(std::ostream& os, const std::vector<GeofencedRegion>& regions) {
  for (const auto& r : regions) {
    os << r.id << ';';
    for (std::size_t i = 0; i < r.hull.size(); ++i) os << (i ? " " : "") << latlon_text(r.hull[i]);
    os << ';' << latlon_text(r.centroid) << '\n';
  }
}

std::vector<GeofencedRegion> read_regions(std::istream& is, const RegionConfig& cfg) {
  std::vector<GeofencedRegion> out;
  std::string line;
  while (std::getline(is, line)) {
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto f = split(line, ';');
    if (f.size() != 3) throw InputError("regions: expected 3 fields in '" + line + "'");
    GeofencedRegion r;
    r.id = parse_number<int>(f[0], "regions");
    for (const auto& v : words(f[1])) r.hull.push_back(parse_latlon(v));
    if (r.hull.empty()) throw InputError("regions: empty hull");
    r.centroid = parse_latlon(f[2]);
    r.buffer_m = cfg.buffer_m();
    out.push_back(std::move(r));
  }
  return out;
}

void write_sequences(std::ostream& os, const std::vector<GeohashSequence>& sequences) {
  for (const auto& s : sequences) {
    os << s.person_id << ' ' << s.origin_region << ' ' << s.destination_region;
    for (const auto& t : s.tokens) os << ' ' << to_string(t);
    os << '\n';
  }
}

std::vector<GeohashSequence> read_sequences(std::istream& is) {
  std::vector<GeohashSequence> out;
  std::string line;
  while (std::getline(is, line)) {
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto w = words(line);
    if (w.size() < 4) throw InputError("sequences: too few fields in '" + line + "'");
    GeohashSequence s;
    s.person_id = w[0];
    s.origin_region = parse_number<int>(w[1], "sequences");
    s.destination_region = parse_number<int>(w[2], "sequences");
    for (std::size_t i = 3; i < w.size(); ++i) s.tokens.push_back(parse_token(w[i]));
    out.push_back(std::move(s));
  }
  return out;
}

void write_patterns(std::ostream& os, const PatternSet& patterns) {
  os << "# eta=" << patterns.eta << " precision=" << patterns.precision << " source_hash=" << patterns.source_hash
     << '\n';
  for (const Pattern& p : patterns.patterns) {
    os << p.support << '\t';
    for (std::size_t i = 0; i < p.tokens.size(); ++i) os << (i ? " " : "") << to_string(p.tokens[i]);
    os << '\n';
  }
}

PatternSet read_patterns(std::istream& is) {
  PatternSet set;
  std::string line;
  if (!std::getline(is, line)) throw InputError("patterns: missing header");
  line = trim_cr(line);
  if (line.rfind("# ", 0) != 0) throw InputError("patterns: missing header");
  for (const auto& w : words(line.substr(2))) {
    const auto eq = w.find('=');
    if (eq == std::string::npos) throw InputError("patterns: bad header field '" + w + "'");
    const std::string key = w.substr(0, eq), value = w.substr(eq + 1);
    if (key == "eta")
      set.eta = parse_number<std::size_t>(value, "patterns");
    else if (key == "precision")
      set.precision = parse_number<int>(value, "patterns");
    else if (key == "source_hash")
      set.source_hash = parse_number<std::uint64_t>(value, "patterns");
    else
      throw InputError("patterns: unknown header field '" + key + "'");
  }
  while (std::getline(is, line)) {
    line = trim_cr(line);
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("patterns: missing tab in '" + line + "'");
    Pattern p;
    p.support = parse_number<std::size_t>(line.substr(0, tab), "patterns");
    for (const auto& w : words(line.substr(tab + 1))) p.tokens.push_back(parse_token(w));
    if (p.tokens.empty()) throw InputError("patterns: empty pattern");
    set.patterns.push_back(std::move(p));
  }
  return set;
}

void write_event(std::ostream& os, const DetectionEvent& e, Method method) {
  os << e.person_id << ',' << e.trajectory_id << ',' << format_double(e.timestamp) << ','
     << format_double(e.score) << ',' << format_double(e.anomaly) << ','
     << (e.verdict == Verdict::anomalous ? "anomalous" : "normal");
  if (method == Method::ibdd) os << ",method=ibdd";
  os << '\n';
}

// ---- offline refresh and snapshots ----------------------------------------

std::vector<GeohashSequence> history_sequences(const std::vector<Block>& blocks,
                                               const std::vector<GeofencedRegion>& regions, int precision) {
  std::vector<GeohashSequence> out;
  for (const Block& b : blocks)
    for (const Trajectory& t : segment_block(b, regions))
      if (!t.ongoing()) out.push_back(sequence_from_trajectory(t, precision));
  return out;
}

Snapshot make_snapshot(std::vector<GeofencedRegion> regions, std::vector<GeohashSequence> sequences,
                       std::shared_ptr<const PatternSet> patterns, const PipelineConfig& cfg) {
  Snapshot s;
  s.regions = std::move(regions);
  s.sequences = std::move(sequences);
  s.patterns = patterns ? std::move(patterns) : std::make_shared<const PatternSet>(PatternSet{cfg.eta, cfg.precision, 0, {}});
  if (!s.sequences.empty()) {
    auto support = std::make_shared<SupportSet>();
    support->theta_prime = cfg.theta_prime;
    support->rule = cfg.support_rule;
    for (const auto& seq : s.sequences) support->sequences.push_back(seq.tokens);
    s.support = std::move(support);
  }
  return s;
}

Snapshot periodic_refresh(const std::vector<Block>& blocks, const PipelineConfig& cfg,
                          const std::vector<GeofencedRegion>& previous) {
  cfg.validate();
  auto regions = discover_regions(blocks, cfg.regions, previous);
  auto sequences = history_sequences(blocks, regions, cfg.precision);
  auto patterns = std::make_shared<const PatternSet>(mine(sequences, cfg.eta, cfg.precision));
  return make_snapshot(std::move(regions), std::move(sequences), std::move(patterns), cfg);
}

void SnapshotHolder::publish(Snapshot s) {
  std::lock_guard lock(mutex_);
  s.generation = ++generation_;
  current_ = std::make_shared<const Snapshot>(std::move(s));
}

std::shared_ptr<const Snapshot> SnapshotHolder::current() const {
  std::lock_guard lock(mutex_);
  return current_;
}

std::uint64_t SnapshotHolder::generation() const {
  std::lock_guard lock(mutex_);
  return generation_;
}

// ---- online path ----------------------------------------------------------

OnlineMonitor::OnlineMonitor(std::string person_id, const SnapshotHolder& holder, PipelineConfig cfg, Method method)
    : person_id_(std::move(person_id)),
      holder_(holder),
      cfg_(std::move(cfg)),
      method_(method),
      preprocessor_(person_id_, cfg_.preprocess) {
  cfg_.validate();
  rebind();
}

void OnlineMonitor::rebind() {
  snapshot_ = holder_.current();
  if (!snapshot_) throw InputError("monitor: no snapshot published");
  segmenter_ = std::make_unique<Segmenter>(person_id_, snapshot_->regions);
  // The previous stay point may be the anchor of the next trajectory.
  if (last_in_block_) segmenter_->push(*last_in_block_);
}

std::vector<DetectionEvent> OnlineMonitor::ingest(const GeoPoint& p) {
  std::vector<DetectionEvent> out;
  const IngestEvents ev = preprocessor_.ingest(p);
  if (ev.dropped) ++dropped_;
  if (ev.block_closed) {
    // The closing stay point belongs to the finished block.
    if (ev.stay_point) on_stay_point(*ev.stay_point, out);
    on_block_end();
  } else if (ev.stay_point) {
    on_stay_point(*ev.stay_point, out);
  }
  return out;
}

std::vector<DetectionEvent> OnlineMonitor::finish() {
  std::vector<DetectionEvent> out;
  if (auto block = preprocessor_.finish()) {
    if (!block->points.empty()) on_stay_point(block->points.back(), out);
    on_block_end();
  }
  return out;
}

void OnlineMonitor::on_stay_point(const StayPoint& sp, std::vector<DetectionEvent>& out) {
  if (!segmenter_->in_progress() && holder_.generation() != generation()) rebind();
  switch (segmenter_->push(sp)) {
    case Segmenter::Event::started:
      start_trajectory();
      for (const StayPoint& q : segmenter_->current().points) score(q, out);
      break;
    case Segmenter::Event::extended:
    case Segmenter::Event::completed:
      score(sp, out);
      break;
    case Segmenter::Event::none:
      break;
  }
  last_in_block_ = sp;
}

void OnlineMonitor::on_block_end() {
  segmenter_->end_block();
  last_in_block_.reset();
  if (holder_.generation() != generation()) rebind();
}

void OnlineMonitor::start_trajectory() {
  ++trajectory_count_;
  builder_ = std::make_unique<SequenceBuilder>(cfg_.precision);
  if (method_ == Method::proposed) {
    detector_ = std::make_unique<Detector>(snapshot_->patterns, cfg_.theta, cfg_.alignment);
  } else {
    ibdd_.reset();
    if (snapshot_->support) ibdd_ = std::make_unique<IbddDetector>(snapshot_->support);
  }
}

void OnlineMonitor::score(const StayPoint& sp, std::vector<DetectionEvent>& out) {
  for (const CellToken& t : builder_->push(sp.pos())) {
    StepResult r;
    if (method_ == Method::proposed) {
      r = detector_->step(t);
    } else if (ibdd_) {
      r = ibdd_->step(t);
    } else {
      // No history: nothing supports the ongoing sequence.
      r = {0.0, 1.0, Verdict::anomalous};
    }
    out.push_back({person_id_, trajectory_count_, sp.end_time(), r.score, r.anomaly, r.verdict});
  }
}

}  // namespace wander
