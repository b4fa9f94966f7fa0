// wanderctl: command-line surface of the wandering-detection pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wander/pipeline.hpp"

namespace fs = std::filesystem;
using namespace wander;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitMissingStore = 3;

class MissingStore : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string workspace = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> theta;
  std::optional<int> precision;
  std::string input;
  bool case_study = false;
};

std::ifstream open_store(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingStore("missing store " + path.string());
  return in;
}

std::ofstream create(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

PipelineConfig resolve_config(const Options& o) {
  PipelineConfig cfg;
  if (!o.config.empty()) cfg = load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.precision) {
    cfg.precision = *o.precision;
    cfg.precision_grid = {*o.precision};
  }
  if (o.theta) {
    if (o.method && parse_method(*o.method) == Method::ibdd) {
      cfg.theta_prime = *o.theta;
      cfg.theta_prime_grid = {*o.theta};
    } else {
      cfg.theta = *o.theta;
      cfg.theta_grid = {*o.theta};
    }
  }
  try {
    if (o.method) parse_method(*o.method);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<std::pair<std::string, std::vector<GeoPoint>>> load_stream(const fs::path& path) {
  std::ifstream in = open_store(path);
  StreamReadStats stats;
  auto streams = read_stream(in, &stats);
  if (stats.skipped > 0)
    std::cerr << "warning: skipped " << stats.skipped << " malformed line(s) of " << stats.lines << " in "
              << path.string() << '\n';
  return streams;
}

std::vector<Block> load_blocks(const Workspace& ws) {
  std::ifstream in = open_store(ws.blocks());
  return read_blocks(in);
}

std::vector<GeofencedRegion> load_regions(const Workspace& ws, const PipelineConfig& cfg) {
  std::ifstream in = open_store(ws.regions());
  return read_regions(in, cfg.regions);
}

void save_regions(const Workspace& ws, const std::vector<GeofencedRegion>& regions) {
  auto out = create(ws.regions());
  write_regions(out, regions);
}

void save_models(const Workspace& ws, const std::vector<GeohashSequence>& sequences, const PatternSet& patterns) {
  auto seq = create(ws.sequences());
  write_sequences(seq, sequences);
  auto pat = create(ws.patterns());
  write_patterns(pat, patterns);
}

int cmd_simulate(const Options& o, const PipelineConfig& cfg, const Workspace& ws) {
  const WaypointGraph graph = default_waypoint_graph();
  if (o.case_study) {
    const auto points = case_study_walk(graph, cfg.noise, cfg.seed);
    auto out = create(ws.dir / "case_study.csv");
    write_stream(out, "p0", points);
    std::cout << "case study: " << points.size() << " points -> " << (ws.dir / "case_study.csv").string() << '\n';
    return 0;
  }
  const Corpus corpus = generate_corpus(graph, CorpusSpec{}, cfg.noise, cfg.seed);
  auto stream = create(ws.corpus());
  auto labels = create(ws.labels());
  write_corpus(corpus, stream, labels);
  std::cout << "corpus: " << corpus.trajectories.size() << " trajectories (" << corpus.count(Label::normal)
            << " normal, " << corpus.count(Label::anomalous) << " anomalous)\n";
  return 0;
}

int cmd_preprocess(const Options& o, const PipelineConfig& cfg, const Workspace& ws) {
  const fs::path input = o.input.empty() ? ws.corpus() : fs::path(o.input);
  std::vector<Block> blocks;
  std::size_t raw = 0, kept = 0;
  for (const auto& [person, points] : load_stream(input)) {
    StreamPreprocessor pre(person, cfg.preprocess);
    for (const GeoPoint& p : points) {
      ++raw;
      try {
        if (auto ev = pre.ingest(p); ev.block_closed) blocks.push_back(std::move(*ev.block_closed));
      } catch (const InputError& e) {
        std::cerr << "warning: " << e.what() << '\n';
      }
    }
    if (auto b = pre.finish()) blocks.push_back(std::move(*b));
  }
  for (const Block& b : blocks) kept += b.points.size();
  auto out = create(ws.blocks());
  write_blocks(out, blocks);
  const double reduction = raw ? 100.0 * (1.0 - static_cast<double>(kept) / static_cast<double>(raw)) : 0.0;
  std::printf("preprocess: %zu points -> %zu stay points in %zu blocks (reduction %.1f%%)\n", raw, kept,
              blocks.size(), reduction);
  return 0;
}

int cmd_regions(const PipelineConfig& cfg, const Workspace& ws) {
  const auto blocks = load_blocks(ws);
  std::vector<GeofencedRegion> previous;
  if (std::ifstream in(ws.regions()); in) previous = read_regions(in, cfg.regions);
  const auto regions = discover_regions(blocks, cfg.regions, previous);
  save_regions(ws, regions);
  std::cout << "regions: " << regions.size() << '\n';
  return 0;
}

int cmd_mine(const PipelineConfig& cfg, const Workspace& ws) {
  const auto blocks = load_blocks(ws);
  const auto regions = load_regions(ws, cfg);
  const auto sequences = history_sequences(blocks, regions, cfg.precision);
  const PatternSet patterns = mine(sequences, cfg.eta, cfg.precision);
  save_models(ws, sequences, patterns);
  std::cout << "mine: " << sequences.size() << " sequences -> " << patterns.patterns.size() << " patterns (eta "
            << cfg.eta << ", precision " << cfg.precision << ")\n";
  return 0;
}

int cmd_refresh(const PipelineConfig& cfg, const Workspace& ws) {
  const auto blocks = load_blocks(ws);
  std::vector<GeofencedRegion> previous;
  if (std::ifstream in(ws.regions()); in) previous = read_regions(in, cfg.regions);
  const Snapshot s = periodic_refresh(blocks, cfg, previous);
  save_regions(ws, s.regions);
  save_models(ws, s.sequences, *s.patterns);
  std::cout << "refresh: " << s.regions.size() << " regions, " << s.sequences.size() << " sequences, "
            << s.patterns->patterns.size() << " patterns\n";
  return 0;
}

int cmd_detect(const Options& o, const PipelineConfig& cfg, const Workspace& ws) {
  const Method method = o.method ? parse_method(*o.method) : Method::proposed;
  auto regions = load_regions(ws, cfg);
  std::ifstream pat_in = open_store(ws.patterns());
  auto patterns = std::make_shared<const PatternSet>(read_patterns(pat_in));
  std::vector<GeohashSequence> sequences;
  if (method == Method::ibdd) {
    std::ifstream seq_in = open_store(ws.sequences());
    sequences = read_sequences(seq_in);
  }
  if (method == Method::proposed && patterns->patterns.empty())
    std::cerr << "warning: pattern store is empty; every trajectory will be flagged anomalous\n";
  if (method == Method::ibdd && sequences.empty())
    std::cerr << "warning: sequence store is empty; every trajectory will be flagged anomalous\n";
  if (patterns->precision != 0 && patterns->precision != cfg.precision)
    throw ConfigError("detect: precision " + std::to_string(cfg.precision) + " differs from the pattern store's " +
                      std::to_string(patterns->precision));

  SnapshotHolder holder;
  holder.publish(make_snapshot(std::move(regions), std::move(sequences), patterns, cfg));

  const fs::path input = o.input.empty() ? ws.corpus() : fs::path(o.input);
  auto log = create(ws.events(), std::ios::app);
  std::size_t trajectories = 0, flagged = 0;
  for (const auto& [person, points] : load_stream(input)) {
    OnlineMonitor monitor(person, holder, cfg, method);
    std::size_t last_flagged = 0;
    const auto handle = [&](const std::vector<DetectionEvent>& events) {
      for (const auto& e : events) {
        write_event(log, e, method);
        if (e.verdict == Verdict::anomalous && e.trajectory_id != last_flagged) {
          last_flagged = e.trajectory_id;
          ++flagged;
        }
      }
    };
    for (const GeoPoint& p : points) {
      try {
        handle(monitor.ingest(p));
      } catch (const InputError& e) {
        std::cerr << "warning: " << e.what() << '\n';
      }
    }
    handle(monitor.finish());
    trajectories += monitor.trajectories();
  }
  std::cout << "detect (" << to_string(method) << "): " << flagged << " of " << trajectories
            << " trajectories flagged anomalous\n";
  return 0;
}

/// Splits a recorded corpus stream back into walks at gaps longer than the
/// block threshold and attaches the sidecar labels.
Corpus load_corpus(const Workspace& ws, const PipelineConfig& cfg) {
  const auto streams = load_stream(ws.corpus());
  std::ifstream label_in = open_store(ws.labels());
  const auto labels = read_labels(label_in);
  if (streams.size() != 1) throw InputError("evaluate: corpus must hold exactly one person");
  Corpus corpus;
  corpus.person_id = streams[0].first;
  for (const GeoPoint& p : streams[0].second) {
    if (corpus.trajectories.empty() ||
        p.timestamp - corpus.trajectories.back().points.back().timestamp >= cfg.preprocess.epsilon_s)
      corpus.trajectories.emplace_back();
    corpus.trajectories.back().points.push_back(p);
  }
  if (corpus.trajectories.size() != labels.size())
    throw InputError("evaluate: " + std::to_string(corpus.trajectories.size()) + " walks but " +
                     std::to_string(labels.size()) + " labels");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    corpus.trajectories[i].label = labels[i].label;
    corpus.trajectories[i].pair = labels[i].pair;
    corpus.trajectories[i].divergence_time = labels[i].divergence_time;
  }
  return corpus;
}

int cmd_evaluate(const Options& o, const PipelineConfig& cfg, const Workspace& ws) {
  const Corpus corpus = load_corpus(ws, cfg);
  const PreparedCorpus prepared = prepare_corpus(corpus, cfg.preprocess, cfg.regions);
  std::vector<Method> methods{Method::proposed, Method::ibdd};
  if (o.method) methods = {parse_method(*o.method)};

  std::vector<EvalResult> results;
  LooParams params;
  params.eta = cfg.eta;
  params.alignment = cfg.alignment;
  params.support_rule = cfg.support_rule;
  for (Method m : methods) {
    const auto& grid = m == Method::proposed ? cfg.theta_grid : cfg.theta_prime_grid;
    for (int precision : cfg.precision_grid) {
      const auto samples = samples_at(prepared, precision);
      std::cerr << "evaluating " << to_string(m) << " at precision " << precision << " ...\n";
      const auto traces = leave_one_out(samples, m, params);
      for (double threshold : grid) {
        results.push_back(summarize(traces, m, threshold, precision));
        std::ostringstream name;
        name << "eval_" << to_string(m) << '_' << format_double(threshold) << '_' << precision << ".csv";
        auto details = create(ws.dir / name.str());
        write_details(details, results.back());
      }
    }
  }
  // Table rows ordered by threshold, then precision.
  std::stable_sort(results.begin(), results.end(), [](const EvalResult& a, const EvalResult& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.method == Method::proposed ? a.threshold < b.threshold : a.threshold > b.threshold;
  });
  write_table(std::cout, results);
  auto report = create(ws.report());
  write_table(report, results);
  auto records = create(ws.records());
  write_records(records, results);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online detection of wandering trajectories"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "INI configuration file");
  app.add_option("--workspace", o.workspace, "store directory");
  app.add_option("--seed", o.seed, "generator seed");
  app.add_option("--method", o.method, "proposed or ibdd");
  app.add_option("--theta", o.theta, "anomaly threshold (theta' with --method ibdd)");
  app.add_option("--precision", o.precision, "geohash precision");

  auto* simulate = app.add_subcommand("simulate", "generate the labeled corpus");
  simulate->add_flag("--case-study", o.case_study, "write the back-and-forth walk instead");
  auto* preprocess = app.add_subcommand("preprocess", "contract a stream into the block store");
  preprocess->add_option("--input", o.input, "stream file (default: workspace corpus)");
  app.add_subcommand("regions", "discover geofenced regions");
  app.add_subcommand("mine", "segment, encode and mine the pattern store");
  app.add_subcommand("refresh", "regions + mine as one snapshot");
  auto* detect = app.add_subcommand("detect", "replay a stream through the online detector");
  detect->add_option("--input", o.input, "stream file (default: workspace corpus)");
  app.add_subcommand("evaluate", "leave-one-out evaluation over the parameter grids");

  CLI11_PARSE(app, argc, argv);

  try {
    const PipelineConfig cfg = resolve_config(o);
    const Workspace ws{o.workspace};
    fs::create_directories(ws.dir);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "simulate") return cmd_simulate(o, cfg, ws);
    if (cmd == "preprocess") return cmd_preprocess(o, cfg, ws);
    if (cmd == "regions") return cmd_regions(cfg, ws);
    if (cmd == "mine") return cmd_mine(cfg, ws);
    if (cmd == "refresh") return cmd_refresh(cfg, ws);
    if (cmd == "detect") return cmd_detect(o, cfg, ws);
    if (cmd == "evaluate") return cmd_evaluate(o, cfg, ws);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MissingStore& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingStore;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
