#include "app.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <list>
#include <map>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "clump/cluster.hpp"
#include "clump/features.hpp"
#include "clump/panel.hpp"
#include "clump/parallel.hpp"
#include "clump/simulate.hpp"
#include "clump/study.hpp"
#include "clump/validity.hpp"
#include "json.hpp"

#ifndef CLUMP_VERSION
#define CLUMP_VERSION "0.0.0"
#endif

namespace clump::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Bad option values discovered after parsing, e.g. in a config file.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  body(out);
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

// Everything a subcommand may be told. Each command binds the subset it uses.
struct Options {
  std::string config;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  std::string input;
  std::string output;
  int k = 2;
  std::string scale = "none";
  std::string scenario = "balanced-low";
  json scenario_doc;  // full scenario object supplied by a config file
  std::size_t n = 0;
  std::size_t reps = 1;
  unsigned threads = 0;
  std::string assignments;
  std::string truth;
  std::string features;
  std::vector<std::size_t> sizes{1000, 2000, 4000, 8000};
  std::size_t t = 5;
};

struct Binding {
  CLI::Option* option;
  std::string key;
  std::function<void(const json&)> set;
  std::function<json()> get;
};

struct Run;

class Command {
 public:
  Command(CLI::App& app, const std::string& name, const std::string& description)
      : name_(name), sub_(app.add_subcommand(name, description)) {
    sub_->add_option("--config", opts.config, "JSON file (or an earlier run manifest) supplying options");
    bind("--out-dir", opts.out_dir, "directory for outputs and the run manifest");
    bind("--seed", opts.seed, "random seed");
  }

  template <class T>
  CLI::Option* bind(const std::string& flag, T& target, const std::string& description) {
    auto* option = sub_->add_option(flag, target, description);
    std::string key = flag.substr(flag.find_first_not_of('-'));
    std::replace(key.begin(), key.end(), '-', '_');
    bindings_.push_back({option, key, [&target](const json& v) { target = v.get<T>(); },
                         [&target] { return json(target); }});
    return option;
  }

  void bind_scale() {
    bind("--scale", opts.scale, "feature scaling before distances")->check(CLI::IsMember({"none", "zscore"}));
  }

  void bind_scenario() {
    bind("--scenario", opts.scenario, "preset name or scenario JSON file");
    bindings_.back().set = [this](const json& v) {
      if (v.is_object()) {
        opts.scenario_doc = v;
      } else {
        opts.scenario = v.get<std::string>();
      }
    };
  }

  const std::string& name() const { return name_; }
  bool parsed() const { return sub_->parsed(); }

  // Fills every option the command line left unset from the config file.
  void apply_config(const std::vector<std::string>& subcommands, std::ostream& err) {
    if (opts.config.empty()) return;
    json doc;
    try {
      doc = json::parse(read_file(opts.config));
    } catch (const json::exception& e) {
      throw UsageError("config '" + opts.config + "': " + e.what());
    }
    if (!doc.is_object()) throw UsageError("config '" + opts.config + "' is not a JSON object");

    json values = json::object();
    if (doc.contains("subcommand") && doc.contains("config")) {
      if (doc["subcommand"] != name_) {
        throw UsageError("manifest '" + opts.config + "' belongs to '" + doc["subcommand"].dump() + "'");
      }
      values = doc["config"];
    } else {
      for (const auto& [key, value] : doc.items()) {
        const bool section = value.is_object() &&
                             std::find(subcommands.begin(), subcommands.end(), key) != subcommands.end();
        if (!section) values[key] = value;
      }
      if (doc.contains(name_) && doc[name_].is_object()) values.update(doc[name_]);
    }

    for (const auto& [key, value] : values.items()) {
      auto it = std::find_if(bindings_.begin(), bindings_.end(), [&](const Binding& b) { return b.key == key; });
      if (it == bindings_.end()) {
        err << "warning: config key '" << key << "' is not used by " << name_ << '\n';
        continue;
      }
      if (it->option->count() > 0) continue;
      try {
        it->set(value);
      } catch (const json::exception& e) {
        throw UsageError("config key '" + key + "': " + e.what());
      }
    }
  }

  json resolved() const {
    json out = json::object();
    for (const auto& b : bindings_) out[b.key] = b.get();
    return out;
  }

  Options opts;
  std::function<void(Run&)> body;

 private:
  std::string name_;
  CLI::App* sub_;
  std::vector<Binding> bindings_;
};

struct Run {
  Options& o;
  std::ostream& out;
  std::ostream& err;
  json config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;

  fs::path output(const std::string& file) {
    const fs::path p = fs::path(o.out_dir) / file;
    outputs.push_back(p.string());
    return p;
  }
  std::string input(const std::string& path) {
    inputs.push_back(path);
    return read_file(path);
  }
};

Scaling scaling_of(const Options& o) {
  try {
    return parse_scaling(o.scale);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

ParsedPanel load_panel(Run& run) {
  if (run.o.input.empty()) throw UsageError("an input CSV is required");
  auto parsed = parse_long_csv(run.input(run.o.input));
  const auto& r = parsed.report;
  run.err << "accepted " << r.accepted << " of " << r.total() << " trajectories\n";
  for (const auto& rej : r.rejected) run.err << "rejected '" << rej.id << "': " << to_string(rej.reason) << '\n';
  if (r.accepted == 0) throw std::runtime_error("no valid trajectories in '" + run.o.input + "'");
  return parsed;
}

ScenarioConfig resolve_scenario(Run& run) {
  const Options& o = run.o;
  ScenarioConfig c;
  if (o.scenario_doc.is_object()) {
    c = scenario_from_json(o.scenario_doc);
  } else if (o.scenario.ends_with(".json")) {
    c = scenario_from_json(json::parse(run.input(o.scenario)));
  } else {
    try {
      c = builtin_scenario(o.scenario, o.seed);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (o.n > 0) c.n_subjects = o.n;
  c.seed = o.seed;
  c.check();
  run.config["scenario"] = to_json(c);
  return c;
}

void cmd_extract(Run& run) {
  const Scaling scaling = scaling_of(run.o);
  const auto parsed = load_panel(run);
  const auto matrix = standardize(extract_features(parsed.panel), scaling);
  const fs::path target = run.o.output.empty() ? run.output("features.csv") : fs::path(run.o.output);
  if (!run.o.output.empty()) run.outputs.push_back(target.string());
  write_file(target, [&](std::ostream& out) { write_feature_csv(out, matrix); });
}

void cmd_cluster(Run& run) {
  const Scaling scaling = scaling_of(run.o);
  if (run.o.k < 1) throw UsageError("k must be at least 1");
  const auto parsed = load_panel(run);
  const auto raw = extract_features(parsed.panel);
  const auto n = raw.size();
  if (static_cast<std::size_t>(run.o.k) > n) {
    throw UsageError("k = " + std::to_string(run.o.k) + " exceeds the number of trajectories (" + std::to_string(n) +
                     ")");
  }
  Dendrogram dendrogram;
  Assignment assignment;
  if (n == 1) {
    dendrogram.leaves = raw.ids;
    assignment = Assignment{raw.ids, {1}, 1};
  } else {
    dendrogram = ward_dendrogram(standardize(raw, scaling));
    assignment = cut(dendrogram, run.o.k);
  }
  const auto profiles = cluster_profiles(parsed.panel, raw, assignment);
  run.err << "cluster sizes:";
  for (const auto& p : profiles) run.err << ' ' << p.size;
  run.err << '\n';

  write_file(run.output("assignments.csv"), [&](std::ostream& out) { write_assignment_csv(out, assignment); });
  write_file(run.output("dendrogram.json"), [&](std::ostream& out) { out << to_json(dendrogram).dump(2) << '\n'; });
  write_file(run.output("profiles.json"), [&](std::ostream& out) { out << to_json(profiles).dump(2) << '\n'; });
}

void cmd_simulate(Run& run) {
  const auto scenario = resolve_scenario(run);
  const auto panel = generate(scenario);
  write_file(run.output("panel.csv"), [&](std::ostream& out) { write_long_csv(out, panel); });
  write_file(run.output("truth.csv"), [&](std::ostream& out) { write_truth_csv(out, panel); });
  run.err << "simulated " << panel.size() << " trajectories from '" << scenario.name << "'\n";
}

void cmd_evaluate(Run& run) {
  const Options& o = run.o;
  if (o.assignments.empty() || o.truth.empty() || o.features.empty()) {
    throw UsageError("--assignments, --truth and --features are required");
  }
  std::istringstream a_in(run.input(o.assignments));
  std::istringstream t_in(run.input(o.truth));
  std::istringstream f_in(run.input(o.features));
  const auto assignment = parse_assignment_csv(a_in);
  const auto truth = parse_truth_csv(t_in);
  const auto features = standardize(parse_feature_csv(f_in), scaling_of(o));

  std::map<std::string_view, std::size_t> row_of;
  for (std::size_t i = 0; i < features.size(); ++i) row_of[features.ids[i]] = i;
  FeatureMatrix subset;
  std::vector<int> truth_labels;
  for (const auto& id : assignment.ids) {
    const auto t = truth.find(id);
    if (t == truth.end()) throw std::runtime_error("id '" + id + "' has no true cluster");
    const auto f = row_of.find(id);
    if (f == row_of.end()) throw std::runtime_error("id '" + id + "' has no feature row");
    truth_labels.push_back(t->second);
    subset.ids.push_back(id);
    subset.rows.push_back(features.rows[f->second]);
  }
  const auto report = evaluate(truth_labels, assignment.labels, euclidean_distances(subset));
  const auto doc = to_json(report);
  run.out << doc.dump(2) << '\n';
  write_file(run.output("index_report.json"), [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
}

void cmd_study(Run& run) {
  const Options& o = run.o;
  StudyConfig config;
  config.scenario = resolve_scenario(run);
  config.replications = o.reps;
  config.k = o.k;
  config.scaling = scaling_of(o);
  config.master_seed = o.seed;
  config.threads = o.threads > 0 ? o.threads : default_threads();
  try {
    config.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  StudySummary summary;
  write_file(run.output("records.jsonl"), [&](std::ostream& out) { summary = run_study(config, &out); });
  json doc = {{"scenario", to_json(config.scenario)},
              {"replications", config.replications},
              {"k", config.k},
              {"scaling", std::string(to_string(config.scaling))},
              {"master_seed", config.master_seed},
              {"summary", to_json(summary)}};
  write_file(run.output("summary.json"), [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  write_file(run.output("summary.csv"), [&](std::ostream& out) { write_summary_csv(out, summary); });
  run.err << config.scenario.name << ": median ARI " << summary.adjusted_rand.median << " over "
          << summary.adjusted_rand.count << " replications\n";
}

void cmd_bench(Run& run) {
  const Options& o = run.o;
  TimingReport report;
  try {
    report = run_timing(o.sizes, o.t, o.reps, o.seed);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json doc = to_json(report);
  if (o.sizes.size() >= 2) {
    std::vector<double> cluster, total;
    for (const auto& r : report.rows) {
      cluster.push_back(r.cluster_seconds);
      total.push_back(r.total_seconds);
    }
    doc["cluster_loglog_slope"] = loglog_slope(o.sizes, cluster);
    doc["total_loglog_slope"] = loglog_slope(o.sizes, total);
  }
  write_file(run.output("timing.json"), [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  for (const auto& r : report.rows) {
    run.err << "n = " << r.n << ": extract " << r.extract_seconds << " s, cluster " << r.cluster_seconds << " s\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster short trajectories by extracted features and Ward's method", "clump"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CLUMP_VERSION);

  std::list<Command> commands;

  auto& extract = commands.emplace_back(app, "extract", "write the seven clustering features of a long-format CSV");
  extract.bind("input", extract.opts.input, "long-format CSV with columns id,time,value");
  extract.bind("--out", extract.opts.output, "feature CSV path (default <out-dir>/features.csv)");
  extract.bind_scale();
  extract.body = cmd_extract;

  auto& cluster = commands.emplace_back(app, "cluster", "extract features, run Ward clustering and cut into k groups");
  cluster.bind("input", cluster.opts.input, "long-format CSV with columns id,time,value");
  cluster.bind("--k", cluster.opts.k, "number of clusters")->check(CLI::PositiveNumber);
  cluster.bind_scale();
  cluster.body = cmd_cluster;

  auto& simulate = commands.emplace_back(app, "simulate", "draw a panel from a mixed-model scenario");
  simulate.bind_scenario();
  simulate.bind("--n", simulate.opts.n, "override the number of subjects");
  simulate.body = cmd_simulate;

  auto& evaluate_cmd = commands.emplace_back(app, "evaluate", "score an assignment against true clusters");
  evaluate_cmd.bind("--assignments", evaluate_cmd.opts.assignments, "assignment CSV (id,cluster)");
  evaluate_cmd.bind("--truth", evaluate_cmd.opts.truth, "truth CSV (id,true_cluster)");
  evaluate_cmd.bind("--features", evaluate_cmd.opts.features, "feature CSV used for Silhouette and Dunn");
  evaluate_cmd.bind_scale();
  evaluate_cmd.body = cmd_evaluate;

  auto& study = commands.emplace_back(app, "study", "repeat simulate-cluster-evaluate and summarize the indices");
  study.opts.reps = 200;
  study.bind_scenario();
  study.bind("--n", study.opts.n, "override the number of subjects");
  study.bind("--reps", study.opts.reps, "number of replications")->check(CLI::PositiveNumber);
  study.bind("--k", study.opts.k, "number of clusters")->check(CLI::PositiveNumber);
  study.bind_scale();
  study.bind("--threads", study.opts.threads, "worker threads (default: CLUMP_THREADS or all cores)");
  study.body = cmd_study;

  auto& bench = commands.emplace_back(app, "bench", "time feature extraction and clustering against panel size");
  bench.opts.reps = 3;
  bench.bind("--sizes", bench.opts.sizes, "panel sizes")->expected(1, -1);
  bench.bind("--t", bench.opts.t, "visits per trajectory");
  bench.bind("--reps", bench.opts.reps, "repetitions per size (median reported)")->check(CLI::PositiveNumber);
  bench.body = cmd_bench;

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  std::vector<std::string> names;
  for (const auto& c : commands) names.push_back(c.name());
  for (auto& command : commands) {
    if (!command.parsed()) continue;
    Run run{command.opts, out, err, json::object(), {}, {}};
    try {
      const std::string started = utc_now();
      command.apply_config(names, err);
      run.config = command.resolved();
      fs::create_directories(command.opts.out_dir);
      command.body(run);

      const json manifest = {{"subcommand", command.name()},
                             {"version", CLUMP_VERSION},
                             {"seed", command.opts.seed},
                             {"config", run.config},
                             {"inputs", run.inputs},
                             {"outputs", run.outputs},
                             {"started_at", started},
                             {"finished_at", utc_now()}};
      write_file(fs::path(command.opts.out_dir) / ("manifest_" + command.name() + ".json"),
                 [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
      return 0;
    } catch (const UsageError& e) {
      err << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 1;
}

}  // namespace clump::cli
