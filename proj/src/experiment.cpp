#include "uca/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "uca/exact.hpp"
#include "uca/rng.hpp"

namespace uca {

namespace {

std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T, typename Parse>
T parse_value(const std::string& key, const std::string& text, Parse parse) {
  try {
    std::size_t used = 0;
    T value = parse(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' has malformed value '" + text + "'");
  }
}

double to_double(const std::string& key, const std::string& text) {
  return parse_value<double>(key, text,
                             [](const std::string& s, std::size_t* k) { return std::stod(s, k); });
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  return parse_value<std::int64_t>(
      key, text, [](const std::string& s, std::size_t* k) { return std::stoll(s, k); });
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string join(const std::vector<double>& xs) {
  std::ostringstream out;
  for (std::size_t k = 0; k < xs.size(); ++k) out << (k ? "," : "") << xs[k];
  return out.str();
}

std::string join(const std::vector<int>& xs) {
  std::ostringstream out;
  for (std::size_t k = 0; k < xs.size(); ++k) out << (k ? "," : "") << xs[k];
  return out.str();
}

std::string dist_title(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << (cfg.dist == Distribution::kNpd ? "NPD" : "TRAP") << " n=" << cfg.n << " m=" << cfg.m;
  return out.str();
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + " is not key=value");
    }
    config.values_[normalize_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str());
}

std::string Config::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) {
    throw UsageError("missing config key: " + key);
  }
  return it->second;
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  return has(key) ? values_.at(key) : fallback;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? to_int(key, values_.at(key)) : fallback;
}

std::int64_t Config::require_int(const std::string& key) const { return to_int(key, require(key)); }

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const auto& text = values_.at(key);
  // Accept scientific notation for large counts such as 1e8.
  if (text.find_first_of("eE.") != std::string::npos) {
    const double x = to_double(key, text);
    if (!(x >= 0.0) || x != std::floor(x)) throw UsageError("config key '" + key + "' must be a count");
    return static_cast<std::uint64_t>(x);
  }
  return parse_value<std::uint64_t>(
      key, text, [](const std::string& s, std::size_t* k) { return std::stoull(s, k); });
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? to_double(key, values_.at(key)) : fallback;
}

std::vector<double> Config::get_doubles(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& item : split_list(values_.at(key))) out.push_back(to_double(key, item));
  if (out.empty()) throw UsageError("config key '" + key + "' needs at least one value");
  return out;
}

std::vector<int> Config::get_ints(const std::string& key, std::vector<int> fallback) const {
  if (!has(key)) return fallback;
  std::vector<int> out;
  for (const auto& item : split_list(values_.at(key))) {
    out.push_back(static_cast<int>(to_int(key, item)));
  }
  if (out.empty()) throw UsageError("config key '" + key + "' needs at least one value");
  return out;
}

void Config::reject_unknown(const std::set<std::string>& known) const {
  for (const auto& [key, value] : values_) {
    if (!known.count(key)) throw UsageError("unknown config key: " + key);
  }
}

Distribution parse_distribution(const std::string& name) {
  if (name == "npd") return Distribution::kNpd;
  if (name == "trap") return Distribution::kTrap;
  throw UsageError("unknown distribution '" + name + "' (npd|trap)");
}

const char* to_string(Distribution d) { return d == Distribution::kNpd ? "npd" : "trap"; }

const std::vector<std::string>& ExperimentConfig::required_keys() {
  static const std::vector<std::string> keys = {"dist", "n", "m", "seed"};
  return keys;
}

const std::set<std::string>& ExperimentConfig::known_keys() {
  static const std::set<std::string> keys = {
      "dist",        "n",           "m",         "seed",      "mu",         "sigma",
      "delta",       "tau",         "eps",       "kappa",     "pairs",      "split",
      "lr_grid",     "batch_grid",  "epochs",    "instances", "evals",      "checkpoints",
      "estimators",  "solve_budget", "samples",  "bins",      "train_kappa", "samples_per_level",
      "out_dir"};
  return keys;
}

ExperimentConfig ExperimentConfig::from(const Config& config,
                                        const std::vector<std::string>& required) {
  config.reject_unknown(known_keys());
  for (const auto& key : required) config.require(key);

  ExperimentConfig cfg;
  cfg.dist = parse_distribution(config.get("dist", "npd"));
  cfg.n = static_cast<int>(config.get_int("n", cfg.n));
  cfg.m = static_cast<int>(config.get_int("m", cfg.m));
  cfg.seed = config.get_u64("seed", cfg.seed);
  ProblemSpec{cfg.n, cfg.m, cfg.seed}.validate();

  cfg.npd.mu = config.get_double("mu", cfg.npd.mu);
  cfg.npd.sigma = config.get_double("sigma", cfg.npd.sigma);
  cfg.trap.sigma = cfg.npd.sigma;
  cfg.trap.delta = config.get_double("delta", cfg.trap.delta);
  cfg.trap.tau_threshold = config.get_double("tau", cfg.n / 2.0);
  cfg.trap.epsilon = config.get_double("eps", cfg.trap.epsilon);

  cfg.kappa = static_cast<int>(config.get_int("kappa", std::min(cfg.kappa, cfg.n)));
  cfg.pairs_per_level = static_cast<int>(config.get_int("pairs", cfg.pairs_per_level));
  cfg.split_fraction = config.get_double("split", cfg.split_fraction);
  cfg.lr_grid = config.get_doubles("lr_grid", cfg.lr_grid);
  cfg.batch_grid = config.get_ints("batch_grid", cfg.batch_grid);
  cfg.epochs = static_cast<int>(config.get_int("epochs", cfg.epochs));

  cfg.instances = static_cast<int>(config.get_int("instances", cfg.instances));
  cfg.evals = static_cast<int>(config.get_int("evals", cfg.evals));
  cfg.checkpoints = config.get_ints("checkpoints", cfg.checkpoints);
  if (config.has("estimators")) {
    cfg.estimators.clear();
    for (const auto& name : split_list(config.get("estimators", ""))) {
      cfg.estimators.push_back(parse_estimator(name));
    }
  }
  cfg.solve_budget = config.get_u64("solve_budget", cfg.solve_budget);
  cfg.samples = config.get_u64("samples", cfg.samples);
  cfg.bins = static_cast<int>(config.get_int("bins", cfg.bins));
  cfg.train_kappa = static_cast<int>(config.get_int("train_kappa", 0));
  cfg.samples_per_level = static_cast<int>(config.get_int("samples_per_level", cfg.samples_per_level));
  cfg.out_dir = config.get("out_dir", cfg.out_dir.string());

  if (cfg.kappa < 1 || cfg.kappa > cfg.n) throw UsageError("kappa must be in [1, n]");
  if (cfg.train_kappa < 0 || cfg.train_kappa > cfg.kappa) {
    throw UsageError("train_kappa must be in [0, kappa]");
  }
  if (cfg.instances < 1) throw UsageError("instances must be positive");
  if (cfg.evals < 1) throw UsageError("evals must be positive");
  return cfg;
}

ProblemSpec ExperimentConfig::instance_spec(int index) const {
  return ProblemSpec{n, m, substream_seed(stage_seed(seed, "generate"), index)};
}

ValueTable generate_table(const ExperimentConfig& cfg, const ProblemSpec& spec) {
  return cfg.dist == Distribution::kNpd ? generate_npd(spec, cfg.npd)
                                        : generate_trap(spec, cfg.trap);
}

bool needs_model(const ExperimentConfig& cfg) {
  return std::find(cfg.estimators.begin(), cfg.estimators.end(), EstimatorKind::kNeural) !=
         cfg.estimators.end();
}

namespace {

GridResult train_on(const ExperimentConfig& cfg, std::vector<LabeledPair> pairs, int index) {
  Rng split_rng = make_substream(stage_seed(cfg.seed, "split"), index);
  auto split = split_dataset(std::move(pairs), cfg.split_fraction, split_rng);
  TrainConfig base;
  base.epochs = cfg.epochs;
  base.seed = substream_seed(stage_seed(cfg.seed, "train"), index);
  return grid_search(split.train, split.test, cfg.n, cfg.m, cfg.lr_grid, cfg.batch_grid, base);
}

std::vector<LabeledPair> label_instance(const ExperimentConfig& cfg, const ValueTable& table,
                                        int index, int kappa) {
  DatasetConfig dcfg;
  dcfg.kappa = kappa;
  dcfg.pairs_per_level = cfg.pairs_per_level;
  dcfg.split_fraction = cfg.split_fraction;
  dcfg.seed = substream_seed(stage_seed(cfg.seed, "label"), index);
  return build_dataset(table, dcfg);
}

}  // namespace

PreparedInstance prepare_instance(const ExperimentConfig& cfg, int index) {
  PreparedInstance inst{generate_table(cfg, cfg.instance_spec(index)), {}, {}, {}};
  if (needs_model(cfg)) {
    inst.dataset = label_instance(cfg, inst.table, index, cfg.kappa);
    inst.training = train_on(cfg, inst.dataset, index);
  }
  if (search_tree_nodes(cfg.m, cfg.n) <= cfg.solve_budget) {
    inst.optimum = solve_exact(inst.table, cfg.solve_budget);
  }
  return inst;
}

ProbabilityEstimate run_probability(const ExperimentConfig& cfg) {
  const auto table = generate_table(cfg, cfg.instance_spec(0));
  Rng rng = make_rng(stage_seed(cfg.seed, "probability"));
  return estimate_positive_probability(table, cfg.samples, rng);
}

Histogram run_histogram(const ExperimentConfig& cfg) {
  const auto table = generate_table(cfg, cfg.instance_spec(0));
  Rng rng = make_rng(stage_seed(cfg.seed, "histogram"));
  return value_histogram(table, cfg.samples, cfg.bins, rng);
}

PredictionReport run_prediction(const ExperimentConfig& cfg) {
  const auto table = generate_table(cfg, cfg.instance_spec(0));
  const int train_kappa = cfg.train_kappa == 0 ? cfg.kappa : cfg.train_kappa;
  const auto training = train_on(cfg, label_instance(cfg, table, 0, train_kappa), 0);
  std::vector<int> levels(cfg.kappa);
  for (int k = 0; k < cfg.kappa; ++k) levels[k] = k + 1;
  Rng rng = make_rng(stage_seed(cfg.seed, "prediction"));
  return prediction_error_report(model_predictor(training.result.model), table, levels,
                                 cfg.samples_per_level, rng,
                                 std::numeric_limits<std::uint64_t>::max());
}

CurveReport run_curves(const ExperimentConfig& cfg, std::span<const PreparedInstance> prepared) {
  std::vector<BenchInstance> instances;
  for (const auto& p : prepared) {
    BenchInstance inst{&p.table, p.training ? &p.training->result.model : nullptr, std::nullopt};
    if (p.optimum) inst.optimum = p.optimum->value;
    instances.push_back(inst);
  }
  return benchmark_curves(instances, cfg.estimators, cfg.evals, cfg.checkpoints,
                          stage_seed(cfg.seed, "rollout"));
}

void run_bench(const std::string& experiment, const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  const auto title = dist_title(cfg);
  if (experiment == "probability") {
    const auto p = run_probability(cfg);
    write_probability_csv(cfg.out_dir / "probability.csv", p);
    std::cout << "P(V>0) = " << p.probability << " (" << p.positives << " of " << p.samples
              << ")\n";
  } else if (experiment == "histogram") {
    const auto h = run_histogram(cfg);
    write_histogram_csv(cfg.out_dir / "histogram.csv", h);
    write_histogram_svg(cfg.out_dir / "histogram.svg", h, "Empirical P(V(S)), " + title);
  } else if (experiment == "prediction") {
    const auto r = run_prediction(cfg);
    write_prediction_csv(cfg.out_dir / "prediction_error.csv", r);
    write_scatter_csv(cfg.out_dir / "prediction_scatter.csv", r);
    write_prediction_svg(cfg.out_dir / "prediction_error.svg", r, "Prediction error, " + title);
    write_scatter_svg(cfg.out_dir / "prediction_scatter.svg", r, "Predicted vs true, " + title);
  } else if (experiment == "curves") {
    std::vector<PreparedInstance> prepared;
    for (int i = 0; i < cfg.instances; ++i) prepared.push_back(prepare_instance(cfg, i));
    const auto r = run_curves(cfg, prepared);
    write_curves_csv(cfg.out_dir / "curves.csv", r);
    write_curves_svg(cfg.out_dir / "curves.svg", r, "Best solution value, " + title);
    if (!r.optimum) std::cout << "optimum unavailable at this scale\n";
  } else {
    throw UsageError("unknown experiment '" + experiment +
                     "' (probability|histogram|prediction|curves)");
  }
}

void write_training_trace_csv(const std::filesystem::path& path,
                              const std::vector<EpochLoss>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "epoch,train_loss,test_loss\n";
  char buf[96];
  for (const auto& e : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.train_loss, e.test_loss);
    out << buf;
  }
}

void write_grid_csv(const std::filesystem::path& path, const std::vector<GridCell>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "learning_rate,batch_size,test_loss\n";
  char buf[96];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g\n", c.learning_rate, c.batch_size, c.test_loss);
    out << buf;
  }
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001B3ULL;
    }
  }
  return hex64(h);
}

void run_pipeline(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::vector<std::pair<std::string, double>> timings;
  std::vector<fs::path> outputs;

  auto stage = [&](const std::string& name, auto&& body) {
    const auto start = Clock::now();
    try {
      body();
    } catch (const UsageError& e) {
      throw UsageError("stage " + name + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + name + ": " + e.what());
    }
    timings.emplace_back(name, seconds_since(start));
  };

  std::vector<PreparedInstance> prepared;
  for (int i = 0; i < cfg.instances; ++i) {
    const std::string tag = std::to_string(i);
    const auto spec = cfg.instance_spec(i);
    std::optional<ValueTable> table;
    stage("generate[" + tag + "]", [&] {
      table = generate_table(cfg, spec);
      outputs.push_back(cfg.out_dir / ("table_" + tag + ".ucav"));
      table->save(outputs.back());
    });
    PreparedInstance inst{std::move(*table), {}, {}, {}};
    if (needs_model(cfg)) {
      stage("label[" + tag + "]", [&] {
        inst.dataset = label_instance(cfg, inst.table, i, cfg.kappa);
        outputs.push_back(cfg.out_dir / ("dataset_" + tag + ".ucad"));
        Dataset{cfg.n, cfg.m, cfg.kappa, inst.dataset}.save(outputs.back());
      });
      stage("train[" + tag + "]", [&] {
        inst.training = train_on(cfg, inst.dataset, i);
        outputs.push_back(cfg.out_dir / ("model_" + tag + ".ucam"));
        inst.training->result.model.save(outputs.back());
        outputs.push_back(cfg.out_dir / ("training_trace_" + tag + ".csv"));
        write_training_trace_csv(outputs.back(), inst.training->result.trace);
        outputs.push_back(cfg.out_dir / ("grid_" + tag + ".csv"));
        write_grid_csv(outputs.back(), inst.training->cells);
      });
    }
    if (search_tree_nodes(cfg.m, cfg.n) <= cfg.solve_budget) {
      stage("solve[" + tag + "]", [&] { inst.optimum = solve_exact(inst.table, cfg.solve_budget); });
    }
    prepared.push_back(std::move(inst));
  }

  stage("bench", [&] {
    const auto r = run_curves(cfg, prepared);
    outputs.push_back(cfg.out_dir / "curves.csv");
    write_curves_csv(outputs.back(), r);
    outputs.push_back(cfg.out_dir / "curves.svg");
    write_curves_svg(outputs.back(), r, "Best solution value, " + dist_title(cfg));
  });

  std::ofstream manifest(cfg.out_dir / "manifest.txt");
  manifest << "[config]\n"
           << "dist=" << to_string(cfg.dist) << "\nn=" << cfg.n << "\nm=" << cfg.m
           << "\nseed=" << cfg.seed << "\nmu=" << cfg.npd.mu << "\nsigma=" << cfg.npd.sigma
           << "\ndelta=" << cfg.trap.delta << "\ntau=" << cfg.trap.tau_threshold
           << "\neps=" << cfg.trap.epsilon << "\nkappa=" << cfg.kappa
           << "\npairs=" << cfg.pairs_per_level << "\nsplit=" << cfg.split_fraction
           << "\nlr_grid=" << join(cfg.lr_grid) << "\nbatch_grid=" << join(cfg.batch_grid)
           << "\nepochs=" << cfg.epochs << "\ninstances=" << cfg.instances
           << "\nevals=" << cfg.evals << "\ncheckpoints=" << join(cfg.checkpoints) << "\n";
  manifest << "[seeds]\n";
  for (const char* name : {"generate", "label", "split", "train", "rollout"}) {
    manifest << name << '=' << hex64(stage_seed(cfg.seed, name)) << '\n';
  }
  for (int i = 0; i < cfg.instances; ++i) {
    manifest << "table_" << i << '=' << hex64(cfg.instance_spec(i).seed) << '\n';
  }
  manifest << "[selected]\n";
  for (int i = 0; i < cfg.instances; ++i) {
    if (!prepared[i].training) continue;
    manifest << "model_" << i << "=lr " << prepared[i].training->best.learning_rate << ", batch "
             << prepared[i].training->best.batch_size << '\n';
  }
  manifest << "[hashes]\n";
  for (const auto& path : outputs) {
    manifest << path.filename().string() << '=' << file_hash(path) << '\n';
  }
  manifest << "[timings_seconds]\n";
  for (const auto& [name, secs] : timings) manifest << name << '=' << secs << '\n';
}

}  // namespace uca
