#include "uca/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "svg.hpp"
#include "uca/dataset.hpp"
#include "uca/parallel.hpp"

namespace uca {

namespace {

constexpr std::uint64_t kChunk = 1 << 20;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

// Value of a uniform complete assignment, without building one.
double sample_value(const ValueTable& v, Rng& rng, std::uniform_int_distribution<int>& label,
                    std::vector<Mask>& bundles) {
  std::fill(bundles.begin(), bundles.end(), 0);
  for (int j = 0; j < v.n(); ++j) bundles[label(rng)] |= Mask{1} << j;
  return value_of_bundles(bundles, v);
}

// Calls visit(value) for `samples` uniform complete assignments, chunk by
// chunk; per-chunk results are combined in chunk order by the caller.
template <typename ChunkResult, typename Visit>
std::vector<ChunkResult> over_samples(const ValueTable& v, std::uint64_t samples,
                                      std::uint64_t seed, ChunkResult init, Visit visit) {
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(chunks, init);
  parallel_for(chunks, [&](std::size_t c) {
    Rng rng = make_substream(seed, c);
    std::uniform_int_distribution<int> label(0, v.m() - 1);
    std::vector<Mask> bundles(v.m());
    const std::uint64_t count = std::min(kChunk, samples - c * kChunk);
    for (std::uint64_t k = 0; k < count; ++k) {
      visit(results[c], sample_value(v, rng, label, bundles));
    }
  });
  return results;
}

}  // namespace

PartialAssignment sample_complete_assignment(int n, int m, Rng& rng) {
  std::uniform_int_distribution<int> label(0, m - 1);
  PartialAssignment s(n, m);
  for (int j = 0; j < n; ++j) s.assign(j, label(rng));
  return s;
}

ProbabilityEstimate estimate_positive_probability(const ValueTable& v, std::uint64_t samples,
                                                  Rng& rng) {
  if (samples < 1) throw UsageError("need at least one sample");
  const auto per_chunk = over_samples<std::uint64_t>(
      v, samples, rng(), 0, [](std::uint64_t& hits, double value) { hits += value > 0.0; });
  ProbabilityEstimate out;
  out.samples = samples;
  out.positives = std::accumulate(per_chunk.begin(), per_chunk.end(), std::uint64_t{0});
  out.probability = static_cast<double>(out.positives) / static_cast<double>(samples);
  return out;
}

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Histogram value_histogram(const ValueTable& v, std::uint64_t samples, int bins, Rng& rng) {
  if (bins < 1) throw UsageError("histogram needs at least one bin");
  if (samples < 1) throw UsageError("need at least one sample");
  const std::uint64_t seed = rng();
  using Range = std::pair<double, double>;
  const Range empty{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
  const auto ranges = over_samples<Range>(v, samples, seed, empty, [](Range& r, double value) {
    r.first = std::min(r.first, value);
    r.second = std::max(r.second, value);
  });
  Histogram h;
  h.low = empty.first;
  h.high = empty.second;
  for (const auto& [lo, hi] : ranges) {
    h.low = std::min(h.low, lo);
    h.high = std::max(h.high, hi);
  }
  if (!(h.high > h.low)) {
    // Single observed value: one bin centred on it.
    h.low -= 0.5;
    h.high += 0.5;
  }
  h.counts.assign(bins, 0);
  const double low = h.low, width = h.bin_width();
  const auto partial = over_samples<std::vector<std::uint64_t>>(
      v, samples, seed, std::vector<std::uint64_t>(bins, 0),
      [&](std::vector<std::uint64_t>& counts, double value) {
        auto bin = static_cast<long>(std::floor((value - low) / width));
        counts[std::clamp<long>(bin, 0, bins - 1)] += 1;
      });
  for (const auto& counts : partial) {
    for (int b = 0; b < bins; ++b) h.counts[b] += counts[b];
  }
  return h;
}

ValuePredictor model_predictor(const MlpModel& model) {
  return [&model](const PartialAssignment& s, double current) {
    return forward(model, encode_input(s, current, model.norm));
  };
}

ValuePredictor current_value_predictor() {
  return [](const PartialAssignment&, double current) { return current; };
}

PredictionReport prediction_error_report(const ValuePredictor& predictor, const ValueTable& v,
                                         std::span<const int> levels, int samples_per_level,
                                         Rng& rng, std::uint64_t node_budget) {
  if (samples_per_level < 1) throw UsageError("need at least one sample per level");
  for (int k : levels) {
    if (k < 0 || k > v.n()) throw UsageError("unassigned level out of range");
    if (search_tree_nodes(v.m(), k) > node_budget) {
      throw BudgetError("exact labeling at " + std::to_string(k) +
                        " unassigned elements exceeds the node budget");
    }
  }
  const std::uint64_t seed = rng();
  const ProblemSpec spec{v.n(), v.m(), seed};
  const auto per_level = static_cast<std::size_t>(samples_per_level);

  PredictionReport report;
  report.scatter.resize(levels.size() * per_level);
  parallel_for(report.scatter.size(), [&](std::size_t index) {
    const int k = levels[index / per_level];
    Rng local = make_substream(seed, index);
    const auto s = sample_partial_assignment(spec, v.n() - k, local);
    const double truth = exact_value_to_go(s, v, node_budget);
    report.scatter[index] = ScatterPoint{k, truth, predictor(s, value_of(s, v))};
  });

  for (std::size_t l = 0; l < levels.size(); ++l) {
    LevelErrors row{levels[l], 0.0, 0.0, per_level};
    const auto begin = report.scatter.begin() + static_cast<std::ptrdiff_t>(l * per_level);
    const auto end = begin + static_cast<std::ptrdiff_t>(per_level);
    for (auto it = begin; it != end; ++it) row.mean_error += it->true_value - it->predicted;
    row.mean_error /= static_cast<double>(per_level);
    for (auto it = begin; it != end; ++it) {
      const double d = it->true_value - it->predicted - row.mean_error;
      row.std_error += d * d;
    }
    row.std_error = std::sqrt(row.std_error / static_cast<double>(per_level));
    report.levels.push_back(row);
  }
  return report;
}

std::pair<double, double> normal_ci95(std::span<const double> values) {
  if (values.empty()) throw UsageError("confidence interval of no values");
  const auto k = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
  if (values.size() < 2) return {mean, mean};
  double ss = 0.0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double half = 1.96 * std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  return {mean - half, mean + half};
}

CurveReport benchmark_curves(std::span<const BenchInstance> instances,
                             std::span<const EstimatorKind> estimators, int n_evals,
                             std::span<const int> checkpoints, std::uint64_t seed) {
  if (instances.empty()) throw UsageError("benchmark needs at least one instance");
  CurveReport report;
  for (std::size_t e = 0; e < estimators.size(); ++e) {
    std::vector<RolloutResult> runs;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& inst = instances[i];
      if (inst.table == nullptr) throw UsageError("benchmark instance without a table");
      Estimator est{estimators[e], inst.model};
      if (estimators[e] == EstimatorKind::kNeural && inst.model == nullptr) {
        throw UsageError("neural estimator requested but instance " + std::to_string(i) +
                         " has no model");
      }
      Rng rng = make_substream(substream_seed(seed, e), i);
      runs.push_back(best_of_n(*inst.table, est, n_evals, checkpoints, rng));
    }
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      CurvePoint point;
      point.estimator = estimators[e];
      point.checkpoint = checkpoints[c];
      for (const auto& run : runs) point.per_instance.push_back(run.checkpoints[c].second);
      point.mean = std::accumulate(point.per_instance.begin(), point.per_instance.end(), 0.0) /
                   static_cast<double>(point.per_instance.size());
      std::tie(point.ci_low, point.ci_high) = normal_ci95(point.per_instance);
      report.points.push_back(std::move(point));
    }
  }
  if (std::all_of(instances.begin(), instances.end(),
                  [](const BenchInstance& inst) { return inst.optimum.has_value(); })) {
    double total = 0.0;
    for (const auto& inst : instances) total += *inst.optimum;
    report.optimum = total / static_cast<double>(instances.size());
  }
  return report;
}

void write_probability_csv(const std::filesystem::path& path, const ProbabilityEstimate& p) {
  auto out = open_csv(path);
  out << "samples,positives,probability\n"
      << p.samples << ',' << p.positives << ',' << fmt(p.probability) << '\n';
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& h) {
  auto out = open_csv(path);
  out << "bin_low,bin_high,count\n";
  const double width = h.bin_width();
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out << fmt(h.low + width * b) << ',' << fmt(h.low + width * (b + 1)) << ',' << h.counts[b]
        << '\n';
  }
}

void write_histogram_svg(const std::filesystem::path& path, const Histogram& h,
                         const std::string& title) {
  svg::Plot plot(title, "V(S)", "P(V(S))");
  const double total = std::max<double>(1.0, static_cast<double>(h.total()));
  double peak = 0.0;
  for (auto c : h.counts) peak = std::max(peak, static_cast<double>(c) / total);
  plot.set_range(h.low, h.high, 0.0, peak);
  const double width = h.bin_width();
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    plot.rect(h.low + width * b, 0.0, h.low + width * (b + 1),
              static_cast<double>(h.counts[b]) / total, svg::palette(0));
  }
  plot.save(path);
}

void write_prediction_csv(const std::filesystem::path& path, const PredictionReport& r) {
  auto out = open_csv(path);
  out << "unassigned,mean_error,std_error,n_samples\n";
  for (const auto& row : r.levels) {
    out << row.unassigned << ',' << fmt(row.mean_error) << ',' << fmt(row.std_error) << ','
        << row.samples << '\n';
  }
}

void write_scatter_csv(const std::filesystem::path& path, const PredictionReport& r) {
  auto out = open_csv(path);
  out << "unassigned,true_value,predicted_value\n";
  for (const auto& p : r.scatter) {
    out << p.unassigned << ',' << fmt(p.true_value) << ',' << fmt(p.predicted) << '\n';
  }
}

void write_prediction_svg(const std::filesystem::path& path, const PredictionReport& r,
                          const std::string& title) {
  svg::Plot plot(title, "unassigned elements", "V* - prediction (mean, 2 sd)");
  if (r.levels.empty()) {
    plot.save(path);
    return;
  }
  double x0 = r.levels.front().unassigned, x1 = x0, y0 = 0.0, y1 = 0.0;
  for (const auto& row : r.levels) {
    x0 = std::min<double>(x0, row.unassigned);
    x1 = std::max<double>(x1, row.unassigned);
    y0 = std::min(y0, row.mean_error - 2 * row.std_error);
    y1 = std::max(y1, row.mean_error + 2 * row.std_error);
  }
  plot.set_range(x0 - 0.5, x1 + 0.5, y0, y1);
  plot.segment(x0 - 0.5, 0.0, x1 + 0.5, 0.0, "#888", 1.0);
  std::vector<std::pair<double, double>> means;
  for (const auto& row : r.levels) {
    const double x = row.unassigned;
    plot.segment(x, row.mean_error - 2 * row.std_error, x, row.mean_error + 2 * row.std_error,
                 svg::palette(0), 2.0);
    means.emplace_back(x, row.mean_error);
  }
  plot.polyline(means, svg::palette(1));
  plot.save(path);
}

void write_scatter_svg(const std::filesystem::path& path, const PredictionReport& r,
                       const std::string& title) {
  svg::Plot plot(title, "true V*", "predicted");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : r.scatter) {
    lo = std::min({lo, p.true_value, p.predicted});
    hi = std::max({hi, p.true_value, p.predicted});
  }
  if (r.scatter.empty()) lo = 0.0, hi = 1.0;
  plot.set_range(lo, hi, lo, hi);
  plot.segment(lo, lo, hi, hi, "#888", 1.0);
  for (const auto& p : r.scatter) plot.dot(p.true_value, p.predicted, svg::palette(0));
  plot.save(path);
}

void write_curves_csv(const std::filesystem::path& path, const CurveReport& r) {
  auto out = open_csv(path);
  out << "# 95% CI: normal approximation, mean +- 1.96*sd/sqrt(instances)\n";
  if (r.optimum) {
    out << "# optimum: " << fmt(*r.optimum) << '\n';
  } else {
    out << "# optimum unavailable at this scale\n";
  }
  out << "estimator,checkpoint,mean,ci_low,ci_high\n";
  for (const auto& p : r.points) {
    out << to_string(p.estimator) << ',' << p.checkpoint << ',' << fmt(p.mean) << ','
        << fmt(p.ci_low) << ',' << fmt(p.ci_high) << '\n';
  }
}

void write_curves_svg(const std::filesystem::path& path, const CurveReport& r,
                      const std::string& title) {
  svg::Plot plot(title, "Number of evaluations", "Best solution value");
  if (r.points.empty()) {
    plot.save(path);
    return;
  }
  double x1 = 0, y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
  for (const auto& p : r.points) {
    x1 = std::max<double>(x1, p.checkpoint);
    y0 = std::min(y0, p.ci_low);
    y1 = std::max(y1, p.ci_high);
  }
  if (r.optimum) {
    y0 = std::min(y0, *r.optimum);
    y1 = std::max(y1, *r.optimum);
  }
  plot.set_range(0.0, x1, y0, y1);
  std::vector<EstimatorKind> kinds;
  for (const auto& p : r.points) {
    if (std::find(kinds.begin(), kinds.end(), p.estimator) == kinds.end()) {
      kinds.push_back(p.estimator);
    }
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    std::vector<std::pair<double, double>> line;
    for (const auto& p : r.points) {
      if (p.estimator != kinds[k]) continue;
      line.emplace_back(p.checkpoint, p.mean);
      plot.segment(p.checkpoint, p.ci_low, p.checkpoint, p.ci_high, svg::palette(k));
    }
    plot.polyline(line, svg::palette(k));
    plot.legend(to_string(kinds[k]), svg::palette(k));
  }
  if (r.optimum) {
    plot.polyline({{0.0, *r.optimum}, {x1, *r.optimum}}, "#000", "4 4");
    plot.legend("optimum " + svg::num(*r.optimum), "#000");
  } else {
    plot.label(x1 * 0.02, y1, "optimum unavailable at this scale");
  }
  plot.save(path);
}

}  // namespace uca
