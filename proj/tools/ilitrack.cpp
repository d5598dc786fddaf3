// Command-line front end. Subcommands compose via files so every
// intermediate is inspectable: simulate writes a corpus, filter writes
// survivors plus a manifest, correlate writes a report, report draws
// the chart. Exit codes: 0 ok, 1 usage/config, 2 I/O, 3 statistical
// degeneracy.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "ilitrack/corpus.hpp"
#include "ilitrack/errors.hpp"
#include "ilitrack/filters.hpp"
#include "ilitrack/manifest.hpp"
#include "ilitrack/simulate.hpp"
#include "ilitrack/stats.hpp"
#include "ilitrack/svg.hpp"

namespace {

using namespace ilitrack;

struct StopWatch {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// One filtered corpus pass. Lines are pulled in batches and fanned out
// to `workers` threads; results are consumed in batch order so survivor
// order is identical to input order regardless of thread timing. When a
// season is given, out-of-season records bypass the pipeline and land
// in their own bucket, which keeps manifest conservation exact.
struct FilterPass {
  std::uint64_t input_records = 0;
  std::uint64_t parse_errors = 0;
  std::uint64_t survivors = 0;
  std::uint64_t out_of_season = 0;
  std::vector<std::pair<std::string, std::uint64_t>> stage_drops;

  static std::vector<std::string> stage_names(const PipelineConfig& cfg) {
    std::vector<std::string> names;
    names.push_back(std::string("keyword_") + to_string(cfg.keyword_method));
    if (cfg.remove_url) names.push_back("url");
    for (const auto& s : cfg.semantic_stages) names.push_back(s);
    return names;
  }

  // on_record(original line, tweet, kept) runs on the main thread in
  // input order, only for in-season parsed records; on_issue likewise
  // for parse failures.
  template <typename OnRecord, typename OnIssue>
  void run(const std::string& corpus_path, const PipelineConfig& cfg,
           const FilterResources& res, unsigned workers, const Season* season,
           OnRecord&& on_record, OnIssue&& on_issue) {
    auto names = stage_names(cfg);
    std::map<std::string, std::uint64_t> drop_counts;
    for (const auto& n : names) drop_counts[n] = 0;

    struct Row {
      std::string line;
      bool parsed = false;
      bool skipped = false;  // parsed but out of season
      std::string error;
      Tweet tweet;
      bool kept = false;
      std::string drop_stage;
    };

    LineReader reader(corpus_path);
    const std::size_t batch_size = 2048;
    std::vector<Row> batch;
    batch.reserve(batch_size);
    workers = std::max(1u, workers);

    auto process_batch = [&]() {
      auto work = [&](unsigned w) {
        for (std::size_t i = w; i < batch.size(); i += workers) {
          Row& row = batch[i];
          std::string err;
          auto tweet = parse_record(row.line, &err);
          if (!tweet) {
            row.error = err;
            continue;
          }
          row.parsed = true;
          row.tweet = std::move(*tweet);
          if (season && !season->assign(row.tweet.created_at)) {
            row.skipped = true;
            continue;
          }
          auto result = run_pipeline(row.tweet, cfg, res);
          row.kept = result.kept;
          if (!result.kept) row.drop_stage = result.trace.back().stage;
        }
      };
      if (workers == 1) {
        work(0);
      } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
      }
      for (auto& row : batch) {
        ++input_records;
        if (!row.parsed) {
          ++parse_errors;
          on_issue(input_records, row.error);
          continue;
        }
        if (row.skipped) {
          ++out_of_season;
          continue;
        }
        if (row.kept)
          ++survivors;
        else
          ++drop_counts[row.drop_stage];
        on_record(row.line, row.tweet, row.kept);
      }
      batch.clear();
    };

    std::string line;
    while (reader.next(line)) {
      Row row;
      row.line = std::move(line);
      batch.push_back(std::move(row));
      if (batch.size() >= batch_size) process_batch();
    }
    if (!batch.empty()) process_batch();

    for (const auto& n : names) stage_drops.emplace_back(n, drop_counts[n]);
  }
};

int run_stats(const std::string& corpus_path, bool as_csv) {
  CorpusStats s = scan_corpus(corpus_path);
  if (as_csv) {
    std::printf("metric,value\n");
    std::printf("total_tweets,%llu\n", (unsigned long long)s.total_tweets);
    std::printf("parse_errors,%llu\n", (unsigned long long)s.parse_errors);
    std::printf("unique_users,%llu\n", (unsigned long long)s.unique_users);
    std::printf("url_tweets,%llu\n", (unsigned long long)s.url_tweets);
    std::printf("hashtag_tokens_total,%llu\n", (unsigned long long)s.hashtag_tokens_total);
    std::printf("hashtag_tokens_unique,%llu\n", (unsigned long long)s.hashtag_tokens_unique);
  } else {
    std::printf("total_tweets=%llu\n", (unsigned long long)s.total_tweets);
    std::printf("parse_errors=%llu\n", (unsigned long long)s.parse_errors);
    std::printf("unique_users=%llu\n", (unsigned long long)s.unique_users);
    std::printf("url_tweets=%llu\n", (unsigned long long)s.url_tweets);
    std::printf("hashtag_tokens_total=%llu\n", (unsigned long long)s.hashtag_tokens_total);
    std::printf("hashtag_tokens_unique=%llu\n", (unsigned long long)s.hashtag_tokens_unique);
  }
  return 0;
}

struct FilterArgs {
  std::string corpus;
  std::string config;
  std::string output;
  std::string manifest;
  std::string series_out;
  std::string season_start = "2009-08-30";
  int weeks = 36;
  unsigned workers = 1;
};

int run_filter(const FilterArgs& args) {
  StopWatch watch;
  PipelineConfig cfg = load_pipeline_config(args.config);
  FilterResources res = FilterResources::load(cfg);

  std::ofstream out(args.output, std::ios::binary);
  if (!out) throw IoError("cannot write survivors: " + args.output);

  Season season = Season::from_strings(args.season_start, args.weeks);
  std::unique_ptr<WeeklyAggregator> agg;
  if (!args.series_out.empty()) agg = std::make_unique<WeeklyAggregator>(season);

  FilterPass pass;
  pass.run(
      args.corpus, cfg, res, args.workers, &season,
      [&](const std::string& line, const Tweet& t, bool kept) {
        if (kept) out << line << '\n';
        if (agg) agg->add(t.created_at, kept);
      },
      [&](std::uint64_t line_no, const std::string& error) {
        std::fprintf(stderr, "warning: line %llu: %s\n", (unsigned long long)line_no,
                     error.c_str());
      });
  out.close();

  RunManifest manifest;
  manifest.command = "filter";
  manifest.config_path = args.config;
  manifest.config_hash = hash_file(args.config);
  manifest.input_paths = {args.corpus};
  manifest.file_hashes = {{"culotta4", hash_file(cfg.lex_culotta4)},
                          {"signorini4", hash_file(cfg.lex_signorini4)},
                          {"chew3", hash_file(cfg.lex_chew3)},
                          {"syndrome", hash_file(cfg.lex_syndrome)},
                          {"extra", hash_file(cfg.lex_extra)},
                          {"emoticons", hash_file(cfg.emoticons)},
                          {"humor_patterns", hash_file(cfg.humor_patterns)},
                          {"gazetteer", hash_file(cfg.gazetteer)}};
  manifest.input_records = pass.input_records;
  manifest.parse_errors = pass.parse_errors;
  manifest.survivors = pass.survivors;
  manifest.stage_drops = pass.stage_drops;
  manifest.out_of_season = pass.out_of_season;
  manifest.output_paths = {args.output};

  if (agg) {
    WeeklySeries series = agg->series();
    normalize(series, cfg.k);
    if (series.zero_total_weeks)
      std::fprintf(stderr, "warning: %llu week(s) had zero total tweets\n",
                   (unsigned long long)series.zero_total_weeks);
    write_series(args.series_out, series);
    manifest.output_paths.push_back(args.series_out);
  }
  manifest.timings_ms["filter"] = watch.ms();
  std::string manifest_path =
      args.manifest.empty() ? args.output + ".manifest.json" : args.manifest;
  manifest.write(manifest_path);
  std::fprintf(stderr, "filtered %llu records, %llu survivors -> %s\n",
               (unsigned long long)pass.input_records, (unsigned long long)pass.survivors,
               args.output.c_str());
  return 0;
}

struct MethodSpec {
  std::string name;
  std::string config_path;  // corpus mode
  std::string series_path;  // series mode
};

struct CorrelateArgs {
  std::string corpus;
  std::vector<std::string> configs;
  std::vector<std::string> series;  // name=path
  std::string gold;
  std::string output;
  std::string compare_out;
  std::string svg;
  std::string manifest;
  std::string season_start = "2009-08-30";
  int weeks = 36;
  unsigned workers = 1;
  double k_override = 0.0;  // 0 = per-config k
};

std::string method_name_for(const std::string& config_path) {
  return std::filesystem::path(config_path).stem().string();
}

int run_correlate(const CorrelateArgs& args, bool want_chart) {
  StopWatch watch;
  if (args.configs.empty() == args.series.empty())
    throw ConfigError("give either --config (with --corpus) or --series, not both");
  if (!args.configs.empty() && args.corpus.empty())
    throw ConfigError("--config mode needs --corpus");
  if (args.gold.empty()) throw ConfigError("--gold is required");

  GoldSeries gold = load_gold(args.gold, args.weeks);
  Season season = Season::from_strings(args.season_start, args.weeks);

  CorrelationReport report;
  std::vector<ChartSeries> chart;
  {
    std::vector<double> gold_values = gold.values;
    chart.push_back({"gold", std::move(gold_values)});
  }

  RunManifest manifest;
  manifest.command = want_chart ? "report" : "correlate";
  manifest.input_paths = {args.gold};
  manifest.file_hashes["gold"] = hash_file(args.gold);

  auto add_method = [&](const std::string& name, WeeklySeries series) {
    std::size_t excluded = 0;
    auto [x, y] = pair_series(series, gold, &excluded);
    if (excluded)
      std::fprintf(stderr, "warning: %s: excluded %zu trailing week(s) with no tweets\n",
                   name.c_str(), excluded);
    report.excluded_trailing_weeks = std::max(report.excluded_trailing_weeks, excluded);
    MethodResult m;
    m.name = name;
    for (auto v : series.filtered) m.tweets += v;
    m.n = x.size();
    m.r = pearson(x, y);
    m.p = pearson_pvalue(m.r, m.n);
    report.methods.push_back(m);
    chart.push_back({name, series.normalized});
  };

  if (!args.series.empty()) {
    for (const auto& spec : args.series) {
      auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0)
        throw ConfigError("--series expects name=path, got: " + spec);
      std::string name = spec.substr(0, eq);
      std::string path = spec.substr(eq + 1);
      WeeklySeries series = load_series(path);
      if (series.normalized.size() != static_cast<std::size_t>(args.weeks))
        throw StatsError("length_mismatch", "series " + name + " has " +
                                                std::to_string(series.normalized.size()) +
                                                " weeks, expected " + std::to_string(args.weeks));
      manifest.input_paths.push_back(path);
      manifest.file_hashes[name] = hash_file(path);
      add_method(name, std::move(series));
    }
  } else {
    manifest.input_paths.push_back(args.corpus);
    for (const auto& config_path : args.configs) {
      PipelineConfig cfg = load_pipeline_config(config_path);
      FilterResources res = FilterResources::load(cfg);
      WeeklyAggregator agg(season);
      FilterPass pass;
      pass.run(
          args.corpus, cfg, res, args.workers, &season,
          [&](const std::string&, const Tweet& t, bool kept) { agg.add(t.created_at, kept); },
          [](std::uint64_t, const std::string&) {});
      WeeklySeries series = agg.series();
      normalize(series, args.k_override > 0.0 ? args.k_override : cfg.k);
      manifest.file_hashes[method_name_for(config_path)] = hash_file(config_path);
      manifest.parse_errors += pass.parse_errors;
      add_method(method_name_for(config_path), std::move(series));
    }
  }

  // pairwise comparisons when more than one method is present
  for (std::size_t i = 0; i < report.methods.size(); ++i) {
    for (std::size_t j = i + 1; j < report.methods.size(); ++j) {
      const auto& a = report.methods[i];
      const auto& b = report.methods[j];
      if (a.n < 4 || b.n < 4 || std::fabs(a.r) >= 1.0 || std::fabs(b.r) >= 1.0) continue;
      auto c = compare_correlations(a.r, a.n, b.r, b.n);
      report.comparisons.push_back({a.name, b.name, c.z, c.p});
    }
  }

  std::ofstream out(args.output, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + args.output);
  out << "method,tweets,weeks,r,r_percent,p\n";
  for (const auto& m : report.methods) {
    out << csv_quote(m.name) << ',' << m.tweets << ',' << m.n << ',' << format_double(m.r)
        << ',' << format_percent(m.r) << ',' << format_double(m.p) << '\n';
  }
  out.close();
  manifest.output_paths.push_back(args.output);

  if (!args.compare_out.empty()) {
    std::ofstream cmp(args.compare_out, std::ios::binary);
    if (!cmp) throw IoError("cannot write comparisons: " + args.compare_out);
    cmp << "method_a,method_b,z,p\n";
    for (const auto& c : report.comparisons)
      cmp << csv_quote(c.method_a) << ',' << csv_quote(c.method_b) << ',' << format_double(c.z)
          << ',' << format_double(c.p) << '\n';
    manifest.output_paths.push_back(args.compare_out);
  }

  if (want_chart || !args.svg.empty()) {
    std::string svg_path = args.svg.empty() ? args.output + ".svg" : args.svg;
    std::ofstream svg(svg_path, std::ios::binary);
    if (!svg) throw IoError("cannot write chart: " + svg_path);
    svg << render_line_chart(chart, "weekly series vs gold");
    manifest.output_paths.push_back(svg_path);
  }

  for (const auto& m : report.methods)
    std::printf("%-24s tweets=%-9llu r=%s%%  p=%s\n", m.name.c_str(),
                (unsigned long long)m.tweets, format_percent(m.r).c_str(),
                format_pvalue(m.p).c_str());
  for (const auto& c : report.comparisons)
    std::printf("compare %s vs %s: z=%.4f p=%s\n", c.method_a.c_str(), c.method_b.c_str(), c.z,
                format_pvalue(c.p).c_str());

  manifest.timings_ms["correlate"] = watch.ms();
  std::string manifest_path =
      args.manifest.empty() ? args.output + ".manifest.json" : args.manifest;
  manifest.write(manifest_path);
  return 0;
}

struct SimulateArgs {
  std::string spec;
  std::string corpus;
  std::string labels;
  std::string manifest;
  std::int64_t seed_override = -1;
};

int run_simulate(const SimulateArgs& args) {
  StopWatch watch;
  SyntheticSpec spec = load_synthetic_spec(args.spec);
  if (args.seed_override >= 0) spec.seed = static_cast<std::uint64_t>(args.seed_override);
  GenerationSummary summary = generate_corpus(spec, args.corpus, args.labels);

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.config_path = args.spec;
  manifest.config_hash = hash_file(args.spec);
  manifest.input_records = summary.total_tweets;
  manifest.survivors = summary.total_tweets;
  manifest.output_paths = {args.corpus, args.labels};
  manifest.file_hashes["corpus"] = hash_file(args.corpus);
  manifest.file_hashes["labels"] = hash_file(args.labels);
  manifest.timings_ms["simulate"] = watch.ms();
  std::string manifest_path =
      args.manifest.empty() ? args.corpus + ".manifest.json" : args.manifest;
  manifest.write(manifest_path);

  for (const auto& [cls, count] : summary.class_totals)
    std::printf("%-12s %llu\n", cls.c_str(), (unsigned long long)count);
  std::printf("total        %llu\n", (unsigned long long)summary.total_tweets);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming tweet filtering and weekly-series correlation toolkit"};
  app.require_subcommand(1);

  std::string stats_corpus;
  bool stats_csv = false;
  bool gz_hint = false;  // input compression is auto-detected; kept for interface stability
  auto* stats_cmd = app.add_subcommand("stats", "corpus-level statistics");
  stats_cmd->add_option("--corpus", stats_corpus, "input corpus (.jsonl or .jsonl.gz)")
      ->required();
  stats_cmd->add_flag("--csv", stats_csv, "emit CSV instead of key=value lines");
  stats_cmd->add_flag("--gz", gz_hint, "treat input as gzip (auto-detected; accepted for compatibility)");

  FilterArgs filter_args;
  auto* filter_cmd = app.add_subcommand("filter", "run a filtering pipeline over a corpus");
  filter_cmd->add_option("--corpus", filter_args.corpus, "input corpus")->required();
  filter_cmd->add_option("--config", filter_args.config, "pipeline config JSON")->required();
  filter_cmd->add_option("--output", filter_args.output, "survivor JSONL path")->required();
  filter_cmd->add_option("--manifest", filter_args.manifest, "manifest path (default <output>.manifest.json)");
  filter_cmd->add_option("--series-out", filter_args.series_out, "also write week,filtered,total,normalized CSV");
  filter_cmd->add_option("--season-start", filter_args.season_start, "season start Sunday (default 2009-08-30)");
  filter_cmd->add_option("--weeks", filter_args.weeks, "season length in weeks (default 36)");
  filter_cmd->add_option("--workers", filter_args.workers, "worker threads (default 1)");
  filter_cmd->add_flag("--gz", gz_hint, "treat input as gzip (auto-detected; accepted for compatibility)");

  CorrelateArgs corr_args;
  auto* corr_cmd = app.add_subcommand("correlate", "correlate filtered weekly series against a gold series");
  corr_cmd->add_option("--corpus", corr_args.corpus, "input corpus (with --config mode)");
  corr_cmd->add_option("--config", corr_args.configs, "pipeline config JSON (repeatable)");
  corr_cmd->add_option("--series", corr_args.series, "name=path of a series CSV (repeatable)");
  corr_cmd->add_option("--gold", corr_args.gold, "gold CSV week,value")->required();
  corr_cmd->add_option("--output", corr_args.output, "report CSV path")->required();
  corr_cmd->add_option("--compare-out", corr_args.compare_out, "pairwise comparison CSV path");
  corr_cmd->add_option("--svg", corr_args.svg, "also render an SVG chart");
  corr_cmd->add_option("--manifest", corr_args.manifest, "manifest path");
  corr_cmd->add_option("--season-start", corr_args.season_start, "season start Sunday");
  corr_cmd->add_option("--weeks", corr_args.weeks, "season length in weeks");
  corr_cmd->add_option("--workers", corr_args.workers, "worker threads");
  corr_cmd->add_option("--k", corr_args.k_override, "override the normalization constant K");
  corr_cmd->add_flag("--gz", gz_hint, "treat input as gzip (auto-detected; accepted for compatibility)");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic corpus with a planted signal");
  sim_cmd->add_option("--spec", sim_args.spec, "simulation spec JSON")->required();
  sim_cmd->add_option("--output", sim_args.corpus, "corpus JSONL path")->required();
  sim_cmd->add_option("--labels", sim_args.labels, "labels CSV path")->required();
  sim_cmd->add_option("--manifest", sim_args.manifest, "manifest path");
  sim_cmd->add_option("--seed", sim_args.seed_override, "override the spec seed");

  CorrelateArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "correlate and render the comparison chart");
  report_cmd->add_option("--corpus", report_args.corpus, "input corpus (with --config mode)");
  report_cmd->add_option("--config", report_args.configs, "pipeline config JSON (repeatable)");
  report_cmd->add_option("--series", report_args.series, "name=path of a series CSV (repeatable)");
  report_cmd->add_option("--gold", report_args.gold, "gold CSV week,value")->required();
  report_cmd->add_option("--output", report_args.output, "report CSV path")->required();
  report_cmd->add_option("--compare-out", report_args.compare_out, "pairwise comparison CSV path");
  report_cmd->add_option("--svg", report_args.svg, "chart path (default <output>.svg)");
  report_cmd->add_option("--manifest", report_args.manifest, "manifest path");
  report_cmd->add_option("--season-start", report_args.season_start, "season start Sunday");
  report_cmd->add_option("--weeks", report_args.weeks, "season length in weeks");
  report_cmd->add_option("--workers", report_args.workers, "worker threads");
  report_cmd->add_option("--k", report_args.k_override, "override the normalization constant K");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    if (stats_cmd->parsed()) return run_stats(stats_corpus, stats_csv);
    if (filter_cmd->parsed()) return run_filter(filter_args);
    if (corr_cmd->parsed()) return run_correlate(corr_args, false);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (report_cmd->parsed()) return run_correlate(report_args, true);
  } catch (const StatsError& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return 3;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
