// tradestats: trade-size and trading-volume statistics from tick data.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tradestats/aggregation.hpp"
#include "tradestats/density.hpp"
#include "tradestats/error.hpp"
#include "tradestats/fit.hpp"
#include "tradestats/gof.hpp"
#include "tradestats/ingestion.hpp"
#include "tradestats/pipeline.hpp"
#include "tradestats/preference.hpp"
#include "tradestats/synthgen.hpp"
#include "tradestats/tail.hpp"

using namespace tradestats;
using nlohmann::json;

namespace {

struct TickOptions {
  std::string ticks;
  std::string calendar;
  std::string ticker;
  std::string delimiter = ",";
  std::string date_col = "date";
  std::string time_col = "time";
  std::string size_col = "size";
  std::string side_col = "side";

  void add(CLI::App* app) {
    app->add_option("--ticks", ticks, "tick file (header row required)")->required()->check(CLI::ExistingFile);
    app->add_option("--calendar", calendar, "session calendar csv (date,open,close)")->check(CLI::ExistingFile);
    app->add_option("--ticker", ticker, "series id (default: file stem)");
    app->add_option("--delimiter", delimiter, "field delimiter, or \\t");
    app->add_option("--date-col", date_col, "date column; empty when the time column has date and time");
    app->add_option("--time-col", time_col);
    app->add_option("--size-col", size_col);
    app->add_option("--side-col", side_col);
  }

  SessionCalendar load_cal() const {
    if (calendar.empty()) return {};
    std::ifstream in(calendar);
    if (!in) throw IoError("cannot open " + calendar);
    return load_calendar(in);
  }

  ParseResult parse() const {
    TickSchema schema;
    if (delimiter == "\\t")
      schema.delimiter = '\t';
    else if (delimiter.size() == 1)
      schema.delimiter = delimiter[0];
    else
      throw ConfigError("delimiter must be a single character");
    schema.date_column = date_col;
    schema.time_column = time_col;
    schema.size_column = size_col;
    schema.side_column = side_col;
    schema.ticker = ticker.empty() ? std::filesystem::path(ticks).stem().string() : ticker;
    return parse_ticks_file(ticks, schema, load_cal());
  }
};

std::vector<double> read_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<double> v;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(line.substr(first), &used));
    } catch (const std::exception&) {
      throw ParseError(n, "not a number: '" + line + "'");
    }
  }
  if (v.empty()) throw DataError(path + " holds no values");
  return v;
}

void write_values(const std::string& path, const std::vector<double>& v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out.precision(17);
  for (const double x : v) out << x << '\n';
  if (!out) throw IoError("failed writing " + path);
}

void emit_json(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

int run_stage(const std::string& name, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const StageError& e) {
    std::cerr << "tradestats: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "tradestats: [" << name << "] " << e.what() << '\n';
  }
  return 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trade-size and trading-volume statistics: aggregation, q-Gamma fitting, tail exponents, "
               "number preference."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // ingest
  TickOptions ingest_opts;
  std::string ingest_out;
  auto* ingest = app.add_subcommand("ingest", "parse and validate a tick file");
  ingest_opts.add(ingest);
  ingest->add_option("--out", ingest_out, "write the cleaned series in canonical tick format");

  // simulate
  std::string sim_spec, sim_out;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic tick stream");
  simulate->add_option("--spec", sim_spec, "stream spec json")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", sim_out, "tick file to write")->required();

  // aggregate
  TickOptions agg_opts;
  std::string agg_mode = "event", agg_meta, agg_out;
  int agg_dt = 1;
  std::size_t agg_dn = 1;
  bool agg_keep_empty = false, agg_raw = false;
  auto* aggregate_cmd = app.add_subcommand("aggregate", "sum trade sizes over clock or event windows");
  agg_opts.add(aggregate_cmd);
  aggregate_cmd->add_option("--mode", agg_mode, "clock or event")->check(CLI::IsMember({"clock", "event"}));
  aggregate_cmd->add_option("--dt", agg_dt, "window in minutes (clock mode)");
  aggregate_cmd->add_option("--dn", agg_dn, "trades per window (event mode)");
  aggregate_cmd->add_option("--meta", agg_meta, "outstanding shares csv for share normalization")
      ->check(CLI::ExistingFile);
  aggregate_cmd->add_flag("--keep-empty", agg_keep_empty, "keep zero-volume clock windows");
  aggregate_cmd->add_flag("--raw", agg_raw, "skip division by the sample mean");
  aggregate_cmd->add_option("--out", agg_out, "values file, one per line")->required();

  // fit
  std::string fit_values, fit_model_name = "qgamma", fit_out, fit_curve;
  int fit_bpd = 20;
  std::uint64_t fit_seed = 1;
  double fit_level = 0.01;
  std::size_t fit_min_count = SearchConfig{}.min_bin_count;
  std::string fit_weight = "count";
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to the log-binned density and run the CvM test");
  fit_cmd->add_option("--values", fit_values, "values file")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--model", fit_model_name, "qgamma|qexp|student|lognormal")
      ->check(CLI::IsMember({"qgamma", "qexp", "student", "lognormal"}));
  fit_cmd->add_option("--bins-per-decade", fit_bpd);
  fit_cmd->add_option("--min-bin-count", fit_min_count, "bins with fewer samples are not fitted");
  fit_cmd->add_option("--weight", fit_weight, "count|uniform")->check(CLI::IsMember({"count", "uniform"}));
  fit_cmd->add_option("--seed", fit_seed);
  fit_cmd->add_option("--significance", fit_level)->check(CLI::IsMember({0.10, 0.05, 0.01}));
  fit_cmd->add_option("--curve", fit_curve, "two-column file: bin center, fitted density");
  fit_cmd->add_option("--out", fit_out, "json output (default stdout)");

  // tails
  std::string tails_values, tails_method = "all", tails_out;
  std::size_t tails_boot = 200;
  std::size_t tails_k = 0, tails_k0 = 0;
  std::uint64_t tails_seed = 1;
  unsigned tails_threads = 0;
  auto* tails_cmd = app.add_subcommand("tails", "tail exponent estimates with bootstrap errors");
  tails_cmd->add_option("--values", tails_values, "values file")->required()->check(CLI::ExistingFile);
  tails_cmd->add_option("--method", tails_method, "all|he|mse|csne|lse|fae|rke")
      ->check(CLI::IsMember({"all", "he", "hill", "mse", "csne", "lse", "fae", "rke"}));
  tails_cmd->add_option("--bootstrap", tails_boot, "resample count")->check(CLI::PositiveNumber);
  tails_cmd->add_option("--k", tails_k, "order statistics for he/fae (default 5% within [10, 2000])");
  tails_cmd->add_option("--k0", tails_k0, "fae inner count (default floor(sqrt(k)))");
  tails_cmd->add_option("--seed", tails_seed);
  tails_cmd->add_option("--threads", tails_threads);
  tails_cmd->add_option("--out", tails_out, "json output (default stdout)");

  // spikes
  TickOptions spike_opts;
  double spike_threshold = 5.0;
  std::string spike_out, spike_census;
  auto* spikes_cmd = app.add_subcommand("spikes", "number-preference spikes in exact trade sizes");
  spike_opts.add(spikes_cmd);
  spikes_cmd->add_option("--threshold", spike_threshold, "count / background ratio to flag")
      ->check(CLI::PositiveNumber);
  spikes_cmd->add_option("--census", spike_census, "two-column file: size, count");
  spikes_cmd->add_option("--out", spike_out, "json output (default stdout)");

  // run
  std::string run_config, run_out, run_tables, run_format = "csv";
  auto* run_cmd = app.add_subcommand("run", "full pipeline from a json config");
  run_cmd->add_option("--config", run_config)->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run_out, "report bundle json")->required();
  run_cmd->add_option("--tables", run_tables, "also write tables and plot files here");
  run_cmd->add_option("--format", run_format)->check(CLI::IsMember({"csv", "tsv"}));

  // report
  std::string rep_bundle, rep_dir, rep_format = "csv";
  auto* report_cmd = app.add_subcommand("report", "paper-style tables and plot files from a bundle");
  report_cmd->add_option("--bundle", rep_bundle)->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--out-dir", rep_dir)->required();
  report_cmd->add_option("--format", rep_format)->check(CLI::IsMember({"csv", "tsv"}));

  CLI11_PARSE(app, argc, argv);

  auto write_tables = [](const ReportBundle& b, const std::string& dir, const std::string& format) {
    const auto r = emit_tables(b, dir, format == "tsv" ? '\t' : ',');
    for (const auto& n : r.notices) std::cerr << "notice: " << n << '\n';
    std::cerr << "wrote " << r.files.size() << " files under " << dir << '\n';
  };

  if (*ingest)
    return run_stage("ingest", [&] {
      const auto r = ingest_opts.parse();
      const auto& s = r.series;
      const auto recs = s.records();
      emit_json({{"ticker", s.ticker()},
                 {"records", s.size()},
                 {"dropped_outside_sessions", r.dropped},
                 {"mean_size", s.mean_size()},
                 {"first", format_date(trade_date(recs.front().time)) + " " +
                               format_time_of_day(time_of_day(recs.front().time))},
                 {"last", format_date(trade_date(recs.back().time)) + " " +
                              format_time_of_day(time_of_day(recs.back().time))}},
                "-");
      if (!ingest_out.empty()) {
        std::ofstream out(ingest_out);
        if (!out) throw IoError("cannot write " + ingest_out);
        write_ticks(out, s);
      }
    });

  if (*simulate)
    return run_stage("simulate", [&] {
      std::ifstream in(sim_spec);
      const auto spec = json::parse(in).get<StreamSpec>();
      const auto g = generate_stream(spec);
      std::ofstream out(sim_out);
      if (!out) throw IoError("cannot write " + sim_out);
      write_ticks(out, g.series);
      if (!out) throw IoError("failed writing " + sim_out);
      std::cerr << "wrote " << g.series.size() << " trades (" << g.rounded << " rounded) to " << sim_out << '\n';
    });

  if (*aggregate_cmd)
    return run_stage("aggregate", [&] {
      const auto parsed = agg_opts.parse();
      NormalizedSeries norm = as_normalized(parsed.series);
      if (!agg_meta.empty()) {
        std::ifstream in(agg_meta);
        if (!in) throw IoError("cannot open " + agg_meta);
        norm = normalize_shares(parsed.series, load_meta(in));
      }
      const auto spec = agg_mode == "clock" ? AggregationSpec::clock(agg_dt) : AggregationSpec::event(agg_dn);
      const auto vol = aggregate(norm, spec, agg_opts.load_cal(),
                                 agg_keep_empty ? EmptyWindows::keep : EmptyWindows::drop);
      write_values(agg_out, agg_raw || agg_keep_empty ? vol.samples : normalize_mean(vol.samples));
      std::cerr << "wrote " << vol.samples.size() << " " << scale_label(spec) << " samples to " << agg_out << '\n';
    });

  if (*fit_cmd)
    return run_stage("fit", [&] {
      const auto values = read_values(fit_values);
      const auto density = log_binned_density(values, fit_bpd);
      SearchConfig cfg;
      cfg.seed = fit_seed;
      cfg.min_bin_count = fit_min_count;
      cfg.weight = fit_weight == "uniform" ? BinWeight::uniform : BinWeight::count;
      const auto report = fit_model(density, parse_model_kind(fit_model_name), cfg);
      const auto gof = cvm_test(values, report.params, fit_level);
      emit_json({{"fit", report}, {"gof", gof}}, fit_out);
      if (!fit_curve.empty()) {
        std::ofstream out(fit_curve);
        if (!out) throw IoError("cannot write " + fit_curve);
        out.precision(10);
        for (const auto& b : density.bins) out << b.center << ' ' << pdf(report.params, b.center) << '\n';
      }
    });

  if (*tails_cmd)
    return run_stage("tails", [&] {
      const auto values = read_values(tails_values);
      EstimatorConfig cfg;
      cfg.resamples = tails_boot;
      cfg.seed = tails_seed;
      cfg.threads = tails_threads;
      if (tails_k) cfg.k = tails_k;
      if (tails_k0) cfg.k0 = tails_k0;
      std::vector<TailMethod> methods;
      if (tails_method == "all")
        methods.assign(std::begin(kAllTailMethods), std::end(kAllTailMethods));
      else
        methods.push_back(parse_tail_method(tails_method));
      json table = json::array();
      for (const auto m : methods) table.push_back(estimate_with_error(m, values, cfg));
      emit_json({{"n", values.size()}, {"estimates", table}}, tails_out);
    });

  if (*spikes_cmd)
    return run_stage("spikes", [&] {
      const auto parsed = spike_opts.parse();
      const auto census = size_census(parsed.series);
      emit_json(json(spike_layers(census, spike_threshold)), spike_out);
      if (!spike_census.empty()) {
        std::ofstream out(spike_census);
        if (!out) throw IoError("cannot write " + spike_census);
        for (const auto& [size, n] : census.counts) out << size << ' ' << n << '\n';
      }
    });

  if (*run_cmd)
    return run_stage("run", [&] {
      const auto bundle = run_pipeline(load_config(run_config));
      std::ofstream out(run_out, std::ios::binary);
      if (!out) throw IoError("cannot write " + run_out);
      out << dump_bundle(bundle);
      out.close();
      if (!out) throw IoError("failed writing " + run_out);
      if (!run_tables.empty()) write_tables(bundle, run_tables, run_format);
    });

  if (*report_cmd)
    return run_stage("report", [&] { write_tables(load_bundle(rep_bundle), rep_dir, rep_format); });

  return EXIT_FAILURE;
}
