#include "tradestats/pipeline.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "tradestats/density.hpp"
#include "tradestats/error.hpp"
#include "tradestats/seed.hpp"

namespace tradestats {

namespace {

using nlohmann::json;

json search_json(const SearchConfig& s) {
  return {{"grid_cells", s.grid_cells},
          {"starts", s.starts},
          {"steps_per_start", s.steps_per_start},
          {"tabu_tenure", s.tabu_tenure},
          {"refine_seeds", s.refine_seeds},
          {"max_simplex_iterations", s.max_simplex_iterations},
          {"max_restarts", s.max_restarts},
          {"tolerance", s.tolerance},
          {"min_bin_count", s.min_bin_count},
          {"bin_model", s.bin_model == BinModel::center ? "center" : "average"},
          {"bin_weight", s.weight == BinWeight::count ? "count" : "uniform"}};
}

SearchConfig search_from(const json& j) {
  SearchConfig s;
  s.grid_cells = j.value("grid_cells", s.grid_cells);
  s.starts = j.value("starts", s.starts);
  s.steps_per_start = j.value("steps_per_start", s.steps_per_start);
  s.tabu_tenure = j.value("tabu_tenure", s.tabu_tenure);
  s.refine_seeds = j.value("refine_seeds", s.refine_seeds);
  s.max_simplex_iterations = j.value("max_simplex_iterations", s.max_simplex_iterations);
  s.max_restarts = j.value("max_restarts", s.max_restarts);
  s.tolerance = j.value("tolerance", s.tolerance);
  s.min_bin_count = j.value("min_bin_count", s.min_bin_count);
  const auto model = j.value("bin_model", std::string("average"));
  if (model != "center" && model != "average") throw ConfigError("bin_model must be center or average");
  s.bin_model = model == "center" ? BinModel::center : BinModel::average;
  const auto weight = j.value("bin_weight", std::string("count"));
  if (weight != "count" && weight != "uniform") throw ConfigError("bin_weight must be count or uniform");
  s.weight = weight == "uniform" ? BinWeight::uniform : BinWeight::count;
  return s;
}

json tails_json(const EstimatorConfig& e) {
  json j = {{"xmin_candidates", e.xmin_candidates},
            {"min_tail", e.min_tail},
            {"shift_points", e.shift_points},
            {"lse_tail_fraction", e.lse_tail_fraction},
            {"lse_bins_per_decade", e.lse_bins_per_decade},
            {"lse_min_bin_count", e.lse_min_bin_count},
            {"resamples", e.resamples}};
  if (e.k) j["k"] = *e.k;
  if (e.k0) j["k0"] = *e.k0;
  return j;
}

EstimatorConfig tails_from(const json& j) {
  EstimatorConfig e;
  if (j.contains("k")) e.k = j.at("k").get<std::size_t>();
  if (j.contains("k0")) e.k0 = j.at("k0").get<std::size_t>();
  e.xmin_candidates = j.value("xmin_candidates", e.xmin_candidates);
  e.min_tail = j.value("min_tail", e.min_tail);
  e.shift_points = j.value("shift_points", e.shift_points);
  e.lse_tail_fraction = j.value("lse_tail_fraction", e.lse_tail_fraction);
  e.lse_bins_per_decade = j.value("lse_bins_per_decade", e.lse_bins_per_decade);
  e.lse_min_bin_count = j.value("lse_min_bin_count", e.lse_min_bin_count);
  e.resamples = j.value("resamples", e.resamples);
  e.threads = j.value("threads", e.threads);
  if (e.resamples < 1) throw ConfigError("tails.resamples must be >= 1");
  return e;
}

json schema_json(const TickSchema& s) {
  return {{"delimiter", std::string(1, s.delimiter)},
          {"date_column", s.date_column},
          {"time_column", s.time_column},
          {"size_column", s.size_column},
          {"side_column", s.side_column}};
}

TickSchema schema_from(const json& j) {
  TickSchema s;
  const auto d = j.value("delimiter", std::string(","));
  if (d.size() != 1) throw ConfigError("schema.delimiter must be one character");
  s.delimiter = d == "\\t" ? '\t' : d[0];
  s.date_column = j.value("date_column", s.date_column);
  s.time_column = j.value("time_column", s.time_column);
  s.size_column = j.value("size_column", s.size_column);
  s.side_column = j.value("side_column", s.side_column);
  return s;
}

struct Stock {
  std::string id;
  TradeSeries series;
  SessionCalendar calendar;
};

template <class F>
auto stage(const char* name, const std::string& series, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, series, e.what());
  }
}

ScaleResult analyse_scale(const AggregationSpec& scale, const std::vector<Stock>& stocks,
                          const std::vector<NormalizedSeries>& normalized, const PipelineConfig& config,
                          Provenance& prov) {
  const auto label = scale_label(scale);
  std::vector<double> pooled;
  for (std::size_t i = 0; i < stocks.size(); ++i) {
    const auto values = stage("aggregate", stocks[i].id + " " + label, [&] {
      return normalize_mean(positive_samples(aggregate(normalized[i], scale, stocks[i].calendar, EmptyWindows::drop)));
    });
    pooled.insert(pooled.end(), values.begin(), values.end());
  }

  ScaleResult out;
  out.scale = scale;
  out.sample_count = pooled.size();
  const auto density = stage("density", label, [&] { return log_binned_density(pooled, config.bins_per_decade); });
  for (const auto& b : density.bins) out.density.emplace_back(b.center, b.density);

  for (const auto kind : config.models) {
    const auto name = label + "/" + std::string(model_name(kind));
    SearchConfig search = config.search;
    search.seed = derive_seed(config.seed, "fit/" + name);
    prov.seeds.emplace_back("fit/" + name, search.seed);
    ModelFit mf;
    mf.fit = stage("fit", name, [&] { return fit_model(density, kind, search); });
    mf.gof = stage("gof", name, [&] { return cvm_test(pooled, mf.fit.params, config.significance); });
    for (const auto& b : density.bins) mf.curve.push_back(pdf(mf.fit.params, b.center));
    out.fits.push_back(std::move(mf));
  }

  for (const auto method : config.tail_methods) {
    const auto name = label + "/" + std::string(method_name(method));
    EstimatorConfig est = config.tails;
    est.seed = derive_seed(config.seed, "tails/" + name);
    prov.seeds.emplace_back("tails/" + name, est.seed);
    out.tails.push_back(stage("tails", name, [&] { return estimate_with_error(method, pooled, est); }));
  }
  return out;
}

json pairs_json(const std::vector<std::pair<double, double>>& v) {
  json a = json::array();
  for (const auto& [x, y] : v) a.push_back({x, y});
  return a;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

std::string scale_label(const AggregationSpec& spec) {
  return spec.mode == AggregationMode::clock ? "dt=" + std::to_string(spec.dt_minutes)
                                             : "dn=" + std::to_string(spec.dn);
}

void to_json(json& j, const PipelineConfig& c) {
  json inputs = json::array();
  for (const auto& in : c.inputs) inputs.push_back({{"path", in.path}, {"ticker", in.ticker}});
  json models = json::array();
  for (const auto m : c.models) models.push_back(std::string(model_name(m)));
  json methods = json::array();
  for (const auto m : c.tail_methods) methods.push_back(std::string(method_name(m)));
  j = {{"seed", c.seed},
       {"inputs", std::move(inputs)},
       {"synthetic", c.synthetic},
       {"schema", schema_json(c.schema)},
       {"clock_scales", c.clock_scales},
       {"event_scales", c.event_scales},
       {"models", std::move(models)},
       {"tail_methods", std::move(methods)},
       {"bins_per_decade", c.bins_per_decade},
       {"significance", c.significance},
       {"spike_threshold", c.spike_threshold},
       {"search", search_json(c.search)},
       {"tails", tails_json(c.tails)}};
  if (c.calendar_path) j["calendar"] = *c.calendar_path;
  if (c.meta_path) j["meta"] = *c.meta_path;
}

void from_json(const json& j, PipelineConfig& c) {
  try {
    c = PipelineConfig{};
    c.seed = j.value("seed", c.seed);
    if (j.contains("inputs"))
      for (const auto& in : j.at("inputs")) {
        if (in.is_string())
          c.inputs.push_back({in.get<std::string>(), ""});
        else
          c.inputs.push_back({in.at("path").get<std::string>(), in.value("ticker", std::string())});
      }
    if (j.contains("synthetic")) c.synthetic = j.at("synthetic").get<std::vector<StreamSpec>>();
    if (j.contains("schema")) c.schema = schema_from(j.at("schema"));
    if (j.contains("calendar")) c.calendar_path = j.at("calendar").get<std::string>();
    if (j.contains("meta")) c.meta_path = j.at("meta").get<std::string>();
    c.clock_scales = j.value("clock_scales", c.clock_scales);
    c.event_scales = j.value("event_scales", c.event_scales);
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    if (j.contains("tail_methods")) {
      const auto& m = j.at("tail_methods");
      c.tail_methods.clear();
      if (m.is_string() && m.get<std::string>() == "all")
        c.tail_methods.assign(std::begin(kAllTailMethods), std::end(kAllTailMethods));
      else
        for (const auto& t : m) c.tail_methods.push_back(parse_tail_method(t.get<std::string>()));
    }
    c.bins_per_decade = j.value("bins_per_decade", c.bins_per_decade);
    c.significance = j.value("significance", c.significance);
    c.spike_threshold = j.value("spike_threshold", c.spike_threshold);
    if (j.contains("search")) c.search = search_from(j.at("search"));
    if (j.contains("tails")) c.tails = tails_from(j.at("tails"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  if (c.inputs.empty() && c.synthetic.empty()) throw ConfigError("pipeline config names no inputs");
  if (c.clock_scales.empty() && c.event_scales.empty()) throw ConfigError("pipeline config names no scales");
  cvm_critical_value(c.significance);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const auto text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return j.get<PipelineConfig>();
}

ReportBundle run_pipeline(const PipelineConfig& config) {
  ReportBundle b;
  b.config = config;
  b.provenance.root_seed = config.seed;

  std::vector<Stock> stocks;
  const SessionCalendar file_calendar = stage("ingest", "calendar", [&] {
    if (!config.calendar_path) return SessionCalendar{};
    std::ifstream in(*config.calendar_path);
    if (!in) throw IoError("cannot open " + *config.calendar_path);
    return load_calendar(in);
  });
  for (const auto& input : config.inputs) {
    const auto id = input.ticker.empty() ? std::filesystem::path(input.path).stem().string() : input.ticker;
    TickSchema schema = config.schema;
    schema.ticker = id;
    auto parsed = stage("ingest", id, [&] { return parse_ticks_file(input.path, schema, file_calendar); });
    b.provenance.inputs.push_back(input.path);
    stocks.push_back({id, std::move(parsed.series), file_calendar});
  }
  for (std::size_t i = 0; i < config.synthetic.size(); ++i) {
    StreamSpec spec = config.synthetic[i];
    const auto key = "synthgen/" + std::to_string(i) + "/" + spec.ticker;
    spec.seed = derive_seed(config.seed, key);
    b.provenance.seeds.emplace_back(key, spec.seed);
    auto series = stage("synthesize", spec.ticker, [&] { return gen_trade_stream(spec); });
    b.provenance.inputs.push_back("synthetic:" + spec.ticker);
    stocks.push_back({spec.ticker, std::move(series), spec.calendar()});
  }

  SizeCensus pooled_census;
  for (const auto& s : stocks) {
    auto census = size_census(s.series);
    pooled_census.merge(census);
    b.spikes.push_back({s.id, stage("spikes", s.id, [&] { return spike_layers(census, config.spike_threshold); })});
  }
  b.spikes.push_back({"POOLED", stage("spikes", "POOLED", [&] { return spike_layers(pooled_census, config.spike_threshold); })});

  std::map<std::string, StockMeta> meta;
  if (config.meta_path)
    meta = stage("normalize", "meta", [&] {
      std::ifstream in(*config.meta_path);
      if (!in) throw IoError("cannot open " + *config.meta_path);
      return load_meta(in);
    });
  std::vector<NormalizedSeries> normalized;
  for (const auto& s : stocks)
    normalized.push_back(stage("normalize", s.id, [&] {
      return config.meta_path ? normalize_shares(s.series, meta) : as_normalized(s.series);
    }));

  for (const int dt : config.clock_scales)
    b.clock.push_back(analyse_scale(AggregationSpec::clock(dt), stocks, normalized, config, b.provenance));
  for (const auto dn : config.event_scales)
    b.event.push_back(analyse_scale(AggregationSpec::event(dn), stocks, normalized, config, b.provenance));
  return b;
}

void to_json(json& j, const ReportBundle& b) {
  auto scales = [](const std::vector<ScaleResult>& v) {
    json a = json::array();
    for (const auto& s : v) {
      json fits = json::array();
      for (const auto& f : s.fits) fits.push_back({{"fit", f.fit}, {"gof", f.gof}, {"curve", f.curve}});
      a.push_back({{"scale", scale_label(s.scale)},
                   {"sample_count", s.sample_count},
                   {"density", pairs_json(s.density)},
                   {"fits", std::move(fits)},
                   {"tails", s.tails}});
    }
    return a;
  };
  json spikes = json::array();
  for (const auto& s : b.spikes) spikes.push_back({{"ticker", s.ticker}, {"report", s.report}});
  json seeds = json::object();
  for (const auto& [k, v] : b.provenance.seeds) seeds[k] = v;
  j = {{"config", b.config},
       {"clock", scales(b.clock)},
       {"event", scales(b.event)},
       {"spikes", std::move(spikes)},
       {"provenance",
        {{"version", b.provenance.version},
         {"root_seed", b.provenance.root_seed},
         {"inputs", b.provenance.inputs},
         {"seeds", std::move(seeds)}}}};
}

void from_json(const json& j, ReportBundle& b) {
  auto scales = [](const json& a, AggregationMode mode) {
    std::vector<ScaleResult> v;
    for (const auto& s : a) {
      ScaleResult r;
      const auto label = s.at("scale").get<std::string>();
      const auto value = std::stoll(label.substr(label.find('=') + 1));
      r.scale = mode == AggregationMode::clock ? AggregationSpec::clock(static_cast<int>(value))
                                               : AggregationSpec::event(static_cast<std::size_t>(value));
      r.sample_count = s.at("sample_count").get<std::size_t>();
      for (const auto& p : s.at("density")) r.density.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      for (const auto& f : s.at("fits"))
        r.fits.push_back({f.at("fit").get<FitReport>(), f.at("gof").get<GofReport>(),
                          f.at("curve").get<std::vector<double>>()});
      r.tails = s.at("tails").get<std::vector<TailEstimate>>();
      v.push_back(std::move(r));
    }
    return v;
  };
  try {
    b = ReportBundle{};
    b.config = j.at("config");
    b.clock = scales(j.at("clock"), AggregationMode::clock);
    b.event = scales(j.at("event"), AggregationMode::event);
    for (const auto& s : j.at("spikes"))
      b.spikes.push_back({s.at("ticker").get<std::string>(), s.at("report").get<SpikeReport>()});
    const auto& p = j.at("provenance");
    b.provenance.version = p.at("version").get<std::string>();
    b.provenance.root_seed = p.at("root_seed").get<std::uint64_t>();
    b.provenance.inputs = p.at("inputs").get<std::vector<std::string>>();
    for (const auto& [k, v] : p.at("seeds").items()) b.provenance.seeds.emplace_back(k, v.get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("report bundle: ") + e.what());
  } catch (const std::logic_error& e) {
    throw ConfigError(std::string("report bundle: ") + e.what());
  }
}

std::string dump_bundle(const ReportBundle& b) { return json(b).dump(2) + "\n"; }

ReportBundle load_bundle(const std::filesystem::path& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text).get<ReportBundle>();
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

} // namespace tradestats
