#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "tradestats/error.hpp"
#include "tradestats/pipeline.hpp"

namespace tradestats {

namespace {

namespace fs = std::filesystem;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

class TableWriter {
public:
  TableWriter(const fs::path& path, char delim) : path_(path), out_(path), delim_(delim) {
    if (!out_) throw IoError("cannot write " + path.string());
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << delim_;
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing " + path_.string());
  }

private:
  fs::path path_;
  std::ofstream out_;
  char delim_;
};

std::vector<std::string> param_header(ModelKind kind) {
  switch (kind) {
  case ModelKind::qgamma: return {"θ", "β", "q", "χ", "α′"};
  case ModelKind::qexp: return {"θ", "q", "χ", "α′"};
  case ModelKind::student: return {"n", "H", "x", "χ"};
  case ModelKind::lognormal: return {"μ", "σ", "χ"};
  }
  return {};
}

std::vector<std::string> param_cells(const FitReport& f) {
  std::vector<std::string> c = std::visit(
      [](const auto& p) -> std::vector<std::string> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, QGammaParams>)
          return {num(p.theta), num(p.beta), num(p.q)};
        else if constexpr (std::is_same_v<T, QExpParams>)
          return {num(p.theta), num(p.q)};
        else if constexpr (std::is_same_v<T, StudentParams>)
          return {num(p.n), num(p.h), num(p.x)};
        else
          return {num(p.mu), num(p.sigma)};
      },
      f.params);
  c.push_back(num(f.chi));
  if (f.alpha_prime) c.push_back(num(*f.alpha_prime));
  return c;
}

// The one recomputation at emit time: stored alpha' against its (q, beta).
void check_alpha(const FitReport& f, const std::string& where) {
  const auto expected = tail_exponent(f.params);
  if (expected.has_value() != f.alpha_prime.has_value() ||
      (expected && *expected != *f.alpha_prime))
    throw DataError(where + ": stored alpha' does not match the fitted (q, beta)");
}

std::string scale_value(const AggregationSpec& s) {
  return s.mode == AggregationMode::clock ? std::to_string(s.dt_minutes) : std::to_string(s.dn);
}

std::string file_label(const AggregationSpec& s) {
  return s.mode == AggregationMode::clock ? "dt" + std::to_string(s.dt_minutes) : "dn" + std::to_string(s.dn);
}

void write_plot(const fs::path& path, const std::vector<std::pair<double, double>>& points, EmitResult& r) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [x, y] : points) out << num(x) << ' ' << num(y) << '\n';
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
  r.files.push_back(path);
}

void emit_section(const std::vector<ScaleResult>& scales, AggregationMode mode, const fs::path& dir, char delim,
                  EmitResult& r) {
  const std::string prefix = mode == AggregationMode::clock ? "clock" : "event";
  const std::string scale_col = mode == AggregationMode::clock ? "Δt" : "Δn";
  if (scales.empty()) {
    r.notices.push_back(prefix + " section is empty; its tables are omitted");
    return;
  }

  std::vector<ModelKind> kinds;
  for (const auto& s : scales)
    for (const auto& f : s.fits)
      if (std::find(kinds.begin(), kinds.end(), f.fit.kind) == kinds.end()) kinds.push_back(f.fit.kind);
  if (kinds.empty()) r.notices.push_back(prefix + " section has no fits; fit tables are omitted");

  for (const auto kind : kinds) {
    const auto path = dir / (prefix + "_fits_" + std::string(model_name(kind)) + ".csv");
    TableWriter t(path, delim);
    auto header = param_header(kind);
    header.insert(header.begin(), scale_col);
    t.row(header);
    for (const auto& s : scales)
      for (const auto& f : s.fits) {
        if (f.fit.kind != kind) continue;
        check_alpha(f.fit, prefix + " " + scale_label(s.scale));
        auto cells = param_cells(f.fit);
        cells.insert(cells.begin(), scale_value(s.scale));
        t.row(cells);
      }
    t.close();
    r.files.push_back(path);
  }

  if (!kinds.empty()) {
    const auto path = dir / (prefix + "_gof.csv");
    TableWriter t(path, delim);
    t.row({scale_col, "model", "C²", "critical", "significance", "accept"});
    for (const auto& s : scales)
      for (const auto& f : s.fits)
        t.row({scale_value(s.scale), std::string(model_name(f.fit.kind)), num(f.gof.statistic),
               num(f.gof.critical_value), num(f.gof.significance), f.gof.accept ? "yes" : "no"});
    t.close();
    r.files.push_back(path);
  }

  bool any_tails = false;
  for (const auto& s : scales) any_tails = any_tails || !s.tails.empty();
  if (!any_tails) {
    r.notices.push_back(prefix + " section has no tail estimates; tails table omitted");
  } else {
    const auto path = dir / (prefix + "_tails.csv");
    TableWriter t(path, delim);
    t.row({"scale", "α′", "HE", "MSE", "CSNE", "LSE", "FAE", "RKE"});
    const TailMethod order[] = {TailMethod::hill, TailMethod::mse, TailMethod::csne,
                                TailMethod::lse,  TailMethod::fae, TailMethod::rke};
    for (const auto& s : scales) {
      std::vector<std::string> cells{scale_value(s.scale), "-"};
      for (const auto& f : s.fits)
        if (f.fit.kind == ModelKind::qgamma && f.fit.alpha_prime) cells[1] = fixed(*f.fit.alpha_prime, 2);
      for (const auto m : order) {
        std::string cell = "-";
        for (const auto& e : s.tails)
          if (e.method == m) cell = fixed(e.alpha, 2) + "±" + fixed(e.std_error, 2);
        cells.push_back(cell);
      }
      t.row(cells);
    }
    t.close();
    r.files.push_back(path);
  }

  const auto plots = dir / "plots";
  std::error_code ec;
  fs::create_directories(plots, ec);
  if (ec) throw IoError("cannot create " + plots.string() + ": " + ec.message());
  for (const auto& s : scales) {
    const auto base = prefix + "_" + file_label(s.scale);
    write_plot(plots / (base + "_empirical.dat"), s.density, r);
    for (const auto& f : s.fits) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t i = 0; i < s.density.size() && i < f.curve.size(); ++i)
        pts.emplace_back(s.density[i].first, f.curve[i]);
      write_plot(plots / (base + "_" + std::string(model_name(f.fit.kind)) + ".dat"), pts, r);
    }
  }
}

} // namespace

EmitResult emit_tables(const ReportBundle& b, const std::filesystem::path& dir, char delimiter) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  EmitResult r;
  emit_section(b.clock, AggregationMode::clock, dir, delimiter, r);
  emit_section(b.event, AggregationMode::event, dir, delimiter, r);
  if (b.spikes.empty()) {
    r.notices.push_back("no spike reports; spikes table omitted");
  } else {
    const auto path = dir / "spikes.csv";
    TableWriter t(path, delimiter);
    t.row({"ticker", "layer", "size", "count", "background", "ratio", "flagged"});
    for (const auto& s : b.spikes)
      for (const auto& l : s.report.layers)
        for (const auto& loc : l.locations)
          t.row({s.ticker, std::to_string(l.layer.id), std::to_string(loc.size), std::to_string(loc.count),
                 num(loc.background), std::isinf(loc.ratio) ? "inf" : num(loc.ratio), loc.flagged ? "yes" : "no"});
    t.close();
    r.files.push_back(path);
  }
  return r;
}

} // namespace tradestats
