// End-to-end run: ingest, volatility tables, spectra, band tests, DD
// regressions and the regime model, then a manifest of everything written.
#pragma once

#include "ivol/config.hpp"
#include "ivol/event_study.hpp"
#include "ivol/market_data.hpp"
#include "ivol/msgarch_fit.hpp"
#include "ivol/report_io.hpp"
#include "ivol/spectral.hpp"
#include "ivol/vol_estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace ivol {

enum class Stage { Ingest, Rv, Spectrum, Bands, Did, Msgarch };

inline const char* to_string(Stage s) {
  static const char* names[] = {"ingest", "rv", "spectrum", "bands", "did", "msgarch"};
  return names[static_cast<int>(s)];
}

inline std::set<Stage> all_stages() {
  return {Stage::Ingest, Stage::Rv, Stage::Spectrum, Stage::Bands, Stage::Did, Stage::Msgarch};
}

/// Exit code for an error: 1 configuration, 2 input data, 3 numerical.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const ValidationError*>(&e)) return 2;
  if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const DegenerateVarianceError*>(&e) ||
      dynamic_cast<const EstimationError*>(&e))
    return 3;
  return 2;
}

struct StageResult {
  std::string name;
  bool ok = true;
  bool skipped = false;
  std::string error;
  int code = 0;
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct AssetResults {
  DayGridBuild grids;
  std::vector<DailyVol> vols;
  std::optional<Table1> table1;
  std::vector<AmplitudeSpectrum> spectra;
  std::map<std::string, std::vector<double>> period_rms;     // by period label
  std::map<std::string, std::vector<double>> change_ratios;  // non-baseline periods
  std::optional<Table3> table3;
  std::optional<MsGarchFit> msgarch;
};

struct RunReport {
  std::vector<StageResult> stages;
  std::vector<OutputFile> outputs;
  std::map<std::string, AssetResults> assets;
  std::optional<Table2> table2;
  std::filesystem::path manifest_path;
  bool converged = true;

  int exit_code() const {
    int code = 0;
    for (const auto& s : stages) code = std::max(code, s.code);
    return code;
  }
};

namespace pipeline_detail {

// Labels become directory names.
inline std::string safe_name(const std::string& label) {
  std::string out;
  for (char c : label) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
  return out;
}

class Writer {
public:
  explicit Writer(std::filesystem::path root) : root_(std::move(root)) {}

  void write(const std::string& rel, const std::function<void(std::ostream&)>& body) {
    const auto path = root_ / rel;
    std::filesystem::create_directories(path.parent_path());
    {
      std::ofstream f(path, std::ios::binary);
      if (!f) throw Error("cannot write " + path.string());
      body(f);
      if (!f) throw Error("failed writing " + path.string());
    }
    files_.push_back({rel, sha256_file(path), std::filesystem::file_size(path)});
  }

  void write_json(const std::string& rel, const json& j) {
    write(rel, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  std::vector<OutputFile> files() const {
    auto out = files_;
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
  }

private:
  std::filesystem::path root_;
  std::vector<OutputFile> files_;
};

}  // namespace pipeline_detail

/// Daily log returns in percent: last grid price minus the boundary (the
/// previous civil day's close). Days whose boundary came from their own open
/// are skipped.
struct DailyReturn {
  Date date;
  double close = 0;
  double log_return = 0;  // percent
};

inline std::vector<DailyReturn> daily_returns(std::span<const DayGrid> days) {
  std::vector<DailyReturn> out;
  for (const auto& d : days) {
    if (d.boundary_from_open) continue;
    out.push_back({d.date, std::exp(d.log_prices.back()), 100.0 * (d.log_prices.back() - d.log_prices.front())});
  }
  return out;
}

/// Runs the requested stages (and whatever they depend on). A failing stage
/// is recorded with its name; only stages depending on it are skipped.
/// Configuration problems throw ConfigError before anything runs.
inline RunReport run_pipeline(const RunConfig& cfg, std::set<Stage> stages = all_stages(),
                              const FitConfig& fit_cfg = {}) {
  const bool want_dd = stages.contains(Stage::Did);
  cfg.validate(want_dd);
  if (cfg.inputs.empty()) throw ConfigError("no input files configured");
  for (const auto& [label, path] : cfg.inputs)
    if (!std::filesystem::is_regular_file(path))
      throw ConfigError("input '" + label + "' not found: " + path.string());
  if (stages.contains(Stage::Bands)) stages.insert(Stage::Spectrum);
  if (want_dd) stages.insert(Stage::Rv);

  using pipeline_detail::safe_name;
  const auto& scheme = cfg.scheme;
  const std::string baseline = scheme.baseline_period().label;
  std::filesystem::create_directories(cfg.output_dir);
  pipeline_detail::Writer out(cfg.output_dir);
  RunReport rep;

  auto run = [&](const std::string& name, bool deps_ok, const std::function<void()>& body) {
    StageResult r{name};
    if (!deps_ok) {
      r.ok = false;
      r.skipped = true;
      r.error = "skipped: upstream stage failed";
    } else {
      try {
        body();
      } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
        r.code = exit_code_for(e);
      }
    }
    rep.stages.push_back(r);
    return r.ok;
  };

  std::map<std::string, bool> rv_ok;
  std::map<std::string, std::string> input_hashes;
  for (const auto& [label, path] : cfg.inputs) {
    auto& a = rep.assets[label];
    const std::string dir = safe_name(label) + "/";
    input_hashes[label] = sha256_file(path);

    const bool ingested = run("ingest:" + label, true, [&] {
      std::ifstream f(path);
      if (!f) throw ConfigError("cannot open " + path.string());
      const auto bars = parse_bars(f);
      a.grids = build_day_grids(bars, scheme, cfg.max_missing);
      if (a.grids.days.empty()) throw ValidationError("no usable days in " + label);
      out.write(dir + "grids.jsonl", [&](std::ostream& o) { write_day_grids(o, a.grids.days); });
      out.write(dir + "excluded_days.csv", [&](std::ostream& o) {
        o << "date,missing_count,reason\n";
        for (const auto& e : a.grids.excluded) o << e.date.iso() << ',' << e.missing_count << ',' << e.reason << '\n';
      });
    });

    if (stages.contains(Stage::Rv)) {
      rv_ok[label] = run("rv:" + label, ingested, [&] {
        a.vols = daily_vols(a.grids.days);
        out.write(dir + "daily_vol.csv", [&](std::ostream& o) { write_daily_vol_csv(o, a.vols, scheme); });
        const auto buckets = assign_periods(a.vols, scheme);
        const auto& base = buckets.at(baseline);
        if (base.empty()) throw ValidationError(label + " has no days in baseline period '" + baseline + "'");
        Table1 t{label, baseline, {}};
        for (const auto m : {VolMeasure::Realized, VolMeasure::GarmanKlass})
          for (const auto& p : scheme.periods) {
            const auto& days = buckets.at(p.label);
            if (days.empty()) continue;
            auto s = summarize_period(days, base, p.label, m);
            if (p.label == baseline) s.diff_t_stat.reset();
            t.rows.push_back(std::move(s));
          }
        out.write_json(dir + "table1.json", to_json(t));
        out.write(dir + "table1.csv", [&](std::ostream& o) { write_table1_csv(o, t); });
        a.table1 = std::move(t);
      });
    }

    bool spectrum_ok = false;
    if (stages.contains(Stage::Spectrum)) {
      spectrum_ok = run("spectrum:" + label, ingested, [&] {
        a.spectra = fourier_coefficients(a.grids.days);
        out.write(dir + "spectra.csv", [&](std::ostream& o) {
          o << "date,w,amplitude\n";
          for (const auto& s : a.spectra)
            for (std::size_t w = 0; w < s.amplitudes.size(); ++w)
              o << s.date.iso() << ',' << w + 1 << ',' << format_double(s.amplitudes[w]) << '\n';
        });
        const auto buckets = assign_periods(a.spectra, scheme);
        for (const auto& p : scheme.periods)
          if (!buckets.at(p.label).empty()) a.period_rms[p.label] = period_rms_amplitude(buckets.at(p.label));
        if (!a.period_rms.contains(baseline))
          throw ValidationError(label + " has no days in baseline period '" + baseline + "'");
        out.write(dir + "period_rms.csv", [&](std::ostream& o) {
          o << "period,w,rms_amplitude\n";
          for (const auto& p : scheme.periods) {
            if (!a.period_rms.contains(p.label)) continue;
            const auto& v = a.period_rms.at(p.label);
            for (std::size_t w = 0; w < v.size(); ++w) o << p.label << ',' << w + 1 << ',' << format_double(v[w]) << '\n';
          }
        });
        for (const auto& p : scheme.periods)
          if (p.label != baseline && a.period_rms.contains(p.label))
            a.change_ratios[p.label] = change_ratios(a.period_rms.at(p.label), a.period_rms.at(baseline));
        out.write(dir + "figure2.csv", [&](std::ostream& o) {
          o << "period,w,change_ratio\n";
          for (const auto& p : scheme.periods) {
            if (!a.change_ratios.contains(p.label)) continue;
            const auto& v = a.change_ratios.at(p.label);
            for (std::size_t w = 0; w < v.size(); ++w) o << p.label << ',' << w + 1 << ',' << format_double(v[w]) << '\n';
          }
        });
      });
    }

    if (stages.contains(Stage::Bands)) {
      run("bands:" + label, spectrum_ok, [&] {
        Table3 t{label, baseline, {}};
        for (const auto& p : scheme.periods) {
          if (!a.change_ratios.contains(p.label)) continue;
          for (const auto& b : band_tests(a.change_ratios.at(p.label))) t.rows.push_back({p.label, b});
        }
        out.write_json(dir + "table3.json", to_json(t));
        out.write(dir + "table3.csv", [&](std::ostream& o) { write_table3_csv(o, t); });
        a.table3 = std::move(t);
      });
    }

    if (stages.contains(Stage::Msgarch)) {
      run("msgarch:" + label, ingested, [&] {
        const auto daily = daily_returns(a.grids.days);
        out.write(dir + "figure1.csv", [&](std::ostream& o) {
          o << "date,close,log_return_pct\n";
          for (const auto& d : daily) o << d.date.iso() << ',' << format_double(d.close) << ',' << format_double(d.log_return) << '\n';
        });
        std::vector<double> r;
        for (const auto& d : daily) r.push_back(d.log_return);
        auto fit = fit_msgarch(r, fit_cfg);
        out.write_json(dir + "msgarch.json", to_json(fit, label, r.size()));
        out.write(dir + "figure3.csv", [&](std::ostream& o) {
          o << "date,filtered_low,filtered_high,smoothed_low,smoothed_high\n";
          for (std::size_t t = 0; t < daily.size(); ++t)
            o << daily[t].date.iso() << ',' << format_double(fit.filtered[t][0]) << ','
              << format_double(fit.filtered[t][1]) << ',' << format_double(fit.smoothed[t][0]) << ','
              << format_double(fit.smoothed[t][1]) << '\n';
        });
        rep.converged = rep.converged && fit.converged;
        a.msgarch = std::move(fit);
      });
    }
  }

  if (want_dd) {
    run("did", rv_ok[cfg.treatment] && rv_ok[cfg.control], [&] {
      const auto tb = assign_periods(rep.assets.at(cfg.treatment).vols, scheme);
      const auto cb = assign_periods(rep.assets.at(cfg.control).vols, scheme);
      Table2 t{cfg.treatment, cfg.control, baseline, {}};
      for (const auto m : {VolMeasure::Realized, VolMeasure::GarmanKlass}) {
        int k = 0;
        for (const auto& p : scheme.periods) {
          if (p.label == baseline) continue;
          ++k;
          const auto panel = build_panel(tb.at(baseline), tb.at(p.label), cb.at(baseline), cb.at(p.label), m);
          t.rows.push_back({k, p.label, m, estimate_dd(panel.rows)});
        }
      }
      out.write_json("table2.json", to_json(t));
      out.write("table2.csv", [&](std::ostream& o) { write_table2_csv(o, t); });
      rep.table2 = std::move(t);
    });
  }

  rep.outputs = out.files();
  json inputs = json::object();
  for (const auto& [label, h] : input_hashes) inputs[label] = {{"sha256", h}};
  json periods = json::array();
  for (const auto& p : scheme.periods) periods.push_back({{"label", p.label}, {"start", p.start.iso()}, {"end", p.end.iso()}});
  json stage_list = json::array();
  for (const auto& s : rep.stages) {
    json j = {{"name", s.name}, {"status", s.ok ? "ok" : s.skipped ? "skipped" : "failed"}};
    if (!s.ok) j["error"] = s.error;
    stage_list.push_back(std::move(j));
  }
  json outputs = json::array();
  for (const auto& f : rep.outputs) outputs.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  json convergence = json::object();
  for (const auto& [label, a] : rep.assets)
    if (a.msgarch) convergence[label] = a.msgarch->converged;
  const json manifest = {{"inputs", inputs},
                         {"timezone", scheme.timezone.name()},
                         {"baseline", baseline},
                         {"periods", periods},
                         {"maxMissing", cfg.max_missing},
                         {"treatment", cfg.treatment},
                         {"control", cfg.control},
                         {"stages", stage_list},
                         {"msgarchConverged", convergence},
                         {"converged", rep.converged},
                         {"outputs", outputs}};
  rep.manifest_path = cfg.output_dir / "manifest.json";
  std::ofstream mf(rep.manifest_path, std::ios::binary);
  if (!mf) throw Error("cannot write " + rep.manifest_path.string());
  mf << manifest.dump(2) << '\n';
  return rep;
}

}  // namespace ivol
