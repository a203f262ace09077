// Report tables as JSON and CSV, their readers, and file hashing.
#pragma once

#include "ivol/common.hpp"
#include "ivol/event_study.hpp"
#include "ivol/market_data.hpp"
#include "ivol/msgarch_fit.hpp"
#include "ivol/spectral.hpp"
#include "ivol/vol_estimators.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace ivol {

using json = nlohmann::ordered_json;

//===========================================================================//
// Hashing                                                                   //
//===========================================================================//
inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string sha256_file(const std::filesystem::path& p) { return sha256_hex(read_file(p)); }

//===========================================================================//
// CSV                                                                       //
//===========================================================================//
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ParseError("no column '" + name + "'");
  }
  double number(std::size_t row, const std::string& name) const {
    double v = 0;
    if (!detail::parse_number(rows.at(row).at(column(name)), v))
      throw ParseError("column '" + name + "' is not numeric", row + 2);
    return v;
  }
  std::optional<double> maybe_number(std::size_t row, const std::string& name) const {
    if (rows.at(row).at(column(name)).empty()) return std::nullopt;
    return number(row, name);
  }
};

/// Plain comma-separated text without quoting; every emitted field is
/// quote-free.
inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV", 1);
  for (auto f : detail::split(detail::trim(line), ',')) t.header.emplace_back(f);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    std::vector<std::string> fields;
    for (auto f : detail::split(row, ',')) fields.emplace_back(f);
    if (fields.size() != t.header.size())
      throw ParseError("expected " + std::to_string(t.header.size()) + " fields", lineno);
    t.rows.push_back(std::move(fields));
  }
  return t;
}

namespace io_detail {

inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline std::optional<double> opt_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline VolMeasure measure_from(const std::string& s) {
  if (s == "realized") return VolMeasure::Realized;
  if (s == "garman_klass") return VolMeasure::GarmanKlass;
  throw ParseError("unknown measure '" + s + "'");
}

inline Band band_from(const std::string& s) {
  if (s == "low") return Band::Low;
  if (s == "medium") return Band::Medium;
  if (s == "high") return Band::High;
  throw ParseError("unknown band '" + s + "'");
}

template <class F>
auto parse_json(std::istream& in, F&& f) {
  try {
    return f(json::parse(in));
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }
}

}  // namespace io_detail

//===========================================================================//
// Daily volatility                                                          //
//===========================================================================//
inline void write_daily_vol_csv(std::ostream& out, std::span<const DailyVol> vols, const PeriodScheme& scheme) {
  out << "date,period,sigma_rv,sigma_gk,rv_clamped,gk_clamped\n";
  for (const auto& v : vols) {
    const auto p = scheme.period_of(v.date);
    out << v.date.iso() << ',' << (p ? scheme.periods[*p].label : "") << ',' << format_double(v.sigma) << ','
        << format_double(v.sigma_gk) << ',' << int(v.clamped) << ',' << int(v.gk_clamped) << '\n';
  }
}

inline std::vector<DailyVol> read_daily_vol_csv(std::istream& in) {
  const auto t = read_csv(in);
  std::vector<DailyVol> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    out.push_back({Date::parse(t.rows[i][t.column("date")]), t.number(i, "sigma_rv"), t.number(i, "sigma_gk"),
                   t.number(i, "rv_clamped") != 0, t.number(i, "gk_clamped") != 0});
  return out;
}

//===========================================================================//
// Table 1: period volatility summaries                                      //
//===========================================================================//
struct Table1 {
  std::string asset;
  std::string baseline;
  std::vector<PeriodVolSummary> rows;
};

inline json to_json(const Table1& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"period", r.label},
                    {"measure", to_string(r.measure)},
                    {"n", r.n},
                    {"mean", r.mean},
                    {"stdError", io_detail::opt_json(r.std_error)},
                    {"diffFromBaseline", r.diff_from_baseline},
                    {"tStat", io_detail::opt_json(r.diff_t_stat)}});
  return {{"asset", t.asset}, {"baseline", t.baseline}, {"rows", rows}};
}

inline void write_table1_csv(std::ostream& out, const Table1& t) {
  out << "asset,period,measure,n,mean,std_error,diff_from_baseline,t_stat\n";
  for (const auto& r : t.rows)
    out << t.asset << ',' << r.label << ',' << to_string(r.measure) << ',' << r.n << ',' << format_double(r.mean)
        << ',' << io_detail::opt(r.std_error) << ',' << format_double(r.diff_from_baseline) << ','
        << io_detail::opt(r.diff_t_stat) << '\n';
}

inline Table1 read_table1_json(std::istream& in) {
  return io_detail::parse_json(in, [](const json& j) {
    Table1 t;
    t.asset = j.at("asset").get<std::string>();
    t.baseline = j.at("baseline").get<std::string>();
    for (const auto& r : j.at("rows")) {
      PeriodVolSummary s;
      s.label = r.at("period").get<std::string>();
      s.measure = io_detail::measure_from(r.at("measure").get<std::string>());
      s.n = r.at("n").get<std::size_t>();
      s.mean = r.at("mean").get<double>();
      s.std_error = io_detail::opt_from(r.at("stdError"));
      s.diff_from_baseline = r.at("diffFromBaseline").get<double>();
      s.diff_t_stat = io_detail::opt_from(r.at("tStat"));
      t.rows.push_back(std::move(s));
    }
    return t;
  });
}

//===========================================================================//
// Table 2: difference-in-differences per k                                  //
//===========================================================================//
struct DdRow {
  int k = 0;
  std::string period;
  VolMeasure measure = VolMeasure::Realized;
  DdEstimate estimate;
};

struct Table2 {
  std::string treatment, control, baseline;
  std::vector<DdRow> rows;
};

inline json to_json(const Table2& t) {
  static const char* names[] = {"alpha", "beta1", "beta2", "beta3"};
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = {{"k", r.k}, {"period", r.period}, {"measure", to_string(r.measure)}};
    for (std::size_t j = 0; j < 4; ++j)
      row[names[j]] = {{"coef", r.estimate.coef[j]}, {"stdError", r.estimate.std_error[j]},
                       {"tStat", r.estimate.t_stat[j]}};
    row["nObs"] = r.estimate.n_obs;
    row["residualVariance"] = r.estimate.residual_variance;
    rows.push_back(std::move(row));
  }
  return {{"treatment", t.treatment}, {"control", t.control}, {"baseline", t.baseline}, {"rows", rows}};
}

inline void write_table2_csv(std::ostream& out, const Table2& t) {
  out << "k,period,measure,term,coef,std_error,t_stat,n_obs\n";
  static const char* names[] = {"alpha", "beta1", "beta2", "beta3"};
  for (const auto& r : t.rows)
    for (std::size_t j = 0; j < 4; ++j)
      out << r.k << ',' << r.period << ',' << to_string(r.measure) << ',' << names[j] << ','
          << format_double(r.estimate.coef[j]) << ',' << format_double(r.estimate.std_error[j]) << ','
          << format_double(r.estimate.t_stat[j]) << ',' << r.estimate.n_obs << '\n';
}

inline Table2 read_table2_json(std::istream& in) {
  return io_detail::parse_json(in, [](const json& j) {
    static const char* names[] = {"alpha", "beta1", "beta2", "beta3"};
    Table2 t;
    t.treatment = j.at("treatment").get<std::string>();
    t.control = j.at("control").get<std::string>();
    t.baseline = j.at("baseline").get<std::string>();
    for (const auto& r : j.at("rows")) {
      DdRow row;
      row.k = r.at("k").get<int>();
      row.period = r.at("period").get<std::string>();
      row.measure = io_detail::measure_from(r.at("measure").get<std::string>());
      for (std::size_t i = 0; i < 4; ++i) {
        const auto& c = r.at(names[i]);
        row.estimate.coef[i] = c.at("coef").get<double>();
        row.estimate.std_error[i] = c.at("stdError").get<double>();
        row.estimate.t_stat[i] = c.at("tStat").get<double>();
      }
      row.estimate.n_obs = r.at("nObs").get<std::size_t>();
      row.estimate.residual_variance = r.at("residualVariance").get<double>();
      t.rows.push_back(std::move(row));
    }
    return t;
  });
}

//===========================================================================//
// Table 3: frequency band change tests                                      //
//===========================================================================//
struct BandRow {
  std::string period;
  BandReport report;
};

struct Table3 {
  std::string asset, baseline;
  std::vector<BandRow> rows;
};

inline json to_json(const Table3& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"period", r.period},
                    {"band", to_string(r.report.band)},
                    {"firstW", r.report.first_w},
                    {"lastW", r.report.last_w},
                    {"n", r.report.n},
                    {"meanChange", r.report.mean_change},
                    {"tStat", r.report.t_stat}});
  return {{"asset", t.asset}, {"baseline", t.baseline}, {"rows", rows}};
}

inline void write_table3_csv(std::ostream& out, const Table3& t) {
  out << "asset,period,band,first_w,last_w,n,mean_change,t_stat\n";
  for (const auto& r : t.rows)
    out << t.asset << ',' << r.period << ',' << to_string(r.report.band) << ',' << r.report.first_w << ','
        << r.report.last_w << ',' << r.report.n << ',' << format_double(r.report.mean_change) << ','
        << format_double(r.report.t_stat) << '\n';
}

inline Table3 read_table3_json(std::istream& in) {
  return io_detail::parse_json(in, [](const json& j) {
    Table3 t;
    t.asset = j.at("asset").get<std::string>();
    t.baseline = j.at("baseline").get<std::string>();
    for (const auto& r : j.at("rows")) {
      BandRow row;
      row.period = r.at("period").get<std::string>();
      row.report.band = io_detail::band_from(r.at("band").get<std::string>());
      row.report.first_w = r.at("firstW").get<int>();
      row.report.last_w = r.at("lastW").get<int>();
      row.report.n = r.at("n").get<std::size_t>();
      row.report.mean_change = r.at("meanChange").get<double>();
      row.report.t_stat = r.at("tStat").get<double>();
      t.rows.push_back(std::move(row));
    }
    return t;
  });
}

//===========================================================================//
// MS-GARCH summary                                                          //
//===========================================================================//
inline json to_json(const GjrParams& g) {
  return {{"omega", g.omega}, {"alpha", g.alpha}, {"gamma", g.gamma}, {"beta", g.beta}, {"nu", g.nu}, {"xi", g.xi}};
}

inline GjrParams gjr_from_json(const json& j) {
  return {j.at("omega").get<double>(), j.at("alpha").get<double>(), j.at("gamma").get<double>(),
          j.at("beta").get<double>(),  j.at("nu").get<double>(),    j.at("xi").get<double>()};
}

inline json to_json(const MsGarchFit& f, const std::string& asset, std::size_t n_obs) {
  json starts = json::array();
  for (double v : f.start_log_likelihoods) starts.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  return {{"asset", asset},
          {"nObs", n_obs},
          {"returnScale", 100},
          {"regime1", to_json(f.params.regime[0])},
          {"regime2", to_json(f.params.regime[1])},
          {"p11", f.params.p11},
          {"p22", f.params.p22},
          {"unconditionalVariance", {unconditional_variance(f.params.regime[0]), unconditional_variance(f.params.regime[1])}},
          {"logLikelihood", f.log_likelihood},
          {"initialVariance", f.h1},
          {"converged", f.converged},
          {"iterations", f.iterations},
          {"bestStart", f.best_start},
          {"startLogLikelihoods", starts},
          {"warnings", f.warnings}};
}

struct MsGarchSummary {
  MsGarchParams params;
  double log_likelihood = 0;
  bool converged = false;
};

inline MsGarchSummary read_msgarch_json(std::istream& in) {
  return io_detail::parse_json(in, [](const json& j) {
    MsGarchSummary s;
    s.params.regime[0] = gjr_from_json(j.at("regime1"));
    s.params.regime[1] = gjr_from_json(j.at("regime2"));
    s.params.p11 = j.at("p11").get<double>();
    s.params.p22 = j.at("p22").get<double>();
    s.log_likelihood = j.at("logLikelihood").get<double>();
    s.converged = j.at("converged").get<bool>();
    return s;
  });
}

}  // namespace ivol
