#include "ivol/config.hpp"
#include "ivol/pipeline.hpp"
#include "ivol/report_io.hpp"
#include "ivol/synthetic.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ivol;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ivol_pipeline_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PeriodScheme tiny_scheme() {
  return ivol::testing::utc_scheme({{"base", Date::parse("2021-03-01"), Date::parse("2021-03-12")},
                                    {"post", Date::parse("2021-03-13"), Date::parse("2021-03-24")}});
}

RunConfig tiny_config(const fs::path& dir, std::vector<double> mult = {1.0, 0.5}, bool with_control = true) {
  SyntheticConfig sc;
  sc.seed = 11;
  sc.treatment_multipliers = std::move(mult);
  const auto files = write_synthetic(generate_synthetic(tiny_scheme(), sc), dir / "data");
  RunConfig cfg;
  cfg.scheme = tiny_scheme();
  cfg.inputs["treatment"] = files.first;
  cfg.treatment = "treatment";
  if (with_control) {
    cfg.inputs["control"] = files.second;
    cfg.control = "control";
  }
  cfg.output_dir = dir / "out";
  return cfg;
}

std::string run_cli(const std::string& args, int* code) {
  const char* cli = std::getenv("IVOL_CLI");
  if (!cli) return "";
  const std::string cmd = std::string(cli) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  *code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return cmd;
}

}  // namespace

TEST(RunConfigParse, FullExample) {
  std::istringstream in(R"(# sample
input.btc = data/btc.csv
input.eth = /abs/eth.csv
treatment = btc
control = eth
timezone = UTC
max_missing = 0.05
output_dir = results
seed = 42
period = pre, 2020-01-01, 2020-01-31
period = post, 2020-02-01, 2020-02-29   # trailing comment
baseline = pre
multipliers = 1, 0.5
correlation = 0.3
)");
  const auto cfg = parse_run_config(in, "/base");
  EXPECT_EQ(cfg.inputs.at("btc"), fs::path("/base/data/btc.csv"));
  EXPECT_EQ(cfg.inputs.at("eth"), fs::path("/abs/eth.csv"));
  EXPECT_EQ(cfg.treatment, "btc");
  EXPECT_EQ(cfg.control, "eth");
  EXPECT_EQ(cfg.scheme.timezone.name(), "UTC");
  EXPECT_EQ(cfg.max_missing, 0.05);
  EXPECT_EQ(cfg.output_dir, fs::path("/base/results"));
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.synthetic.seed, 42u);
  ASSERT_EQ(cfg.scheme.periods.size(), 2u);
  EXPECT_EQ(cfg.scheme.periods[1].label, "post");
  EXPECT_EQ(cfg.scheme.periods[1].end, Date::parse("2020-02-29"));
  EXPECT_EQ(cfg.synthetic.treatment_multipliers, (std::vector<double>{1, 0.5}));
  EXPECT_EQ(cfg.synthetic.correlation, 0.3);
  EXPECT_NO_THROW(cfg.validate(true));
}

TEST(RunConfigParse, DefaultsToLaunchScheme) {
  std::istringstream in("input.a = a.csv\n");
  const auto cfg = parse_run_config(in);
  EXPECT_EQ(cfg.scheme.periods.size(), 4u);
  EXPECT_EQ(cfg.scheme.timezone.name(), "America/New_York");
  EXPECT_FALSE(cfg.dd_requested());
}

TEST(RunConfigParse, Errors) {
  for (const char* text : {"nonsense\n", "bogus = 1\n", "period = a, 2020-01-01\n", "period = a, 2020-13-01, 2020-12-31\n",
                           "max_missing = lots\n", "timezone = Mars/Olympus\n", "period = a, 2020-01-01, 2020-01-02\nbaseline = b\n",
                           "input.a = x\ninput.a = y\n", "seed = -3\n"}) {
    std::istringstream in(text);
    EXPECT_THROW(parse_run_config(in), ConfigError) << text;
  }
}

TEST(RunConfigValidate, LabelRules) {
  RunConfig cfg;
  cfg.inputs["a"] = "a.csv";
  cfg.treatment = "a";
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_THROW(cfg.validate(true), ConfigError);  // DD needs a control
  cfg.control = "a";
  cfg.inputs["b"] = "b.csv";
  EXPECT_THROW(cfg.validate(), ConfigError);  // same label
  cfg.control = "c";
  EXPECT_THROW(cfg.validate(), ConfigError);  // no input for c
  cfg.control = "b";
  EXPECT_NO_THROW(cfg.validate(true));
}

TEST(Pipeline, MissingControlFailsBeforeComputation) {
  const auto dir = scratch("nocontrol");
  auto cfg = tiny_config(dir, {1.0, 0.5}, false);
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
  EXPECT_FALSE(fs::exists(cfg.output_dir));
  cfg.control = "control";  // label given but no input
  EXPECT_THROW(run_pipeline(cfg), ConfigError);
  EXPECT_FALSE(fs::exists(cfg.output_dir));
  // Without the regression stage the same config runs.
  cfg.control.clear();
  auto stages = all_stages();
  stages.erase(Stage::Did);
  EXPECT_EQ(run_pipeline(cfg, stages).exit_code(), 0);
  fs::remove_all(dir);
}

TEST(Pipeline, ManifestListsOutputsAndIsReproducible) {
  const auto dir = scratch("manifest");
  auto cfg = tiny_config(dir);
  const auto rep = run_pipeline(cfg);
  EXPECT_EQ(rep.exit_code(), 0);
  for (const auto& s : rep.stages) EXPECT_TRUE(s.ok) << s.name << ": " << s.error;

  std::set<std::string> listed;
  for (const auto& f : rep.outputs) {
    listed.insert(f.path);
    EXPECT_EQ(sha256_file(cfg.output_dir / f.path), f.sha256);
  }
  for (const std::string asset : {"treatment", "control"})
    for (const char* file : {"grids.jsonl", "excluded_days.csv", "daily_vol.csv", "table1.json", "table1.csv", "spectra.csv",
                             "period_rms.csv", "figure2.csv", "table3.json", "table3.csv", "figure1.csv", "msgarch.json",
                             "figure3.csv"})
      EXPECT_TRUE(listed.contains(asset + "/" + file)) << asset << "/" << file;
  EXPECT_TRUE(listed.contains("table2.json"));
  EXPECT_TRUE(listed.contains("table2.csv"));
  // Nothing else on disk besides the manifest.
  std::size_t on_disk = 0;
  for (const auto& e : fs::recursive_directory_iterator(cfg.output_dir)) on_disk += e.is_regular_file() ? 1 : 0;
  EXPECT_EQ(on_disk, listed.size() + 1);

  const auto first = read_file(rep.manifest_path);
  const auto manifest = json::parse(first);
  EXPECT_EQ(manifest.at("outputs").size(), listed.size());
  EXPECT_EQ(manifest.at("converged").get<bool>(), rep.converged);

  cfg.output_dir = dir / "out2";
  const auto rep2 = run_pipeline(cfg);
  EXPECT_EQ(read_file(rep2.manifest_path), first);
  fs::remove_all(dir);
}

TEST(Pipeline, StepDownShowsNegativeDifference) {
  const auto dir = scratch("stepdown");
  const auto cfg = tiny_config(dir, {1.0, 0.5});
  const auto rep = run_pipeline(cfg);
  const auto& t1 = *rep.assets.at("treatment").table1;
  bool seen = false;
  for (const auto& r : t1.rows)
    if (r.label == "post") {
      seen = true;
      EXPECT_LT(r.diff_from_baseline, 0) << to_string(r.measure);
      EXPECT_LT(r.t_stat(), -2);
    }
  EXPECT_TRUE(seen);
  for (const auto& r : rep.table2->rows) EXPECT_LT(r.estimate.beta3(), 0);
  for (const auto& r : rep.assets.at("treatment").table3->rows) EXPECT_LT(r.report.mean_change, 1);
  fs::remove_all(dir);
}

TEST(Pipeline, TablesRoundTrip) {
  const auto dir = scratch("roundtrip");
  const auto cfg = tiny_config(dir);
  const auto rep = run_pipeline(cfg);
  const auto& a = rep.assets.at("treatment");
  auto open = [&](const std::string& rel) { return std::ifstream(cfg.output_dir / rel); };

  {
    auto f = open("treatment/table1.json");
    const auto t = read_table1_json(f);
    ASSERT_EQ(t.rows.size(), a.table1->rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_EQ(t.rows[i].label, a.table1->rows[i].label);
      EXPECT_EQ(t.rows[i].measure, a.table1->rows[i].measure);
      EXPECT_EQ(t.rows[i].mean, a.table1->rows[i].mean);
      EXPECT_EQ(t.rows[i].std_error, a.table1->rows[i].std_error);
      EXPECT_EQ(t.rows[i].diff_t_stat, a.table1->rows[i].diff_t_stat);
    }
    auto c = open("treatment/table1.csv");
    const auto csv = read_csv(c);
    ASSERT_EQ(csv.rows.size(), t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_EQ(csv.number(i, "mean"), t.rows[i].mean);
      EXPECT_EQ(csv.maybe_number(i, "t_stat"), t.rows[i].diff_t_stat);
    }
  }
  {
    auto f = open("table2.json");
    const auto t = read_table2_json(f);
    ASSERT_EQ(t.rows.size(), rep.table2->rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_EQ(t.rows[i].estimate.coef, rep.table2->rows[i].estimate.coef);
      EXPECT_EQ(t.rows[i].estimate.t_stat, rep.table2->rows[i].estimate.t_stat);
      EXPECT_EQ(t.rows[i].estimate.n_obs, rep.table2->rows[i].estimate.n_obs);
    }
    auto c = open("table2.csv");
    EXPECT_EQ(read_csv(c).rows.size(), 4 * t.rows.size());
  }
  {
    auto f = open("treatment/table3.json");
    const auto t = read_table3_json(f);
    ASSERT_EQ(t.rows.size(), a.table3->rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      EXPECT_EQ(t.rows[i].report.band, a.table3->rows[i].report.band);
      EXPECT_EQ(t.rows[i].report.mean_change, a.table3->rows[i].report.mean_change);
      EXPECT_EQ(t.rows[i].report.t_stat, a.table3->rows[i].report.t_stat);
    }
  }
  {
    auto f = open("treatment/daily_vol.csv");
    const auto v = read_daily_vol_csv(f);
    ASSERT_EQ(v.size(), a.vols.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(v[i].date, a.vols[i].date);
      EXPECT_EQ(v[i].sigma, a.vols[i].sigma);
      EXPECT_EQ(v[i].sigma_gk, a.vols[i].sigma_gk);
    }
  }
  {
    auto f = open("treatment/grids.jsonl");
    const auto g = read_day_grids(f);
    ASSERT_EQ(g.size(), a.grids.days.size());
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(g[i].log_prices, a.grids.days[i].log_prices);
  }
  {
    auto f = open("treatment/msgarch.json");
    const auto m = read_msgarch_json(f);
    EXPECT_EQ(m.log_likelihood, a.msgarch->log_likelihood);
    EXPECT_EQ(m.params.p11, a.msgarch->params.p11);
    EXPECT_EQ(m.params.regime[1].omega, a.msgarch->params.regime[1].omega);
    auto c = open("treatment/figure3.csv");
    const auto csv = read_csv(c);
    ASSERT_EQ(csv.rows.size(), a.msgarch->smoothed.size());
    for (std::size_t i = 0; i < csv.rows.size(); ++i)
      EXPECT_NEAR(csv.number(i, "smoothed_low") + csv.number(i, "smoothed_high"), 1.0, 1e-12);
  }
  {
    auto c = open("treatment/figure2.csv");
    const auto csv = read_csv(c);
    EXPECT_EQ(csv.rows.size(), 720u);
    EXPECT_EQ(csv.number(719, "change_ratio"), a.change_ratios.at("post")[719]);
  }
  fs::remove_all(dir);
}

TEST(Pipeline, FailingStageHaltsOnlyDependents) {
  const auto dir = scratch("failing");
  auto cfg = tiny_config(dir);
  {
    std::ofstream bad(dir / "data" / "control.csv");
    bad << "timestamp,open,high,low,close\n60,1,2,0.5,1\n60,1,2,0.5,1\n";
  }
  const auto rep = run_pipeline(cfg);
  EXPECT_EQ(rep.exit_code(), 2);
  std::map<std::string, StageResult> by_name;
  for (const auto& s : rep.stages) by_name[s.name] = s;
  EXPECT_FALSE(by_name.at("ingest:control").ok);
  EXPECT_NE(by_name.at("ingest:control").error.find("duplicate"), std::string::npos);
  EXPECT_TRUE(by_name.at("rv:control").skipped);
  EXPECT_TRUE(by_name.at("did").skipped);
  EXPECT_TRUE(by_name.at("ingest:treatment").ok);
  EXPECT_TRUE(by_name.at("bands:treatment").ok);
  EXPECT_TRUE(by_name.at("msgarch:treatment").ok);
  const auto manifest = json::parse(read_file(rep.manifest_path));
  bool flagged = false;
  for (const auto& s : manifest.at("stages"))
    if (s.at("name") == "ingest:control") flagged = s.at("status") == "failed" && s.contains("error");
  EXPECT_TRUE(flagged);
  fs::remove_all(dir);
}

TEST(Hashing, KnownDigest) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Cli, SimulateReportAndExitCodes) {
  if (!std::getenv("IVOL_CLI")) GTEST_SKIP() << "IVOL_CLI not set";
  const auto dir = scratch("cli");
  {
    std::ofstream c(dir / "scheme.cfg");
    c << "timezone = UTC\nperiod = base, 2021-03-01, 2021-03-08\nperiod = post, 2021-03-09, 2021-03-16\n"
         "multipliers = 1, 0.5\n";
  }
  int code = -1;
  run_cli("simulate --config " + (dir / "scheme.cfg").string() + " --seed 5 --out " + (dir / "sim").string(), &code);
  ASSERT_EQ(code, 0);
  ASSERT_TRUE(fs::exists(dir / "sim" / "run.cfg"));
  const auto run_cfg = (dir / "sim" / "run.cfg").string();
  run_cli("report --config " + run_cfg + " --out " + (dir / "r1").string(), &code);
  EXPECT_EQ(code, 0);
  run_cli("report --config " + run_cfg + " --out " + (dir / "r2").string(), &code);
  EXPECT_EQ(code, 0);
  EXPECT_EQ(read_file(dir / "r1" / "manifest.json"), read_file(dir / "r2" / "manifest.json"));

  for (const char* sub : {"ingest", "rv", "spectrum", "bands", "msgarch"}) {
    run_cli(std::string(sub) + " --config " + run_cfg + " --out " + (dir / sub).string(), &code);
    EXPECT_EQ(code, 0) << sub;
  }
  EXPECT_TRUE(fs::exists(dir / "bands" / "treatment" / "table3.json"));
  EXPECT_FALSE(fs::exists(dir / "rv" / "treatment" / "table3.json"));

  // DD without a control input: configuration error.
  run_cli("did --input " + (dir / "sim" / "treatment.csv").string() + " --treatment treatment --tz UTC --out " +
              (dir / "d").string(),
          &code);
  EXPECT_EQ(code, 1);
  EXPECT_FALSE(fs::exists(dir / "d"));
  {
    std::ofstream bad(dir / "bad.csv");
    bad << "timestamp,open,high,low,close\n60,1,0.5,2,1\n";
  }
  run_cli("rv --input " + (dir / "bad.csv").string() + " --out " + (dir / "e").string(), &code);
  EXPECT_EQ(code, 2);
  run_cli("rv --bogus-flag", &code);
  EXPECT_EQ(code, 1);
  run_cli("--help", &code);
  EXPECT_EQ(code, 0);
  fs::remove_all(dir);
}
