// ivol: command-line front end for the volatility event-study pipeline.
#include "ivol/config.hpp"
#include "ivol/pipeline.hpp"
#include "ivol/synthetic.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ivol;

namespace {

struct CommonFlags {
  std::string config;
  std::vector<std::string> inputs;
  std::string out;
  std::string tz;
  std::optional<std::uint64_t> seed;
  std::optional<double> max_missing;
  std::string treatment, control;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value run configuration file");
  cmd->add_option("--input", f.inputs, "minute-bar CSV, as label=path or path (label from file name)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--tz", f.tz, "civil-day time zone, e.g. America/New_York, UTC, +09:00");
  cmd->add_option("--seed", f.seed, "seed for synthetic data");
  cmd->add_option("--max-missing", f.max_missing, "largest fraction of missing minutes for a usable day");
  cmd->add_option("--treatment", f.treatment, "treatment input label");
  cmd->add_option("--control", f.control, "control input label");
}

RunConfig make_config(const CommonFlags& f) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  for (const auto& spec : f.inputs) {
    const auto eq = spec.find('=');
    const std::string label = eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    if (label.empty() || path.empty()) throw ConfigError("bad --input '" + spec + "'");
    cfg.inputs[label] = path;
  }
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (!f.tz.empty()) cfg.scheme.timezone = Timezone::parse(f.tz);
  if (f.seed) cfg.seed = cfg.synthetic.seed = *f.seed;
  if (f.max_missing) cfg.max_missing = *f.max_missing;
  if (!f.treatment.empty()) cfg.treatment = f.treatment;
  if (!f.control.empty()) cfg.control = f.control;
  if (cfg.treatment.empty() && cfg.inputs.contains("treatment")) cfg.treatment = "treatment";
  if (cfg.control.empty() && cfg.inputs.contains("control") && cfg.inputs.contains(cfg.treatment))
    cfg.control = "control";
  return cfg;
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

int report_run(const RunReport& rep) {
  for (const auto& s : rep.stages) {
    std::cout << (s.ok ? "ok      " : s.skipped ? "skipped " : "FAILED  ") << s.name;
    if (!s.ok) std::cout << ": " << s.error;
    std::cout << '\n';
  }
  if (!rep.converged) std::cout << "warning: regime model did not converge for every asset\n";
  std::cout << "manifest: " << rep.manifest_path.string() << '\n';
  return rep.exit_code();
}

int simulate(const CommonFlags& f, const std::vector<double>& multipliers, const std::vector<double>& control_mult,
             std::optional<double> correlation) {
  RunConfig cfg = make_config(f);
  if (!multipliers.empty()) cfg.synthetic.treatment_multipliers = multipliers;
  if (!control_mult.empty()) cfg.synthetic.control_multipliers = control_mult;
  if (correlation) cfg.synthetic.correlation = *correlation;
  cfg.synthetic.seed = cfg.seed;
  cfg.scheme.validate();
  cfg.synthetic.validate(cfg.scheme.periods.size());
  const fs::path dir = f.out.empty() ? fs::path("synthetic") : fs::path(f.out);
  const auto [tp, cp] = write_synthetic(generate_synthetic(cfg.scheme, cfg.synthetic), dir);

  // A ready-to-run config next to the data.
  std::ofstream c(dir / "run.cfg");
  c << "input.treatment = treatment.csv\ninput.control = control.csv\n"
    << "treatment = treatment\ncontrol = control\n"
    << "timezone = " << cfg.scheme.timezone.name() << '\n'
    << "max_missing = " << shortest(cfg.max_missing) << '\n'
    << "output_dir = report\n"
    << "seed = " << cfg.seed << '\n';
  for (const auto& p : cfg.scheme.periods)
    c << "period = " << p.label << ", " << p.start.iso() << ", " << p.end.iso() << '\n';
  c << "baseline = " << cfg.scheme.baseline_period().label << '\n';
  std::cout << "wrote " << tp.string() << "\nwrote " << cp.string() << "\nwrote " << (dir / "run.cfg").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Intraday volatility event-study toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  struct Sub {
    const char* name;
    const char* help;
    std::set<Stage> stages;
  };
  const std::vector<Sub> subs = {
      {"ingest", "build civil-day price grids", {Stage::Ingest}},
      {"rv", "daily realized and Garman-Klass volatility, period summaries", {Stage::Ingest, Stage::Rv}},
      {"spectrum", "per-day amplitude spectra and period change ratios", {Stage::Ingest, Stage::Spectrum}},
      {"bands", "frequency-band change tests", {Stage::Ingest, Stage::Spectrum, Stage::Bands}},
      {"did", "difference-in-differences regressions", {Stage::Ingest, Stage::Rv, Stage::Did}},
      {"msgarch", "two-regime GJR model on daily returns", {Stage::Ingest, Stage::Msgarch}},
      {"report", "run every stage", all_stages()},
  };
  std::vector<CLI::App*> cmds;
  for (const auto& s : subs) {
    auto* cmd = app.add_subcommand(s.name, s.help);
    add_common(cmd, flags);
    cmds.push_back(cmd);
  }
  std::vector<double> multipliers, control_mult;
  std::optional<double> correlation;
  auto* sim = app.add_subcommand("simulate", "write synthetic treatment/control minute bars");
  add_common(sim, flags);
  sim->add_option("--multipliers", multipliers, "treatment volatility factor per period")->delimiter(',');
  sim->add_option("--control-multipliers", control_mult, "control volatility factor per period")->delimiter(',');
  sim->add_option("--correlation", correlation, "correlation of treatment and control shocks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (sim->parsed()) return simulate(flags, multipliers, control_mult, correlation);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!cmds[i]->parsed()) continue;
      RunConfig cfg = make_config(flags);
      auto stages = subs[i].stages;
      // `report` runs the regression only when a control asset is configured.
      if (std::string(subs[i].name) == "report" && !cfg.dd_requested()) stages.erase(Stage::Did);
      return report_run(run_pipeline(cfg, stages));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return 1;
}
