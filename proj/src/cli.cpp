#include "clab/cli.hpp"

#include "clab/archive.hpp"
#include "clab/config.hpp"
#include "clab/reconstruction.hpp"
#include "clab/reports.hpp"
#include "clab/verifier.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>

namespace clab {

namespace {

namespace fs = std::filesystem;

class Pipeline {
 public:
  Pipeline(ExperimentConfig cfg, fs::path out, bool quiet, std::ostream& log)
      : cfg_(std::move(cfg)), out_(std::move(out)), quiet_(quiet), log_(log) {
    meta_.config_hash = cfg_.hash();
  }

  int run(Command c) {
    cfg_.require(c);
    switch (c) {
      case Command::Plan: plan_report(); break;
      case Command::Verify: verify(); break;
      case Command::MakeInstance: make_instance_archive(); break;
      case Command::Reconstruct: reconstruct(); break;
      case Command::Sweep: return sweep();
      case Command::All:
        plan_report();
        verify();
        make_instance_archive();
        reconstruct();
        return sweep();
    }
    return kExitOk;
  }

 private:
  ExperimentConfig cfg_;
  fs::path out_;
  bool quiet_;
  std::ostream& log_;
  ReportMeta meta_;
  std::optional<WeightPlan> plan_;
  std::optional<ProblemInstance> instance_;
  std::unique_ptr<LateralReconstructor> solver_;

  void say(const std::string& line) {
    if (!quiet_) log_ << line << "\n";
  }

  std::string path(const std::string& name) const { return (out_ / name).string(); }

  const WeightPlan& plan() {
    if (!plan_) {
      const WeightConfig& w = *cfg_.weight;
      if (w.region_family) {
        plan_ = region_family(*cfg_.geometry, *w.region_family).plan;
      } else {
        PlanRequest req;
        req.D0 = *w.D0;
        req.delta0 = w.delta0;
        req.lambda = w.lambda;
        req.margin = w.margin;
        plan_ = plan_parameters(build_d(*cfg_.geometry), *cfg_.geometry, req);
      }
    }
    return *plan_;
  }

  // The region family replaces D by a neighbourhood of Gamma; everything downstream follows it.
  CylinderGeometry geometry() { return cfg_.weight ? plan().geometry : *cfg_.geometry; }

  const ProblemInstance& instance() {
    if (!instance_) instance_ = make_instance(geometry(), cfg_.instance->recipe);
    return *instance_;
  }

  const LateralReconstructor& solver() {
    if (!solver_) {
      const ProblemInstance& inst = instance();
      solver_ = std::make_unique<LateralReconstructor>(inst.geometry, plan(), inst.p0, inst.R, *cfg_.solver);
    }
    return *solver_;
  }

  void plan_report() {
    const WeightPlan& p = plan();
    const SigmaGapReport gap = sigma_gap_check(p);
    write_text_file(path("plan_report.txt"), format_key_values(clab::plan_report(p, &gap, meta_)));
    say("plan: alpha=" + format_double(p.alpha) + " beta=" + format_double(p.beta) + " delta0=" +
        format_double(p.delta0) + " sigma0/sigma1=" + format_double(p.sigma0 / p.sigma1));
    for (const auto& w : p.warnings) say("warning: " + w);
  }

  void verify() {
    const WeightPlan& p = plan();
    const VerifyConfig v = cfg_.verify.value_or(VerifyConfig{});
    CylinderGeometry ext = p.geometry;
    ext.extended = true;
    ext.nx_n = 2 * p.geometry.nx_n - 1;
    const auto corpus = make_corpus(ext, v.corpus_size, v.corpus_seed, v.time_dependent);
    const auto p0 = cfg_.instance ? cfg_.instance->recipe.p0 : SeparableProfile{};
    const CarlemanReport rep =
        certify_carleman(ext, p, corpus, v.s_grid, v.C_cap, [&](double x, double t) { return p0.value(x, t); });
    write_text_file(path("carleman.csv"), carleman_table(rep, meta_));
    const Lemma1Study st = lemma1_study(ext, corpus);
    write_text_file(path("lemma1.csv"), lemma1_table(st, meta_));
    say("verify: C_emp=" + format_double(rep.C_emp) + " s_min_emp=" + format_double(rep.s_min_emp) +
        " lemma1 in-band fraction=" + format_double(st.fraction_in_band));
  }

  void make_instance_archive() {
    const ProblemInstance& inst = instance();
    const InstanceChecks chk = check_instance(inst);
    if (!chk.ok()) {
      throw ProblemError("instance invariants fail: residual " + format_double(chk.residual) + " (bound " +
                         format_double(chk.residual_bound) + "), trace_u " + format_double(chk.trace_u) +
                         ", trace_y " + format_double(chk.trace_y));
    }
    write_instance(path("instance.clab"), inst,
                   {{"config_hash", meta_.config_hash}, {"tool_version", meta_.tool_version}});
    say("make-instance: D(u)=" + format_double(inst.D_of_u) + " M=" + format_double(inst.M));
  }

  void reconstruct() {
    const ProblemInstance& inst = instance();
    const LateralResult r = solver().solve(inst.data);
    const ErrorPair e = reconstruction_errors(r.f_hat, inst.f, plan());
    const double f_region = discrete_norm(inst.f, stability_region(plan()), NormKind::L2);
    const double f_global = discrete_norm(inst.f, Region::all(), NormKind::L2);
    FieldArchive a;
    a.geometry = inst.geometry;
    a.metadata = {{"config_hash", meta_.config_hash}, {"tool_version", meta_.tool_version}};
    a.fields = {{"f_hat", r.f_hat}, {"f", inst.f}};
    write_archive(path("f_hat.clab"), a);
    const KeyValues kv{{"report", "reconstruction"},
                       {"tool_version", meta_.tool_version},
                       {"config_hash", meta_.config_hash},
                       {"err_region", format_double(e.region)},
                       {"err_global", format_double(e.global)},
                       {"rel_err_region", format_double(e.region / f_region)},
                       {"rel_err_global", format_double(e.global / f_global)},
                       {"iterations", std::to_string(r.iterations)},
                       {"relative_residual", format_double(r.relative_residual)}};
    write_text_file(path("reconstruct_summary.txt"), format_key_values(kv));
    say("reconstruct: relative region error " + format_double(e.region / f_region) + " after " +
        std::to_string(r.iterations) + " iterations");
  }

  int sweep() {
    const ProblemInstance& inst = instance();
    const SweepReport rep = stability_sweep(inst, cfg_.instance->noise_levels, plan(), solver(), cfg_.instance->seed);
    write_text_file(path("sweep.csv"), sweep_csv(rep, meta_));
    say("sweep: theta_emp=" + format_double(rep.theta_emp) + " over " + std::to_string(rep.fit_rows.size()) +
        " rows");
    for (const auto& row : rep.rows) {
      if (row.noise == 0.0) {
        const CorollaryReport c = corollary_check(rep, inst, plan());
        const KeyValues kv{{"report", "corollary_slice"},
                           {"tool_version", meta_.tool_version},
                           {"config_hash", meta_.config_hash},
                           {"slice_error", format_double(c.slice_error)},
                           {"region_error", format_double(c.region_error)},
                           {"passed", c.passed ? "1" : "0"}};
        write_text_file(path("corollary.txt"), format_key_values(kv));
        break;
      }
    }
    if (!rep.invariants_ok) {
      log_ << "error: err_region <= err_global fails on some sweep row\n";
      return kExitValidation;
    }
    return kExitOk;
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carleman-weight laboratory: plans, verification, instances, reconstruction"};
  std::string config_path, out_dir, command;
  std::optional<std::uint64_t> seed_override;
  bool quiet = false;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory (overrides the config's 'output')");
  app.add_option("--command", command, "plan | verify | make-instance | reconstruct | sweep | all")->required();
  app.add_option("--seed-override", seed_override, "replace instance.seed");
  app.add_flag("--quiet", quiet, "no progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    const Command c = parse_command(command);
    ExperimentConfig cfg = load_config(config_path);
    if (seed_override) cfg.override_seed(*seed_override);
    if (out_dir.empty()) out_dir = cfg.output;
    if (out_dir.empty()) throw ConfigError("no output directory: pass --out or set 'output'");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir)) {
      err << "error: cannot create output directory '" << out_dir << "'\n";
      return kExitIo;
    }
    Pipeline p(std::move(cfg), out_dir, quiet, out);
    return p.run(c);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::invalid_argument& e) {  // config, grid, weight and problem validation
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ReconstructionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {  // archive, report and config I/O
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace clab
