#include "cli.hpp"

#include "trajsal/autoencoder/checkpoint.hpp"
#include "trajsal/autoencoder/network.hpp"
#include "trajsal/autoencoder/train.hpp"
#include "trajsal/bench/corridor.hpp"
#include "trajsal/bench/experiment.hpp"
#include "trajsal/common/errors.hpp"
#include "trajsal/saliency/detect.hpp"
#include "trajsal/saliency/distribution.hpp"
#include "trajsal/stms/generator.hpp"
#include "trajsal/trajdata/io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

namespace trajsal::cli {

namespace {

namespace fs = std::filesystem;

// Stream tags for derive_rng off the master seed.
enum Stream : std::uint64_t { kInit = 1, kEncode = 2, kValidate = 3, kExperiment = 4, kPool = 5 };

fs::path resolve(const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root && *root) path = fs::path(root) / path;
  }
  return path;
}

fs::path output(const std::string& p) {
  fs::path path = resolve(p);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream f(path, std::ios::out | mode);
  if (!f) throw Error("cannot write " + path.string());
  return f;
}

/// Every option of the subcommand with its effective value, next to the
/// main output as <output>.config.json.
void write_resolved_config(const CLI::App& sub, const fs::path& main_output) {
  nlohmann::ordered_json j;
  j["command"] = sub.get_name();
  nlohmann::ordered_json opts = nlohmann::ordered_json::object();
  for (const CLI::Option* o : sub.get_options()) {
    if (o->get_lnames().empty()) continue;
    const std::string& name = o->get_lnames().front();
    if (name == "help") continue;
    if (o->get_expected_max() == 0) {
      opts[name] = o->count() > 0;
    } else if (o->count() > 0) {
      const auto& r = o->results();
      opts[name] = r.size() == 1 ? nlohmann::ordered_json(r.front()) : nlohmann::ordered_json(r);
    } else {
      opts[name] = o->get_default_str();
    }
  }
  j["options"] = opts;
  auto path = main_output;
  path += ".config.json";
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

std::vector<Scenario> load_scenarios(const std::string& path) {
  return group_scenarios(load_trajectories(resolve(path)));
}

ae::Model load_model_file(const std::string& path) { return ae::load_model(resolve(path)); }

// --- stms-gen -----------------------------------------------------------

struct StmsGen {
  std::string out, split = "train";
  int scenarios = 0;
  std::uint64_t seed = 1;
  double noise = stms::kDefaultNoise;
};

void add_stms_gen(CLI::App& app, std::function<void()>& action) {
  auto o = std::make_shared<StmsGen>();
  auto* sub = app.add_subcommand("stms-gen", "Generate an STMS scenario file (JSON lines)");
  sub->add_option("--out", o->out, "Output JSONL path")->required();
  sub->add_option("--scenarios", o->scenarios, "Number of scenarios")->required()->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  sub->add_option("--split", o->split, "train, val or test")
      ->check(CLI::IsMember({"train", "val", "test"}))
      ->capture_default_str();
  sub->add_option("--noise", o->noise, "AR(1) noise innovation scale")->capture_default_str();
  sub->callback([o, sub, &action] {
    action = [o, sub] {
      const auto sc = stms::gen_split(stms::split_from_string(o->split), o->scenarios, o->seed, o->noise);
      const auto path = output(o->out);
      save_trajectories(flatten(sc), path);
      write_resolved_config(*sub, path);
    };
  });
}

// --- corridor-gen -------------------------------------------------------

struct CorridorGen {
  std::string out, spec, write_spec;
  int per_pair = 100;
  std::uint64_t seed = 1;
};

bench::CorridorSpec corridor_spec(const std::string& path) {
  return path.empty() ? bench::CorridorSpec::standard() : bench::load_corridor_spec(resolve(path));
}

void add_corridor_gen(CLI::App& app, std::function<void()>& action) {
  auto o = std::make_shared<CorridorGen>();
  auto* sub = app.add_subcommand("corridor-gen", "Generate a gate-tagged synthetic corridor pool");
  sub->add_option("--out", o->out, "Output JSONL path")->required();
  sub->add_option("--per-pair", o->per_pair, "Paths per gate pair")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  sub->add_option("--spec", o->spec, "Corridor spec JSON (default: standard 14-gate corridor)");
  sub->add_option("--write-spec", o->write_spec, "Also write the spec used to this path");
  sub->callback([o, sub, &action] {
    action = [o, sub] {
      const auto spec = corridor_spec(o->spec);
      Rng rng = derive_rng(o->seed, {kPool});
      const auto pool = bench::gen_corridor_pool(spec, o->per_pair, rng);
      const auto path = output(o->out);
      save_trajectories(pool, path);
      if (!o->write_spec.empty()) open_out(output(o->write_spec)) << bench::to_json(spec) << '\n';
      write_resolved_config(*sub, path);
    };
  });
}

// --- train --------------------------------------------------------------

struct Train {
  std::string out, beta = "Vb5", source = "stms", pool, init, curve, val, median = "through";
  std::int64_t iters = 0, validate_every = 0, checkpoint_every = 0;
  double lr = 1e-4, noise = stms::kDefaultNoise;
  std::uint64_t seed = 1;
  bool resume = false, include_erratic = false;
  int batch_scenarios = 8, batch_size = 8;
};

void add_train(CLI::App& app, std::function<void()>& action, std::ostream& log) {
  auto o = std::make_shared<Train>();
  auto* sub = app.add_subcommand("train", "Train (or fine-tune, or resume) an auto-encoder");
  sub->add_option("--out", o->out, "Checkpoint path")->required();
  sub->add_option("--iters", o->iters, "Total iteration budget")->capture_default_str()->check(CLI::NonNegativeNumber);
  sub->add_option("--beta", o->beta, "Consistency weight: Vb5, Vb3, Vb0 or a number")->capture_default_str();
  sub->add_option("--lr", o->lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  sub->add_option("--source", o->source, "Batch stream: stms or corridor")
      ->check(CLI::IsMember({"stms", "corridor"}))
      ->capture_default_str();
  sub->add_option("--pool", o->pool, "Corridor pool JSONL (source corridor)");
  sub->add_option("--noise", o->noise, "STMS noise scale")->capture_default_str();
  sub->add_option("--batch-scenarios", o->batch_scenarios, "Corridor batch: gate pairs")->capture_default_str();
  sub->add_option("--batch-size", o->batch_size, "Corridor batch: paths per pair")->capture_default_str();
  sub->add_flag("--include-erratic", o->include_erratic, "Corridor batch: train on erratic paths too");
  sub->add_option("--init", o->init, "Start from these weights (fresh optimizer, iteration 0)");
  sub->add_flag("--resume", o->resume, "Continue from --out, optimizer state and curve included");
  sub->add_option("--curve", o->curve, "Loss curve CSV (default: <out>.curve.csv)");
  sub->add_option("--val", o->val, "Validation scenarios JSONL for periodic mean error and F-measure");
  sub->add_option("--validate-every", o->validate_every, "Validation cadence (0: never)")->capture_default_str();
  sub->add_option("--checkpoint-every", o->checkpoint_every, "Checkpoint cadence (0: final only)")
      ->capture_default_str();
  sub->add_option("--median-gradient", o->median, "through or stop")
      ->check(CLI::IsMember({"through", "stop"}))
      ->capture_default_str();
  sub->callback([o, sub, &action, &log] {
    action = [o, sub, &log] {
      if (o->resume && !o->init.empty()) throw CLI::ValidationError("--resume and --init are mutually exclusive");
      if (o->source == "corridor" && o->pool.empty()) throw CLI::ValidationError("--source corridor needs --pool");
      const auto ckpt_path = output(o->out);

      ae::TrainConfig cfg;
      cfg.learning_rate = o->lr;
      cfg.beta = ae::parse_beta(o->beta);
      cfg.iterations = o->iters;
      cfg.seed = o->seed;
      cfg.validate_every = o->validate_every;
      cfg.checkpoint_every = o->checkpoint_every;
      cfg.median_gradient = o->median == "stop" ? ae::MedianGradient::stop : ae::MedianGradient::through;
      cfg.checkpoint_path = ckpt_path;
      cfg.validate();

      ae::Checkpoint state{ae::Model(), {}, std::nullopt};
      if (o->resume) {
        state = ae::load_checkpoint(ckpt_path);
      } else if (!o->init.empty()) {
        state.model = load_model_file(o->init);
      } else {
        Rng rng = derive_rng(o->seed, {kInit});
        state.model = ae::Model::initialized({}, rng);
      }

      ae::BatchSource source;
      if (o->source == "corridor")
        source = bench::corridor_source(load_trajectories(resolve(o->pool)), o->seed, o->batch_scenarios,
                                        o->batch_size, o->include_erratic);
      else
        source = ae::stms_source(o->seed, o->noise);

      ae::TrainHooks hooks;
      std::vector<Scenario> val;
      std::vector<Trajectory> val_flat;
      if (!o->val.empty()) {
        val = load_scenarios(o->val);
        val_flat = flatten(val);
        hooks.validator = [&val, &val_flat, seed = o->seed](const ae::Model& m, std::int64_t it) {
          Rng r1 = derive_rng(seed, {kValidate, static_cast<std::uint64_t>(it), 0});
          Rng r2 = derive_rng(seed, {kValidate, static_cast<std::uint64_t>(it), 1});
          const auto score = bench::reconstruction_score(m, val_flat, r1);
          const auto scored = sal::score_scenarios(val, m, r2);
          return ae::ValidationPoint{score.mean_error, sal::sweep_lambda(scored).best_f_measure};
        };
      }

      fs::path curve_path = o->curve.empty() ? fs::path(ckpt_path.string() + ".curve.csv") : output(o->curve);
      const bool append = o->resume && fs::exists(curve_path);
      auto curve = open_out(curve_path, append ? std::ios::app : std::ios::trunc);
      if (!append) ae::write_curve_header(curve);
      hooks.on_row = [&curve, &log](const ae::CurveRow& r) {
        ae::write_curve_row(curve, r);
        if (!std::isnan(r.validation.f_measure))
          log << "iteration " << r.iteration << ": L=" << r.total << " val_e=" << r.validation.mean_error
              << " val_FM=" << r.validation.f_measure << '\n';
      };
      write_resolved_config(*sub, ckpt_path);
      ae::train(state, cfg, source, hooks);
    };
  });
}

// --- detect -------------------------------------------------------------

struct Detect {
  std::string model, data, out, summary, fit;
  std::optional<double> lambda, pvalue;
  std::uint64_t seed = 1;
  std::string stats = "scenario";
};

sal::DetectOptions stats_options(const std::string& mode) {
  sal::DetectOptions d;
  d.mode = mode == "robust" ? sal::StatsMode::robust : sal::StatsMode::scenario;
  return d;
}

void add_detect(CLI::App& app, std::function<void()>& action, std::ostream& log) {
  auto o = std::make_shared<Detect>();
  auto* sub = app.add_subcommand("detect", "Flag salient trajectories in every scenario of a file");
  sub->add_option("--model", o->model, "Checkpoint")->required();
  sub->add_option("--data", o->data, "Scenario JSONL")->required();
  sub->add_option("--out", o->out, "Per-trajectory report (JSON lines)")->required();
  sub->add_option("--summary", o->summary, "Per-scenario CSV (default: <out>.summary.csv)");
  auto* l = sub->add_option("--lambda", o->lambda, "Fixed threshold on q");
  auto* p = sub->add_option("--pvalue", o->pvalue, "p-value; threshold from --fit");
  sub->add_option("--fit", o->fit, "Distribution fit JSON (with --pvalue)");
  sub->add_option("--stats", o->stats, "scenario or robust descriptor statistics")
      ->check(CLI::IsMember({"scenario", "robust"}))
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  l->excludes(p);
  sub->callback([o, sub, &action, &log] {
    action = [o, sub, &log] {
      double lambda = 0.0;
      if (o->pvalue) {
        if (o->fit.empty()) throw CLI::ValidationError("--pvalue needs --fit");
        lambda = sal::lambda_from_pvalue(sal::load_fit(resolve(o->fit)), *o->pvalue);
        log << "p-value " << *o->pvalue << " -> lambda " << lambda << '\n';
      } else if (o->lambda) {
        lambda = *o->lambda;
      } else {
        throw CLI::ValidationError("one of --lambda or --pvalue is required");
      }
      const auto model = load_model_file(o->model);
      const auto scenarios = load_scenarios(o->data);
      Rng rng = derive_rng(o->seed, {kEncode});
      std::vector<sal::DetectionReport> reports;
      for (const auto& sc : scenarios) reports.push_back(sal::detect(sc, model, lambda, rng, stats_options(o->stats)));
      const auto path = output(o->out);
      {
        auto f = open_out(path);
        sal::write_report_jsonl(f, reports);
      }
      auto summary = o->summary.empty() ? fs::path(path.string() + ".summary.csv") : output(o->summary);
      auto f = open_out(summary);
      sal::write_summary_csv(f, reports);
      write_resolved_config(*sub, path);
    };
  });
}

// --- sweep --------------------------------------------------------------

struct Sweep {
  std::string model, data, out;
  std::uint64_t seed = 1;
};

void add_sweep(CLI::App& app, std::function<void()>& action, std::ostream& log) {
  auto o = std::make_shared<Sweep>();
  auto* sub = app.add_subcommand("sweep", "Pick lambda by F-measure over 101 values in [0, 5]");
  sub->add_option("--model", o->model, "Checkpoint")->required();
  sub->add_option("--data", o->data, "Validation scenario JSONL")->required();
  sub->add_option("--out", o->out, "Sweep table CSV")->required();
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  sub->callback([o, sub, &action, &log] {
    action = [o, sub, &log] {
      const auto model = load_model_file(o->model);
      const auto scenarios = load_scenarios(o->data);
      Rng rng = derive_rng(o->seed, {kEncode});
      const auto res = sal::sweep_lambda(sal::score_scenarios(scenarios, model, rng));
      const auto path = output(o->out);
      auto f = open_out(path);
      sal::write_sweep_csv(f, res);
      log << "best lambda " << res.best_lambda << " F-measure " << res.best_f_measure << '\n';
      write_resolved_config(*sub, path);
    };
  });
}

// --- fit ----------------------------------------------------------------

struct Fit {
  std::string model, data, out, family = "all";
  std::uint64_t seed = 1;
};

void add_fit(CLI::App& app, std::function<void()>& action, std::ostream& log) {
  auto o = std::make_shared<Fit>();
  auto* sub = app.add_subcommand("fit", "Fit Weibull/Dagum laws to the q descriptors of the normal members of a scenario file");
  sub->add_option("--model", o->model, "Checkpoint")->required();
  sub->add_option("--data", o->data, "Scenario JSONL")->required();
  sub->add_option("--out", o->out, "Fit JSON (best family when --family all)")->required();
  sub->add_option("--family", o->family, "weibull, dagum_standard, dagum_general or all")
      ->check(CLI::IsMember({"weibull", "dagum_standard", "dagum_general", "all"}))
      ->capture_default_str();
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  sub->callback([o, sub, &action, &log] {
    action = [o, sub, &log] {
      const auto model = load_model_file(o->model);
      const auto scenarios = load_scenarios(o->data);
      Rng rng = derive_rng(o->seed, {kEncode});
      std::vector<double> q;
      // labelled salient members are left out: the law describes normal behaviour
      for (const auto& s : sal::score_scenarios(scenarios, model, rng))
        for (std::size_t i = 0; i < s.q.size(); ++i)
          if (s.truth[i] != Label::salient && s.q[i] > 0.0) q.push_back(s.q[i]);

      std::vector<sal::Family> families;
      if (o->family == "all")
        families = {sal::Family::dagum_general, sal::Family::weibull, sal::Family::dagum_standard};
      else
        families = {sal::family_from_string(o->family)};
      nlohmann::ordered_json report;
      report["samples"] = q.size();
      report["fits"] = nlohmann::ordered_json::array();
      std::optional<sal::DistFit> best;
      for (auto fam : families) {
        const auto fit = sal::fit_distribution(q, fam);
        auto j = nlohmann::ordered_json::parse(sal::to_json(fit));
        for (double p : {0.025, 0.05, 0.075, 0.10, 0.15})
          j["lambda_for_pvalue"][std::to_string(p).substr(0, 5)] = sal::lambda_from_pvalue(fit, p);
        report["fits"].push_back(j);
        log << sal::to_string(fam) << ": F=" << fit.fitting_error << " loglik=" << fit.log_likelihood << '\n';
        if (!best || fit.fitting_error < best->fitting_error) best = fit;
      }
      const auto path = output(o->out);
      sal::save_fit(path, *best);
      auto all = path;
      all += ".all.json";
      open_out(all) << report.dump(2) << '\n';
      write_resolved_config(*sub, path);
    };
  });
}

// --- eval ---------------------------------------------------------------

struct Eval {
  std::string model, pool, spec, out, kind = "DT", variant;
  std::vector<std::string> degrees{"high", "medium", "low"};
  std::vector<double> ratios{0.05, 0.10, 0.15};
  double lambda = 2.0;
  int factor = 3;
  std::uint64_t seed = 1;
};

void add_eval(CLI::App& app, std::function<void()>& action) {
  auto o = std::make_shared<Eval>();
  auto* sub = app.add_subcommand("eval", "Corridor DT/ET/FT evaluation grid with the length baselines");
  sub->add_option("--model", o->model, "Checkpoint")->required();
  sub->add_option("--pool", o->pool, "Corridor pool JSONL")->required();
  sub->add_option("--spec", o->spec, "Corridor spec JSON (default: standard)");
  sub->add_option("--out", o->out, "Results CSV")->required();
  sub->add_option("--kind", o->kind, "DT, ET or FT")->check(CLI::IsMember({"DT", "ET", "FT"}))->capture_default_str();
  sub->add_option("--degrees", o->degrees, "DT degrees")->capture_default_str();
  sub->add_option("--ratios", o->ratios, "Saliency ratios")->capture_default_str();
  sub->add_option("--lambda", o->lambda, "Threshold")->capture_default_str();
  sub->add_option("--factor", o->factor, "FT subsampling factor")->capture_default_str();
  sub->add_option("--variant", o->variant, "Name echoed in the results (default: from the checkpoint)");
  sub->add_option("--seed", o->seed, "Master seed")->capture_default_str();
  sub->callback([o, sub, &action] {
    action = [o, sub] {
      const auto ckpt = ae::load_checkpoint(resolve(o->model));
      bench::ExperimentConfig cfg;
      cfg.kind = bench::kind_from_string(o->kind);
      cfg.degrees.clear();
      for (const auto& d : o->degrees) cfg.degrees.push_back(bench::degree_from_string(d));
      cfg.ratios = o->ratios;
      cfg.lambda = o->lambda;
      cfg.ft_factor = o->factor;
      cfg.variant = !o->variant.empty() ? o->variant : (ckpt.meta.variant.empty() ? "model" : ckpt.meta.variant);
      cfg.seed = derive_rng(o->seed, {kExperiment})();
      const auto pool = load_trajectories(resolve(o->pool));
      const auto rows = bench::run_experiment(ckpt.model, corridor_spec(o->spec), pool, cfg);
      const auto path = output(o->out);
      auto f = open_out(path);
      bench::write_results_csv(f, rows);
      write_resolved_config(*sub, path);
    };
  });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trajectory saliency detection with a consistency-constrained recurrent auto-encoder", "trajsal"};
  app.set_config("--config", "", "TOML/INI file; command-line flags take precedence");
  app.require_subcommand(1);
  std::function<void()> action;
  add_stms_gen(app, action);
  add_corridor_gen(app, action);
  add_train(app, action, out);
  add_detect(app, action, out);
  add_sweep(app, action, out);
  add_fit(app, action, out);
  add_eval(app, action);

  try {
    app.parse(argc, argv);
    if (action) action();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return numeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return data;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return data;
  }
  return ok;
}

}  // namespace trajsal::cli
