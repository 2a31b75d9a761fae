#include "whyqa/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>

#include "CLI11.hpp"
#include "whyqa/baseline.hpp"
#include "whyqa/corpus_prep.hpp"
#include "whyqa/errors.hpp"
#include "whyqa/error_analysis.hpp"
#include "whyqa/manifest.hpp"
#include "whyqa/metrics.hpp"
#include "whyqa/review_service.hpp"
#include "whyqa/thresholding.hpp"

namespace whyqa::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutDirEnv = "WHYQA_OUT_DIR";

fs::path default_out_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? fs::path(env) : fs::path(".");
}

// Options shared by every subcommand plus the per-invocation context.
struct Context {
  std::ostream& out;
  std::ostream& err;
  CLI::App* sub = nullptr;
  std::string experiment_path;

  void warn(const std::vector<std::string>& warnings) const {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
  }

  RunManifest manifest() const {
    RunManifest m;
    m.subcommand = sub->get_name();
    for (const CLI::Option* opt : sub->get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help") continue;
      const auto& results = opt->results();
      Json v = results.size() == 1 ? Json(results.front()) : Json(results);
      m.flags[opt->get_name()] = std::move(v);
    }
    if (!experiment_path.empty()) {
      m.experiment = experiment_tag_from_json(read_json_file(experiment_path));
      m.add_input(experiment_path);
    }
    m.timestamp = utc_timestamp_now();
    return m;
  }
};

fs::path resolve_out(const std::string& flag, const char* default_name) {
  return flag.empty() ? default_out_dir() / default_name : fs::path(flag);
}

void write_manifest(RunManifest& m, const fs::path& artifact) {
  write_text_file(manifest_path_for(artifact), dump_json(manifest_to_json(m)));
}

void write_dataset_with_manifest(Context& ctx, const Dataset& d,
                                 const fs::path& out,
                                 const std::vector<fs::path>& inputs,
                                 const std::map<std::string, std::uint64_t>& seeds = {}) {
  save_dataset(out, d);
  RunManifest m = ctx.manifest();
  for (const auto& in : inputs) m.add_input(in);
  m.add_output(out);
  m.seeds = seeds;
  write_manifest(m, out);
}

Json stats_json(const PrepStats& s) {
  return {{"qas_in", s.qas_in},
          {"qas_out", s.qas_out},
          {"notes_in", s.notes_in},
          {"notes_out", s.notes_out},
          {"warnings", s.warnings}};
}

void print_json(std::ostream& os, const Json& j) { os << j.dump(2) << "\n"; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Clinical why-QA corpus preparation, scoring and error-analysis toolkit",
               "whyqa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Context ctx{out, err, nullptr, {}};
  std::function<void()> action;
  auto add = [&](const char* name, const char* desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--experiment", ctx.experiment_path,
                    "experiment-lineage JSON recorded in the run manifest")
        ->check(CLI::ExistingFile);
    return sub;
  };

  // Flag storage.
  std::string dataset, out_path, answers, predictions, tag, lexicon,
      stopwords, fns, log, schema_path, reviewer, ui_dir, out_dir;
  std::string metric = "exact", tau_text;
  std::string host = "127.0.0.1";
  std::vector<std::string> datasets;
  std::size_t target = 0, n = 0, nbest = kDefaultNBest, sample_size = 0;
  std::size_t train_notes = 0, dev_notes = 0, test_notes = 0;
  std::uint64_t seed = 0;
  int port = 8080;

  // validate -----------------------------------------------------------------
  {
    auto* s = add("validate", "check every dataset invariant");
    s->add_option("--dataset", dataset, "dataset JSON")->required();
    s->add_option("--out", out_path, "write the validation report here");
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const Dataset d = load_dataset(dataset);
        const ValidationReport r = validate(d);
        const Json j = validation_report_to_json(r);
        if (!out_path.empty()) write_text_file(out_path, dump_json(j));
        print_json(out, j);
        if (!r.ok())
          throw ValidationError(std::to_string(r.violations.size()) +
                                " invariant violation(s) in " + dataset);
      };
    });
  }

  // filter-why / drop-subset / retain-single ---------------------------------
  {
    auto* s = add("filter-why", "keep QAs whose question contains the token \"why\"");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        auto r = filter_why(load_dataset(dataset));
        const fs::path o = resolve_out(out_path, "why.json");
        write_dataset_with_manifest(ctx, r.dataset, o, {dataset});
        ctx.warn(r.stats.warnings);
        print_json(out, stats_json(r.stats));
      };
    });
  }
  {
    auto* s = add("drop-subset", "remove QAs carrying a source_tag");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--tag", tag, "source_tag to remove")->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        auto r = drop_subset(load_dataset(dataset), tag);
        const fs::path o = resolve_out(out_path, "dropped.json");
        write_dataset_with_manifest(ctx, r.dataset, o, {dataset});
        ctx.warn(r.stats.warnings);
        print_json(out, stats_json(r.stats));
      };
    });
  }
  {
    auto* s = add("retain-single", "drop answerable QAs with more than one answer");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        auto r = retain_single_answer(load_dataset(dataset));
        const fs::path o = resolve_out(out_path, "single.json");
        write_dataset_with_manifest(ctx, r.dataset, o, {dataset});
        print_json(out, stats_json(r.stats));
      };
    });
  }

  // merge ----------------------------------------------------------------------
  {
    auto* s = add("merge", "union several datasets in the given order");
    s->add_option("--dataset", datasets, "dataset JSON (repeatable)")->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        std::vector<Dataset> parts;
        std::vector<fs::path> inputs;
        for (const auto& p : datasets) {
          parts.push_back(load_dataset(p));
          inputs.emplace_back(p);
        }
        const Dataset merged = merge(parts);
        const fs::path o = resolve_out(out_path, "merged.json");
        write_dataset_with_manifest(ctx, merged, o, inputs);
        print_json(out, {{"notes", merged.notes.size()}, {"qas", merged.qas.size()}});
      };
    });
  }

  // synth-noans ------------------------------------------------------------------
  {
    auto* s = add("synth-noans", "add unanswerable QAs by re-pairing questions with foreign notes");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--target", target, "number of QAs to synthesize")
        ->required()->check(CLI::PositiveNumber);
    s->add_option("--seed", seed)->required();
    s->add_option("--stopwords", stopwords, "one token per line")
        ->check(CLI::ExistingFile);
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        SynthesisSpec spec;
        spec.target_count = target;
        spec.seed = seed;
        std::vector<fs::path> inputs{dataset};
        if (!stopwords.empty()) {
          spec.stopwords = load_stopwords(stopwords);
          inputs.emplace_back(stopwords);
        }
        const auto r = synthesize_unanswerable(load_dataset(dataset), spec);
        const fs::path o = resolve_out(out_path, "synth.json");
        write_dataset_with_manifest(ctx, r.dataset, o, inputs, {{"seed", seed}});
        if (r.shortfall)
          ctx.warn({"only " + std::to_string(r.new_qa_ids.size()) + " of " +
                    std::to_string(target) + " requested pairings exist"});
        print_json(out, {{"synthesized", r.new_qa_ids.size()},
                         {"eligible_pairings", r.eligible_pairings},
                         {"shortfall", r.shortfall}});
      };
    });
  }

  // split ------------------------------------------------------------------------
  {
    auto* s = add("split", "note-disjoint train/dev/test partition");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--train-notes", train_notes)->required();
    s->add_option("--dev-notes", dev_notes)->required();
    s->add_option("--test-notes", test_notes)->required();
    s->add_option("--seed", seed)->required();
    s->add_option("--out-dir", out_dir, "defaults to $WHYQA_OUT_DIR or .");
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const auto r = split_by_note(
            load_dataset(dataset), {train_notes, dev_notes, test_notes, seed});
        const fs::path dir = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
        RunManifest m = ctx.manifest();
        m.add_input(dataset);
        m.seeds["seed"] = seed;
        Json summary = Json::object();
        for (auto [name, part] : {std::pair{"train", &r.train},
                                  std::pair{"dev", &r.dev},
                                  std::pair{"test", &r.test}}) {
          const fs::path p = dir / (std::string(name) + ".json");
          save_dataset(p, *part);
          m.add_output(p);
          summary[name] = {{"notes", part->notes.size()}, {"qas", part->qas.size()}};
        }
        write_text_file(dir / "split.manifest.json", dump_json(manifest_to_json(m)));
        print_json(out, summary);
      };
    });
  }

  // predict-baseline ---------------------------------------------------------------
  {
    auto* s = add("predict-baseline", "run the cue-phrase reference predictor");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--lexicon", lexicon, "phrase<TAB>direction per line")
        ->check(CLI::ExistingFile);
    s->add_option("--stopwords", stopwords)->check(CLI::ExistingFile);
    s->add_option("--nbest", nbest, "max nbest length")->check(CLI::PositiveNumber);
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        std::vector<fs::path> inputs{dataset};
        BaselineOptions opts;
        opts.nbest = nbest;
        if (!stopwords.empty()) {
          opts.stopwords = load_stopwords(stopwords);
          inputs.emplace_back(stopwords);
        }
        CueLexicon lex = default_lexicon();
        if (!lexicon.empty()) {
          lex = load_lexicon(lexicon);
          inputs.emplace_back(lexicon);
        }
        const PredictionMap preds = predict_dataset(load_dataset(dataset), lex, opts);
        const fs::path o = resolve_out(out_path, "predictions.json");
        write_text_file(o, dump_json(predictions_to_json(preds)));
        RunManifest m = ctx.manifest();
        for (const auto& in : inputs) m.add_input(in);
        m.add_output(o);
        write_manifest(m, o);
        print_json(out, {{"predictions", preds.size()}});
      };
    });
  }

  // evaluate -----------------------------------------------------------------------
  {
    auto* s = add("evaluate", "exact / partial accuracy with HasAns and NoAns breakdown");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--answers", answers, "JSON map qa_id -> final answer")->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const EvalResult r = evaluate(load_dataset(dataset), load_answers(answers));
        ctx.warn(r.warnings);
        const fs::path o = resolve_out(out_path, "report.json");
        fs::path txt = o;
        txt.replace_extension(".txt");
        write_text_file(o, dump_json(eval_report_to_json(r.report)));
        const std::string text = eval_report_to_text(r.report);
        write_text_file(txt, text);
        RunManifest m = ctx.manifest();
        m.add_input(dataset);
        m.add_input(answers);
        m.add_output(o);
        m.add_output(txt);
        write_manifest(m, o);
        out << text;
      };
    });
  }

  // tune-threshold / apply-threshold -----------------------------------------------
  {
    auto* s = add("tune-threshold", "choose the refrain threshold that maximizes dev accuracy");
    s->add_option("--dataset", dataset, "dev dataset")->required();
    s->add_option("--predictions", predictions)->required();
    s->add_option("--metric", metric)->check(CLI::IsMember({"exact", "partial"}));
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const Dataset dev = load_dataset(dataset);
        const ThresholdResult r =
            tune_threshold(dev, load_predictions(predictions), parse_metric_mode(metric));
        const Json j = {{"tau", tau_to_json(r.tau)},
                        {"dev_accuracy", r.dev_accuracy},
                        {"metric_mode", to_string(r.metric_mode)},
                        {"dev_qas", dev.qas.size()}};
        if (!out_path.empty()) {
          write_text_file(out_path, dump_json(j));
          RunManifest m = ctx.manifest();
          m.add_input(dataset);
          m.add_input(predictions);
          m.add_output(out_path);
          write_manifest(m, out_path);
        }
        print_json(out, j);
      };
    });
  }
  {
    auto* s = add("apply-threshold", "turn predictions into final answers at a threshold");
    s->add_option("--predictions", predictions)->required();
    s->add_option("--tau", tau_text, "number, inf or -inf")->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const AnswerMap a =
            apply_null_threshold(load_predictions(predictions), parse_tau(tau_text));
        const fs::path o = resolve_out(out_path, "answers.json");
        write_text_file(o, dump_json(answers_to_json(a)));
        RunManifest m = ctx.manifest();
        m.add_input(predictions);
        m.add_output(o);
        write_manifest(m, o);
        std::size_t refrained = 0;
        for (const auto& [_, v] : a) refrained += v.empty();
        print_json(out, {{"answers", a.size()}, {"refrained", refrained}});
      };
    });
  }

  // pr-curve -------------------------------------------------------------------------
  {
    auto* s = add("pr-curve", "precision-recall points as CSV");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--predictions", predictions)->required();
    s->add_option("--tau", tau_text)->required();
    s->add_option("--metric", metric)->check(CLI::IsMember({"exact", "partial"}));
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const PRCurve c = pr_curve(load_dataset(dataset), load_predictions(predictions),
                                   parse_tau(tau_text), parse_metric_mode(metric));
        const fs::path o = resolve_out(out_path, "pr_curve.csv");
        write_text_file(o, pr_curve_to_csv(c));
        RunManifest m = ctx.manifest();
        m.add_input(dataset);
        m.add_input(predictions);
        m.add_output(o);
        write_manifest(m, o);
        print_json(out, {{"points", c.points.size()},
                         {"recall_upper_bound", c.recall_upper_bound},
                         {"has_ans", c.has_ans_count},
                         {"refrained_has_ans", c.refrained_has_ans}});
      };
    });
  }

  // sample-fn / rescue ---------------------------------------------------------------
  {
    auto* s = add("sample-fn", "seeded sample of false negatives for review");
    s->add_option("--dataset", dataset)->required();
    s->add_option("--answers", answers)->required();
    s->add_option("--predictions", predictions, "attach nbest lists from here");
    s->add_option("--n", n, "sample size")->required();
    s->add_option("--seed", seed)->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const Dataset d = load_dataset(dataset);
        std::optional<PredictionMap> preds;
        if (!predictions.empty()) preds = load_predictions(predictions);
        const auto all = find_false_negatives(d, load_answers(answers),
                                              preds ? &*preds : nullptr);
        const FNSample sample = sample_fns(all, n, seed);
        ctx.warn(sample.warnings);
        const fs::path o = resolve_out(out_path, "fn_sample.json");
        write_text_file(o, dump_json(fn_items_to_json(sample.items)));
        RunManifest m = ctx.manifest();
        m.add_input(dataset);
        m.add_input(answers);
        if (preds) m.add_input(predictions);
        m.add_output(o);
        m.seeds["seed"] = seed;
        write_manifest(m, o);
        print_json(out, {{"false_negatives", all.size()},
                         {"sampled", sample.items.size()}});
      };
    });
  }
  {
    auto* s = add("rescue", "share of FNs whose top non-null candidate overlaps gold");
    s->add_option("--fns", fns, "FN sample JSON")->required();
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const RescueStatistic r = rescue_statistic(load_fn_items(fns));
        ctx.warn(r.warnings);
        const Json j = rescue_statistic_to_json(r);
        if (!out_path.empty()) {
          write_text_file(out_path, dump_json(j));
          RunManifest m = ctx.manifest();
          m.add_input(fns);
          m.add_output(out_path);
          write_manifest(m, out_path);
        }
        print_json(out, j);
      };
    });
  }

  // review-serve / report ------------------------------------------------------------
  {
    auto* s = add("review-serve", "serve the FN review API and UI");
    s->add_option("--fns", fns, "FN sample JSON")->required()->check(CLI::ExistingFile);
    s->add_option("--log", log, "review log (NDJSON, appended)")->required();
    s->add_option("--schema", schema_path, "category schema JSON")
        ->check(CLI::ExistingFile);
    s->add_option("--host", host);
    s->add_option("--port", port)->check(CLI::Range(0, 65535));
    s->add_option("--ui-dir", ui_dir, "static UI bundle")->check(CLI::ExistingDirectory);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        ReviewSessionConfig cfg{fns, log,
                                schema_path.empty() ? default_schema()
                                                    : load_schema(schema_path)};
        ReviewService service(std::move(cfg));
        ReviewHttpServer server(service, ui_dir.empty()
                                             ? std::nullopt
                                             : std::optional<fs::path>(ui_dir));
        err << "serving session " << service.session_id() << " ("
            << service.size() << " items) on http://" << host << ":" << port
            << "/\n";
        server.run(host, port);
      };
    });
  }
  {
    auto* s = add("report", "FN review distribution from a review log");
    s->add_option("--log", log, "review log (NDJSON)")->required();
    auto* fns_opt = s->add_option("--fns", fns, "FN sample JSON (for the sample size)");
    auto* size_opt = s->add_option("--sample-size", sample_size);
    fns_opt->excludes(size_opt);
    s->add_option("--schema", schema_path)->check(CLI::ExistingFile);
    s->add_option("--reviewer", reviewer, "only this reviewer's records");
    s->add_option("--out", out_path);
    s->callback([&, s] {
      action = [&, s] {
        ctx.sub = s;
        const CategorySchema schema =
            schema_path.empty() ? default_schema() : load_schema(schema_path);
        std::size_t size = sample_size;
        if (!fns.empty()) size = load_fn_items(fns).size();
        const ReviewReport r = review_report(
            load_review_log(log), schema, size,
            reviewer.empty() ? std::nullopt : std::optional<std::string>(reviewer));
        const std::string text = review_report_to_text(r);
        if (!out_path.empty()) {
          const fs::path o = out_path;
          fs::path txt = o;
          txt.replace_extension(".txt");
          write_text_file(o, dump_json(review_report_to_json(r)));
          write_text_file(txt, text);
          RunManifest m = ctx.manifest();
          m.add_input(log);
          if (!fns.empty()) m.add_input(fns);
          m.add_output(o);
          m.add_output(txt);
          write_manifest(m, o);
        }
        out << text;
      };
    });
  }

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << Json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump()
        << "\n";
    return kUsage;
  }

  try {
    if (action) action();
    return kOk;
  } catch (const Error& e) {
    err << Json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump()
        << "\n";
  } catch (const std::exception& e) {
    err << Json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump()
        << "\n";
  }
  return kFailure;
}

}  // namespace whyqa::cli
