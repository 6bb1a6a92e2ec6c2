#include "evalign/cli.hpp"

#include "evalign/corpus.hpp"
#include "evalign/ensemble.hpp"
#include "evalign/error.hpp"
#include "evalign/eval.hpp"
#include "evalign/io.hpp"
#include "evalign/prompt.hpp"
#include "evalign/score_table.hpp"
#include "evalign/scorer_adapter.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <ostream>

namespace evalign::cli {

namespace {

using Clock = std::chrono::steady_clock;

/// Config, inputs and per-stage timings written next to each output file.
class RunManifest {
public:
    explicit RunManifest(std::string command) : command_(std::move(command)) {}

    void input(const std::string& role, const std::string& path)
    {
        if (!path.empty()) {
            inputs_[role] = path;
        }
    }
    void config(const EnsembleConfig& cfg) { config_ = cfg; }
    void output(const std::string& path) { outputs_.push_back(path); }

    template <typename F>
    auto stage(const std::string& name, F&& body)
    {
        auto start = Clock::now();
        struct Record {
            RunManifest* self;
            std::string name;
            Clock::time_point start;
            ~Record()
            {
                self->stages_.emplace_back(
                    name, std::chrono::duration<double, std::milli>(Clock::now() - start).count());
            }
        } record{this, name, start};
        return body();
    }

    std::string to_json() const
    {
        nlohmann::ordered_json j;
        j["tool"] = "evalign";
        j["version"] = EVALIGN_VERSION;
        j["command"] = command_;
        j["config"] = config_ ? nlohmann::ordered_json::parse(config_to_json(*config_))
                              : nlohmann::ordered_json(nullptr);
        j["inputs"] = nlohmann::ordered_json::object();
        for (const auto& [role, path] : inputs_) {
            j["inputs"][role] = path;
        }
        j["outputs"] = outputs_;
        j["durations_ms"] = nlohmann::ordered_json::object();
        for (const auto& [name, ms] : stages_) {
            j["durations_ms"][name] = ms;
        }
        return j.dump(2) + "\n";
    }

private:
    std::string command_;
    std::optional<EnsembleConfig> config_;
    std::map<std::string, std::string> inputs_;
    std::vector<std::string> outputs_;
    std::vector<std::pair<std::string, double>> stages_;
};

struct Options {
    std::string config_path;
    bool quiet = false;

    std::string cases;
    std::string answers;
    std::string gold;
    std::string pred;
    std::string out;
    std::string method;
    std::string bm25_scores;
    std::string tfidf_scores;
    std::string ce_scores;
    bool lexical_only = false;
    std::string gold_mode = "citations";
    std::string case_id;
    std::optional<double> grid_min;
    std::optional<double> grid_max;
    double grid_step = 0.005;
    std::vector<double> grid;
};

EnsembleConfig resolve_config(const Options& o, RunManifest& manifest)
{
    std::string path = o.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("EVALIGN_CONFIG"); env && *env) {
            path = env;
        }
    }
    EnsembleConfig cfg;
    if (!path.empty()) {
        manifest.input("config", path);
        cfg = parse_config(read_file(path));
    }
    if (o.lexical_only) {
        cfg = lexical_only(cfg);
    }
    manifest.config(cfg);
    return cfg;
}

std::vector<CaseRecord> load_cases(const Options& o, RunManifest& manifest)
{
    manifest.input("cases", o.cases);
    return manifest.stage("parse_cases", [&] { return parse_cases(read_file(o.cases)); });
}

std::vector<GoldAnswer> load_answers(const std::string& path, const std::string& role,
                                     std::span<const CaseRecord> cases, RunManifest& manifest)
{
    manifest.input(role, path);
    return manifest.stage("parse_" + role, [&] {
        auto golds = parse_gold(read_file(path));
        validate_gold(cases, golds);
        return golds;
    });
}

GoldMode resolve_gold_mode(const Options& o)
{
    auto mode = parse_gold_mode(o.gold_mode);
    if (!mode) {
        throw ValidationError("unknown gold mode " + o.gold_mode);
    }
    return *mode;
}

void write_output(const Options& o, RunManifest& manifest, std::string_view content)
{
    manifest.output(o.out);
    write_file_atomic(o.out, content);
    write_file_atomic(o.out + ".manifest.json", manifest.to_json());
}

/// Lexical tables come from files when given, else are computed in-process.
ScoreBundle load_bundle(const Options& o, const EnsembleConfig& cfg,
                        std::span<const CaseRecord> cases, std::span<const GoldAnswer> answers,
                        RunManifest& manifest)
{
    ScoreBundle bundle;
    auto lexical = [&](const std::string& path, Method m, const char* role) {
        if (!path.empty()) {
            manifest.input(role, path);
            return manifest.stage(std::string("load_") + role,
                                  [&] { return read_score_table(read_file(path)); });
        }
        return manifest.stage(std::string("score_") + std::string(to_string(m)),
                              [&] { return score_method(m, cases, answers, cfg.bm25); });
    };
    bundle.bm25 = lexical(o.bm25_scores, Method::bm25, "bm25_scores");
    bundle.tfidf = lexical(o.tfidf_scores, Method::tfidf, "tfidf_scores");
    if (!o.ce_scores.empty() && !o.lexical_only) {
        manifest.input("ce_scores", o.ce_scores);
        bundle.external = manifest.stage("load_ce_scores", [&] { return load_scores(read_file(o.ce_scores)); });
    }
    return bundle;
}

void cmd_parse(const Options& o, std::ostream& out)
{
    RunManifest manifest("parse");
    auto cases = load_cases(o, manifest);
    std::vector<GoldAnswer> golds;
    if (!o.answers.empty()) {
        golds = load_answers(o.answers, "answers", cases, manifest);
    }
    if (o.quiet) {
        return;
    }
    out << "case_id\tsentences\tlabels\tanswer_sentences\tcited\n";
    for (const auto& c : cases) {
        const auto* g = find_gold(golds, c.case_id);
        out << c.case_id << '\t' << c.size() << '\t' << (c.labels ? "yes" : "no") << '\t';
        if (g) {
            out << g->answer_sentences.size() << '\t'
                << gold_set(c, g, GoldMode::citations).cited.size() << '\n';
        } else {
            out << "-\t-\n";
        }
    }
}

void cmd_score(const Options& o, std::ostream& out)
{
    RunManifest manifest("score " + o.method);
    auto cfg = resolve_config(o, manifest);
    auto cases = load_cases(o, manifest);
    auto answers = load_answers(o.answers, "answers", cases, manifest);
    require_answers(cases, answers);
    const Method method = o.method == "bm25" ? Method::bm25 : Method::tfidf;
    auto table = manifest.stage("score", [&] { return score_method(method, cases, answers, cfg.bm25); });
    write_output(o, manifest, score_table_to_tsv(table));
    if (!o.quiet) {
        out << "wrote " << table.size() << " " << o.method << " scores for " << cases.size()
            << " cases to " << o.out << '\n';
    }
}

void cmd_ensemble(const Options& o, std::ostream& out)
{
    RunManifest manifest(o.lexical_only ? "ensemble --lexical-only" : "ensemble");
    auto cfg = resolve_config(o, manifest);
    auto cases = load_cases(o, manifest);
    std::vector<GoldAnswer> answers;
    if (!o.answers.empty()) {
        answers = load_answers(o.answers, "answers", cases, manifest);
    } else if (o.bm25_scores.empty() || o.tfidf_scores.empty()) {
        throw ValidationError("--answers is required unless both lexical score files are given");
    }
    auto bundle = load_bundle(o, cfg, cases, answers, manifest);
    auto results = manifest.stage("ensemble", [&] { return run_ensemble(cases, bundle, cfg); });
    std::vector<CitationSet> preds;
    std::size_t cited = 0;
    for (auto& r : results) {
        cited += r.citations.cited.size();
        preds.push_back(std::move(r.citations));
    }
    write_output(o, manifest, citations_to_json(preds));
    if (!o.quiet) {
        out << "cited " << cited << " sentences across " << preds.size() << " cases; wrote "
            << o.out << '\n';
    }
}

void print_summary(std::ostream& out, const EvalReport& report)
{
    out << "micro  P=" << percent(report.micro.p) << "  R=" << percent(report.micro.r)
        << "  F1=" << percent(report.micro.f1) << '\n';
    out << "macro  P=" << percent(report.macro.p) << "  R=" << percent(report.macro.r)
        << "  F1=" << percent(report.macro.f1) << '\n';
}

void cmd_evaluate(const Options& o, std::ostream& out)
{
    RunManifest manifest("evaluate");
    const auto mode = resolve_gold_mode(o);
    auto cases = load_cases(o, manifest);
    std::vector<GoldAnswer> golds;
    if (!o.gold.empty()) {
        golds = load_answers(o.gold, "gold", cases, manifest);
    }
    manifest.input("predictions", o.pred);
    auto preds = manifest.stage("parse_predictions", [&] { return read_citations(read_file(o.pred)); });
    auto report = manifest.stage("evaluate", [&] { return evaluate(cases, golds, preds, mode); });
    write_output(o, manifest, report_to_json(report));
    if (!o.quiet) {
        print_summary(out, report);
    }
}

void cmd_calibrate(const Options& o, std::ostream& out)
{
    RunManifest manifest("calibrate");
    const auto mode = resolve_gold_mode(o);
    auto cfg = resolve_config(o, manifest);
    auto cases = load_cases(o, manifest);
    auto answers = load_answers(o.answers, "answers", cases, manifest);
    auto bundle = load_bundle(o, cfg, cases, answers, manifest);

    std::vector<double> grid = o.grid;
    if (grid.empty()) {
        grid = make_grid(o.grid_min.value_or(0.0), o.grid_max.value_or(cfg.total_weight()),
                         o.grid_step);
    }
    auto result = manifest.stage("calibrate", [&] {
        return calibrate(cases, answers, bundle, cfg, grid, mode);
    });
    write_output(o, manifest, calibration_to_tsv(result));
    if (!o.quiet) {
        const auto& best = result.best_point();
        out << result.points.size() << " grid points; best tau_ens=" << best.tau_ens
            << " micro-F1=" << percent(best.report.micro.f1) << '\n';
    }
}

void cmd_prompt(const Options& o, std::ostream& out)
{
    RunManifest manifest("prompt");
    auto cases = load_cases(o, manifest);
    const auto* c = find_case(cases, o.case_id);
    if (!c) {
        throw ValidationError("no case with id " + o.case_id);
    }
    auto text = render_prompt(*c);
    if (o.out.empty()) {
        out << text << '\n';
    } else {
        write_file_atomic(o.out, text);
    }
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Sentence-level evidence alignment for clinical answers", "evalign"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_version_flag("--version", EVALIGN_VERSION);
    app.add_option("--config", o.config_path, "Ensemble config JSON (fallback: $EVALIGN_CONFIG)");
    app.add_flag("--quiet", o.quiet, "Suppress summaries on stdout");

    std::function<void(const Options&, std::ostream&)> action;

    auto* parse = app.add_subcommand("parse", "Validate a case file (and optionally answers)");
    parse->add_option("--cases", o.cases, "Case XML")->required();
    parse->add_option("--answers", o.answers, "Gold/answer JSON");
    parse->callback([&] { action = cmd_parse; });

    auto* score = app.add_subcommand("score", "Write raw lexical scores as TSV");
    score->add_option("--method", o.method, "bm25 or tfidf")
        ->required()
        ->check(CLI::IsMember({"bm25", "tfidf"}));
    score->add_option("--cases", o.cases, "Case XML")->required();
    score->add_option("--answers", o.answers, "Answer JSON used as queries")->required();
    score->add_option("--out", o.out, "Output TSV")->required();
    score->callback([&] { action = cmd_score; });

    auto add_score_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--bm25-scores", o.bm25_scores, "Raw BM25 TSV (computed if absent)");
        cmd->add_option("--tfidf-scores", o.tfidf_scores, "Raw TF-IDF TSV (computed if absent)");
        cmd->add_option("--ce-scores", o.ce_scores, "External reranker TSV, scores in [0,1]");
        cmd->add_flag("--lexical-only", o.lexical_only, "Drop the reranker (w_ce = 0)");
    };

    auto* ensemble = app.add_subcommand("ensemble", "Combine method votes into citations");
    ensemble->add_option("--cases", o.cases, "Case XML")->required();
    ensemble->add_option("--answers", o.answers, "Answer JSON used as queries");
    add_score_inputs(ensemble);
    ensemble->add_option("--out", o.out, "Prediction JSON")->required();
    ensemble->callback([&] { action = cmd_ensemble; });

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Micro/macro P/R/F1 of predictions");
    evaluate_cmd->add_option("--cases", o.cases, "Case XML")->required();
    evaluate_cmd->add_option("--gold", o.gold, "Gold JSON (required for --gold-mode citations)");
    evaluate_cmd->add_option("--pred", o.pred, "Prediction JSON")->required();
    evaluate_cmd->add_option("--gold-mode", o.gold_mode, "citations|essential|essential_plus_supplementary")
        ->check(CLI::IsMember({"citations", "essential", "essential_plus_supplementary"}));
    evaluate_cmd->add_option("--out", o.out, "Report JSON")->required();
    evaluate_cmd->callback([&] { action = cmd_evaluate; });

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Sweep tau_ens and report micro scores");
    calibrate_cmd->add_option("--cases", o.cases, "Case XML")->required();
    calibrate_cmd->add_option("--answers", o.answers, "Gold JSON (queries and reference)")->required();
    add_score_inputs(calibrate_cmd);
    calibrate_cmd->add_option("--gold-mode", o.gold_mode, "citations|essential|essential_plus_supplementary")
        ->check(CLI::IsMember({"citations", "essential", "essential_plus_supplementary"}));
    calibrate_cmd->add_option("--grid", o.grid, "Explicit ascending tau_ens values");
    calibrate_cmd->add_option("--grid-min", o.grid_min, "Grid start (default 0)");
    calibrate_cmd->add_option("--grid-max", o.grid_max, "Grid end (default: sum of weights)");
    calibrate_cmd->add_option("--grid-step", o.grid_step, "Grid step (default 0.005)");
    calibrate_cmd->add_option("--out", o.out, "Calibration TSV")->required();
    calibrate_cmd->callback([&] { action = cmd_calibrate; });

    auto* prompt = app.add_subcommand("prompt", "Render the answer-generation prompt of a case");
    prompt->add_option("--cases", o.cases, "Case XML")->required();
    prompt->add_option("--case-id", o.case_id, "Case to render")->required();
    prompt->add_option("--out", o.out, "Write to a file instead of stdout");
    prompt->callback([&] { action = cmd_prompt; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err);
        }
        err << "error: " << e.what() << "\n\n";
        const CLI::App* failing = &app;
        for (auto* sub : app.get_subcommands()) {
            failing = sub;
        }
        err << failing->help();
        return invalid_input;
    }

    try {
        action(o, out);
        return ok;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return io_failure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return invalid_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return io_failure;
    }
}

} // namespace evalign::cli
