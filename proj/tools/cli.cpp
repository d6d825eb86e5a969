#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "logcleaner/artifact.hpp"
#include "logcleaner/config.hpp"
#include "logcleaner/detectors.hpp"
#include "logcleaner/grouper.hpp"
#include "logcleaner/ingest.hpp"
#include "logcleaner/profiler.hpp"
#include "logcleaner/report.hpp"
#include "logcleaner/stream_filter.hpp"
#include "logcleaner/study.hpp"
#include "logcleaner/template_miner.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner::cli {

namespace {

/// Flag values as typed; applied over file and environment settings once parsing succeeds.
struct GlobalFlags {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> sets;
    bool print_config = false;
};

struct Paths {
    std::string templates;
    std::string groups;
    std::string trained;
    std::string reduced;
    std::string out;
    std::string timing;
    std::string tag;
    std::string structured;
    std::string method = "retry";
    std::string alpha_sweep;
    std::string input;
    std::string control;
    std::string stats;
    std::uint64_t poll = 1000;
    std::string format = "text";
    std::vector<std::string> files;
};

std::string pct(double f) { return text::format_double(std::round(f * 10000.0) / 100.0) + "%"; }

RunConfig effective_config(const GlobalFlags& flags) {
    RunConfig config;
    if (!flags.config_path.empty()) config = RunConfig::load(flags.config_path);
    config.apply_environment([](const char* name) { return std::getenv(name); });
    for (const auto& set : flags.sets) {
        auto eq = set.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + set + "'");
        config.set(set.substr(0, eq), set.substr(eq + 1));
    }
    for (const auto& [key, value] : flags.overrides) config.set(key, value);
    config.validate();
    return config;
}

std::shared_ptr<const TemplateSet> load_templates(const std::string& path) {
    return std::make_shared<const TemplateSet>(TemplateSet::load(path));
}

std::uint64_t line_budget(const RunConfig& config) {
    if (config.max_lines == 0 && config.family == DatasetFamily::thunderbird) return kThunderbirdDefaultPrefix;
    return config.max_lines;
}

std::vector<LogRecord> load_log(const RunConfig& config) {
    if (config.log.empty()) throw UsageError("no log file given (--log or log = ... in the config)");
    return read_records(config.log, config.header_format(), line_budget(config));
}

LabeledDataset load_dataset(const std::string& groups, const std::string& templates) {
    if (groups.empty() || templates.empty()) throw UsageError("--groups and --templates are required");
    return load_groups(groups, load_templates(templates));
}

/// Removes whatever the reduced set removed, as a view.
LabeledDataset apply_reduced(const LabeledDataset& dataset, const std::string& reduced_path) {
    if (reduced_path.empty()) return dataset;
    auto reduced = ReducedEventSet::load(reduced_path);
    FilterPlan plan(dataset.template_set(), reduced);
    std::vector<EventIndex> removed;
    for (EventIndex e = 0; e < dataset.event_count(); ++e)
        if (plan.removal(e)) removed.push_back(e);
    return dataset.remove_events(removed);
}

int cmd_mine(const RunConfig& config, const Paths& p, std::ostream& out) {
    if (p.out.empty()) throw UsageError("mine needs --out");
    std::size_t lines = 0;
    TemplateSet templates;
    if (!p.structured.empty()) {
        auto parsed = load_parsed(p.structured);
        lines = parsed.events.size();
        templates = std::move(parsed.templates);
    } else {
        auto records = load_log(config);
        lines = records.size();
        templates = mine(records, config.miner).templates;
    }
    templates.save(p.out);
    out << "mined " << templates.size() << " templates from " << lines << " lines -> " << p.out << '\n';
    return ok;
}

int cmd_group(const RunConfig& config, const Paths& p, std::ostream& out) {
    if (p.out.empty() || p.templates.empty()) throw UsageError("group needs --templates and --out");
    auto templates = load_templates(p.templates);
    auto records = load_log(config);
    std::vector<EventIndex> events;
    std::size_t unmatched = 0;
    for (const auto& r : records) {
        auto e = templates->match(r);
        events.push_back(e.value_or(kNoEvent));
        if (!e) ++unmatched;
    }
    std::string label_path = config.labels;
    if (label_path.empty() && config.label_kind == LabelKind::per_line_prefix) label_path = config.log;
    if (label_path.empty()) throw UsageError("no label file given (--labels or labels = ... in the config)");
    auto labels = read_labels(label_path, config.label_kind, line_budget(config));

    GroupingStats stats;
    auto dataset = config.window == 0
                       ? group_by_session(records, events, templates, config.session_pattern, labels,
                                          config.train_ratio, &stats)
                       : group_fixed(records, events, templates, config.window, labels, config.train_ratio, &stats);
    save_groups(p.out, dataset);
    auto train = dataset.train_ratio();
    auto test = dataset.test_ratio();
    out << "groups " << dataset.group_count() << " (train " << train.groups << ", " << train.anomalous
        << " anomalous; test " << test.groups << ", " << test.anomalous << " anomalous)\n"
        << "unmatched lines " << unmatched << ", dropped records " << stats.dropped_records
        << ", unlabeled sessions " << stats.unlabeled_sessions << " -> " << p.out << '\n';
    return ok;
}

int cmd_train(const RunConfig& config, const Paths& p, std::ostream& out) {
    if (p.out.empty()) throw UsageError("train needs --out");
    auto dataset = apply_reduced(load_dataset(p.groups, p.templates), p.reduced);
    auto spec = config.model_spec();
    auto features = split_features(dataset);
    auto model = train(spec, features.train, config.seed);
    save_model(p.out, *model);
    out << "trained " << spec.name() << " on " << features.train.rows << " groups x " << features.train.cols()
        << " events -> " << p.out << '\n';
    return ok;
}

int cmd_eval(const Paths& p, std::ostream& out) {
    if (p.trained.empty()) throw UsageError("eval needs --trained");
    auto dataset = apply_reduced(load_dataset(p.groups, p.templates), p.reduced);
    auto model = load_model(p.trained);
    auto test = featurize(dataset, dataset.split_point(), dataset.group_count());
    auto prediction = predict(*model, test);
    auto metrics = evaluate(prediction.labels, test.labels);
    metrics.inference_millis = prediction.inference_millis;
    const std::string tag = p.tag.empty() ? std::string(to_string(model->kind())) : p.tag;
    if (!p.out.empty()) {
        auto f = open_output(p.out);
        write_metrics(f, metrics, tag);
    }
    if (!p.timing.empty()) {
        auto f = open_output(p.timing);
        write_timing(f, {tag, std::string(to_string(model->kind())), test.rows, prediction.inference_millis});
    }
    out << tag << ": precision " << text::format_double(metrics.precision) << " recall "
        << text::format_double(metrics.recall) << " f1 " << text::format_double(metrics.f1) << " (inference "
        << text::format_double(metrics.inference_millis) << " ms over " << test.rows << " groups)\n";
    return ok;
}

std::vector<double> parse_alphas(const std::string& list, double fallback) {
    if (list.empty()) return {fallback};
    std::vector<double> out;
    for (auto item : text::split(list, ',')) {
        double a = text::parse_double(text::trim(item));
        if (!(a >= 0.0 && a < 1.0)) throw UsageError("alpha must be in [0, 1)");
        out.push_back(a);
    }
    return out;
}

int cmd_study(const RunConfig& config, const Paths& p, std::ostream& out, std::ostream& err) {
    if (p.out.empty()) throw UsageError("study needs --out (a path prefix)");
    if (p.method != "retry" && p.method != "cluster") throw UsageError("--method is retry or cluster");
    auto dataset = load_dataset(p.groups, p.templates);
    auto spec = config.model_spec();
    const auto alphas = parse_alphas(p.alpha_sweep, config.alpha);
    for (double alpha : alphas) {
        RetryOptions retry{alpha, config.order, config.multi_pass, config.seed};
        ReductionTrace trace;
        if (p.method == "retry") {
            trace = retry_reduce(dataset, spec, retry);
        } else {
            auto result = cluster_reduce(dataset, spec, {retry, 50, 100});
            for (const auto& w : result.warnings) err << "warning: " << w << '\n';
            trace = std::move(result.trace);
        }
        auto categories = categorize_events(trace, config.epsilon);
        std::string prefix = p.out;
        if (alphas.size() > 1) prefix += ".alpha" + text::format_double(alpha);
        save_trace(prefix + ".trace", trace);
        {
            auto f = open_output(prefix + ".categories");
            write_categories(f, categories);
        }
        write_study_summary(out, trace, categories);
        if (!trace.sound()) err << "warning: final F1 fell below (1 - alpha) of the baseline\n";
        out << "-> " << prefix << ".trace, " << prefix << ".categories\n";
    }
    return ok;
}

int cmd_profile(const RunConfig& config, const Paths& p, std::ostream& out) {
    if (p.out.empty()) throw UsageError("profile needs --out");
    auto dataset = load_dataset(p.groups, p.templates);
    auto scope = config.profile_train_only ? training_view(dataset) : dataset;
    auto result = profile(scope, config.profile);
    result.reduced.save(p.out);
    const char* stages[] = {"none", "+tfidf", "+anti", "+dup"};
    out << "stage\tretained\tevents_reduced\n";
    for (std::size_t i = 0; i < 4; ++i)
        out << stages[i] << '\t' << result.retained_after[i] << '\t' << pct(result.events_reduction(i)) << '\n';
    out << "outliers kept " << result.reduced.outliers().size() << ", predicted line reduction "
        << pct(result.lines_reduction()) << '\n'
        << "hash " << result.reduced.content_hash() << " -> " << p.out << '\n';
    return ok;
}

int cmd_filter(const RunConfig& config, const Paths& p, std::istream& in, std::ostream& out, std::ostream& err) {
    if (p.templates.empty() || p.reduced.empty()) throw UsageError("filter needs --templates and --reduced");
    StreamFilter filter(load_templates(p.templates), ReducedEventSet::load(p.reduced), config.header_format());
    std::optional<std::ifstream> file_in;
    std::optional<std::ofstream> file_out;
    std::optional<std::ofstream> stats_file;
    if (!p.input.empty()) file_in.emplace(open_input(p.input));
    if (!p.out.empty()) file_out.emplace(open_output(p.out));
    if (!p.stats.empty()) stats_file.emplace(open_output(p.stats));
    StreamOptions options;
    if (!p.control.empty()) options.control_file = p.control;
    options.poll_every = p.poll;
    options.stats_out = stats_file ? &*stats_file : &err;
    filter.run(file_in ? *file_in : in, file_out ? *file_out : out, options);
    return ok;
}

int cmd_reload(const Paths& p, std::ostream& out) {
    if (p.control.empty() || p.templates.empty() || p.files.size() != 1)
        throw UsageError("reload needs --control, --templates and one reduced file");
    write_reload_request(p.control, p.files.front(), TemplateSet::load(p.templates));
    out << "requested reload of " << p.files.front() << " via " << p.control << '\n';
    return ok;
}

int cmd_report(const Paths& p, std::ostream& out) {
    if (p.files.empty()) throw UsageError("report needs at least one artifact file");
    if (p.format != "text" && p.format != "csv") throw UsageError("--format is text or csv");
    std::vector<std::filesystem::path> paths(p.files.begin(), p.files.end());
    auto inputs = load_report_inputs(paths);
    auto format = p.format == "csv" ? ReportFormat::csv : ReportFormat::text;
    if (p.out.empty()) {
        write_report(out, inputs, format);
    } else {
        auto f = open_output(p.out);
        write_report(f, inputs, format);
    }
    return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Log event reduction for anomaly detection", "logcleaner"};
    app.fallthrough();
    app.require_subcommand(0, 1);

    GlobalFlags flags;
    Paths p;
    app.add_option("--config", flags.config_path, "Run configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", flags.sets, "Override any config key (key=value)");
    app.add_flag("--print-config", flags.print_config, "Print the effective configuration");
    auto overriding = [&](std::string name, std::string key, std::string help) {
        app.add_option_function<std::string>(
            name, [&flags, key](const std::string& v) { flags.overrides.emplace_back(key, v); }, help);
    };
    overriding("--seed", "seed", "Random seed");
    overriding("--alpha", "alpha", "Tolerated F1 degradation for the retry loop");
    overriding("--cutoff", "cutoff", "Document-frequency cutoff for sporadic events");
    overriding("--theta-anti", "theta_anti", "MI threshold for anti-events");
    overriding("--theta-dup", "theta_dup", "OPTICS min_samples for duplicative events");
    overriding("--window", "window", "'session' or a fixed window length");
    overriding("--model", "model", "lr | svm | dt | iforest | single:<event> | external:<command>");
    overriding("--family", "family", "hdfs | bgl | thunderbird | generic");
    overriding("--log", "log", "Raw log file");
    overriding("--labels", "labels", "Label file");

    auto* mine_cmd = app.add_subcommand("mine", "Mine event templates from the raw log");
    mine_cmd->add_option("-o,--out", p.out, "Templates file to write");
    mine_cmd->add_option("--structured", p.structured, "Take templates from a structured CSV instead");

    auto* group_cmd = app.add_subcommand("group", "Group matched lines into labeled event groups");
    group_cmd->add_option("--templates", p.templates);
    group_cmd->add_option("-o,--out", p.out, "Groups file to write");

    auto* train_cmd = app.add_subcommand("train", "Train a detector on the training groups");
    train_cmd->add_option("--templates", p.templates);
    train_cmd->add_option("--groups", p.groups);
    train_cmd->add_option("--reduced", p.reduced, "Train on the events a reduced set retains");
    train_cmd->add_option("-o,--out", p.out, "Model file to write");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a trained detector on the test groups");
    eval_cmd->add_option("--templates", p.templates);
    eval_cmd->add_option("--groups", p.groups);
    eval_cmd->add_option("--trained", p.trained, "Model file");
    eval_cmd->add_option("--reduced", p.reduced, "Evaluate on the events a reduced set retains");
    eval_cmd->add_option("--tag", p.tag, "Label for the metrics row");
    eval_cmd->add_option("--timing", p.timing, "Also write inference timing here");
    eval_cmd->add_option("-o,--out", p.out, "Metrics file to write");

    auto* study_cmd = app.add_subcommand("study", "Retry- or clustering-based event reduction study");
    study_cmd->add_option("--templates", p.templates);
    study_cmd->add_option("--groups", p.groups);
    study_cmd->add_option("--method", p.method, "retry | cluster");
    study_cmd->add_option("--alpha-sweep", p.alpha_sweep, "Comma-separated alphas, one trace each");
    study_cmd->add_option("-o,--out", p.out, "Output path prefix");

    auto* profile_cmd = app.add_subcommand("profile", "Build a reduced event set");
    profile_cmd->add_option("--templates", p.templates);
    profile_cmd->add_option("--groups", p.groups);
    profile_cmd->add_option("-o,--out", p.out, "Reduced event set to write");

    auto* filter_cmd = app.add_subcommand("filter", "Drop lines of removed events from a log stream");
    filter_cmd->add_option("--templates", p.templates);
    filter_cmd->add_option("--reduced", p.reduced);
    filter_cmd->add_option("-i,--input", p.input, "Read this file instead of stdin");
    filter_cmd->add_option("-o,--out", p.out, "Write here instead of stdout");
    filter_cmd->add_option("--control", p.control, "Control file polled for reload/stats requests");
    filter_cmd->add_option("--poll", p.poll, "Lines between control-file polls");
    filter_cmd->add_option("--stats", p.stats, "Write stats here instead of stderr");

    auto* reload_cmd = app.add_subcommand("reload", "Ask a running filter to switch reduced sets");
    reload_cmd->add_option("--control", p.control);
    reload_cmd->add_option("--templates", p.templates);
    reload_cmd->add_option("reduced", p.files, "Reduced event set");

    auto* report_cmd = app.add_subcommand("report", "Tables from study, profile, metrics and timing artifacts");
    report_cmd->add_option("--format", p.format, "text | csv");
    report_cmd->add_option("-o,--out", p.out);
    report_cmd->add_option("files", p.files, "Artifact files");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "logcleaner: " << e.what() << '\n';
        return usage;
    }

    try {
        auto config = effective_config(flags);
        if (flags.print_config) config.write(out);
        if (app.get_subcommands().empty()) {
            if (flags.print_config) return ok;
            throw UsageError("a subcommand is required (see --help)");
        }
        auto* sub = app.get_subcommands().front();
        const auto name = sub->get_name();
        if (name == "mine") return cmd_mine(config, p, out);
        if (name == "group") return cmd_group(config, p, out);
        if (name == "train") return cmd_train(config, p, out);
        if (name == "eval") return cmd_eval(p, out);
        if (name == "study") return cmd_study(config, p, out, err);
        if (name == "profile") return cmd_profile(config, p, out);
        if (name == "filter") return cmd_filter(config, p, in, out, err);
        if (name == "reload") return cmd_reload(p, out);
        if (name == "report") return cmd_report(p, out);
        return usage;
    } catch (const UsageError& e) {
        err << "logcleaner: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "logcleaner: " << e.what() << '\n';
        return data;
    }
}

}  // namespace logcleaner::cli
