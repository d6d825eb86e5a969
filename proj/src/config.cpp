#include "logcleaner/config.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include "logcleaner/artifact.hpp"
#include "logcleaner/text.hpp"

namespace logcleaner {

namespace {

std::string flag(bool v) { return v ? "true" : "false"; }

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("expected true or false, got '" + std::string(v) + "'");
}

double to_double(std::string_view v) {
    try {
        return text::parse_double(v);
    } catch (const Error&) {
        throw UsageError("expected a number, got '" + std::string(v) + "'");
    }
}

std::uint64_t to_uint(std::string_view v) {
    try {
        return text::parse_uint(v);
    } catch (const Error&) {
        throw UsageError("expected a non-negative integer, got '" + std::string(v) + "'");
    }
}

std::string_view label_kind_name(LabelKind k) {
    return k == LabelKind::per_line_prefix ? "per-line-prefix" : "per-session-table";
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
    return out;
}

struct Key {
    std::string_view name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, std::string_view)> set;
};

const std::vector<Key>& key_table() {
    static const std::vector<Key> table = {
        {"family", [](const RunConfig& c) { return std::string(to_string(c.family)); },
         [](RunConfig& c, std::string_view v) { c.family = parse_family(v); }},
        {"log", [](const RunConfig& c) { return c.log; }, [](RunConfig& c, std::string_view v) { c.log = v; }},
        {"labels", [](const RunConfig& c) { return c.labels; },
         [](RunConfig& c, std::string_view v) { c.labels = v; }},
        {"label_kind", [](const RunConfig& c) { return std::string(label_kind_name(c.label_kind)); },
         [](RunConfig& c, std::string_view v) { c.label_kind = parse_label_kind(v); }},
        {"log_format", [](const RunConfig& c) { return c.log_format; },
         [](RunConfig& c, std::string_view v) { c.log_format = v; }},
        {"max_lines", [](const RunConfig& c) { return std::to_string(c.max_lines); },
         [](RunConfig& c, std::string_view v) { c.max_lines = to_uint(v); }},
        {"window", [](const RunConfig& c) { return c.window == 0 ? std::string("session") : std::to_string(c.window); },
         [](RunConfig& c, std::string_view v) { c.window = parse_window(v); }},
        {"session_pattern", [](const RunConfig& c) { return c.session_pattern; },
         [](RunConfig& c, std::string_view v) { c.session_pattern = v; }},
        {"train_ratio", [](const RunConfig& c) { return text::format_double(c.train_ratio); },
         [](RunConfig& c, std::string_view v) { c.train_ratio = to_double(v); }},
        {"miner_depth", [](const RunConfig& c) { return std::to_string(c.miner.depth); },
         [](RunConfig& c, std::string_view v) { c.miner.depth = to_uint(v); }},
        {"miner_similarity", [](const RunConfig& c) { return text::format_double(c.miner.similarity); },
         [](RunConfig& c, std::string_view v) { c.miner.similarity = to_double(v); }},
        {"miner_max_children", [](const RunConfig& c) { return std::to_string(c.miner.max_children); },
         [](RunConfig& c, std::string_view v) { c.miner.max_children = to_uint(v); }},
        {"model", [](const RunConfig& c) { return c.model; }, [](RunConfig& c, std::string_view v) { c.model = v; }},
        {"seed", [](const RunConfig& c) { return std::to_string(c.seed); },
         [](RunConfig& c, std::string_view v) { c.seed = to_uint(v); }},
        {"alpha", [](const RunConfig& c) { return text::format_double(c.alpha); },
         [](RunConfig& c, std::string_view v) { c.alpha = to_double(v); }},
        {"order", [](const RunConfig& c) { return std::string(to_string(c.order)); },
         [](RunConfig& c, std::string_view v) { c.order = parse_candidate_order(v); }},
        {"multi_pass", [](const RunConfig& c) { return flag(c.multi_pass); },
         [](RunConfig& c, std::string_view v) { c.multi_pass = parse_bool(v); }},
        {"epsilon", [](const RunConfig& c) { return text::format_double(c.epsilon); },
         [](RunConfig& c, std::string_view v) { c.epsilon = to_double(v); }},
        {"cutoff", [](const RunConfig& c) { return text::format_double(c.profile.cutoff); },
         [](RunConfig& c, std::string_view v) { c.profile.cutoff = to_double(v); }},
        {"theta_anti", [](const RunConfig& c) { return text::format_double(c.profile.theta_anti); },
         [](RunConfig& c, std::string_view v) { c.profile.theta_anti = to_double(v); }},
        {"theta_dup", [](const RunConfig& c) { return std::to_string(c.profile.theta_dup); },
         [](RunConfig& c, std::string_view v) { c.profile.theta_dup = to_uint(v); }},
        {"xi", [](const RunConfig& c) { return text::format_double(c.profile.xi); },
         [](RunConfig& c, std::string_view v) { c.profile.xi = to_double(v); }},
        {"stage_tfidf", [](const RunConfig& c) { return flag(c.profile.tfidf); },
         [](RunConfig& c, std::string_view v) { c.profile.tfidf = parse_bool(v); }},
        {"stage_anti", [](const RunConfig& c) { return flag(c.profile.anti); },
         [](RunConfig& c, std::string_view v) { c.profile.anti = parse_bool(v); }},
        {"stage_dup", [](const RunConfig& c) { return flag(c.profile.duplicative); },
         [](RunConfig& c, std::string_view v) { c.profile.duplicative = parse_bool(v); }},
        {"miller_madow", [](const RunConfig& c) { return flag(c.profile.miller_madow); },
         [](RunConfig& c, std::string_view v) { c.profile.miller_madow = parse_bool(v); }},
        {"whitelist", [](const RunConfig& c) { return join(c.profile.whitelist); },
         [](RunConfig& c, std::string_view v) {
             c.profile.whitelist.clear();
             if (!v.empty())
                 for (auto id : text::split(v, ',')) c.profile.whitelist.emplace_back(text::trim(id));
         }},
        {"profile_scope", [](const RunConfig& c) { return std::string(c.profile_train_only ? "train" : "all"); },
         [](RunConfig& c, std::string_view v) {
             if (v != "train" && v != "all") throw UsageError("profile_scope is train or all");
             c.profile_train_only = v == "train";
         }},
    };
    return table;
}

const Key& find_key(std::string_view name) {
    for (const auto& k : key_table())
        if (k.name == name) return k;
    throw UsageError("unknown config key '" + std::string(name) + "'");
}

}  // namespace

std::size_t parse_window(std::string_view text) {
    if (text == "session") return 0;
    std::uint64_t n = 0;
    try {
        n = text::parse_uint(text);
    } catch (const Error&) {
        throw UsageError("window is 'session' or a positive line count, got '" + std::string(text) + "'");
    }
    if (n == 0) throw UsageError("window size must be positive");
    return n;
}

std::vector<std::string> RunConfig::keys() {
    std::vector<std::string> out;
    for (const auto& k : key_table()) out.emplace_back(k.name);
    return out;
}

std::string RunConfig::get(std::string_view key) const { return find_key(key).get(*this); }

void RunConfig::set(std::string_view key, std::string_view value) {
    try {
        find_key(key).set(*this, text::trim(value));
    } catch (const DataError& e) {
        throw UsageError(std::string(key) + ": " + e.what());
    } catch (const UsageError& e) {
        throw UsageError(std::string(key) + ": " + e.what());
    }
}

void RunConfig::apply_environment(const std::function<const char*(const char*)>& getenv_fn) {
    for (const auto& k : key_table()) {
        std::string name(kEnvPrefix);
        for (char ch : k.name) name += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* v = getenv_fn(name.c_str())) set(k.name, v);
    }
}

void RunConfig::validate() const {
    miner.validate();
    profile.validate();
    if (!(train_ratio > 0.0 && train_ratio < 1.0)) throw UsageError("train_ratio must be in (0, 1)");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw UsageError("alpha must be in [0, 1)");
    if (!(epsilon >= 0.0)) throw UsageError("epsilon must be non-negative");
    (void)model_spec();
}

HeaderFormat RunConfig::header_format() const {
    return log_format.empty() ? HeaderFormat::builtin(family) : HeaderFormat::parse(log_format);
}

ModelSpec RunConfig::model_spec() const { return ModelSpec::parse(model); }

void RunConfig::write(std::ostream& out) const {
    out << artifact_header("config") << '\n';
    for (const auto& k : key_table()) out << k.name << " = " << k.get(*this) << '\n';
}

RunConfig RunConfig::read(std::istream& in) {
    expect_artifact_header(in, "config");
    RunConfig c;
    std::string line;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string_view::npos)
            throw UsageError("config line " + std::to_string(number) + ": expected key = value");
        c.set(text::trim(t.substr(0, eq)), text::trim(t.substr(eq + 1)));
    }
    return c;
}

void RunConfig::save(const std::filesystem::path& path) const {
    auto out = open_output(path);
    write(out);
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read(in);
}

}  // namespace logcleaner
