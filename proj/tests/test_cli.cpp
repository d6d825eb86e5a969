#include <doctest.h>

#include <cstdlib>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "cli.hpp"
#include "logcleaner/config.hpp"
#include "logcleaner/report.hpp"
#include "synthetic.hpp"

using namespace logcleaner;
using logcleaner::testing::fixture;
using logcleaner::testing::read_file;
using logcleaner::testing::TempDir;
using logcleaner::testing::write_file;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args, const std::string& input = "") {
    std::istringstream in(input);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> hdfs_flags() {
    return {"--family", "hdfs", "--log", fixture("hdfs_sample.log").string(), "--labels",
            fixture("hdfs_labels.csv").string()};
}

std::vector<std::string> with(std::vector<std::string> head, std::initializer_list<std::string> tail) {
    head.insert(head.end(), tail);
    return head;
}

// Runs mine, group, train, eval, profile into dir; returns the eval exit codes' sum.
int pipeline(const TempDir& dir) {
    const auto t = (dir / "templates").string(), g = (dir / "groups").string(), m = (dir / "model").string();
    int codes = 0;
    codes += invoke(with(hdfs_flags(), {"mine", "-o", t})).code;
    codes += invoke(with(hdfs_flags(), {"group", "--templates", t, "-o", g})).code;
    codes += invoke(with(hdfs_flags(), {"train", "--templates", t, "--groups", g, "-o", m})).code;
    codes += invoke(with(hdfs_flags(), {"eval", "--templates", t, "--groups", g, "--trained", m, "--tag", "unreduced",
                                        "-o", (dir / "before.metrics").string()}))
                 .code;
    codes += invoke(with(hdfs_flags(), {"profile", "--templates", t, "--groups", g, "-o", (dir / "set.reduced").string()}))
                 .code;
    return codes;
}

int exit_status(const std::string& command) {
    const int raw = std::system((command + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_CASE("config keys round trip through the file form") {
    RunConfig config;
    config.set("family", "bgl");
    config.set("window", "100");
    config.set("alpha", "0.05");
    config.set("whitelist", "E3,E7");
    config.set("stage_anti", "false");
    config.set("profile_scope", "all");
    config.set("miner_similarity", "0.6");
    std::stringstream buffer;
    config.write(buffer);
    CHECK(RunConfig::read(buffer) == config);
    for (const auto& key : RunConfig::keys()) {
        RunConfig copy;
        copy.set(key, config.get(key));
        CHECK(copy.get(key) == config.get(key));
    }
}

TEST_CASE("config validation") {
    RunConfig config;
    CHECK_THROWS_AS(config.set("nonsense", "1"), UsageError);
    CHECK_THROWS_AS(config.set("alpha", "abc"), UsageError);
    CHECK_THROWS_AS(config.set("window", "0"), UsageError);
    CHECK(parse_window("session") == 0);
    CHECK(parse_window("100") == 100);
    config.set("alpha", "1.5");
    CHECK_THROWS_AS(config.validate(), UsageError);
    std::istringstream wrong("#logcleaner-config v2\nalpha = 0.1\n");
    CHECK_THROWS_AS(RunConfig::read(wrong), DataError);
}

TEST_CASE("environment sits between the file and the flags") {
    TempDir dir;
    RunConfig file;
    file.alpha = 0.1;
    file.seed = 7;
    file.save(dir / "run.cfg");
    setenv("LOGCLEANER_ALPHA", "0.2", 1);
    setenv("LOGCLEANER_CUTOFF", "0.3", 1);
    auto printed = invoke({"--config", (dir / "run.cfg").string(), "--cutoff", "0.4", "--print-config"});
    unsetenv("LOGCLEANER_ALPHA");
    unsetenv("LOGCLEANER_CUTOFF");
    REQUIRE(printed.code == 0);
    std::istringstream in(printed.out);
    auto effective = RunConfig::read(in);
    CHECK(effective.seed == 7);          // file
    CHECK(effective.alpha == 0.2);       // environment over file
    CHECK(effective.profile.cutoff == 0.4);  // flag over environment
}

TEST_CASE("usage and data errors map to exit codes") {
    CHECK(invoke({"bogus"}).code == cli::usage);
    CHECK(invoke({"--window", "0", "mine", "-o", "/tmp/x"}).code == cli::usage);
    CHECK(invoke({"--log", "/nonexistent.log", "mine", "-o", "/tmp/logcleaner-none"}).code == cli::data);
    CHECK(invoke({"--set", "alpha=zzz", "--print-config"}).code == cli::usage);

    const std::string bin = LOGCLEANER_BINARY;
    CHECK(exit_status(bin + " --help") == 0);
    CHECK(exit_status(bin + " --window 0 mine -o /tmp/x") == 1);
    CHECK(exit_status(bin + " --log /nonexistent.log mine -o /tmp/logcleaner-none") == 2);
}

TEST_CASE("pipeline on the HDFS fixture") {
    TempDir dir;
    REQUIRE(pipeline(dir) == 0);
    const auto t = (dir / "templates").string(), g = (dir / "groups").string(), r = (dir / "set.reduced").string();
    CHECK(read_file(dir / "groups").find("#split 67") != std::string::npos);

    REQUIRE(invoke(with(hdfs_flags(), {"train", "--templates", t, "--groups", g, "--reduced", r, "-o",
                                       (dir / "reduced.model").string()}))
                .code == 0);
    REQUIRE(invoke(with(hdfs_flags(), {"eval", "--templates", t, "--groups", g, "--trained",
                                       (dir / "reduced.model").string(), "--reduced", r, "--tag", "reduced", "--timing",
                                       (dir / "after.timing").string(), "-o", (dir / "after.metrics").string()}))
                .code == 0);
    std::istringstream before(read_file(dir / "before.metrics")), after(read_file(dir / "after.metrics"));
    auto b = read_metrics(before), a = read_metrics(after);
    CHECK(a.f1 >= 0.98 * b.f1);

    auto filtered = invoke(with(hdfs_flags(), {"filter", "--templates", t, "--reduced", r, "-i",
                                               fixture("hdfs_sample.log").string(), "--stats",
                                               (dir / "filter.stats").string()}));
    REQUIRE(filtered.code == 0);
    CHECK(read_file(dir / "filter.stats").find("lines_in 1237") != std::string::npos);

    auto report = invoke({"report", (dir / "before.metrics").string(), (dir / "after.metrics").string(), r,
                          (dir / "after.timing").string(), t});
    REQUIRE(report.code == 0);
    for (auto heading : {"Reduction", "Effectiveness before/after", "Ablation", "Inference time"})
        CHECK(report.out.find(heading) != std::string::npos);
    auto csv = invoke({"report", "--format", "csv", r, t});
    CHECK(csv.out.find("stage") != std::string::npos);
}

TEST_CASE("reruns give byte-identical artifacts") {
    TempDir a, b;
    REQUIRE(pipeline(a) == 0);
    REQUIRE(pipeline(b) == 0);
    for (auto name : {"templates", "groups", "model", "before.metrics", "set.reduced"})
        CHECK(read_file(a / name) == read_file(b / name));
}

TEST_CASE("study command writes traces and categories") {
    TempDir dir;
    const auto t = (dir / "templates").string(), g = (dir / "groups").string();
    REQUIRE(invoke(with(hdfs_flags(), {"mine", "-o", t})).code == 0);
    REQUIRE(invoke(with(hdfs_flags(), {"group", "--templates", t, "-o", g})).code == 0);
    auto retry = invoke(with(hdfs_flags(), {"study", "--templates", t, "--groups", g, "--method", "retry", "-o",
                                            (dir / "retry").string()}));
    REQUIRE(retry.code == 0);
    CHECK(std::filesystem::exists(dir / "retry.trace"));
    CHECK(std::filesystem::exists(dir / "retry.categories"));
    auto sweep = invoke(with(hdfs_flags(), {"study", "--templates", t, "--groups", g, "--method", "cluster",
                                            "--alpha-sweep", "0,0.01,0.02,0.05", "-o", (dir / "sweep").string()}));
    REQUIRE(sweep.code == 0);
    for (auto alpha : {"0", "0.01", "0.02", "0.05"})
        CHECK(std::filesystem::exists(dir / ("sweep.alpha" + std::string(alpha) + ".trace")));
    CHECK(invoke(with(hdfs_flags(), {"study", "--templates", t, "--groups", g, "--method", "genetic", "-o",
                                     (dir / "x").string()}))
              .code == cli::usage);
}

TEST_CASE("filter with nothing retained emits only unmatched lines") {
    TempDir dir;
    auto templates = std::make_shared<const TemplateSet>(
        std::vector<EventTemplate>{{"E0", {"alpha", "[*]"}, 1}, {"E1", {"beta", "[*]"}, 1}});
    templates->save(dir / "t");
    ReducedEventSet reduced({{"E0", "alpha [*]", RemovalReason::anti, ""}, {"E1", "beta [*]", RemovalReason::sporadic, ""}},
                            {}, ProfileConfig{});
    reduced.save(dir / "r");
    auto result = invoke({"--family", "generic", "filter", "--templates", (dir / "t").string(), "--reduced",
                          (dir / "r").string(), "--stats", (dir / "s").string()},
                         "alpha 1\nbeta 2\nsomething else\nalpha 3\n");
    REQUIRE(result.code == 0);
    CHECK(result.out == "something else\n");
    CHECK(read_file(dir / "s").find("lines_unmatched 1") != std::string::npos);
}

TEST_CASE("report refuses unknown versions and kinds") {
    TempDir dir;
    write_file(dir / "m", "#logcleaner-metrics v2\nprecision 1\n");
    CHECK(invoke({"report", (dir / "m").string()}).code == cli::data);
    write_file(dir / "x", "#logcleaner-mystery v1\n");
    CHECK(invoke({"report", (dir / "x").string()}).code == cli::data);
}

TEST_CASE("ablation rows are cumulative") {
    ReducedEventSet reduced({{"E0", "a", {}, ""},
                             {"E1", "b", RemovalReason::sporadic, ""},
                             {"E2", "c", RemovalReason::anti, ""},
                             {"E3", "d", RemovalReason::duplicative, "E0"}},
                            {}, ProfileConfig{});
    TemplateSet templates({{"E0", {"a"}, 10}, {"E1", {"b"}, 1}, {"E2", {"c"}, 4}, {"E3", {"d"}, 5}});
    auto rows = ablation_rows(reduced, &templates);
    REQUIRE(rows.size() == 4);
    const std::vector<double> events = {0.0, 0.25, 0.5, 0.75}, lines = {0.0, 0.05, 0.25, 0.5};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(rows[i].events_reduction == doctest::Approx(events[i]));
        REQUIRE(rows[i].lines_reduction);
        CHECK(*rows[i].lines_reduction == doctest::Approx(lines[i]));
    }
    CHECK(ablation_rows(reduced, nullptr)[3].lines_reduction == std::nullopt);
}

TEST_CASE("timing artifact") {
    Timing t{"after", "dt", 17, 0.25};
    std::stringstream buffer;
    write_timing(buffer, t);
    auto back = read_timing(buffer);
    CHECK(back.tag == "after");
    CHECK(back.groups == 17);
    CHECK(back.inference_millis == 0.25);
}
