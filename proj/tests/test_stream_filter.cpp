#include <doctest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "logcleaner/stream_filter.hpp"
#include "synthetic.hpp"

using namespace logcleaner;
using logcleaner::testing::fixture;
using logcleaner::testing::TempDir;

namespace {

std::shared_ptr<const TemplateSet> three_templates() {
    return std::make_shared<const TemplateSet>(std::vector<EventTemplate>{
        {"E0", {"Served", "block", "[*]", "to", "[*]"}, 1},
        {"E1", {"Receiving", "block", "[*]"}, 1},
        {"E2", {"Deleting", "block", "[*]"}, 1},
    });
}

ReducedEventSet reduced_with(std::optional<RemovalReason> e1, std::optional<RemovalReason> e2) {
    auto t = three_templates();
    std::vector<EventDisposition> events = {{"E0", (*t)[0].text(), {}, ""},
                                            {"E1", (*t)[1].text(), e1, e1 == RemovalReason::duplicative ? "E0" : ""},
                                            {"E2", (*t)[2].text(), e2, e2 == RemovalReason::duplicative ? "E0" : ""}};
    return ReducedEventSet(events, {}, ProfileConfig{});
}

std::vector<std::string> run_filter(StreamFilter& filter, const std::vector<std::string>& lines) {
    std::string joined;
    for (const auto& l : lines) joined += l + "\n";
    std::istringstream in(joined);
    std::ostringstream out;
    filter.run(in, out);
    std::vector<std::string> kept;
    std::istringstream back(out.str());
    for (std::string line; std::getline(back, line);) kept.push_back(line);
    return kept;
}

bool is_subsequence(const std::vector<std::string>& sub, const std::vector<std::string>& full) {
    std::size_t i = 0;
    for (const auto& line : full)
        if (i < sub.size() && sub[i] == line) ++i;
    return i == sub.size();
}

}  // namespace

TEST_CASE("lines of removed events are dropped with their reason") {
    StreamFilter filter(three_templates(), reduced_with(RemovalReason::anti, RemovalReason::duplicative));
    CHECK(filter.accept("Served block blk_1 to /10.0.0.1"));
    CHECK_FALSE(filter.accept("Receiving block blk_2"));
    CHECK_FALSE(filter.accept("Deleting block blk_3"));
    CHECK(filter.accept("totally novel message"));
    auto stats = filter.stats();
    CHECK(stats.lines_in == 4);
    CHECK(stats.lines_out == 2);
    CHECK(stats.lines_dropped == 2);
    CHECK(stats.lines_unmatched == 1);
    CHECK(stats.dropped_by_reason[static_cast<std::size_t>(RemovalReason::anti)] == 1);
    CHECK(stats.dropped_by_reason[static_cast<std::size_t>(RemovalReason::duplicative)] == 1);
    CHECK(stats.events_total == 3);
    CHECK(stats.events_removed == 2);
    CHECK(stats.lines_reduction() == doctest::Approx(0.5));
    CHECK(stats.events_reduction() == doctest::Approx(2.0 / 3.0));

    std::ostringstream text;
    stats.write(text);
    CHECK(text.str().find("lines_dropped 2") != std::string::npos);
    CHECK(text.str().find("dropped_anti 1") != std::string::npos);
}

TEST_CASE("plans must describe the same templates") {
    auto other = std::make_shared<const TemplateSet>(std::vector<EventTemplate>{{"E0", {"x"}, 1}});
    CHECK_THROWS_AS(FilterPlan(other, reduced_with({}, {})), DataError);
    auto renamed = std::make_shared<const TemplateSet>(std::vector<EventTemplate>{
        {"E0", {"Served", "block", "[*]", "to", "[*]"}, 1},
        {"E1", {"Receiving", "block", "[*]"}, 1},
        {"E2", {"Removing", "block", "[*]"}, 1},
    });
    CHECK_THROWS_AS(FilterPlan(renamed, reduced_with({}, {})), DataError);
}

TEST_CASE("reload swaps the plan and refuses bad files") {
    TempDir dir;
    StreamFilter filter(three_templates(), reduced_with(RemovalReason::anti, {}));
    std::vector<std::string> lines = {"Served block blk_1 to x1", "Receiving block blk_2", "Deleting block blk_3"};
    CHECK(run_filter(filter, lines).size() == 2);

    auto same = reduced_with(RemovalReason::anti, {});
    same.save(dir / "same.reduced");
    CHECK(filter.reload(dir / "same.reduced").ok);
    CHECK(run_filter(filter, lines).size() == 2);

    auto more = reduced_with({}, {});
    more.save(dir / "more.reduced");
    CHECK(filter.reload(dir / "more.reduced").ok);
    CHECK(run_filter(filter, lines).size() == 3);
    CHECK(filter.stats().reloads == 2);

    auto text = testing::read_file(dir / "same.reduced");
    text.replace(text.find("#hash ") + 6, 1, text[text.find("#hash ") + 6] == '0' ? "1" : "0");
    testing::write_file(dir / "bad.reduced", text);
    auto outcome = filter.reload(dir / "bad.reduced");
    CHECK_FALSE(outcome.ok);
    CHECK_FALSE(outcome.message.empty());
    CHECK(filter.plan()->hash() == more.content_hash());
    CHECK_FALSE(filter.reload(dir / "missing.reduced").ok);
}

TEST_CASE("control file requests are picked up between lines") {
    TempDir dir;
    auto everything = reduced_with({}, {});
    everything.save(dir / "all.reduced");
    StreamFilter filter(three_templates(), reduced_with(RemovalReason::anti, RemovalReason::anti));
    write_reload_request(dir / "control", dir / "all.reduced", *three_templates());
    CHECK(std::filesystem::exists(dir / "control"));

    std::istringstream in("Receiving block a1\nReceiving block a2\nReceiving block a3\n");
    std::ostringstream out, stats;
    StreamOptions options;
    options.control_file = dir / "control";
    options.poll_every = 1;
    options.stats_out = &stats;
    filter.run(in, out, options);
    CHECK_FALSE(std::filesystem::exists(dir / "control"));
    CHECK(filter.stats().reloads == 1);
    CHECK(filter.stats().lines_out >= 2);
    CHECK(stats.str().find("lines_in 3") != std::string::npos);

    CHECK_THROWS_AS(write_reload_request(dir / "c2", dir / "missing.reduced", *three_templates()), DataError);
}

TEST_CASE("stats requests print the running counters") {
    TempDir dir;
    StreamFilter filter(three_templates(), reduced_with({}, {}));
    testing::write_file(dir / "control", "stats\n");
    std::istringstream in("Receiving block a1\nReceiving block a2\n");
    std::ostringstream out, stats;
    StreamOptions options;
    options.control_file = dir / "control";
    options.poll_every = 1;
    options.stats_out = &stats;
    filter.run(in, out, options);
    // one on demand, one at the end of the stream
    std::size_t blocks = 0;
    for (auto at = stats.str().find("lines_in"); at != std::string::npos; at = stats.str().find("lines_in", at + 1))
        ++blocks;
    CHECK(blocks == 2);
}

TEST_CASE("concurrent reloads never give a line a mixed plan") {
    auto drop_both = reduced_with(RemovalReason::anti, RemovalReason::anti);
    auto keep_both = reduced_with({}, {});
    StreamFilter filter(three_templates(), drop_both);
    std::atomic<bool> stop{false};
    std::thread swapper([&] {
        for (int i = 0; !stop; ++i) filter.reload(i % 2 ? drop_both : keep_both);
    });
    // each pair of lines is judged by one plan or the other, and the counters stay consistent
    for (int i = 0; i < 20000; ++i) (void)filter.accept(i % 2 ? "Receiving block x" : "Deleting block y");
    stop = true;
    swapper.join();
    auto stats = filter.stats();
    CHECK(stats.lines_in == 20000);
    CHECK(stats.lines_in == stats.lines_out + stats.lines_dropped);
}

TEST_CASE("random streams conserve lines and filter idempotently") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto world = testing::random_filter_world(seed);
        StreamFilter first(world.templates, world.reduced);
        auto once = run_filter(first, world.lines);
        auto stats = first.stats();
        CHECK(stats.lines_in == world.lines.size());
        CHECK(stats.lines_in == stats.lines_out + stats.lines_dropped);
        CHECK(stats.lines_out == once.size());
        CHECK(is_subsequence(once, world.lines));
        StreamFilter second(world.templates, world.reduced);
        auto twice = run_filter(second, once);
        CHECK(twice == once);
        CHECK(second.stats().lines_dropped == 0);
    }
}

TEST_CASE("replaying the profiled corpus realizes the predicted line reduction") {
    auto records = read_records(fixture("hdfs_sample.log"), DatasetFamily::hdfs);
    auto mined = mine(records);
    auto templates = std::make_shared<const TemplateSet>(mined.templates);
    auto labels = read_labels(fixture("hdfs_labels.csv"), LabelKind::per_session_table);
    auto ds = group_by_session(records, mined.assignment, templates, kHdfsBlockPattern, labels, 0.8);
    auto result = profile(ds, ProfileConfig{});

    StreamFilter filter(templates, result.reduced, HeaderFormat::builtin(DatasetFamily::hdfs));
    std::ifstream in(fixture("hdfs_sample.log"));
    std::ostringstream out;
    filter.run(in, out);
    auto stats = filter.stats();
    CHECK(stats.lines_in == 1237);
    CHECK(stats.lines_unmatched == 0);
    CHECK(stats.lines_dropped == result.lines_removed);
    CHECK(stats.lines_reduction() == doctest::Approx(result.lines_reduction()).epsilon(1e-12));
}
