#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "logcleaner/kmeans.hpp"
#include "logcleaner/study.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace logcleaner;
using logcleaner::testing::make_dataset;

namespace {

const ModelSpec kTree = ModelSpec::parse("dt");

RetryOptions retry_options(double alpha, std::uint64_t seed = 0) {
    RetryOptions o;
    o.alpha = alpha;
    o.seed = seed;
    return o;
}

// Event 0 marks exactly the anomalous groups; event 1 is random noise.
LabeledDataset marker_and_noise(std::uint64_t seed, bool constant_second = false) {
    std::mt19937_64 gen(seed);
    std::vector<std::vector<EventIndex>> groups;
    std::vector<Label> labels;
    for (std::size_t g = 0; g < 100; ++g) {
        const bool anomalous = g % 4 == 1;
        std::vector<EventIndex> events;
        if (anomalous) events.push_back(0);
        const std::size_t copies = constant_second ? 1 : gen() % 3;
        events.insert(events.end(), copies, 1);
        groups.push_back(events);
        labels.push_back(anomalous ? Label::anomalous : Label::normal);
    }
    return make_dataset(groups, labels, 2);
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("label-independent noise is removed and the marker kept") {
    auto ds = marker_and_noise(4);
    auto trace = retry_reduce(ds, kTree, retry_options(0.02));
    CHECK(trace.baseline.f1 == 1.0);
    CHECK(trace.surviving_events == std::vector<std::string>{"E0"});
    // exhaustive check: no retained subset does better than the survivors
    std::vector<EventIndex> survivors = {0};
    const double achieved = train_and_evaluate(ds.keep_only(survivors), kTree, 0).f1;
    CHECK(achieved >= testing::best_subset_f1(ds, kTree, 0) - 1e-12);
}

TEST_CASE("a constant event goes even with zero tolerance") {
    auto ds = marker_and_noise(1, true);
    auto trace = retry_reduce(ds, kTree, retry_options(0.0));
    CHECK(trace.surviving_events == std::vector<std::string>{"E0"});
    REQUIRE(!trace.steps.empty());
    CHECK(trace.steps.front().event_id == "E1");
    CHECK(trace.steps.front().action == StepAction::removed);
    CHECK(trace.steps.front().delta_f1() == 0.0);
}

TEST_CASE("trace bookkeeping") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto sn = testing::signal_and_noise(2, 4, 120, seed);
        for (double alpha : {0.0, 0.02, 0.1}) {
            auto trace = retry_reduce(sn.dataset, kTree, retry_options(alpha, seed));
            std::size_t removed = 0;
            std::set<std::string> gone;
            for (const auto& step : trace.steps) {
                if (step.action == StepAction::removed) {
                    ++removed;
                    gone.insert(step.event_id);
                    CHECK(step.score.f1 >= (1 - alpha) * step.f1_max - 1e-12);
                } else {
                    CHECK(step.score.f1 < (1 - alpha) * step.f1_max);
                }
            }
            // the running best moves only on accepted removals
            CHECK(trace.f1_max_history.size() == removed + 1);
            CHECK(trace.f1_max_history.front() == trace.baseline.f1);
            CHECK(trace.surviving_events.size() + gone.size() == sn.dataset.event_count());
            for (const auto& s : trace.surviving_events) CHECK(gone.count(s) == 0);
            CHECK(trace.sound());
            CHECK(trace.events_total == sn.dataset.event_count());
        }
    }
}

TEST_CASE("reinstating leaves the view as it was") {
    auto ds = make_dataset({{0, 1, 2}, {1}, {2, 2}}, {Label::anomalous, Label::normal, Label::normal}, 3);
    auto trial = ds.remove_event(1);
    std::vector<EventIndex> all = {0, 1, 2};
    auto reinstated = trial.keep_only(all);
    CHECK_FALSE(reinstated.same_view(ds));  // keep_only never revives removed events
    CHECK(ds.remove_event(2).same_view(ds.remove_event(2)));
    CHECK(ds.group(0).events == std::vector<EventIndex>{0, 1, 2});
}

TEST_CASE("retry reduce matches exhaustive search on small datasets") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto sn = testing::signal_and_noise(2, 3, 80, 100 + seed);
        const double best = testing::best_subset_f1(sn.dataset, kTree, seed);
        for (double alpha : {0.0, 0.02}) {
            auto trace = retry_reduce(sn.dataset, kTree, retry_options(alpha, seed));
            CHECK(trace.final_score.f1 >= (1 - alpha) * best - 1e-12);
        }
    }
}

TEST_CASE("candidate orders") {
    CHECK(parse_candidate_order("frequency-desc") == CandidateOrder::frequency_desc);
    CHECK(parse_candidate_order("frequency-asc") == CandidateOrder::frequency_asc);
    CHECK(parse_candidate_order("ordinal") == CandidateOrder::ordinal);
    CHECK_THROWS_AS(parse_candidate_order("random"), UsageError);

    // E2 occurs most, E0 least
    auto ds = make_dataset({{0, 1, 1, 2, 2, 2}, {1, 2, 2}, {2}, {0, 1}, {2}},
                           {Label::anomalous, Label::normal, Label::normal, Label::anomalous, Label::normal}, 3, 3);
    auto first_tried = [&](CandidateOrder order) {
        RetryOptions o;
        o.order = order;
        o.alpha = 1.0 - 1e-9;
        return retry_reduce(ds, kTree, o).steps.front().event_id;
    };
    CHECK(first_tried(CandidateOrder::frequency_desc) == "E2");
    CHECK(first_tried(CandidateOrder::frequency_asc) == "E0");
    CHECK(first_tried(CandidateOrder::ordinal) == "E0");
}

TEST_CASE("baseline must train") {
    auto ds = make_dataset({{0}, {0}, {0}}, {Label::normal, Label::normal, Label::anomalous}, 1, 2);
    CHECK_THROWS_AS(retry_reduce(ds, kTree, retry_options(0.02)), DataError);
}

TEST_CASE("kmeans separates obvious clusters deterministically") {
    std::vector<Point> points = {{0, 0, 0}, {0.01, 0, 0}, {0.9, 0.9, 0.9}, {0.92, 0.88, 0.9}, {0, 0.02, 0}};
    KMeansOptions o;
    o.seed = 5;
    auto a = kmeans(points, o);
    auto b = kmeans(points, o);
    CHECK(a.assignment == b.assignment);
    CHECK(a.centroids == b.centroids);
    CHECK(a.assignment[0] == a.assignment[1]);
    CHECK(a.assignment[0] == a.assignment[4]);
    CHECK(a.assignment[2] == a.assignment[3]);
    CHECK(a.assignment[0] != a.assignment[2]);
    std::vector<Point> one = {{1}};
    CHECK_THROWS_AS(kmeans(one, o), UsageError);
}

TEST_CASE("relevance from single-event scores") {
    std::vector<SingleEventScore> two = {{"E0", {0.9, 0.9, 0.9}, false}, {"E1", {0, 0, 0}, false}};
    auto relevant = relevant_by_kmeans(two, 50, 100, 1);
    REQUIRE(relevant);
    CHECK(*relevant == std::vector<bool>{true, false});

    std::vector<SingleEventScore> same = {{"E0", {0.5, 0.5, 0.5}, false}, {"E1", {0.5, 0.5, 0.5}, false}};
    CHECK_FALSE(relevant_by_kmeans(same, 50, 100, 1));
}

TEST_CASE("cluster reduction finds the informative events") {
    // generator oracle: events 0..2 informative, 3..11 label independent
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto sn = testing::signal_and_noise(3, 9, 300, seed);
        ClusterOptions options;
        options.retry.seed = seed;
        auto result = cluster_reduce(sn.dataset, kTree, options);
        std::vector<std::string> expected;
        for (auto e : sn.informative) expected.push_back(sn.dataset.event_id(e));
        CHECK(result.relevant == expected);
        for (const auto& s : result.trace.single_event_scores)
            CHECK(s.relevant == contains(expected, s.event_id));
        // the retry phase only ever touches relevant events
        for (const auto& step : result.trace.steps) CHECK(contains(result.relevant, step.event_id));
        CHECK(result.trace.pruned_events.size() == 9);
        CHECK(result.trace.events_total == 12);
        CHECK(result.trace.sound());
        auto again = cluster_reduce(sn.dataset, kTree, options);
        CHECK(again.trace == result.trace);
    }
}

TEST_CASE("categories") {
    ReductionTrace trace;
    trace.baseline = {0.8, 0.8, 0.8};
    trace.unreduced = trace.baseline;
    trace.steps = {{"E3", StepAction::removed, {0.9, 0.97, 0.9349}, 0.8},
                   {"E4", StepAction::removed, {0.9, 0.97, 0.9349}, 0.9349},
                   {"E5", StepAction::reinstated, {0.5, 0.5, 0.5}, 0.9349}};
    trace.surviving_events = {"E1", "E5"};
    auto categories = categorize_events(trace);
    REQUIRE(categories.size() == 4);
    auto find = [&](const std::string& id) {
        return *std::find_if(categories.begin(), categories.end(),
                             [&](const EventCategory& c) { return c.event_id == id; });
    };
    CHECK(find("E3").category == Category::anti);
    CHECK(find("E3").delta_f1 == doctest::Approx(0.1349));
    CHECK(find("E4").category == Category::duplicative);
    CHECK(find("E5").category == Category::key);
    CHECK(find("E1").category == Category::key);
    CHECK(categorize_events(trace, 0.2)[2].category == Category::duplicative);
}

TEST_CASE("every event gets exactly one category") {
    auto sn = testing::signal_and_noise(3, 5, 200, 8);
    ClusterOptions options;
    auto result = cluster_reduce(sn.dataset, kTree, options);
    auto categories = categorize_events(result.trace);
    std::set<std::string> ids;
    for (const auto& c : categories) ids.insert(c.event_id);
    CHECK(ids.size() == categories.size());
    CHECK(ids.size() == sn.dataset.event_count());
}

TEST_CASE("trace and category files round trip") {
    auto sn = testing::signal_and_noise(3, 5, 200, 8);
    ClusterOptions options;
    auto trace = cluster_reduce(sn.dataset, kTree, options).trace;
    std::stringstream buffer;
    write_trace(buffer, trace);
    auto back = read_trace(buffer);
    CHECK(back == trace);

    auto categories = categorize_events(trace);
    std::stringstream cbuf;
    write_categories(cbuf, categories);
    CHECK(read_categories(cbuf) == categories);

    std::istringstream wrong("#logcleaner-trace v2\n");
    CHECK_THROWS_AS(read_trace(wrong), DataError);

    std::ostringstream summary;
    write_study_summary(summary, trace, categories);
    CHECK(summary.str().find("E0") != std::string::npos);
}
