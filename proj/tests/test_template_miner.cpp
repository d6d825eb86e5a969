#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "logcleaner/template_miner.hpp"
#include "synthetic.hpp"

using namespace logcleaner;
using logcleaner::testing::fixture;

namespace {

// Five formats with distinct lengths or leading tokens; '#' is a digit-bearing parameter.
const std::vector<std::string> kFormats = {
    "Served block # to #",
    "Receiving block # src: # dest: #",
    "PacketResponder # for block # terminating",
    "Deleting block # file #",
    "Verification succeeded for #",
};

struct Corpus {
    std::vector<std::string> lines;
    std::vector<std::size_t> source;
};

Corpus generated_corpus(std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<std::size_t> order;
    for (std::size_t f = 0; f < kFormats.size(); ++f) order.insert(order.end(), 40, f);
    std::shuffle(order.begin(), order.end(), gen);
    Corpus corpus;
    for (auto f : order) {
        std::string line;
        for (char c : kFormats[f]) {
            if (c == '#')
                line += "x" + std::to_string(gen() % 100000);
            else
                line += c;
        }
        corpus.lines.push_back(line);
        corpus.source.push_back(f);
    }
    return corpus;
}

}  // namespace

TEST_CASE("digit tokens are masked") {
    CHECK(mask_tokens("Served block blk_1 to /10.0.0.1") ==
          std::vector<std::string>{"Served", "block", "[*]", "to", "[*]"});
    CHECK(tokenize("  a   b ") == std::vector<std::string>{"a", "b"});
    CHECK(tokenize("") == std::vector<std::string>{""});
}

TEST_CASE("two served-block lines share one template") {
    std::vector<std::string> lines = {"Served block blk_1 to /10.0.0.1", "Served block blk_2 to /10.0.0.2"};
    auto result = mine_contents(lines);
    REQUIRE(result.templates.size() == 1);
    CHECK(result.templates[0].text() == "Served block [*] to [*]");
    CHECK(result.templates[0].support == 2);
    CHECK(result.templates[0].event_id == "E0");

    auto hit = result.templates.match("Served block blk_9 to /10.1.1.1");
    REQUIRE(hit);
    CHECK(*hit == 0);
    CHECK_FALSE(result.templates.match("totally novel message"));
}

TEST_CASE("single line gives a single template") {
    std::vector<std::string> lines = {"just one line"};
    auto result = mine_contents(lines);
    REQUIRE(result.templates.size() == 1);
    CHECK(result.templates[0].support == 1);
}

TEST_CASE("generated corpus recovers its five formats") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto corpus = generated_corpus(seed);
        auto result = mine_contents(corpus.lines);
        REQUIRE(result.templates.size() == 5);
        for (const auto& t : result.templates.templates()) CHECK(t.support == 40);
        // the mined partition coincides with the generator's
        std::map<std::size_t, std::size_t> mapping;
        for (std::size_t i = 0; i < corpus.lines.size(); ++i) {
            auto [it, inserted] = mapping.emplace(corpus.source[i], result.assignment[i]);
            CHECK(it->second == result.assignment[i]);
        }
        // re-matching every mined line gives back its assignment
        for (std::size_t i = 0; i < corpus.lines.size(); ++i) {
            auto hit = result.templates.match(corpus.lines[i]);
            REQUIRE(hit);
            CHECK(*hit == result.assignment[i]);
        }
        std::uint64_t total = 0;
        for (const auto& t : result.templates.templates()) total += t.support;
        CHECK(total == corpus.lines.size());
    }
}

TEST_CASE("wildcard positions only grow") {
    TemplateMiner miner;
    std::vector<std::string> lines = {"job queue alpha started on node", "job queue beta started on node",
                                      "job queue gamma started on rack", "job queue delta started on rack",
                                      "job queue alpha finished on node", "job queue beta started on shelf"};
    std::vector<bool> previous;
    for (const auto& line : lines) {
        auto e = miner.add(line);
        REQUIRE(e == 0);
        const auto& tokens = miner.templates()[0].tokens;
        std::vector<bool> wild;
        for (const auto& t : tokens) wild.push_back(t == kWildcard);
        for (std::size_t i = 0; i < previous.size(); ++i)
            if (previous[i]) CHECK(wild[i]);
        previous = wild;
    }
}

TEST_CASE("mining is deterministic") {
    auto corpus = generated_corpus(7);
    auto a = mine_contents(corpus.lines);
    auto b = mine_contents(corpus.lines);
    CHECK(a.templates == b.templates);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("degenerate content becomes its own template") {
    std::vector<std::string> lines = {"", "   ", "a"};
    auto result = mine_contents(lines);
    CHECK(result.templates.size() == 2);
    CHECK(result.assignment[0] == result.assignment[1]);
}

TEST_CASE("template set round-trips through its file form") {
    auto result = mine_contents(generated_corpus(3).lines);
    std::stringstream buffer;
    result.templates.write(buffer);
    CHECK(TemplateSet::read(buffer) == result.templates);
}

TEST_CASE("match prefers more literals") {
    TemplateSet set({{"E0", {"a", "[*]", "c"}, 1}, {"E1", {"a", "b", "c"}, 1}});
    CHECK(*set.match("a b c") == 1);
    CHECK(*set.match("a x c") == 0);
    CHECK_FALSE(set.match("a b"));
}

TEST_CASE("structured csv loading") {
    std::istringstream three("LineId,EventId,EventTemplate\n1,E1,foo <*>\n2,E1,foo <*>\n3,E2,bar\n");
    auto parsed = read_parsed(three);
    CHECK(parsed.templates.size() == 2);
    REQUIRE(parsed.events.size() == 3);
    CHECK(parsed.templates[parsed.events[0]].event_id == "E1");
    CHECK(parsed.templates[parsed.events[1]].event_id == "E1");
    CHECK(parsed.templates[parsed.events[2]].event_id == "E2");

    std::istringstream empty("LineId,EventId\n");
    auto none = read_parsed(empty);
    CHECK(none.templates.empty());
    CHECK(none.events.empty());

    std::istringstream missing("LineId,Template\n1,foo\n");
    CHECK_THROWS_AS(read_parsed(missing), DataError);

    CHECK(split_csv_row(R"(1,"a, b",c)") == std::vector<std::string>{"1", "a, b", "c"});
}

TEST_CASE("bundled structured fixture") {
    // cut -d, -f2 | sort -u: 12 distinct event ids over 1237 rows
    auto parsed = load_parsed(fixture("hdfs_structured.csv"));
    CHECK(parsed.templates.size() == 12);
    CHECK(parsed.events.size() == 1237);
    std::vector<std::uint64_t> supports;
    for (const auto& t : parsed.templates.templates()) supports.push_back(t.support);
    std::sort(supports.rbegin(), supports.rend());
    CHECK(supports == std::vector<std::uint64_t>{252, 226, 226, 226, 84, 54, 51, 51, 28, 19, 13, 7});
}

TEST_CASE("mining the HDFS fixture partitions its lines") {
    auto records = read_records(fixture("hdfs_sample.log"), DatasetFamily::hdfs);
    auto result = mine(records);
    CHECK(result.assignment.size() == records.size());
    CHECK(result.templates.total_support() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto hit = result.templates.match(records[i]);
        REQUIRE(hit);
        CHECK(*hit == result.assignment[i]);
    }
}
