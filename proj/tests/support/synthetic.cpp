#include "synthetic.hpp"

#include <fstream>
#include <sstream>

#include "logcleaner/random.hpp"

namespace logcleaner::testing {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(LOGCLEANER_FIXTURES) / name; }

TempDir::TempDir() {
    static std::uint64_t counter = 0;
    Rng rng(static_cast<std::uint64_t>(::getpid()) * 1000003 + counter++);
    path_ = std::filesystem::temp_directory_path() / ("logcleaner-test-" + std::to_string(rng.next() % 1000000000));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
}

std::shared_ptr<const TemplateSet> synthetic_templates(std::size_t n) {
    std::vector<EventTemplate> templates;
    for (std::size_t k = 0; k < n; ++k)
        templates.push_back({"E" + std::to_string(k), {"synthetic", "event", "k" + std::string(k + 1, 'x'), "occurred"},
                             1});
    return std::make_shared<const TemplateSet>(std::move(templates));
}

LabeledDataset make_dataset(const std::vector<std::vector<EventIndex>>& groups, const std::vector<Label>& labels,
                            std::size_t event_count, std::optional<std::size_t> split) {
    std::vector<EventGroup> out;
    for (std::size_t g = 0; g < groups.size(); ++g) out.push_back({"g" + std::to_string(g), groups[g], labels[g], {}});
    const auto at = split.value_or(chronological_split(groups.size()));
    return LabeledDataset(std::move(out), synthetic_templates(event_count), at);
}

PlantedDuplicates planted_duplicates(std::size_t pairs, std::size_t independents, std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 2 * pairs + independents;
    std::vector<EventIndex> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);  // ordinals of pair members and independents interleave

    PlantedDuplicates out;
    std::vector<std::vector<EventIndex>> groups;
    std::vector<Label> labels;
    auto add_groups = [&](std::vector<EventIndex> members) {
        const auto count = 3 + rng.index(6);
        for (std::uint64_t c = 0; c < count; ++c) {
            std::vector<EventIndex> events;
            for (auto e : members)
                for (std::uint64_t m = 0; m <= rng.index(3); ++m) events.push_back(e);
            rng.shuffle(events);
            groups.push_back(std::move(events));
            labels.push_back(rng.uniform() < 0.3 ? Label::anomalous : Label::normal);
        }
    };
    for (std::size_t p = 0; p < pairs; ++p) {
        out.pairs.emplace_back(order[2 * p], order[2 * p + 1]);
        add_groups({order[2 * p], order[2 * p + 1]});
    }
    for (std::size_t i = 0; i < independents; ++i) {
        out.independents.push_back(order[2 * pairs + i]);
        add_groups({order[2 * pairs + i]});
    }
    // interleave group order so the split is not aligned with the plants
    std::vector<std::size_t> perm(groups.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<std::vector<EventIndex>> shuffled;
    std::vector<Label> shuffled_labels;
    for (auto i : perm) {
        shuffled.push_back(groups[i]);
        shuffled_labels.push_back(labels[i]);
    }
    out.dataset = make_dataset(shuffled, shuffled_labels, n);
    return out;
}

SignalAndNoise signal_and_noise(std::size_t informative, std::size_t noise, std::size_t groups, std::uint64_t seed,
                                bool marker) {
    Rng rng(seed);
    const std::size_t n = informative + noise + (marker ? 1 : 0);
    SignalAndNoise out;
    for (std::size_t i = 0; i < informative; ++i) out.informative.push_back(i);
    for (std::size_t i = 0; i < noise; ++i) out.noise.push_back(informative + i);
    std::vector<std::vector<EventIndex>> rows;
    std::vector<Label> labels;
    for (std::size_t g = 0; g < groups; ++g) {
        const bool anomalous = rng.uniform() < 0.25;
        std::vector<EventIndex> events;
        for (auto e : out.informative)
            if (rng.uniform() < (anomalous ? 0.7 : 0.03)) events.push_back(e);
        for (auto e : out.noise)
            for (std::uint64_t m = rng.index(3); m > 0; --m) events.push_back(e);
        if (marker && anomalous) events.push_back(n - 1);
        rng.shuffle(events);
        rows.push_back(std::move(events));
        labels.push_back(anomalous ? Label::anomalous : Label::normal);
    }
    out.dataset = make_dataset(rows, labels, n);
    return out;
}

PlantedProfile planted_profile(std::uint64_t seed) {
    // Ordinals: 0 always present, 1 label independent, 2 rare, 3..6 two duplicate pairs, 7..9 independents.
    Rng rng(seed);
    PlantedProfile out;
    out.anti = {0, 1};
    out.sporadic = {2};
    out.duplicate_pairs = {{3, 4}, {5, 6}};
    out.independents = {7, 8, 9};
    std::vector<std::vector<EventIndex>> rows;
    std::vector<Label> labels;
    // 80 groups: 40 anomalous, 40 normal, so an event in exactly half of each class has zero MI.
    for (std::size_t g = 0; g < 80; ++g) {
        const bool anomalous = g % 2 == 0;
        const std::size_t within = g / 2;  // index inside its class
        std::vector<EventIndex> events{0};
        if (within % 2 == 0) events.push_back(1);
        if (g == 7) events.push_back(2);
        const std::size_t slot = within % 5;  // 0: pair A, 1: pair B, 2..4: independents
        if (slot == 0 && (anomalous || within % 3 == 0)) {
            events.insert(events.end(), {3, 4});
        } else if (slot == 1 && (!anomalous || within % 4 == 0)) {
            events.insert(events.end(), {5, 6, 6});
        } else if (slot >= 2 && (anomalous != (slot == 3) || within % 7 == 0)) {
            events.push_back(5 + slot);
        }
        rng.shuffle(events);
        rows.push_back(std::move(events));
        labels.push_back(anomalous ? Label::anomalous : Label::normal);
    }
    out.dataset = make_dataset(rows, labels, 10);
    return out;
}

FilterWorld random_filter_world(std::uint64_t seed, std::size_t lines) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(7);
    std::vector<EventTemplate> templates;
    for (std::size_t k = 0; k < n; ++k)
        templates.push_back({"E" + std::to_string(k), {"evt", "kind" + std::string(1, char('a' + k)), "[*]", "done"}, 1});
    FilterWorld world;
    world.templates = std::make_shared<const TemplateSet>(std::move(templates));

    std::vector<EventDisposition> events(n);
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < n; ++k) {
        events[k].event_id = (*world.templates)[k].event_id;
        events[k].template_text = (*world.templates)[k].text();
        const auto pick = rng.index(4);
        if (pick == 0 || k == 0) {
            kept.push_back(k);
        } else {
            events[k].removed = pick == 1 ? RemovalReason::sporadic : RemovalReason::anti;
        }
    }
    for (std::size_t k = 1; k < n; ++k) {
        if (events[k].removed && rng.index(3) == 0) {
            events[k].removed = RemovalReason::duplicative;
            events[k].representative = events[kept[rng.index(kept.size())]].event_id;
        }
    }
    std::vector<std::string> outliers;
    if (rng.index(2) == 0) outliers.push_back(events[kept.back()].event_id);
    world.reduced = ReducedEventSet(std::move(events), std::move(outliers), ProfileConfig{});

    for (std::size_t i = 0; i < lines; ++i) {
        if (rng.index(10) == 0) {
            world.lines.push_back("novel message " + std::to_string(rng.index(1000)));
        } else {
            const auto k = rng.index(n);
            world.lines.push_back("evt kind" + std::string(1, char('a' + k)) + " " + std::to_string(rng.index(100000)) +
                                  " done");
        }
    }
    return world;
}

}  // namespace logcleaner::testing
