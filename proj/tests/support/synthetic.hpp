#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "logcleaner/grouper.hpp"
#include "logcleaner/profiler.hpp"
#include "logcleaner/template_miner.hpp"

namespace logcleaner::testing {

std::filesystem::path fixture(const std::string& name);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

/// Templates E0..E(n-1) with text "synthetic event <k> occurred".
std::shared_ptr<const TemplateSet> synthetic_templates(std::size_t n);

/// Groups given as event ordinals; split defaults to the chronological 80/20 point.
LabeledDataset make_dataset(const std::vector<std::vector<EventIndex>>& groups, const std::vector<Label>& labels,
                            std::size_t event_count, std::optional<std::size_t> split = std::nullopt);

struct PlantedDuplicates {
    LabeledDataset dataset;
    std::vector<std::pair<EventIndex, EventIndex>> pairs;
    std::vector<EventIndex> independents;
};

/// Pairs always occur together; every pair and every independent event owns groups no other
/// event appears in.
PlantedDuplicates planted_duplicates(std::size_t pairs, std::size_t independents, std::uint64_t seed);

struct SignalAndNoise {
    LabeledDataset dataset;
    std::vector<EventIndex> informative;
    std::vector<EventIndex> noise;
};

/// Informative events are common in anomalous groups and rare in normal ones; noise events are
/// label independent. With a marker, one extra event occurs in exactly the anomalous groups.
SignalAndNoise signal_and_noise(std::size_t informative, std::size_t noise, std::size_t groups, std::uint64_t seed,
                                bool marker = false);

struct PlantedProfile {
    LabeledDataset dataset;
    std::vector<EventIndex> sporadic;
    std::vector<EventIndex> anti;
    std::vector<std::pair<EventIndex, EventIndex>> duplicate_pairs;  // (kept, removed)
    std::vector<EventIndex> independents;
};

/// One always-present and one exactly label-independent event, one rare event, duplicate pairs and
/// independents with disjoint supports.
PlantedProfile planted_profile(std::uint64_t seed);

}  // namespace logcleaner::testing

namespace logcleaner::testing {

struct FilterWorld {
    std::shared_ptr<const TemplateSet> templates;
    ReducedEventSet reduced;
    std::vector<std::string> lines;  // raw lines, some of them matching no template
};

/// Random templates, a random but valid reduced set over them and a random stream of lines.
FilterWorld random_filter_world(std::uint64_t seed, std::size_t lines = 50);

}  // namespace logcleaner::testing
