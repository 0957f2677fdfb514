#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wigcn/graph.hpp"
#include "wigcn/sparse.hpp"

namespace wigcn {

/// An interaction keyed by external (file) ids.
struct RawInteraction {
    std::int64_t user;
    std::int64_t item;

    friend bool operator==(const RawInteraction&, const RawInteraction&) = default;
    friend auto operator<=>(const RawInteraction&, const RawInteraction&) = default;
};

enum class FileFormat {
    edge_list,    // "user item" per line
    grouped_list  // "user item item ..." per line
};

FileFormat parse_file_format(std::string_view name);
std::string_view to_string(FileFormat format);

/// Bijection between external ids and dense indices [0, size). Dense indices
/// follow ascending external id.
class IdMap {
public:
    IdMap() = default;
    explicit IdMap(std::vector<std::int64_t> sorted_unique_ids);

    std::size_t size() const { return external_.size(); }
    std::int64_t external(index_t dense) const { return external_.at(dense); }
    std::optional<index_t> dense(std::int64_t external) const;
    std::span<const std::int64_t> externals() const { return external_; }

private:
    std::vector<std::int64_t> external_;
    std::unordered_map<std::int64_t, index_t> dense_;
};

struct InteractionDataset {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::vector<std::vector<index_t>> train_positives;  // per user, sorted
    std::vector<std::vector<index_t>> test_positives;   // per user, sorted
    IdMap user_ids;
    IdMap item_ids;

    std::size_t n_train() const;
    std::size_t n_test() const;
    std::vector<Interaction> train_interactions() const;
    SparseMatrix train_matrix() const;
};

struct DatasetStats {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::size_t n_relations = 0;
    double density = 0.0;
};

std::vector<RawInteraction> parse_interactions(std::istream& in, FileFormat format,
                                               std::string_view source_name = "<stream>");

/// Throws data_error naming the path when unreadable, empty or malformed.
std::vector<RawInteraction> load_interactions(const std::filesystem::path& path, FileFormat format);

/// Deduplicates, then repeatedly drops users and items with fewer than k
/// interactions until nothing changes. Output is sorted by (user, item).
std::vector<RawInteraction> k_core_filter(std::span<const RawInteraction> raw, std::size_t k);

/// Random interaction-level split. floor(test_fraction * N) distinct
/// interactions go to test, skipping any pick that would leave its user
/// without a training interaction. Duplicates are collapsed first.
InteractionDataset train_test_split(std::span<const RawInteraction> interactions, double test_fraction,
                                    std::uint64_t seed);

DatasetStats dataset_stats(const InteractionDataset& dataset);

}  // namespace wigcn
