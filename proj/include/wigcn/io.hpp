#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wigcn/data.hpp"
#include "wigcn/eval.hpp"
#include "wigcn/model.hpp"
#include "wigcn/training.hpp"

namespace wigcn {

struct RunConfig {
    std::vector<std::filesystem::path> dataset_paths;
    FileFormat dataset_format = FileFormat::edge_list;
    std::size_t k_core = 10;
    double test_fraction = 0.2;
    TrainConfig train;
    std::size_t eval_k = kDefaultEvalK;
    std::filesystem::path output_dir = "wigcn_run";
    std::size_t checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints

    void validate() const;
};

/// Keys mirror RunConfig field names; TrainConfig fields sit at top level.
/// "dataset_path" accepts a string or an array of strings whose interactions
/// are concatenated. Unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

/// Load, k-core filter and split as configured.
InteractionDataset prepare_dataset(const RunConfig& config);

nlohmann::json to_json(const DatasetStats& stats);
nlohmann::json to_json(const RankingMetrics& metrics);
nlohmann::json to_json(const EpochRecord& record);

// Checkpoint layout, all integers and doubles little-endian:
//   8 bytes  magic "WIGCNCKP"
//   u32      format version (1)
//   u32      variant (0 wigcn, 1 ngcf_like, 2 lightgcn_like)
//   f64      leaky slope
//   u64      n_users, n_items, embedding width, n_layers
//   per layer: u64 rows, u64 cols of w1 (w2 and bias share them)
//   f64[]    e0 row-major, then per layer w1, w2 row-major and bias
struct Checkpoint {
    ModelParams params;
    Variant variant = Variant::wigcn;
    double leaky_slope = kDefaultLeakySlope;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Embedding export layout, little-endian:
//   8 bytes  magic "WIGCNEMB"
//   u32      format version (1)
//   u64      n_users, n_items, width
//   then n_users + n_items rows, users first: i64 external id, f64[width]
struct EmbeddingTable {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::vector<std::int64_t> external_ids;
    DenseMatrix rows;
};

inline constexpr std::uint32_t kEmbeddingVersion = 1;

EmbeddingTable make_embedding_table(const ForwardTrace& trace, const InteractionDataset& dataset);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

}  // namespace wigcn
