#include "wigcn/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "wigcn/error.hpp"

namespace wigcn {

namespace {

using nlohmann::json;

template <typename T>
T get_number(const json& j, const char* key) {
    const json& value = j.at(key);
    if (!value.is_number()) {
        throw usage_error(std::string("config key '") + key + "' must be a number");
    }
    if constexpr (std::is_integral_v<T>) {
        if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<std::int64_t>() < 0)) {
            throw usage_error(std::string("config key '") + key + "' must be a non-negative integer");
        }
    }
    return value.get<T>();
}

// Little-endian primitive IO independent of host byte order.
class BinaryWriter {
public:
    explicit BinaryWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw data_error("cannot open '" + path.string() + "' for writing");
        path_ = path.string();
    }
    void bytes(const char* data, std::size_t n) { out_.write(data, static_cast<std::streamsize>(n)); }
    void u32(std::uint32_t v) { unsigned_le(v, 4); }
    void u64(std::uint64_t v) { unsigned_le(v, 8); }
    void i64(std::int64_t v) { unsigned_le(static_cast<std::uint64_t>(v), 8); }
    void f64(double v) { unsigned_le(std::bit_cast<std::uint64_t>(v), 8); }
    void f64s(const double* data, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(reinterpret_cast<const char*>(data), n * sizeof(double));
        } else {
            for (std::size_t i = 0; i < n; ++i) f64(data[i]);
        }
    }
    void finish() {
        out_.flush();
        if (!out_) throw data_error("write to '" + path_ + "' failed");
    }

private:
    void unsigned_le(std::uint64_t v, int width) {
        std::array<char, 8> buf{};
        for (int i = 0; i < width; ++i) buf[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
        bytes(buf.data(), static_cast<std::size_t>(width));
    }

    std::ofstream out_;
    std::string path_;
};

class BinaryReader {
public:
    explicit BinaryReader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path.string()) {
        if (!in_) throw data_error("cannot open '" + path_ + "'");
    }
    void bytes(char* data, std::size_t n) {
        in_.read(data, static_cast<std::streamsize>(n));
        if (!in_) throw data_error("'" + path_ + "' is truncated");
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(unsigned_le(4)); }
    std::uint64_t u64() { return unsigned_le(8); }
    std::int64_t i64() { return static_cast<std::int64_t>(unsigned_le(8)); }
    double f64() { return std::bit_cast<double>(unsigned_le(8)); }
    void f64s(double* data, std::size_t n) {
        if constexpr (std::endian::native == std::endian::little) {
            bytes(reinterpret_cast<char*>(data), n * sizeof(double));
        } else {
            for (std::size_t i = 0; i < n; ++i) data[i] = f64();
        }
    }
    void expect_end() {
        if (in_.peek() != std::char_traits<char>::eof()) {
            throw data_error("'" + path_ + "' has trailing bytes");
        }
    }
    const std::string& path() const { return path_; }

private:
    std::uint64_t unsigned_le(int width) {
        std::array<unsigned char, 8> buf{};
        bytes(reinterpret_cast<char*>(buf.data()), static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = width - 1; i >= 0; --i) v = (v << 8) | buf[static_cast<std::size_t>(i)];
        return v;
    }

    std::ifstream in_;
    std::string path_;
};

constexpr char kCheckpointMagic[8] = {'W', 'I', 'G', 'C', 'N', 'C', 'K', 'P'};
constexpr char kEmbeddingMagic[8] = {'W', 'I', 'G', 'C', 'N', 'E', 'M', 'B'};

void read_magic(BinaryReader& in, const char (&magic)[8], const char* what) {
    char buf[8];
    in.bytes(buf, 8);
    if (std::memcmp(buf, magic, 8) != 0) {
        throw data_error("'" + in.path() + "' is not a " + what);
    }
}

// Guards allocations driven by header fields of corrupt files.
std::size_t checked_size(std::uint64_t v, const BinaryReader& in) {
    if (v > (std::uint64_t{1} << 32)) {
        throw data_error("'" + in.path() + "' has an implausible dimension " + std::to_string(v));
    }
    return static_cast<std::size_t>(v);
}

}  // namespace

void RunConfig::validate() const {
    if (dataset_paths.empty()) throw usage_error("config: dataset_path is required");
    if (k_core == 0) throw usage_error("config: k_core must be at least 1");
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw usage_error("config: test_fraction must lie strictly between 0 and 1");
    }
    if (eval_k == 0) throw usage_error("config: eval_k must be at least 1");
    train.validate();
}

RunConfig run_config_from_json(const json& j) {
    if (!j.is_object()) {
        throw usage_error("config must be a JSON object");
    }
    static const std::set<std::string> known = {
        "dataset_path", "dataset_format", "k_core",     "test_fraction", "d",          "n_layers",
        "learning_rate", "lambda_reg",    "batch_size", "epochs",        "seed",       "leaky_slope",
        "variant",       "eval_k",        "output_dir", "checkpoint_every"};
    for (const auto& [key, _] : j.items()) {
        if (!known.contains(key)) throw usage_error("config: unknown key '" + key + "'");
    }

    RunConfig c;
    try {
        if (j.contains("dataset_path")) {
            const json& paths = j.at("dataset_path");
            if (paths.is_string()) {
                c.dataset_paths.emplace_back(paths.get<std::string>());
            } else if (paths.is_array()) {
                for (const auto& p : paths) c.dataset_paths.emplace_back(p.get<std::string>());
            } else {
                throw usage_error("config: dataset_path must be a string or an array of strings");
            }
        }
        if (j.contains("dataset_format")) c.dataset_format = parse_file_format(j.at("dataset_format").get<std::string>());
        if (j.contains("k_core")) c.k_core = get_number<std::size_t>(j, "k_core");
        if (j.contains("test_fraction")) c.test_fraction = get_number<double>(j, "test_fraction");
        if (j.contains("d")) c.train.d = get_number<std::size_t>(j, "d");
        if (j.contains("n_layers")) c.train.n_layers = get_number<std::size_t>(j, "n_layers");
        if (j.contains("learning_rate")) c.train.learning_rate = get_number<double>(j, "learning_rate");
        if (j.contains("lambda_reg")) c.train.lambda_reg = get_number<double>(j, "lambda_reg");
        if (j.contains("batch_size")) c.train.batch_size = get_number<std::size_t>(j, "batch_size");
        if (j.contains("epochs")) c.train.epochs = get_number<std::size_t>(j, "epochs");
        if (j.contains("seed")) c.train.seed = get_number<std::uint64_t>(j, "seed");
        if (j.contains("leaky_slope")) c.train.leaky_slope = get_number<double>(j, "leaky_slope");
        if (j.contains("variant")) c.train.variant = parse_variant(j.at("variant").get<std::string>());
        if (j.contains("eval_k")) c.eval_k = get_number<std::size_t>(j, "eval_k");
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
        if (j.contains("checkpoint_every")) c.checkpoint_every = get_number<std::size_t>(j, "checkpoint_every");
    } catch (const json::exception& e) {
        throw usage_error(std::string("config: ") + e.what());
    }
    return c;
}

json to_json(const RunConfig& c) {
    json paths = json::array();
    for (const auto& p : c.dataset_paths) paths.push_back(p.string());
    return {{"dataset_path", paths},
            {"dataset_format", std::string(to_string(c.dataset_format))},
            {"k_core", c.k_core},
            {"test_fraction", c.test_fraction},
            {"d", c.train.d},
            {"n_layers", c.train.n_layers},
            {"learning_rate", c.train.learning_rate},
            {"lambda_reg", c.train.lambda_reg},
            {"batch_size", c.train.batch_size},
            {"epochs", c.train.epochs},
            {"seed", c.train.seed},
            {"leaky_slope", c.train.leaky_slope},
            {"variant", std::string(to_string(c.train.variant))},
            {"eval_k", c.eval_k},
            {"output_dir", c.output_dir.string()},
            {"checkpoint_every", c.checkpoint_every}};
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw usage_error("cannot open config file '" + path.string() + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw usage_error("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    RunConfig config = run_config_from_json(j);
    // Relative paths inside a config file are relative to that file.
    const auto base = path.parent_path();
    for (auto& p : config.dataset_paths) {
        if (p.is_relative()) p = base / p;
    }
    if (j.contains("output_dir") && config.output_dir.is_relative()) {
        config.output_dir = base / config.output_dir;
    }
    return config;
}

InteractionDataset prepare_dataset(const RunConfig& config) {
    std::vector<RawInteraction> raw;
    for (const auto& path : config.dataset_paths) {
        auto part = load_interactions(path, config.dataset_format);
        raw.insert(raw.end(), part.begin(), part.end());
    }
    const auto filtered = k_core_filter(raw, config.k_core);
    if (filtered.empty()) {
        throw data_error("no interactions survive " + std::to_string(config.k_core) + "-core filtering");
    }
    return train_test_split(filtered, config.test_fraction, config.train.seed);
}

json to_json(const DatasetStats& s) {
    return {{"n_users", s.n_users}, {"n_items", s.n_items}, {"n_relations", s.n_relations}, {"density", s.density}};
}

json to_json(const RankingMetrics& m) {
    return {{"k", m.k},           {"precision", m.precision}, {"recall", m.recall},
            {"f1", m.f1},         {"ndcg", m.ndcg},           {"n_users_evaluated", m.n_users_evaluated}};
}

json to_json(const EpochRecord& r) {
    return {{"epoch", r.epoch}, {"mean_loss", r.mean_loss}, {"wall_seconds", r.wall_seconds}};
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
    const ModelParams& p = checkpoint.params;
    BinaryWriter out(path);
    out.bytes(kCheckpointMagic, 8);
    out.u32(kCheckpointVersion);
    out.u32(static_cast<std::uint32_t>(checkpoint.variant));
    out.f64(checkpoint.leaky_slope);
    out.u64(p.n_users);
    out.u64(p.n_items);
    out.u64(p.embedding_dim());
    out.u64(p.n_layers());
    for (const auto& layer : p.layers) {
        out.u64(static_cast<std::uint64_t>(layer.w1.rows()));
        out.u64(static_cast<std::uint64_t>(layer.w1.cols()));
    }
    for (auto block : parameter_blocks(p)) {
        out.f64s(block.data(), block.size());
    }
    out.finish();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    BinaryReader in(path);
    read_magic(in, kCheckpointMagic, "wigcn checkpoint");
    const std::uint32_t version = in.u32();
    if (version != kCheckpointVersion) {
        throw data_error("'" + path.string() + "' has unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    const std::uint32_t variant = in.u32();
    if (variant > static_cast<std::uint32_t>(Variant::lightgcn_like)) {
        throw data_error("'" + path.string() + "' names an unknown variant");
    }
    c.variant = static_cast<Variant>(variant);
    c.leaky_slope = in.f64();
    ModelParams& p = c.params;
    p.n_users = checked_size(in.u64(), in);
    p.n_items = checked_size(in.u64(), in);
    const std::size_t width = checked_size(in.u64(), in);
    const std::size_t n_layers = checked_size(in.u64(), in);
    p.e0.resize(static_cast<Eigen::Index>(p.n_users + p.n_items), static_cast<Eigen::Index>(width));
    p.layers.resize(n_layers);
    for (auto& layer : p.layers) {
        const auto rows = static_cast<Eigen::Index>(checked_size(in.u64(), in));
        const auto cols = static_cast<Eigen::Index>(checked_size(in.u64(), in));
        layer.w1.resize(rows, cols);
        layer.w2.resize(rows, cols);
        layer.bias.resize(cols);
    }
    for (auto block : parameter_blocks(p)) {
        in.f64s(block.data(), block.size());
    }
    in.expect_end();
    return c;
}

EmbeddingTable make_embedding_table(const ForwardTrace& trace, const InteractionDataset& dataset) {
    if (trace.n_users != dataset.n_users || trace.n_items != dataset.n_items) {
        throw data_error("embedding export: model and dataset sizes differ");
    }
    EmbeddingTable table;
    table.n_users = trace.n_users;
    table.n_items = trace.n_items;
    table.rows = trace.final_embedding;
    table.external_ids.reserve(trace.n_users + trace.n_items);
    for (auto id : dataset.user_ids.externals()) table.external_ids.push_back(id);
    for (auto id : dataset.item_ids.externals()) table.external_ids.push_back(id);
    return table;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
    BinaryWriter out(path);
    out.bytes(kEmbeddingMagic, 8);
    out.u32(kEmbeddingVersion);
    out.u64(table.n_users);
    out.u64(table.n_items);
    out.u64(static_cast<std::uint64_t>(table.rows.cols()));
    for (Eigen::Index r = 0; r < table.rows.rows(); ++r) {
        out.i64(table.external_ids.at(static_cast<std::size_t>(r)));
        out.f64s(table.rows.row(r).data(), static_cast<std::size_t>(table.rows.cols()));
    }
    out.finish();
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) {
    BinaryReader in(path);
    read_magic(in, kEmbeddingMagic, "wigcn embedding file");
    const std::uint32_t version = in.u32();
    if (version != kEmbeddingVersion) {
        throw data_error("'" + path.string() + "' has unsupported embedding version " + std::to_string(version));
    }
    EmbeddingTable table;
    table.n_users = checked_size(in.u64(), in);
    table.n_items = checked_size(in.u64(), in);
    const std::size_t width = checked_size(in.u64(), in);
    const std::size_t n_rows = table.n_users + table.n_items;
    table.rows.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(width));
    table.external_ids.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        table.external_ids[r] = in.i64();
        in.f64s(table.rows.row(static_cast<Eigen::Index>(r)).data(), width);
    }
    in.expect_end();
    return table;
}

}  // namespace wigcn
