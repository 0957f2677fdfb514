#include "wigcn/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <vector>

#include <CLI11.hpp>

#include "wigcn/error.hpp"
#include "wigcn/eval.hpp"
#include "wigcn/graph.hpp"
#include "wigcn/io.hpp"
#include "wigcn/model.hpp"
#include "wigcn/training.hpp"

namespace wigcn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> variant;
    std::optional<std::size_t> k;
    std::vector<std::string> data;
    std::optional<std::string> format;
    std::optional<std::size_t> epochs;
    std::optional<std::string> output_dir;
};

RunConfig resolve_config(const Overrides& o) {
    RunConfig config = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
    if (o.seed) config.train.seed = *o.seed;
    if (o.variant) config.train.variant = parse_variant(*o.variant);
    if (o.k && *o.k > 0) config.eval_k = *o.k;
    if (!o.data.empty()) config.dataset_paths.assign(o.data.begin(), o.data.end());
    if (o.format) config.dataset_format = parse_file_format(*o.format);
    if (o.epochs) config.train.epochs = *o.epochs;
    if (o.output_dir) config.output_dir = *o.output_dir;
    config.validate();
    return config;
}

fs::path checkpoint_path_or_default(const std::string& flag, const RunConfig& config) {
    return flag.empty() ? config.output_dir / "model.ckpt" : fs::path(flag);
}

GraphInputs graph_for(const InteractionDataset& dataset) { return build_graph_inputs(dataset.train_matrix()); }

// Rejects checkpoints that do not fit the configured model and dataset.
void check_checkpoint_shape(const Checkpoint& c, const RunConfig& config, const InteractionDataset& dataset) {
    const ModelParams& p = c.params;
    if (p.n_users != dataset.n_users || p.n_items != dataset.n_items || p.embedding_dim() != config.train.d ||
        p.n_layers() != config.train.n_layers) {
        throw data_error("checkpoint shape mismatch: expected users=" + std::to_string(dataset.n_users) +
                         " items=" + std::to_string(dataset.n_items) + " d=" + std::to_string(config.train.d) +
                         " layers=" + std::to_string(config.train.n_layers) +
                         ", got users=" + std::to_string(p.n_users) + " items=" + std::to_string(p.n_items) +
                         " d=" + std::to_string(p.embedding_dim()) + " layers=" + std::to_string(p.n_layers()));
    }
}

struct LoadedModel {
    InteractionDataset dataset;
    ForwardTrace trace;
};

LoadedModel load_model(const RunConfig& config, const fs::path& checkpoint_path) {
    if (checkpoint_path.empty()) {
        throw usage_error("checkpoint path is empty");
    }
    LoadedModel loaded;
    loaded.dataset = prepare_dataset(config);
    const Checkpoint checkpoint = load_checkpoint(checkpoint_path);
    check_checkpoint_shape(checkpoint, config, loaded.dataset);
    const GraphInputs inputs = graph_for(loaded.dataset);
    loaded.trace = forward(checkpoint.params, inputs, checkpoint.variant, checkpoint.leaky_slope);
    return loaded;
}

int cmd_stats(const RunConfig& config, std::ostream& out) {
    const InteractionDataset dataset = prepare_dataset(config);
    out << to_json(dataset_stats(dataset)).dump() << '\n';
    return kExitSuccess;
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    const InteractionDataset dataset = prepare_dataset(config);
    const GraphInputs inputs = graph_for(dataset);

    fs::create_directories(config.output_dir);
    {
        std::ofstream config_out(config.output_dir / "config.json");
        config_out << to_json(config).dump(2) << '\n';
    }
    const fs::path history_path = config.output_dir / "history.jsonl";
    std::ofstream history(history_path, std::ios::trunc);
    if (!history) {
        throw data_error("cannot write '" + history_path.string() + "'");
    }

    auto on_epoch = [&](const EpochRecord& record, const ModelParams& params) {
        history << to_json(record).dump() << '\n';
        history.flush();
        if (config.checkpoint_every > 0 && record.epoch % config.checkpoint_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "checkpoint_epoch_%04zu.ckpt", record.epoch);
            save_checkpoint(config.output_dir / name, {params, config.train.variant, config.train.leaky_slope});
        }
        err << "epoch " << record.epoch << " mean_loss " << record.mean_loss << '\n';
    };
    const TrainResult result = train(dataset, inputs, config.train, on_epoch);

    const fs::path model_path = config.output_dir / "model.ckpt";
    save_checkpoint(model_path, {result.params, config.train.variant, config.train.leaky_slope});
    json summary = {{"epochs", result.history.size()},
                    {"checkpoint", model_path.string()},
                    {"history", history_path.string()}};
    if (!result.history.empty()) summary["final_mean_loss"] = result.history.back().mean_loss;
    out << summary.dump() << '\n';
    return kExitSuccess;
}

int cmd_evaluate(const RunConfig& config, const std::string& checkpoint_flag, std::ostream& out) {
    const LoadedModel model = load_model(config, checkpoint_path_or_default(checkpoint_flag, config));
    out << to_json(evaluate_model(model.trace, model.dataset, config.eval_k)).dump() << '\n';
    return kExitSuccess;
}

int cmd_recommend(const RunConfig& config, const std::string& checkpoint_flag, std::int64_t user,
                  std::size_t k, std::ostream& out) {
    const LoadedModel model = load_model(config, checkpoint_path_or_default(checkpoint_flag, config));
    const auto dense_user = model.dataset.user_ids.dense(user);
    if (!dense_user) {
        throw data_error("unknown user id " + std::to_string(user));
    }
    const DenseVector scores = predict_scores(model.trace, *dense_user);
    const auto ranked = topk_ranking(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                                     model.dataset.train_positives[*dense_user], k);
    json items = json::array();
    for (index_t item : ranked) {
        items.push_back({{"item", model.dataset.item_ids.external(item)}, {"score", scores[item]}});
    }
    out << json{{"user", user}, {"items", items}}.dump() << '\n';
    return kExitSuccess;
}

int cmd_export(const RunConfig& config, const std::string& checkpoint_flag, const std::string& out_path,
               std::ostream& out) {
    if (checkpoint_flag.empty()) {
        throw usage_error("export-embeddings: --checkpoint is required");
    }
    const LoadedModel model = load_model(config, checkpoint_flag);
    const EmbeddingTable table = make_embedding_table(model.trace, model.dataset);
    save_embeddings(out_path, table);
    out << json{{"path", out_path},
                {"n_users", table.n_users},
                {"n_items", table.n_items},
                {"width", table.rows.cols()}}
               .dump()
        << '\n';
    return kExitSuccess;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Graph-convolutional collaborative filtering with weighted co-interaction input", "wigcn"};
    app.require_subcommand(1);
    app.fallthrough();

    Overrides o;
    app.add_option("--config", o.config_path, "JSON run configuration");
    app.add_option("--seed", o.seed, "Random seed for splitting, initialization and sampling");
    app.add_option("--variant", o.variant, "wigcn | ngcf_like | lightgcn_like");
    app.add_option("--k", o.k, "Cutoff for evaluation or number of recommendations");
    app.add_option("--data", o.data, "Dataset file(s), overriding dataset_path");
    app.add_option("--format", o.format, "edge-list | grouped-list");
    app.add_option("--epochs", o.epochs, "Number of training epochs");
    app.add_option("--output-dir", o.output_dir, "Directory for history and checkpoints");

    std::string checkpoint;
    std::string export_path;
    std::int64_t user = 0;

    auto* stats = app.add_subcommand("stats", "Print dataset statistics after filtering and splitting");
    auto* train_cmd = app.add_subcommand("train", "Train a model and write history and checkpoints");
    auto* evaluate = app.add_subcommand("evaluate", "Report top-k ranking metrics of a checkpoint");
    evaluate->add_option("--checkpoint", checkpoint, "Checkpoint file (default: <output_dir>/model.ckpt)");
    auto* recommend = app.add_subcommand("recommend", "List the top-k items for one user");
    recommend->add_option("--checkpoint", checkpoint, "Checkpoint file (default: <output_dir>/model.ckpt)");
    recommend->add_option("--user", user, "External user id")->required();
    auto* export_cmd = app.add_subcommand("export-embeddings", "Write final embeddings in binary form");
    export_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    export_cmd->add_option("--out", export_path, "Output file")->required();

    std::vector<std::string> argv_storage;
    argv_storage.emplace_back("wigcn");
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitSuccess : kExitUsage;
    }

    try {
        const RunConfig config = resolve_config(o);
        if (stats->parsed()) return cmd_stats(config, out);
        if (train_cmd->parsed()) return cmd_train(config, out, err);
        if (evaluate->parsed()) return cmd_evaluate(config, checkpoint, out);
        if (recommend->parsed()) return cmd_recommend(config, checkpoint, user, o.k.value_or(config.eval_k), out);
        if (export_cmd->parsed()) return cmd_export(config, checkpoint, export_path, out);
    } catch (const usage_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const numerical_error& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const data_error& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace wigcn
