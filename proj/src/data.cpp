#include "wigcn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>

#include "wigcn/error.hpp"

namespace wigcn {

FileFormat parse_file_format(std::string_view name) {
    if (name == "edge-list" || name == "edge_list") return FileFormat::edge_list;
    if (name == "grouped-list" || name == "grouped_list") return FileFormat::grouped_list;
    throw usage_error("unknown dataset format '" + std::string(name) + "' (expected edge-list or grouped-list)");
}

std::string_view to_string(FileFormat format) {
    return format == FileFormat::edge_list ? "edge-list" : "grouped-list";
}

IdMap::IdMap(std::vector<std::int64_t> sorted_unique_ids) : external_(std::move(sorted_unique_ids)) {
    dense_.reserve(external_.size());
    for (std::size_t i = 0; i < external_.size(); ++i) {
        dense_.emplace(external_[i], static_cast<index_t>(i));
    }
}

std::optional<index_t> IdMap::dense(std::int64_t external) const {
    auto it = dense_.find(external);
    if (it == dense_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t InteractionDataset::n_train() const {
    std::size_t total = 0;
    for (const auto& items : train_positives) total += items.size();
    return total;
}

std::size_t InteractionDataset::n_test() const {
    std::size_t total = 0;
    for (const auto& items : test_positives) total += items.size();
    return total;
}

std::vector<Interaction> InteractionDataset::train_interactions() const {
    std::vector<Interaction> out;
    out.reserve(n_train());
    for (std::size_t u = 0; u < train_positives.size(); ++u) {
        for (index_t item : train_positives[u]) {
            out.push_back({static_cast<index_t>(u), item});
        }
    }
    return out;
}

SparseMatrix InteractionDataset::train_matrix() const {
    return build_interaction_matrix(train_interactions(), n_users, n_items);
}

std::vector<RawInteraction> parse_interactions(std::istream& in, FileFormat format, std::string_view source_name) {
    std::vector<RawInteraction> out;
    std::string line;
    std::size_t line_number = 0;
    std::vector<std::int64_t> ids;

    while (std::getline(in, line)) {
        ++line_number;
        ids.clear();
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
            if (p == end) break;
            std::int64_t value = 0;
            auto [next, ec] = std::from_chars(p, end, value);
            const bool token_ends = next == end || *next == ' ' || *next == '\t' || *next == '\r';
            if (ec != std::errc{} || !token_ends || value < 0) {
                throw data_error(std::string(source_name) + ": malformed line " + std::to_string(line_number) +
                                 ": expected non-negative integer ids");
            }
            ids.push_back(value);
            p = next;
        }
        if (ids.empty()) {
            continue;
        }
        if (format == FileFormat::edge_list) {
            if (ids.size() != 2) {
                throw data_error(std::string(source_name) + ": malformed line " + std::to_string(line_number) +
                                 ": expected exactly two ids");
            }
            out.push_back({ids[0], ids[1]});
        } else {
            for (std::size_t i = 1; i < ids.size(); ++i) {
                out.push_back({ids[0], ids[i]});
            }
        }
    }
    if (out.empty()) {
        throw data_error(std::string(source_name) + ": no interactions found");
    }
    return out;
}

std::vector<RawInteraction> load_interactions(const std::filesystem::path& path, FileFormat format) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open dataset file '" + path.string() + "'");
    }
    return parse_interactions(in, format, path.string());
}

std::vector<RawInteraction> k_core_filter(std::span<const RawInteraction> raw, std::size_t k) {
    if (k == 0) {
        throw usage_error("k_core_filter: k must be at least 1");
    }
    std::vector<RawInteraction> edges(raw.begin(), raw.end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<std::int64_t> users;
    std::vector<std::int64_t> items;
    for (const auto& e : edges) {
        users.push_back(e.user);
        items.push_back(e.item);
    }
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());

    auto user_of = [&](const RawInteraction& e) {
        return static_cast<std::size_t>(std::lower_bound(users.begin(), users.end(), e.user) - users.begin());
    };
    auto item_of = [&](const RawInteraction& e) {
        return static_cast<std::size_t>(std::lower_bound(items.begin(), items.end(), e.item) - items.begin());
    };

    // Vertices 0..|users|-1 are users, the rest items; adjacency lists hold edge ids.
    const std::size_t n_users = users.size();
    std::vector<std::vector<std::size_t>> incident(n_users + items.size());
    std::vector<std::size_t> degree(incident.size(), 0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const std::size_t u = user_of(edges[e]);
        const std::size_t i = n_users + item_of(edges[e]);
        incident[u].push_back(e);
        incident[i].push_back(e);
        ++degree[u];
        ++degree[i];
    }

    std::vector<char> edge_alive(edges.size(), 1);
    std::vector<char> removed(incident.size(), 0);
    std::vector<std::size_t> queue;
    for (std::size_t v = 0; v < incident.size(); ++v) {
        if (degree[v] < k) {
            removed[v] = 1;
            queue.push_back(v);
        }
    }
    while (!queue.empty()) {
        const std::size_t v = queue.back();
        queue.pop_back();
        for (std::size_t e : incident[v]) {
            if (!edge_alive[e]) continue;
            edge_alive[e] = 0;
            const std::size_t u = user_of(edges[e]);
            const std::size_t other = (v == u) ? n_users + item_of(edges[e]) : u;
            --degree[other];
            if (!removed[other] && degree[other] < k) {
                removed[other] = 1;
                queue.push_back(other);
            }
        }
    }

    std::vector<RawInteraction> out;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edge_alive[e]) out.push_back(edges[e]);
    }
    return out;
}

InteractionDataset train_test_split(std::span<const RawInteraction> interactions, double test_fraction,
                                    std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw usage_error("train_test_split: test_fraction must lie strictly between 0 and 1");
    }
    std::vector<RawInteraction> edges(interactions.begin(), interactions.end());
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (edges.empty()) {
        throw data_error("train_test_split: no interactions to split");
    }

    std::vector<std::int64_t> users;
    std::vector<std::int64_t> items;
    for (const auto& e : edges) {
        users.push_back(e.user);
        items.push_back(e.item);
    }
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());

    InteractionDataset dataset;
    dataset.user_ids = IdMap(std::move(users));
    dataset.item_ids = IdMap(std::move(items));
    dataset.n_users = dataset.user_ids.size();
    dataset.n_items = dataset.item_ids.size();
    dataset.train_positives.assign(dataset.n_users, {});
    dataset.test_positives.assign(dataset.n_users, {});

    std::vector<Interaction> dense(edges.size());
    std::vector<std::size_t> remaining_train(dataset.n_users, 0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        dense[e] = {*dataset.user_ids.dense(edges[e].user), *dataset.item_ids.dense(edges[e].item)};
        ++remaining_train[dense[e].user];
    }

    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    const auto target = static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(edges.size())));
    std::vector<char> is_test(edges.size(), 0);
    std::size_t picked = 0;
    for (std::size_t idx = 0; idx < order.size() && picked < target; ++idx) {
        const std::size_t e = order[idx];
        if (remaining_train[dense[e].user] <= 1) {
            continue;
        }
        is_test[e] = 1;
        --remaining_train[dense[e].user];
        ++picked;
    }

    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto& bucket = is_test[e] ? dataset.test_positives : dataset.train_positives;
        bucket[dense[e].user].push_back(dense[e].item);
    }
    for (auto* sets : {&dataset.train_positives, &dataset.test_positives}) {
        for (auto& s : *sets) std::sort(s.begin(), s.end());
    }
    return dataset;
}

DatasetStats dataset_stats(const InteractionDataset& dataset) {
    DatasetStats stats;
    stats.n_users = dataset.n_users;
    stats.n_items = dataset.n_items;
    stats.n_relations = dataset.n_train() + dataset.n_test();
    if (stats.n_users > 0 && stats.n_items > 0) {
        stats.density = static_cast<double>(stats.n_relations) /
                        (static_cast<double>(stats.n_users) * static_cast<double>(stats.n_items));
    }
    return stats;
}

}  // namespace wigcn
