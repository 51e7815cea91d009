#pragma once

#include "bcas/backend.hpp"
#include "bcas/datasets.hpp"
#include "bcas/retrieval/embedder.hpp"
#include "bcas/retrieval/rerank.hpp"
#include "bcas/retrieval/service.hpp"
#include "bcas/stats.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bcas {

struct BackendSpec {
    enum class Kind { Http, Scripted };
    Kind kind = Kind::Scripted;
    std::string endpoint;       // http
    std::string model;          // http
    std::string script_path;    // scripted trace file
};

struct JudgeSpec {
    enum class Kind { ExactMatch, Http, Scripted };
    Kind kind = Kind::ExactMatch;
    std::string endpoint;
    std::string model;
    std::string script_path;
};

/// One experiment: everything needed to run a dataset's eval set under one
/// budget/retrieval configuration. Mirrors the config-file keys exactly.
struct ExperimentConfig {
    std::string dataset_path;
    DatasetFormat dataset_format = DatasetFormat::Jsonl;
    std::string collection;
    retrieval::SearchMode mode = retrieval::SearchMode::BM25;
    std::optional<std::uint32_t> max_searches;   // nullopt = unlimited
    std::uint64_t max_total_tokens = 16000;
    bool preplan = false;
    bool reflection = false;
    std::uint32_t reflection_interval = 2;
    std::uint32_t max_turns = 25;
    BackendSpec backend;
    JudgeSpec judge;
    std::size_t n_samples = 0;                   // 0 = whole dataset
    std::uint64_t seed = 42;
    std::uint32_t concurrency = 4;
    std::string output_dir = "runs";
    std::string price_sheet_path;                // empty = all prices zero
    std::string index_dir = "index";
    std::string embedder_spec = "hash";          // hash | http:<endpoint>
    std::string reranker_spec;                   // empty | http:<endpoint>
    std::string session_log;                     // raw request/response JSONL

    void validate() const;
    /// Every field as a (key, value) pair in canonical order.
    std::vector<std::pair<std::string, std::string>> canonical_items() const;
    std::string digest() const;
    /// Short digest prefix used in telemetry and run directory names.
    std::string config_id() const;
};

/// Ordered key=value pairs as read from a config file or --set overrides.
using RawConfig = std::vector<std::pair<std::string, std::string>>;

RawConfig read_config_file(const std::filesystem::path& path);
void set_raw(RawConfig& raw, std::string_view key, std::string_view value);
ExperimentConfig config_from_raw(const RawConfig& raw);   // throws ConfigError

/// Expands comma lists in max_searches / max_total_tokens into the grid of
/// concrete configs, in list order (searches outer, tokens inner).
std::vector<ExperimentConfig> expand_grid(const RawConfig& raw);

std::unique_ptr<retrieval::Embedder> make_embedder(std::string_view spec);
std::unique_ptr<retrieval::Reranker> make_reranker(std::string_view spec);

/// Loads the persisted index for the config's collection, or builds and
/// persists it from the dataset's inline documents.
retrieval::Index ensure_index(const ExperimentConfig& config, const LoadedDataset& dataset,
                              retrieval::Embedder* embedder);

struct RunOptions {
    /// Stop appending after this many records this invocation; simulates a
    /// kill for resume tests.
    std::optional<std::size_t> abort_after_records;
    bool quiet = false;
    /// Test hook: when set, supplies the per-trajectory backend instead of
    /// the config's backend spec (used to instrument concurrency and budgets).
    std::function<std::unique_ptr<ModelBackend>(const Sample&)> backend_factory;
};

struct RunResult {
    RunSummary summary;               // over every record in the run dir
    std::filesystem::path run_dir;
    std::size_t executed = 0;         // records appended by this invocation
    std::size_t skipped = 0;          // resume skips
    std::size_t failed = 0;           // failed-outcome records this invocation
    bool aborted = false;
    std::string dataset_digest;
    std::string eval_set_digest;
};

/// Runs every selected sample with bounded concurrency, appending durable
/// telemetry with idempotent resume on (sample_id, config_id). Per-sample
/// failures are recorded and the run continues.
RunResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

} // namespace bcas
