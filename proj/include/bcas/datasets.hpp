#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bcas {

struct Sample {
    std::string sample_id;
    std::string question;
    std::string reference_answer;
    std::vector<std::string> source_docs;
    std::optional<std::string> difficulty;

    bool operator==(const Sample&) const = default;
};

struct Document {
    std::string doc_id;
    std::string title;
    std::string text;
};

struct DatasetManifest {
    std::string name;
    std::string collection;
    std::vector<Sample> samples;
    std::string content_hash;   // dataset_hash(samples)
};

enum class DatasetFormat { TriviaQa, HotpotQa, TwoWiki, Jsonl };

DatasetFormat dataset_format_from_string(std::string_view text);   // throws ConfigError
std::string to_string(DatasetFormat format);

struct LoadedDataset {
    DatasetManifest manifest;
    /// Documents carried inline by the format (HotpotQA/2Wiki context
    /// paragraphs, jsonl "docs"); registered for ingestion under the
    /// manifest's collection. TriviaQA evidence lives outside its JSON, so
    /// its corpus is ingested separately.
    std::vector<Document> documents;
};

/// Parses one of the three benchmark layouts or the normalized interchange
/// JSONL. Throws SchemaError (with a line/entry position) or MissingField.
LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                           std::string_view collection);

/// Digest over the canonical serialization: samples sorted by sample_id,
/// fixed field order. Independent of on-disk ordering.
std::string dataset_hash(std::span<const Sample> samples);

/// Deterministic seeded subset of n samples, returned in canonical
/// (sample_id) order; identical across platforms for the same seed.
std::vector<Sample> select_eval_set(const DatasetManifest& manifest, std::size_t n,
                                    std::uint64_t seed);

/// Normalized interchange JSONL, one sample per line.
void write_normalized(const std::filesystem::path& path, std::span<const Sample> samples);

/// Corpus ingestion records ({doc_id, collection, title, text} per line).
std::vector<Document> read_corpus_jsonl(const std::filesystem::path& path);
void write_corpus_jsonl(const std::filesystem::path& path, std::span<const Document> documents,
                        std::string_view collection);

} // namespace bcas
