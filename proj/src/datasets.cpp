#include "bcas/datasets.hpp"

#include "bcas/errors.hpp"
#include "bcas/hash.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <random>

namespace bcas {

using nlohmann::json;

DatasetFormat dataset_format_from_string(std::string_view text) {
    if (text == "triviaqa") return DatasetFormat::TriviaQa;
    if (text == "hotpotqa") return DatasetFormat::HotpotQa;
    if (text == "2wiki") return DatasetFormat::TwoWiki;
    if (text == "jsonl") return DatasetFormat::Jsonl;
    throw ConfigError("unknown dataset format: " + std::string(text));
}

std::string to_string(DatasetFormat format) {
    switch (format) {
        case DatasetFormat::TriviaQa: return "triviaqa";
        case DatasetFormat::HotpotQa: return "hotpotqa";
        case DatasetFormat::TwoWiki: return "2wiki";
        case DatasetFormat::Jsonl: return "jsonl";
    }
    return "jsonl";
}

namespace {

std::string require_string(const json& j, const char* field, const std::string& where) {
    if (!j.contains(field)) {
        throw MissingField(where + ": missing field \"" + field + "\"");
    }
    if (!j.at(field).is_string()) {
        throw SchemaError(where + ": field \"" + field + "\" must be a string");
    }
    std::string value = j.at(field).get<std::string>();
    if (value.empty()) {
        throw MissingField(where + ": field \"" + field + "\" is empty");
    }
    return value;
}

void check_sample(const Sample& sample, const std::string& where) {
    if (sample.question.empty()) {
        throw MissingField(where + ": missing field \"question\"");
    }
    if (sample.reference_answer.empty()) {
        throw MissingField(where + ": missing field \"answer\"");
    }
}

// HotpotQA and 2WikiMultihopQA share their layout: an array of entries with
// _id, question, answer, optional level/type and context paragraphs as
// [title, [sentences...]] pairs.
LoadedDataset load_hotpot_like(const json& root, std::string_view collection,
                               const std::string& where_prefix) {
    if (!root.is_array()) {
        throw SchemaError(where_prefix + ": expected a top-level array");
    }
    LoadedDataset out;
    std::size_t entry_no = 0;
    for (const json& entry : root) {
        ++entry_no;
        const std::string where = where_prefix + ": entry " + std::to_string(entry_no);
        Sample sample;
        sample.sample_id = require_string(entry, "_id", where);
        sample.question = require_string(entry, "question", where);
        sample.reference_answer = require_string(entry, "answer", where);
        if (entry.contains("level") && entry.at("level").is_string()) {
            sample.difficulty = entry.at("level").get<std::string>();
        }
        if (entry.contains("supporting_facts")) {
            for (const json& fact : entry.at("supporting_facts")) {
                if (fact.is_array() && !fact.empty() && fact.at(0).is_string()) {
                    const std::string title = fact.at(0).get<std::string>();
                    if (std::find(sample.source_docs.begin(), sample.source_docs.end(), title) ==
                        sample.source_docs.end()) {
                        sample.source_docs.push_back(title);
                    }
                }
            }
        }
        if (entry.contains("context")) {
            for (const json& para : entry.at("context")) {
                if (!para.is_array() || para.size() < 2) {
                    throw SchemaError(where + ": context entries must be [title, [sentences]]");
                }
                Document doc;
                doc.doc_id = para.at(0).get<std::string>();
                doc.title = doc.doc_id;
                for (const json& sentence : para.at(1)) {
                    doc.text += sentence.get<std::string>();
                }
                out.documents.push_back(std::move(doc));
            }
        }
        check_sample(sample, where);
        out.manifest.samples.push_back(std::move(sample));
    }
    (void)collection;
    return out;
}

LoadedDataset load_triviaqa(const json& root, const std::string& where_prefix) {
    if (!root.is_object() || !root.contains("Data")) {
        throw SchemaError(where_prefix + ": expected an object with a \"Data\" array");
    }
    LoadedDataset out;
    std::size_t entry_no = 0;
    for (const json& entry : root.at("Data")) {
        ++entry_no;
        const std::string where = where_prefix + ": entry " + std::to_string(entry_no);
        Sample sample;
        sample.sample_id = require_string(entry, "QuestionId", where);
        sample.question = require_string(entry, "Question", where);
        if (!entry.contains("Answer")) {
            throw MissingField(where + ": missing field \"Answer\"");
        }
        sample.reference_answer = require_string(entry.at("Answer"), "Value", where);
        if (entry.contains("EntityPages")) {
            for (const json& page : entry.at("EntityPages")) {
                std::string doc;
                if (page.contains("Filename")) {
                    doc = page.at("Filename").get<std::string>();
                } else if (page.contains("Title")) {
                    doc = page.at("Title").get<std::string>();
                }
                if (!doc.empty()) {
                    sample.source_docs.push_back(std::move(doc));
                }
            }
        }
        check_sample(sample, where);
        out.manifest.samples.push_back(std::move(sample));
    }
    return out;
}

LoadedDataset load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open dataset: " + path.string());
    }
    LoadedDataset out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError(where + ": " + e.what());
        }
        Sample sample;
        sample.sample_id = require_string(entry, "sample_id", where);
        sample.question = require_string(entry, "question", where);
        sample.reference_answer = require_string(entry, "answer", where);
        if (entry.contains("source_docs")) {
            sample.source_docs = entry.at("source_docs").get<std::vector<std::string>>();
        }
        if (entry.contains("difficulty") && entry.at("difficulty").is_string()) {
            sample.difficulty = entry.at("difficulty").get<std::string>();
        }
        if (entry.contains("docs")) {
            for (const json& doc_json : entry.at("docs")) {
                Document doc;
                doc.doc_id = require_string(doc_json, "doc_id", where);
                doc.title = doc_json.value("title", doc.doc_id);
                doc.text = require_string(doc_json, "text", where);
                out.documents.push_back(std::move(doc));
            }
        }
        check_sample(sample, where);
        out.manifest.samples.push_back(std::move(sample));
    }
    return out;
}

json sample_to_json(const Sample& sample) {
    json j;
    j["sample_id"] = sample.sample_id;
    j["question"] = sample.question;
    j["answer"] = sample.reference_answer;
    j["source_docs"] = sample.source_docs;
    if (sample.difficulty.has_value()) {
        j["difficulty"] = *sample.difficulty;
    }
    return j;
}

} // namespace

LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                           std::string_view collection) {
    LoadedDataset out;
    if (format == DatasetFormat::Jsonl) {
        out = load_jsonl(path);
    } else {
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open dataset: " + path.string());
        }
        json root;
        try {
            in >> root;
        } catch (const json::exception& e) {
            throw SchemaError(path.filename().string() + ": " + e.what());
        }
        const std::string where = path.filename().string();
        switch (format) {
            case DatasetFormat::HotpotQa:
            case DatasetFormat::TwoWiki:
                out = load_hotpot_like(root, collection, where);
                break;
            case DatasetFormat::TriviaQa:
                out = load_triviaqa(root, where);
                break;
            case DatasetFormat::Jsonl:
                break;
        }
    }

    // Duplicate context documents across samples are common in the multi-hop
    // sets; keep the first occurrence of each doc_id.
    std::sort(out.documents.begin(), out.documents.end(),
              [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
    out.documents.erase(std::unique(out.documents.begin(), out.documents.end(),
                                    [](const Document& a, const Document& b) {
                                        return a.doc_id == b.doc_id;
                                    }),
                        out.documents.end());

    out.manifest.name = path.stem().string();
    out.manifest.collection = std::string(collection);
    out.manifest.content_hash = dataset_hash(out.manifest.samples);
    return out;
}

std::string dataset_hash(std::span<const Sample> samples) {
    std::vector<const Sample*> sorted;
    sorted.reserve(samples.size());
    for (const Sample& sample : samples) {
        sorted.push_back(&sample);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const Sample* a, const Sample* b) { return a->sample_id < b->sample_id; });
    std::string canonical;
    for (const Sample* sample : sorted) {
        canonical += sample_to_json(*sample).dump();
        canonical += '\n';
    }
    return sha256_hex(canonical);
}

std::vector<Sample> select_eval_set(const DatasetManifest& manifest, std::size_t n,
                                    std::uint64_t seed) {
    if (n > manifest.samples.size()) {
        throw InsufficientSamples("requested " + std::to_string(n) + " samples, dataset has " +
                                  std::to_string(manifest.samples.size()));
    }
    std::vector<Sample> canonical = manifest.samples;
    std::sort(canonical.begin(), canonical.end(),
              [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });
    if (n == canonical.size()) {
        return canonical;
    }

    // Hand-rolled Fisher-Yates: std::shuffle and the distributions are
    // implementation-defined, and the subset must match across machines.
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(canonical.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(order[i], order[j]);
    }

    std::vector<Sample> selected;
    selected.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        selected.push_back(canonical[order[i]]);
    }
    std::sort(selected.begin(), selected.end(),
              [](const Sample& a, const Sample& b) { return a.sample_id < b.sample_id; });
    return selected;
}

void write_normalized(const std::filesystem::path& path, std::span<const Sample> samples) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    for (const Sample& sample : samples) {
        out << sample_to_json(sample).dump() << '\n';
    }
}

std::vector<Document> read_corpus_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open corpus: " + path.string());
    }
    std::vector<Document> documents;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        json entry;
        try {
            entry = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError(where + ": " + e.what());
        }
        Document doc;
        doc.doc_id = require_string(entry, "doc_id", where);
        doc.title = entry.value("title", doc.doc_id);
        doc.text = require_string(entry, "text", where);
        documents.push_back(std::move(doc));
    }
    return documents;
}

void write_corpus_jsonl(const std::filesystem::path& path, std::span<const Document> documents,
                        std::string_view collection) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    for (const Document& doc : documents) {
        out << json{{"doc_id", doc.doc_id},
                    {"collection", std::string(collection)},
                    {"title", doc.title},
                    {"text", doc.text}}
                   .dump()
            << '\n';
    }
}

} // namespace bcas
