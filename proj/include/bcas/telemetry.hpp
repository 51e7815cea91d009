#pragma once

#include "bcas/engine.hpp"
#include "bcas/grading.hpp"

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bcas {

inline constexpr int kTelemetrySchemaVersion = 1;

/// Unit prices: dollars per million tokens in/out, dollars per search call.
struct PriceSheet {
    double input_per_million = 0.0;
    double output_per_million = 0.0;
    double per_search = 0.0;

    static PriceSheet load(const std::filesystem::path& path);
    void validate() const;
};

double trajectory_cost(std::uint64_t tokens_in, std::uint64_t tokens_out,
                       std::uint32_t searches_used, const PriceSheet& prices);

struct QuestionRecord {
    std::string sample_id;
    std::string config_id;
    std::uint32_t searches_used = 0;
    std::uint64_t tokens_in = 0;
    std::uint64_t tokens_out = 0;
    bool early_stop = false;
    std::optional<Verdict> verdict;       // nullopt = ungraded
    double cost = 0.0;
    std::string outcome;                  // answered | budget_exhausted | failed
    std::string answer;
    std::string dataset_digest;
    std::uint64_t started_at_ms = 0;      // 0 under the deterministic clock
    std::uint64_t finished_at_ms = 0;
    std::vector<std::string> flags;       // token_overflow, reranker_fallback, ...
    std::vector<TokenUsage> call_usages;  // per backend call, for reconciliation

    bool graded() const { return verdict.has_value(); }
};

/// Builds the durable record for one finished trajectory.
QuestionRecord make_record(const std::string& sample_id, const std::string& config_id,
                           const TrajectoryState& trajectory, const GradeResult& grade,
                           const PriceSheet& prices, const std::string& dataset_digest,
                           std::uint64_t started_at_ms, std::uint64_t finished_at_ms);

std::string record_to_jsonl(const QuestionRecord& record);
QuestionRecord record_from_jsonl(const std::string& line);   // throws SchemaError

/// Append-only JSONL record log. Appends are serialized and flushed per
/// record; readers tolerate a truncated final line from a crash.
class RecordLog {
public:
    explicit RecordLog(std::filesystem::path path);

    void append(const QuestionRecord& record);
    const std::filesystem::path& path() const { return path_; }

    static std::vector<QuestionRecord> read(const std::filesystem::path& path);
    /// (sample_id, config_id) pairs already present, for idempotent resume.
    static std::set<std::pair<std::string, std::string>>
    completed_keys(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

enum class ExportFormat { Csv, Jsonl };

/// Lossless, schema-versioned export. CSV columns are documented in the
/// README and stable across releases.
void export_records(std::span<const QuestionRecord> records, const std::filesystem::path& path,
                    ExportFormat format);
std::vector<QuestionRecord> import_records(const std::filesystem::path& path, ExportFormat format);

} // namespace bcas
