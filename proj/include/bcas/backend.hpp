#pragma once

#include "bcas/budget.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace bcas {

struct ModelRequest {
    std::string prompt;
    std::uint64_t max_completion_tokens = 1;
    double temperature = 0.0;
    std::optional<std::uint64_t> seed;
};

enum class FinishReason { Stop, Length, Error };

std::string to_string(FinishReason reason);
FinishReason finish_reason_from_string(std::string_view text);

struct ModelResponse {
    std::string text;
    TokenUsage usage;
    FinishReason finish_reason = FinishReason::Stop;
    std::uint32_t retries = 0;   // transport retries behind this response
};

/// Uniform completion interface over live HTTP providers and scripted traces.
/// Implementations must be safe to call from concurrent trajectories unless
/// documented otherwise.
class ModelBackend {
public:
    virtual ~ModelBackend() = default;
    virtual ModelResponse complete(const ModelRequest& request) = 0;
    virtual std::string id() const = 0;
};

struct TraceStep {
    /// Substring the prompt must contain; empty matches any prompt.
    std::string expect;
    ModelResponse response;
};

struct ScriptedTrace {
    std::vector<TraceStep> steps;
};

/// Deterministic backend for offline tests. One trace serves one trajectory;
/// steps are consumed strictly in order and exhaustion is an error.
class ScriptedBackend : public ModelBackend {
public:
    explicit ScriptedBackend(ScriptedTrace trace, std::string id = "scripted");

    ModelResponse complete(const ModelRequest& request) override;
    std::string id() const override { return id_; }

    /// Every prompt seen, in call order, for assertions over gating/rendering.
    const std::vector<std::string>& prompts() const { return prompts_; }
    std::size_t steps_consumed() const { return next_; }
    std::size_t steps_remaining() const { return trace_.steps.size() - next_; }

private:
    ScriptedTrace trace_;
    std::string id_;
    std::size_t next_ = 0;
    std::vector<std::string> prompts_;
};

struct HttpBackendConfig {
    std::string endpoint;                       // e.g. http://localhost:8089
    std::string path = "/v1/chat/completions";  // generic chat-completion route
    std::string model;
    std::string api_key;                        // falls back to $BCAS_API_KEY
    int max_attempts = 3;
    std::chrono::milliseconds base_backoff{200};
    std::chrono::seconds timeout{120};
};

/// Generic chat-completion HTTP JSON client. Retries transport errors,
/// HTTP 5xx and 429 with exponential backoff; everything else fails fast.
class HttpBackend : public ModelBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    ModelResponse complete(const ModelRequest& request) override;
    std::string id() const override;

    /// Total retries performed, for telemetry.
    std::uint64_t retries() const;

private:
    HttpBackendConfig config_;
    mutable std::mutex mutex_;
    std::uint64_t retries_ = 0;
};

/// Appends raw request/response pairs for one session to a shared JSONL log.
/// Wrap a live backend with one of these per trajectory; the log feeds
/// record_replay for regression replays.
class SessionLogSink {
public:
    explicit SessionLogSink(std::filesystem::path log_path);
    void append(const std::string& session, std::size_t seq, const ModelRequest& request,
                const ModelResponse& response);

private:
    std::filesystem::path path_;
    std::mutex mutex_;
};

class LoggingBackend : public ModelBackend {
public:
    LoggingBackend(ModelBackend& inner, std::shared_ptr<SessionLogSink> sink, std::string session);

    ModelResponse complete(const ModelRequest& request) override;
    std::string id() const override { return inner_.id(); }

private:
    ModelBackend& inner_;
    std::shared_ptr<SessionLogSink> sink_;
    std::string session_;
    std::size_t seq_ = 0;
};

/// Converts a logged live session into a scripted trace for replay. The
/// logged prompts become exact-match predicates. Throws CorruptLog on
/// malformed lines; an empty or missing session yields an empty trace.
ScriptedTrace record_replay(const std::filesystem::path& log_path, std::string_view session);

/// Scripted-trace file I/O ({"traces": {sample_id: [steps...]}, "default": [...]}).
class TraceFile {
public:
    static TraceFile load(const std::filesystem::path& path);

    /// Trace for a sample; falls back to "default", then an empty trace.
    ScriptedTrace trace_for(const std::string& sample_id) const;
    bool has_trace(const std::string& sample_id) const;

private:
    std::vector<std::pair<std::string, ScriptedTrace>> traces_;
    std::optional<ScriptedTrace> default_trace_;
};

} // namespace bcas
