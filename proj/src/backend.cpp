#include "bcas/backend.hpp"

#include "bcas/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace bcas {

using nlohmann::json;

std::string to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::Stop: return "stop";
        case FinishReason::Length: return "length";
        case FinishReason::Error: return "error";
    }
    return "error";
}

FinishReason finish_reason_from_string(std::string_view text) {
    if (text == "stop") return FinishReason::Stop;
    if (text == "length") return FinishReason::Length;
    return FinishReason::Error;
}

// ---------------------------------------------------------------------------
// ScriptedBackend

ScriptedBackend::ScriptedBackend(ScriptedTrace trace, std::string id)
    : trace_(std::move(trace)), id_(std::move(id)) {}

ModelResponse ScriptedBackend::complete(const ModelRequest& request) {
    prompts_.push_back(request.prompt);
    if (next_ >= trace_.steps.size()) {
        throw TraceExhausted(id_ + ": trace exhausted after " + std::to_string(next_) +
                             " steps; prompt was:\n" + request.prompt);
    }
    const TraceStep& step = trace_.steps[next_];
    if (!step.expect.empty() && request.prompt.find(step.expect) == std::string::npos) {
        throw PredicateMismatch(id_ + ": step " + std::to_string(next_) + " expected substring \"" +
                                step.expect + "\" not found in prompt:\n" + request.prompt);
    }
    ++next_;
    return step.response;
}

// ---------------------------------------------------------------------------
// HttpBackend

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.api_key.empty()) {
        if (const char* env = std::getenv("BCAS_API_KEY")) {
            config_.api_key = env;
        }
    }
}

std::string HttpBackend::id() const {
    return config_.model.empty() ? config_.endpoint : config_.model;
}

std::uint64_t HttpBackend::retries() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return retries_;
}

ModelResponse HttpBackend::complete(const ModelRequest& request) {
    json body = {
        {"model", config_.model},
        {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
        {"max_tokens", request.max_completion_tokens},
        {"temperature", request.temperature},
    };
    if (request.seed.has_value()) {
        body["seed"] = *request.seed;
    }
    const std::string payload = body.dump();

    std::string last_error;
    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            {
                std::lock_guard<std::mutex> lock(mutex_);
                ++retries_;
            }
            std::this_thread::sleep_for(config_.base_backoff * (1 << (attempt - 1)));
        }

        httplib::Client client(config_.endpoint);
        client.set_connection_timeout(config_.timeout.count(), 0);
        client.set_read_timeout(config_.timeout.count(), 0);
        httplib::Headers headers;
        if (!config_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        }

        auto res = client.Post(config_.path, headers, payload, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw BackendUnavailable(id() + ": HTTP " + std::to_string(res->status) + ": " + res->body);
        }

        json reply;
        try {
            reply = json::parse(res->body);
            ModelResponse out;
            out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
            const json& usage = reply.at("usage");
            out.usage.prompt_tokens = usage.value("prompt_tokens", 0ull);
            out.usage.completion_tokens = usage.value("completion_tokens", 0ull);
            out.finish_reason =
                finish_reason_from_string(reply.at("choices").at(0).value("finish_reason", "stop"));
            out.retries = static_cast<std::uint32_t>(attempt);
            return out;
        } catch (const json::exception& e) {
            throw BackendUnavailable(id() + ": malformed provider response: " + e.what());
        }
    }
    throw BackendUnavailable(id() + ": " + std::to_string(config_.max_attempts) +
                             " attempts failed, last: " + last_error);
}

// ---------------------------------------------------------------------------
// Session logging and replay

namespace {

json response_to_json(const ModelResponse& response) {
    return json{
        {"text", response.text},
        {"prompt_tokens", response.usage.prompt_tokens},
        {"completion_tokens", response.usage.completion_tokens},
        {"finish_reason", to_string(response.finish_reason)},
    };
}

ModelResponse response_from_json(const json& j) {
    ModelResponse out;
    out.text = j.at("text").get<std::string>();
    out.usage.prompt_tokens = j.value("prompt_tokens", 0ull);
    out.usage.completion_tokens = j.value("completion_tokens", 0ull);
    out.finish_reason = finish_reason_from_string(j.value("finish_reason", "stop"));
    return out;
}

} // namespace

SessionLogSink::SessionLogSink(std::filesystem::path log_path) : path_(std::move(log_path)) {}

void SessionLogSink::append(const std::string& session, std::size_t seq,
                            const ModelRequest& request, const ModelResponse& response) {
    json line = {
        {"session", session},
        {"seq", seq},
        {"request",
         {{"prompt", request.prompt},
          {"max_completion_tokens", request.max_completion_tokens},
          {"temperature", request.temperature}}},
        {"response", response_to_json(response)},
    };
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app);
    if (!out) {
        throw IoError("cannot open session log: " + path_.string());
    }
    out << line.dump() << '\n';
}

LoggingBackend::LoggingBackend(ModelBackend& inner, std::shared_ptr<SessionLogSink> sink,
                               std::string session)
    : inner_(inner), sink_(std::move(sink)), session_(std::move(session)) {}

ModelResponse LoggingBackend::complete(const ModelRequest& request) {
    ModelResponse response = inner_.complete(request);
    if (sink_) {
        sink_->append(session_, seq_++, request, response);
    }
    return response;
}

ScriptedTrace record_replay(const std::filesystem::path& log_path, std::string_view session) {
    std::ifstream in(log_path);
    if (!in) {
        throw CorruptLog("cannot open session log: " + log_path.string());
    }
    std::vector<std::pair<std::size_t, TraceStep>> steps;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw CorruptLog(log_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        try {
            if (j.at("session").get<std::string>() != session) {
                continue;
            }
            TraceStep step;
            step.expect = j.at("request").at("prompt").get<std::string>();
            step.response = response_from_json(j.at("response"));
            steps.emplace_back(j.at("seq").get<std::size_t>(), std::move(step));
        } catch (const json::exception& e) {
            throw CorruptLog(log_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::sort(steps.begin(), steps.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    ScriptedTrace trace;
    trace.steps.reserve(steps.size());
    for (auto& [seq, step] : steps) {
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

// ---------------------------------------------------------------------------
// TraceFile

namespace {

ScriptedTrace trace_from_json(const json& arr, const std::string& where) {
    if (!arr.is_array()) {
        throw CorruptLog(where + ": trace must be an array of steps");
    }
    ScriptedTrace trace;
    for (const json& j : arr) {
        TraceStep step;
        step.expect = j.value("expect", "");
        step.response.text = j.at("text").get<std::string>();
        step.response.usage.prompt_tokens = j.value("prompt_tokens", 0ull);
        step.response.usage.completion_tokens = j.value("completion_tokens", 0ull);
        step.response.finish_reason = finish_reason_from_string(j.value("finish_reason", "stop"));
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

} // namespace

TraceFile TraceFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open trace file: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CorruptLog(path.string() + ": " + e.what());
    }
    TraceFile out;
    if (j.contains("traces")) {
        for (const auto& [sample_id, steps] : j.at("traces").items()) {
            out.traces_.emplace_back(sample_id, trace_from_json(steps, path.string()));
        }
    }
    if (j.contains("default")) {
        out.default_trace_ = trace_from_json(j.at("default"), path.string());
    }
    return out;
}

bool TraceFile::has_trace(const std::string& sample_id) const {
    return std::any_of(traces_.begin(), traces_.end(),
                       [&](const auto& kv) { return kv.first == sample_id; });
}

ScriptedTrace TraceFile::trace_for(const std::string& sample_id) const {
    for (const auto& [id, trace] : traces_) {
        if (id == sample_id) {
            return trace;
        }
    }
    if (default_trace_.has_value()) {
        return *default_trace_;
    }
    return {};
}

} // namespace bcas
