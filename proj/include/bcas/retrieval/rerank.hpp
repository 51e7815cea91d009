#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

namespace bcas::retrieval {

/// Relevance re-scorer over (query, candidate text) pairs. Must return one
/// score per input text, higher meaning more relevant.
class Reranker {
public:
    virtual ~Reranker() = default;
    virtual std::vector<double> score(const std::string& query,
                                      std::span<const std::string> texts) = 0;
    virtual std::string id() const = 0;
};

struct HttpRerankerConfig {
    std::string endpoint;
    std::string path = "/rerank";
    std::chrono::seconds timeout{60};
};

/// Client for a simple rerank service: POST {"query": ..., "texts": [...]}
/// returns {"scores": [...]}. Throws RerankerUnavailable on any failure.
class HttpReranker : public Reranker {
public:
    explicit HttpReranker(HttpRerankerConfig config);

    std::vector<double> score(const std::string& query,
                              std::span<const std::string> texts) override;
    std::string id() const override { return "http:" + config_.endpoint; }

private:
    HttpRerankerConfig config_;
};

} // namespace bcas::retrieval
