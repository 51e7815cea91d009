#include "bcas/retrieval/rerank.hpp"

#include "bcas/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace bcas::retrieval {

using nlohmann::json;

HttpReranker::HttpReranker(HttpRerankerConfig config) : config_(std::move(config)) {}

std::vector<double> HttpReranker::score(const std::string& query,
                                        std::span<const std::string> texts) {
    json body = {{"query", query}, {"texts", json::array()}};
    for (const std::string& text : texts) {
        body["texts"].push_back(text);
    }
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout.count(), 0);
    client.set_read_timeout(config_.timeout.count(), 0);
    auto res = client.Post(config_.path, body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw RerankerUnavailable("rerank service " + config_.endpoint + ": " +
                                  (res ? "HTTP " + std::to_string(res->status)
                                       : httplib::to_string(res.error())));
    }
    try {
        auto scores = json::parse(res->body).at("scores").get<std::vector<double>>();
        if (scores.size() != texts.size()) {
            throw RerankerUnavailable("rerank service returned " + std::to_string(scores.size()) +
                                      " scores for " + std::to_string(texts.size()) + " texts");
        }
        return scores;
    } catch (const json::exception& e) {
        throw RerankerUnavailable(std::string("malformed rerank response: ") + e.what());
    }
}

} // namespace bcas::retrieval
