#include "bcas/retrieval/embedder.hpp"

#include "bcas/errors.hpp"
#include "bcas/retrieval/analyzer.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace bcas::retrieval {

using nlohmann::json;

std::vector<std::vector<float>> Embedder::embed_batch(std::span<const std::string> texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        out.push_back(embed(text));
    }
    return out;
}

// ---------------------------------------------------------------------------
// HashEmbedder

namespace {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 1469598103934665603ull;
    for (const char ch : data) {
        hash ^= static_cast<unsigned char>(ch);
        hash *= 1099511628211ull;
    }
    return hash;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

} // namespace

std::vector<float> HashEmbedder::embed(const std::string& text) {
    std::array<double, kDim> acc{};
    for (const std::string& token : analyze(text)) {
        std::uint64_t state = fnv1a64(token);
        for (double& slot : acc) {
            // uniform in [-1, 1)
            slot += static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
        }
    }
    double norm_sq = 0.0;
    for (const double v : acc) {
        norm_sq += v * v;
    }
    std::vector<float> out(kDim, 0.0f);
    if (norm_sq > 0.0) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t i = 0; i < kDim; ++i) {
            out[i] = static_cast<float>(acc[i] * inv);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// HttpEmbedder

HttpEmbedder::HttpEmbedder(HttpEmbedderConfig config) : config_(std::move(config)) {}

std::vector<float> HttpEmbedder::embed(const std::string& text) {
    const std::vector<std::string> texts{text};
    return embed_batch(texts).front();
}

std::vector<std::vector<float>> HttpEmbedder::embed_batch(std::span<const std::string> texts) {
    json body = {{"texts", json::array()}};
    for (const std::string& text : texts) {
        body["texts"].push_back(text);
    }
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout.count(), 0);
    client.set_read_timeout(config_.timeout.count(), 0);
    auto res = client.Post(config_.path, body.dump(), "application/json");
    if (!res || res->status != 200) {
        throw EmbeddingUnavailable("embedding service " + config_.endpoint + ": " +
                                   (res ? "HTTP " + std::to_string(res->status)
                                        : httplib::to_string(res.error())));
    }
    try {
        std::vector<std::vector<float>> out;
        for (const json& vec : json::parse(res->body).at("vectors")) {
            out.push_back(vec.get<std::vector<float>>());
        }
        if (out.size() != texts.size()) {
            throw EmbeddingUnavailable("embedding service returned " + std::to_string(out.size()) +
                                       " vectors for " + std::to_string(texts.size()) + " texts");
        }
        if (!out.empty()) {
            dim_.store(out.front().size());
        }
        return out;
    } catch (const json::exception& e) {
        throw EmbeddingUnavailable(std::string("malformed embedding response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size() || a.empty()) {
        return 0.0;
    }
    if (std::equal(a.begin(), a.end(), b.begin())) {
        bool zero = true;
        for (const float v : a) {
            if (v != 0.0f) {
                zero = false;
                break;
            }
        }
        return zero ? 0.0 : 1.0;
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * static_cast<double>(b[i]);
        na += static_cast<double>(a[i]) * static_cast<double>(a[i]);
        nb += static_cast<double>(b[i]) * static_cast<double>(b[i]);
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace bcas::retrieval
