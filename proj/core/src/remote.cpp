#include "ttpx/modeling/remote.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "ttpx/error.hpp"
#include "ttpx/jsonl.hpp"

namespace ttpx {

namespace {

json post_json(httplib::Client& client, const RemoteBackendConfig& config,
               const std::string& path, const json& body) {
    std::string payload = body.dump();
    for (int attempt = 0; attempt <= config.retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(50 * attempt));
        }
        auto res = client.Post(path, payload, "application/json");
        if (!res) continue;  // transport failure: retry
        if (res->status != 200) {
            if (res->status >= 500) continue;  // server-side hiccup: retry
            raise(ErrorKind::Backend, "inference server rejected " + path + " with status " +
                                          std::to_string(res->status));
        }
        json doc = json::parse(res->body, nullptr, false);
        if (doc.is_discarded()) {
            raise(ErrorKind::Backend, "inference server returned invalid JSON from " + path);
        }
        return doc;
    }
    raise(ErrorKind::Backend, "inference server at " + config.host + ":" +
                                  std::to_string(config.port) + " unreachable after " +
                                  std::to_string(config.retries + 1) + " attempts (" + path + ")");
}

httplib::Client make_client(const RemoteBackendConfig& config) {
    httplib::Client client(config.host, config.port);
    client.set_connection_timeout(0, config.timeout_ms * 1000);
    client.set_read_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    client.set_write_timeout(config.timeout_ms / 1000, (config.timeout_ms % 1000) * 1000);
    return client;
}

}  // namespace

struct RemoteEmbedder::Impl {
    RemoteBackendConfig config;
    httplib::Client client;
    explicit Impl(RemoteBackendConfig c) : config(std::move(c)), client(make_client(config)) {}
};

RemoteEmbedder::RemoteEmbedder(RemoteBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteEmbedder::~RemoteEmbedder() = default;

EmbeddingVector RemoteEmbedder::embed(const std::string& sentence) {
    if (sentence.empty()) {
        raise(ErrorKind::Contract, "cannot embed an empty sentence");
    }
    json response = post_json(impl_->client, impl_->config, "/embed", json{{"text", sentence}});
    if (!response.contains("vector") || !response.at("vector").is_array()) {
        raise(ErrorKind::Backend, "embed response lacks a `vector` array");
    }
    EmbeddingVector v;
    v.values.reserve(response.at("vector").size());
    for (const auto& x : response.at("vector")) {
        v.values.push_back(x.get<float>());
    }
    if (v.values.empty()) {
        raise(ErrorKind::Backend, "embed response vector is empty");
    }
    if (dimension_ == 0) {
        dimension_ = v.values.size();
    } else if (v.values.size() != dimension_) {
        raise(ErrorKind::Backend, "inference server changed embedding dimension mid-session");
    }
    return v;
}

std::size_t RemoteEmbedder::dimension() const {
    if (dimension_ == 0) {
        // Probe with a fixed sentence so the dimension is known before training.
        json response = post_json(impl_->client, impl_->config, "/embed", json{{"text", "probe"}});
        if (response.contains("vector") && response.at("vector").is_array() &&
            !response.at("vector").empty()) {
            dimension_ = response.at("vector").size();
        } else {
            raise(ErrorKind::Backend, "cannot determine embedding dimension from server");
        }
    }
    return dimension_;
}

std::string RemoteEmbedder::name() const {
    return "remote-embedder/" + impl_->config.host + ":" + std::to_string(impl_->config.port);
}

struct RemoteMaskedLm::Impl {
    RemoteBackendConfig config;
    httplib::Client client;
    explicit Impl(RemoteBackendConfig c) : config(std::move(c)), client(make_client(config)) {}
};

RemoteMaskedLm::RemoteMaskedLm(RemoteBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RemoteMaskedLm::~RemoteMaskedLm() = default;

std::string RemoteMaskedLm::mask_token() const { return impl_->config.mask_token; }

std::vector<MaskedPrediction> RemoteMaskedLm::predict_masked(const std::string& sentence_with_mask,
                                                             int k) {
    require_single_mask(sentence_with_mask, mask_token());
    if (k < 1) {
        raise(ErrorKind::Contract, "candidate count k must be >= 1");
    }
    json response = post_json(impl_->client, impl_->config, "/mlm",
                              json{{"text", sentence_with_mask}, {"k", k}});
    if (!response.contains("candidates") || !response.at("candidates").is_array()) {
        raise(ErrorKind::Backend, "mlm response lacks a `candidates` array");
    }
    std::vector<MaskedPrediction> out;
    for (const auto& c : response.at("candidates")) {
        out.push_back({c.value("word", ""), c.value("probability", 0.0)});
    }
    if (out.size() > static_cast<std::size_t>(k)) {
        out.resize(static_cast<std::size_t>(k));
    }
    std::stable_sort(out.begin(), out.end(), [](const MaskedPrediction& a,
                                                const MaskedPrediction& b) {
        return a.probability > b.probability;
    });
    return out;
}

}  // namespace ttpx
