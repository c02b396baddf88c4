#pragma once

#include <memory>
#include <string>

#include "ttpx/modeling/backend.hpp"

namespace ttpx {

/// Connection settings for a model-inference HTTP server.
/// Protocol: POST /embed {"text": ...} -> {"vector": [...]};
///           POST /mlm {"text": ..., "k": n} -> {"candidates":
///             [{"word": ..., "probability": ...}, ...]}.
/// Requests that fail or time out are retried `retries` times before the
/// error propagates as ErrorKind::Backend.
struct RemoteBackendConfig {
    std::string host = "127.0.0.1";
    int port = 8770;
    int timeout_ms = 5000;
    int retries = 2;
    std::string mask_token = "<mask>";
};

class RemoteEmbedder : public EmbeddingBackend {
public:
    explicit RemoteEmbedder(RemoteBackendConfig config);
    ~RemoteEmbedder() override;

    EmbeddingVector embed(const std::string& sentence) override;
    std::size_t dimension() const override;
    std::string name() const override;
    bool concurrency_safe() const override { return false; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    mutable std::size_t dimension_ = 0;  // learned from the first response
};

class RemoteMaskedLm : public MaskedLmBackend {
public:
    explicit RemoteMaskedLm(RemoteBackendConfig config);
    ~RemoteMaskedLm() override;

    std::vector<MaskedPrediction> predict_masked(const std::string& sentence_with_mask,
                                                 int k) override;
    std::string mask_token() const override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ttpx
