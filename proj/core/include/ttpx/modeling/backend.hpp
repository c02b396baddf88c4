#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ttpx {

/// Fixed-length sentence embedding. All entries are finite.
struct EmbeddingVector {
    std::vector<float> values;
    std::size_t dimension() const { return values.size(); }
};

/// One masked-word candidate. Lists returned for a query are sorted by
/// descending probability.
struct MaskedPrediction {
    std::string word;
    double probability = 0.0;
};

// Seam for language-model inference. Implementations: the deterministic stub
// below (no model download, used throughout the test suite), the HTTP remote
// backend (ttpx/modeling/remote.hpp) fronting a real encoder checkpoint.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;

    /// Embeds one sentence. Deterministic per backend; sentences longer than
    /// the backend's token budget are truncated silently (see
    /// truncation_count). Throws ErrorKind::Backend when unavailable.
    virtual EmbeddingVector embed(const std::string& sentence) = 0;

    virtual std::size_t dimension() const = 0;
    virtual std::string name() const = 0;
    virtual bool concurrency_safe() const { return false; }

    /// Number of embed() calls that hit the token-budget truncation so far.
    virtual std::uint64_t truncation_count() const { return 0; }
};

class MaskedLmBackend {
public:
    virtual ~MaskedLmBackend() = default;

    /// Returns up to k candidates for the single mask sentinel in
    /// `sentence_with_mask`, sorted by descending probability. Zero or
    /// multiple sentinels raise ErrorKind::Contract.
    virtual std::vector<MaskedPrediction> predict_masked(const std::string& sentence_with_mask,
                                                         int k) = 0;

    virtual std::string mask_token() const { return "<mask>"; }
    virtual bool concurrency_safe() const { return false; }
};

/// Contract guard shared by backend implementations: exactly one occurrence
/// of `mask_token` in `sentence`, else ErrorKind::Contract.
void require_single_mask(const std::string& sentence, const std::string& mask_token);

// Deterministic hashing embedder. The rule, fixed for reproducibility:
//   1. Lowercase the sentence and split it into maximal [a-z0-9]+ runs.
//   2. Keep the first `max_tokens` runs (dropping the rest counts as one
//      truncation).
//   3. For each kept token t, with h = FNV-1a-64(t) XOR seed:
//        values[h % dimension] += 1.0 + (h >> 32) % 16 / 16.0.
// Bag-of-words by construction: near-identical sentences embed nearby, and
// keyword-disjoint classes are linearly separable.
class StubEmbedder : public EmbeddingBackend {
public:
    explicit StubEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0,
                          std::size_t max_tokens = 256);

    EmbeddingVector embed(const std::string& sentence) override;
    std::size_t dimension() const override { return dimension_; }
    std::string name() const override;
    bool concurrency_safe() const override { return true; }
    std::uint64_t truncation_count() const override { return truncations_.load(); }

private:
    std::size_t dimension_;
    std::uint64_t seed_;
    std::size_t max_tokens_;
    std::atomic<std::uint64_t> truncations_{0};
};

// Deterministic masked-word predictor: a fixture table for exact queries plus
// a procedural fallback that picks words from a fixed vocabulary by hashing
// the query, with strictly descending probabilities.
class StubMaskedLm : public MaskedLmBackend {
public:
    explicit StubMaskedLm(std::uint64_t seed = 0);

    /// Pins the response for one exact masked-sentence string.
    void set_response(const std::string& sentence_with_mask,
                      std::vector<MaskedPrediction> candidates);

    std::vector<MaskedPrediction> predict_masked(const std::string& sentence_with_mask,
                                                 int k) override;
    bool concurrency_safe() const override { return true; }

private:
    std::uint64_t seed_;
    std::map<std::string, std::vector<MaskedPrediction>> table_;
};

}  // namespace ttpx
