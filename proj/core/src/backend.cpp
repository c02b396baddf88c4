#include "ttpx/modeling/backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "ttpx/error.hpp"
#include "ttpx/hashing.hpp"

namespace ttpx {

void require_single_mask(const std::string& sentence, const std::string& mask_token) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = sentence.find(mask_token, pos)) != std::string::npos) {
        ++count;
        pos += mask_token.size();
    }
    if (count != 1) {
        raise(ErrorKind::Contract, "expected exactly one \"" + mask_token +
                                       "\" sentinel, found " + std::to_string(count));
    }
}

namespace {

std::vector<std::string> alnum_tokens(const std::string& sentence) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : sentence) {
        auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

}  // namespace

StubEmbedder::StubEmbedder(std::size_t dimension, std::uint64_t seed, std::size_t max_tokens)
    : dimension_(dimension), seed_(seed), max_tokens_(max_tokens) {
    if (dimension_ == 0) {
        raise(ErrorKind::Contract, "stub embedder dimension must be positive");
    }
}

EmbeddingVector StubEmbedder::embed(const std::string& sentence) {
    if (sentence.empty()) {
        raise(ErrorKind::Contract, "cannot embed an empty sentence");
    }
    std::vector<std::string> tokens = alnum_tokens(sentence);
    if (tokens.size() > max_tokens_) {
        tokens.resize(max_tokens_);
        truncations_.fetch_add(1, std::memory_order_relaxed);
    }
    EmbeddingVector v;
    v.values.assign(dimension_, 0.0f);
    for (const auto& t : tokens) {
        std::uint64_t h = fnv1a64(t) ^ seed_;
        v.values[h % dimension_] +=
            1.0f + static_cast<float>((h >> 32) % 16) / 16.0f;
    }
    return v;
}

std::string StubEmbedder::name() const {
    return "stub-embedder/dim" + std::to_string(dimension_) + "/seed" + std::to_string(seed_);
}

StubMaskedLm::StubMaskedLm(std::uint64_t seed) : seed_(seed) {}

void StubMaskedLm::set_response(const std::string& sentence_with_mask,
                                std::vector<MaskedPrediction> candidates) {
    table_[sentence_with_mask] = std::move(candidates);
}

std::vector<MaskedPrediction> StubMaskedLm::predict_masked(const std::string& sentence_with_mask,
                                                           int k) {
    require_single_mask(sentence_with_mask, mask_token());
    if (k < 1) {
        raise(ErrorKind::Contract, "candidate count k must be >= 1");
    }

    std::vector<MaskedPrediction> candidates;
    if (auto it = table_.find(sentence_with_mask); it != table_.end()) {
        candidates = it->second;
    } else {
        static const std::array<const char*, 32> kVocabulary = {
            "attacker", "adversary", "malware",  "actor",    "operator", "payload",
            "implant",  "threat",    "campaign", "group",    "tool",     "binary",
            "script",   "loader",    "backdoor", "trojan",   "dropper",  "agent",
            "process",  "service",   "module",   "document", "server",   "host",
            "system",   "network",   "intruder", "registry", "email",    "user",
            "victim",   "operation"};
        std::uint64_t h = fnv1a64(sentence_with_mask) ^ seed_;
        double p = 0.9;
        for (int i = 0; i < k; ++i) {
            std::size_t pick = (h + static_cast<std::uint64_t>(i) * 0x9e3779b97f4a7c15ull) %
                               kVocabulary.size();
            const char* word = kVocabulary[pick];
            bool duplicate = std::any_of(candidates.begin(), candidates.end(),
                                         [&](const MaskedPrediction& c) { return c.word == word; });
            if (!duplicate) {
                candidates.push_back({word, p});
            }
            p *= 0.7;
        }
    }

    if (candidates.size() > static_cast<std::size_t>(k)) {
        candidates.resize(static_cast<std::size_t>(k));
    }
    // Contract: descending probability regardless of how the table was filled.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const MaskedPrediction& a, const MaskedPrediction& b) {
                         return a.probability > b.probability;
                     });
    return candidates;
}

}  // namespace ttpx
