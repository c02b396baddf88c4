#include "ttpx/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "ttpx/error.hpp"
#include "ttpx/hashing.hpp"
#include "ttpx/jsonl.hpp"

namespace ttpx {

void AugmentationConfig::validate() const {
    if (top_k < 1) {
        raise(ErrorKind::Validation, "top_k must be >= 1, got " + std::to_string(top_k));
    }
    if (!(similarity_threshold >= 0.0 && similarity_threshold <= 1.0)) {
        raise(ErrorKind::Validation, "similarity threshold must be in [0,1], got " +
                                         std::to_string(similarity_threshold));
    }
    if (mask_token.empty()) {
        raise(ErrorKind::Validation, "mask_token must be non-empty");
    }
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dimension() != b.dimension()) {
        raise(ErrorKind::Contract, "cosine_similarity dimension mismatch: " +
                                       std::to_string(a.dimension()) + " vs " +
                                       std::to_string(b.dimension()));
    }
    if (a.dimension() == 0) {
        raise(ErrorKind::Contract, "cosine_similarity over empty vectors");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += static_cast<double>(a.values[i]) * static_cast<double>(b.values[i]);
        na += static_cast<double>(a.values[i]) * static_cast<double>(a.values[i]);
        nb += static_cast<double>(b.values[i]) * static_cast<double>(b.values[i]);
    }
    if (na == 0.0 || nb == 0.0) {
        raise(ErrorKind::Contract, "cosine_similarity over an all-zero vector");
    }
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

namespace {

std::vector<std::string> whitespace_words(const std::string& sentence) {
    std::vector<std::string> words;
    std::istringstream in(sentence);
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out.append(words[i]);
    }
    return out;
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Serializing adapters for backends that are not safe under concurrent calls.
class LockedEmbedder : public EmbeddingBackend {
public:
    explicit LockedEmbedder(EmbeddingBackend& inner) : inner_(inner) {}
    EmbeddingVector embed(const std::string& s) override {
        std::lock_guard<std::mutex> lock(mutex_);
        return inner_.embed(s);
    }
    std::size_t dimension() const override { return inner_.dimension(); }
    std::string name() const override { return inner_.name(); }
    bool concurrency_safe() const override { return true; }
    std::uint64_t truncation_count() const override { return inner_.truncation_count(); }

private:
    EmbeddingBackend& inner_;
    std::mutex mutex_;
};

class LockedMaskedLm : public MaskedLmBackend {
public:
    explicit LockedMaskedLm(MaskedLmBackend& inner) : inner_(inner) {}
    std::vector<MaskedPrediction> predict_masked(const std::string& s, int k) override {
        std::lock_guard<std::mutex> lock(mutex_);
        return inner_.predict_masked(s, k);
    }
    std::string mask_token() const override { return inner_.mask_token(); }
    bool concurrency_safe() const override { return true; }

private:
    MaskedLmBackend& inner_;
    std::mutex mutex_;
};

json augmented_to_json(const AugmentedSentence& a) {
    return json{{"text", a.text},
                {"source_text", a.source_text},
                {"masked_position", a.masked_position},
                {"replacement_word", a.replacement_word},
                {"similarity", a.similarity}};
}

AugmentedSentence augmented_from_json(const json& j) {
    AugmentedSentence a;
    a.text = j.at("text").get<std::string>();
    a.source_text = j.at("source_text").get<std::string>();
    a.masked_position = j.at("masked_position").get<std::size_t>();
    a.replacement_word = j.at("replacement_word").get<std::string>();
    a.similarity = j.at("similarity").get<double>();
    return a;
}

std::uint64_t dataset_fingerprint(const SentenceDataset& dataset,
                                  const AugmentationConfig& config) {
    std::uint64_t h = fnv1a64("augmentation-run");
    for (const auto& e : dataset.entries) {
        h = fnv1a64(e.text, h);
        h = fnv1a64(e.label, h);
    }
    h = fnv1a64(std::to_string(config.top_k), h);
    h = fnv1a64(std::to_string(config.similarity_threshold), h);
    h = fnv1a64(config.best_only ? "best" : "all", h);
    return h;
}

}  // namespace

std::vector<AugmentedSentence> augment_sentence(const std::string& sentence,
                                                const AugmentationConfig& config,
                                                MaskedLmBackend& mlm,
                                                EmbeddingBackend& embedder) {
    config.validate();
    std::vector<std::string> words = whitespace_words(sentence);
    if (words.empty()) {
        raise(ErrorKind::Contract, "cannot augment an empty sentence");
    }

    EmbeddingVector source_embedding = embedder.embed(sentence);

    std::vector<AugmentedSentence> out;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (!config.skip_words.empty()) {
            std::string lowered = lowercase(words[i]);
            if (std::find(config.skip_words.begin(), config.skip_words.end(), lowered) !=
                config.skip_words.end()) {
                continue;
            }
        }
        std::vector<std::string> masked = words;
        masked[i] = config.mask_token;

        std::vector<MaskedPrediction> candidates;
        try {
            candidates = mlm.predict_masked(join_words(masked), config.top_k);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Contract) throw;
            raise(e.kind(), std::string(e.what()) + " (masking word position " +
                                std::to_string(i) + ")");
        }

        std::vector<AugmentedSentence> position_hits;
        std::size_t best_index = 0;
        for (const auto& candidate : candidates) {
            if (candidate.word == words[i]) continue;  // reproduces the source
            std::vector<std::string> variant = words;
            variant[i] = candidate.word;
            AugmentedSentence aug;
            aug.text = join_words(variant);
            aug.source_text = sentence;
            aug.masked_position = i;
            aug.replacement_word = candidate.word;
            aug.similarity = cosine_similarity(source_embedding, embedder.embed(aug.text));
            if (aug.similarity < config.similarity_threshold) continue;
            position_hits.push_back(std::move(aug));
            if (position_hits.back().similarity > position_hits[best_index].similarity) {
                best_index = position_hits.size() - 1;
            }
        }
        if (config.best_only && !position_hits.empty()) {
            position_hits = {position_hits[best_index]};
        }
        for (auto& hit : position_hits) {
            if (seen.insert(hit.text).second) {
                out.push_back(std::move(hit));
            }
        }
    }

    if (config.max_outputs_per_sentence && out.size() > *config.max_outputs_per_sentence) {
        out.resize(*config.max_outputs_per_sentence);
    }
    return out;
}

SentenceDataset augment_dataset(const SentenceDataset& dataset, const AugmentationConfig& config,
                                MaskedLmBackend& mlm, EmbeddingBackend& embedder,
                                const AugmentationOptions& options,
                                AugmentationSummary* summary) {
    config.validate();
    if (dataset.entries.empty()) {
        raise(ErrorKind::Validation, "cannot augment an empty dataset");
    }

    // Checkpoint bookkeeping: results land here per source index as soon as
    // they are computed, so an aborted run resumes where it stopped.
    std::map<std::size_t, std::vector<AugmentedSentence>> done;
    std::filesystem::path checkpoint_file;
    std::ofstream checkpoint_out;
    std::mutex checkpoint_mutex;
    const std::uint64_t fingerprint = dataset_fingerprint(dataset, config);
    bool checkpoint_existed = false;
    if (!options.checkpoint_dir.empty()) {
        std::filesystem::create_directories(options.checkpoint_dir);
        checkpoint_file = options.checkpoint_dir / "augment_checkpoint.jsonl";
        checkpoint_existed = std::filesystem::exists(checkpoint_file);
        if (checkpoint_existed) {
            for_each_jsonl_record(checkpoint_file, [&](std::size_t line_no, const json& record) {
                if (record.contains("fingerprint")) {
                    if (record.at("fingerprint").get<std::string>() != to_hex(fingerprint)) {
                        raise(ErrorKind::Incompatible,
                              "checkpoint " + checkpoint_file.string() +
                                  " belongs to a different dataset or configuration");
                    }
                    return;
                }
                if (line_no == 1) {
                    raise(ErrorKind::Incompatible,
                          "checkpoint " + checkpoint_file.string() + " lacks a run fingerprint");
                }
                std::vector<AugmentedSentence> outputs;
                for (const auto& a : record.at("outputs")) {
                    outputs.push_back(augmented_from_json(a));
                }
                done[record.at("index").get<std::size_t>()] = std::move(outputs);
            });
        }
        checkpoint_out.open(checkpoint_file, std::ios::app);
        if (!checkpoint_out) {
            raise(ErrorKind::Io, "cannot open checkpoint for writing: " + checkpoint_file.string());
        }
        if (!checkpoint_existed) {
            checkpoint_out << json{{"fingerprint", to_hex(fingerprint)}}.dump() << "\n";
            checkpoint_out.flush();
        }
    }

    // Serialize access to backends that do not declare concurrency safety.
    LockedMaskedLm locked_mlm(mlm);
    LockedEmbedder locked_embedder(embedder);
    MaskedLmBackend& mlm_ref =
        (options.jobs > 1 && !mlm.concurrency_safe()) ? static_cast<MaskedLmBackend&>(locked_mlm)
                                                      : mlm;
    EmbeddingBackend& emb_ref = (options.jobs > 1 && !embedder.concurrency_safe())
                                    ? static_cast<EmbeddingBackend&>(locked_embedder)
                                    : embedder;

    std::vector<std::vector<AugmentedSentence>> outputs(dataset.entries.size());
    std::vector<char> computed(dataset.entries.size(), 0);
    for (auto& [index, value] : done) {
        if (index < outputs.size()) {
            outputs[index] = value;
            computed[index] = 1;
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        while (true) {
            std::size_t index = next.fetch_add(1);
            if (index >= dataset.entries.size()) return;
            if (computed[index]) continue;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error) return;
            }
            try {
                auto result =
                    augment_sentence(dataset.entries[index].text, config, mlm_ref, emb_ref);
                if (checkpoint_out.is_open()) {
                    json record{{"index", index}, {"outputs", json::array()}};
                    for (const auto& a : result) record["outputs"].push_back(augmented_to_json(a));
                    std::lock_guard<std::mutex> lock(checkpoint_mutex);
                    checkpoint_out << record.dump() << "\n";
                    checkpoint_out.flush();
                }
                outputs[index] = std::move(result);
                computed[index] = 1;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    int jobs = std::max(1, options.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }

    // Assembly in source order keeps the result independent of scheduling.
    SentenceDataset result;
    result.registry_version = dataset.registry_version;
    result.entries = dataset.entries;
    std::unordered_set<std::string> seen;
    seen.reserve(dataset.entries.size() * 2);
    for (const auto& e : dataset.entries) seen.insert(e.text);

    AugmentationSummary local_summary;
    for (const auto& e : dataset.entries) {
        ++local_summary.per_class[e.label].before;
        ++local_summary.per_class[e.label].after;
    }
    local_summary.base_count = dataset.entries.size();

    for (std::size_t index = 0; index < outputs.size(); ++index) {
        const std::string& label = dataset.entries[index].label;
        for (const auto& aug : outputs[index]) {
            if (!seen.insert(aug.text).second) continue;  // collides with base or earlier output
            LabeledSentence entry;
            entry.text = aug.text;
            entry.label = label;
            entry.origin = SentenceOrigin::Augmented;
            entry.source_text = aug.source_text;
            result.entries.push_back(std::move(entry));
            ++local_summary.per_class[label].after;
            ++local_summary.generated_count;
        }
    }
    if (summary != nullptr) {
        *summary = std::move(local_summary);
    }
    return result;
}

}  // namespace ttpx
