#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ttpx/datasets.hpp"
#include "ttpx/modeling/backend.hpp"

namespace ttpx {

struct AugmentationConfig {
    int top_k = 5;                        // candidate words per masked position
    double similarity_threshold = 0.975;  // retention gate over cosine similarity
    std::string mask_token = "<mask>";
    std::optional<std::size_t> max_outputs_per_sentence;
    // Retain only the highest-similarity candidate per masked position
    // instead of every candidate above the threshold.
    bool best_only = false;
    // Words (lowercase) whose positions are never masked. Empty by default:
    // every word position is masked.
    std::vector<std::string> skip_words;

    void validate() const;
};

/// One generated sentence: the source with exactly one word substituted.
struct AugmentedSentence {
    std::string text;
    std::string source_text;
    std::size_t masked_position = 0;  // word index that was masked
    std::string replacement_word;
    double similarity = 0.0;  // cosine against the source embedding, >= threshold
};

/// Cosine of the angle between two embeddings. Throws on dimension mismatch
/// or an all-zero vector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Generates contextual variants of one sentence: each word position is masked
// in turn, the masked-LM proposes top_k candidates, candidates equal to the
// original word are discarded, and a substitution survives iff the cosine
// similarity between source and variant embeddings reaches the threshold.
// Output is ordered by (position, candidate rank) and exact-duplicate texts
// are dropped, so results are independent of execution interleaving.
std::vector<AugmentedSentence> augment_sentence(const std::string& sentence,
                                                const AugmentationConfig& config,
                                                MaskedLmBackend& mlm,
                                                EmbeddingBackend& embedder);

struct AugmentationOptions {
    int jobs = 1;
    // When set, per-sentence results are checkpointed here as they complete;
    // a rerun over the same dataset and config resumes instead of recomputing.
    std::filesystem::path checkpoint_dir;
};

struct ClassAugmentationCounts {
    std::size_t before = 0;
    std::size_t after = 0;
};

struct AugmentationSummary {
    std::map<std::string, ClassAugmentationCounts> per_class;
    std::size_t base_count = 0;
    std::size_t generated_count = 0;
};

// Augments every entry. The result keeps all input entries (in order),
// followed by generated entries grouped by source index, each inheriting its
// source label with origin=augmented. Generated text that collides with any
// base text or an earlier generated text is dropped. Backend errors propagate
// with the source index; completed sentences stay in the checkpoint.
SentenceDataset augment_dataset(const SentenceDataset& dataset, const AugmentationConfig& config,
                                MaskedLmBackend& mlm, EmbeddingBackend& embedder,
                                const AugmentationOptions& options = {},
                                AugmentationSummary* summary = nullptr);

}  // namespace ttpx
