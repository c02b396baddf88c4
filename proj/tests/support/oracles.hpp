// Test-only reference implementations. Each one is written straight-line,
// independent of the library code paths it checks, and stays deliberately
// naive: correctness over speed.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "ttpx/augment.hpp"
#include "ttpx/datasets.hpp"
#include "ttpx/evaluation.hpp"
#include "ttpx/modeling/backend.hpp"
#include "ttpx/modeling/linear_head.hpp"
#include "ttpx/preprocess.hpp"

namespace ttpx::testing {

// --- Augmentation ----------------------------------------------------------

// Per-position masking, top-k substitution, cosine gate: the augmentation
// algorithm transcribed as one flat loop.
std::vector<AugmentedSentence> oracle_augment_sentence(const std::string& sentence, double theta,
                                                       int top_k, MaskedLmBackend& mlm,
                                                       EmbeddingBackend& embedder);

// Dataset assembly mirror: base entries, then generated entries per source in
// order, dropping texts already seen.
SentenceDataset oracle_augment_dataset(const SentenceDataset& dataset, double theta, int top_k,
                                       MaskedLmBackend& mlm, EmbeddingBackend& embedder);

// --- Metrics ---------------------------------------------------------------

double oracle_hamming_loss(const std::vector<LabelVector>& truth,
                           const std::vector<LabelVector>& predicted);

struct OracleClassMetrics {
    double precision;
    double recall;
    double f1;
    bool observed;  // tp + fp + fn > 0
};

// One-vs-rest counts per class position, computed with explicit loops.
std::vector<OracleClassMetrics> oracle_per_class_metrics(
    const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted);

// --- IOC normalization -----------------------------------------------------

// Replaces by repeatedly taking the leftmost (then longest, then
// highest-priority) match across the whole rule union. The order-safety
// property says priority-ordered claiming agrees with this on the fixtures.
std::string oracle_leftmost_longest_normalize(const std::string& sentence,
                                              const std::vector<IocRule>& rules);

// --- Separability / classification -----------------------------------------

// Multi-class perceptron; returns true when it reaches zero training errors
// within `max_epochs` (i.e. the embedded set is linearly separable).
bool perceptron_separable(const std::vector<EmbeddingVector>& points,
                          const std::vector<std::size_t>& labels, std::size_t classes,
                          int max_epochs = 200);

// Nearest class centroid by Euclidean distance.
std::size_t nearest_centroid_label(const std::vector<EmbeddingVector>& train_points,
                                   const std::vector<std::size_t>& train_labels,
                                   std::size_t classes, const EmbeddingVector& query);

// --- Calculus ---------------------------------------------------------------

// Central finite differences of the cross-entropy loss with respect to every
// head parameter (weights then bias).
std::vector<double> finite_difference_gradient(LinearHead head, const std::vector<float>& x,
                                               std::size_t target, double h = 1e-5);

}  // namespace ttpx::testing
