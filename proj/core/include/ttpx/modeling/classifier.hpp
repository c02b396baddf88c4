#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ttpx/datasets.hpp"
#include "ttpx/modeling/backend.hpp"
#include "ttpx/modeling/linear_head.hpp"
#include "ttpx/taxonomy.hpp"

namespace ttpx {

struct TrainingConfig {
    double learning_rate = 1e-5;
    int batch_size = 64;
    int epochs = 10;
    int max_tokens = 256;
    std::uint64_t seed = 0;
    bool class_weighting = false;  // off: plain shuffled mini-batches

    void validate() const;  // throws on non-positive fields
};

/// Softmax distribution over the registry's class layout.
struct ClassDistribution {
    std::vector<double> probabilities;  // length m, sums to 1 within 1e-6
    std::size_t predicted_index = 0;    // argmax
    double confidence = 0.0;            // probabilities[predicted_index]
};

struct ClassifierArtifact {
    std::string encoder_reference;  // backend name the head was trained over
    LinearHead head;
    std::string registry_version;
    TrainingConfig training_config;
    std::vector<double> loss_history;  // mean training loss per epoch
    std::string training_mode;         // "head_only" (encoders here expose no gradients)
    std::vector<std::string> warnings; // e.g. classes with zero training examples
};

/// Embeds `sentence` with `backend` and applies the artifact's head.
/// The artifact must match the active registry version and the backend's
/// dimension.
ClassDistribution classify(const std::string& sentence, const ClassifierArtifact& artifact,
                           EmbeddingBackend& backend, const TechniqueRegistry& registry);

ClassDistribution distribution_from_logits(const std::vector<double>& logits);

/// Trains the head with Adam over cross-entropy for `config.epochs` epochs of
/// seeded shuffled mini-batches. Weights are f32-quantized on completion so
/// artifacts round-trip bit-exactly through save/load.
ClassifierArtifact fine_tune(const SentenceDataset& train, const TrainingConfig& config,
                             EmbeddingBackend& backend, const TechniqueRegistry& registry);

// Artifact directory layout:
//   head_weights.bin  little-endian f32, row-major (classes x dimension), then bias
//   artifact.json     encoder reference, registry version, config, history, checksum
void save_artifact(const ClassifierArtifact& artifact, const std::filesystem::path& directory);
ClassifierArtifact load_artifact(const std::filesystem::path& directory);

}  // namespace ttpx
