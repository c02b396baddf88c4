#include "ttpx/modeling/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "ttpx/error.hpp"
#include "ttpx/hashing.hpp"
#include "ttpx/jsonl.hpp"

namespace ttpx {

void TrainingConfig::validate() const {
    if (learning_rate <= 0.0) raise(ErrorKind::Validation, "learning_rate must be positive");
    if (batch_size <= 0) raise(ErrorKind::Validation, "batch_size must be positive");
    if (epochs < 0) raise(ErrorKind::Validation, "epochs must be non-negative");
    if (max_tokens <= 0) raise(ErrorKind::Validation, "max_tokens must be positive");
}

ClassDistribution distribution_from_logits(const std::vector<double>& logits) {
    ClassDistribution dist;
    dist.probabilities = softmax(logits);
    dist.predicted_index = static_cast<std::size_t>(
        std::max_element(dist.probabilities.begin(), dist.probabilities.end()) -
        dist.probabilities.begin());
    dist.confidence = dist.probabilities[dist.predicted_index];
    return dist;
}

ClassDistribution classify(const std::string& sentence, const ClassifierArtifact& artifact,
                           EmbeddingBackend& backend, const TechniqueRegistry& registry) {
    if (artifact.registry_version != registry.version()) {
        raise(ErrorKind::Incompatible, "artifact was trained against registry version \"" +
                                           artifact.registry_version +
                                           "\" but the active registry is \"" +
                                           registry.version() + "\"");
    }
    if (artifact.head.classes != registry.class_count()) {
        raise(ErrorKind::Incompatible, "artifact head has " +
                                           std::to_string(artifact.head.classes) +
                                           " classes, registry has " +
                                           std::to_string(registry.class_count()));
    }
    EmbeddingVector v = backend.embed(sentence);
    return distribution_from_logits(artifact.head.logits(v.values));
}

ClassifierArtifact fine_tune(const SentenceDataset& train, const TrainingConfig& config,
                             EmbeddingBackend& backend, const TechniqueRegistry& registry) {
    config.validate();
    if (train.entries.empty()) {
        raise(ErrorKind::Validation, "training dataset is empty");
    }

    ClassifierArtifact artifact;
    artifact.encoder_reference = backend.name();
    artifact.registry_version = registry.version();
    artifact.training_config = config;
    artifact.training_mode = "head_only";
    artifact.head = LinearHead(registry.class_count(), backend.dimension());

    // Embed once; the encoder is frozen so embeddings are loop-invariant.
    std::vector<EmbeddingVector> embeddings;
    std::vector<std::size_t> targets;
    embeddings.reserve(train.entries.size());
    targets.reserve(train.entries.size());
    std::vector<std::size_t> class_examples(registry.class_count(), 0);
    for (const auto& entry : train.entries) {
        embeddings.push_back(backend.embed(entry.text));
        std::size_t position = registry.position(entry.label);
        targets.push_back(position);
        ++class_examples[position];
    }
    for (std::size_t c = 0; c < class_examples.size(); ++c) {
        if (class_examples[c] == 0) {
            artifact.warnings.push_back("class " + registry.id_at(c) +
                                        " has no training examples; its weights stay untrained");
        }
    }

    std::vector<double> class_weights(registry.class_count(), 1.0);
    if (config.class_weighting) {
        double total = static_cast<double>(train.entries.size());
        double m = static_cast<double>(registry.class_count());
        for (std::size_t c = 0; c < class_weights.size(); ++c) {
            if (class_examples[c] > 0) {
                class_weights[c] = total / (m * static_cast<double>(class_examples[c]));
            }
        }
    }

    const std::size_t weight_count = artifact.head.weights.size();
    const std::size_t param_count = weight_count + artifact.head.bias.size();
    AdamOptimizer optimizer(param_count, config.learning_rate);
    std::vector<double> grad(param_count, 0.0);
    std::vector<double> params(param_count, 0.0);

    std::mt19937_64 rng(config.seed);
    std::vector<std::size_t> order(train.entries.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += static_cast<std::size_t>(config.batch_size)) {
            std::size_t batch_end =
                std::min(order.size(), batch_start + static_cast<std::size_t>(config.batch_size));
            std::vector<double> gw(weight_count, 0.0);
            std::vector<double> gb(artifact.head.bias.size(), 0.0);

            double batch_loss = 0.0;
            double weight_sum = 0.0;
            for (std::size_t i = batch_start; i < batch_end; ++i) {
                std::size_t idx = order[i];
                double w = class_weights[targets[idx]];
                double loss;
                if (w == 1.0) {
                    loss = cross_entropy_with_gradient(artifact.head, embeddings[idx].values,
                                                       targets[idx], gw, gb);
                } else {
                    std::vector<double> egw(weight_count, 0.0);
                    std::vector<double> egb(gb.size(), 0.0);
                    loss = cross_entropy_with_gradient(artifact.head, embeddings[idx].values,
                                                       targets[idx], egw, egb);
                    for (std::size_t p = 0; p < weight_count; ++p) gw[p] += w * egw[p];
                    for (std::size_t p = 0; p < gb.size(); ++p) gb[p] += w * egb[p];
                }
                batch_loss += w * loss;
                weight_sum += w;
            }
            if (!std::isfinite(batch_loss)) {
                raise(ErrorKind::Validation,
                      "non-finite loss at epoch " + std::to_string(epoch) + ", batch starting " +
                          std::to_string(batch_start) + "; lower the learning rate");
            }
            double scale = weight_sum > 0.0 ? 1.0 / weight_sum : 0.0;
            for (std::size_t p = 0; p < weight_count; ++p) grad[p] = gw[p] * scale;
            for (std::size_t p = 0; p < gb.size(); ++p) grad[weight_count + p] = gb[p] * scale;

            std::copy(artifact.head.weights.begin(), artifact.head.weights.end(), params.begin());
            std::copy(artifact.head.bias.begin(), artifact.head.bias.end(),
                      params.begin() + static_cast<std::ptrdiff_t>(weight_count));
            optimizer.step(params, grad);
            std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(weight_count),
                      artifact.head.weights.begin());
            std::copy(params.begin() + static_cast<std::ptrdiff_t>(weight_count), params.end(),
                      artifact.head.bias.begin());

            epoch_loss += batch_loss;
        }
        artifact.loss_history.push_back(epoch_loss / static_cast<double>(train.entries.size()));
    }

    artifact.head.quantize_to_f32();
    return artifact;
}

// ---------------------------------------------------------------------------
// Artifact persistence
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kWeightsFile = "head_weights.bin";
constexpr const char* kMetadataFile = "artifact.json";

void append_f32_le(std::string& out, float value) {
    std::uint32_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float read_f32_le(const std::string& data, std::size_t offset) {
    std::uint32_t bits = (static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset]))) |
                         (static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset + 1]))
                          << 8) |
                         (static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset + 2]))
                          << 16) |
                         (static_cast<std::uint32_t>(static_cast<unsigned char>(data[offset + 3]))
                          << 24);
    float value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
}

}  // namespace

void save_artifact(const ClassifierArtifact& artifact, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);

    std::string blob;
    blob.reserve((artifact.head.weights.size() + artifact.head.bias.size()) * 4);
    for (double w : artifact.head.weights) append_f32_le(blob, static_cast<float>(w));
    for (double b : artifact.head.bias) append_f32_le(blob, static_cast<float>(b));
    write_text_file(directory / kWeightsFile, blob);

    json meta{
        {"format_version", 1},
        {"encoder_reference", artifact.encoder_reference},
        {"registry_version", artifact.registry_version},
        {"class_count", artifact.head.classes},
        {"dimension", artifact.head.dimension},
        {"training_mode", artifact.training_mode},
        {"loss_history", artifact.loss_history},
        {"warnings", artifact.warnings},
        {"head_checksum", to_hex(fnv1a64(blob))},
        {"training_config",
         {{"learning_rate", artifact.training_config.learning_rate},
          {"batch_size", artifact.training_config.batch_size},
          {"epochs", artifact.training_config.epochs},
          {"max_tokens", artifact.training_config.max_tokens},
          {"seed", artifact.training_config.seed},
          {"class_weighting", artifact.training_config.class_weighting}}},
    };
    write_text_file(directory / kMetadataFile, meta.dump(2) + "\n");
}

ClassifierArtifact load_artifact(const std::filesystem::path& directory) {
    json meta = parse_json_file(directory / kMetadataFile);
    ClassifierArtifact artifact;
    artifact.encoder_reference = meta.value("encoder_reference", "");
    artifact.registry_version = meta.value("registry_version", "");
    artifact.training_mode = meta.value("training_mode", "head_only");
    if (meta.contains("loss_history")) {
        artifact.loss_history = meta.at("loss_history").get<std::vector<double>>();
    }
    if (meta.contains("warnings")) {
        artifact.warnings = meta.at("warnings").get<std::vector<std::string>>();
    }
    if (meta.contains("training_config")) {
        const json& tc = meta.at("training_config");
        artifact.training_config.learning_rate = tc.value("learning_rate", 1e-5);
        artifact.training_config.batch_size = tc.value("batch_size", 64);
        artifact.training_config.epochs = tc.value("epochs", 10);
        artifact.training_config.max_tokens = tc.value("max_tokens", 256);
        artifact.training_config.seed = tc.value("seed", std::uint64_t{0});
        artifact.training_config.class_weighting = tc.value("class_weighting", false);
    }

    auto classes = meta.value("class_count", std::size_t{0});
    auto dimension = meta.value("dimension", std::size_t{0});
    if (classes == 0 || dimension == 0) {
        raise(ErrorKind::Parse, "artifact metadata lacks class_count/dimension: " +
                                    (directory / kMetadataFile).string());
    }
    artifact.head = LinearHead(classes, dimension);

    std::string blob = read_text_file(directory / kWeightsFile);
    std::size_t expected = (classes * dimension + classes) * 4;
    if (blob.size() != expected) {
        raise(ErrorKind::Incompatible,
              "artifact weights are corrupt: expected " + std::to_string(expected) + " bytes, " +
                  "found " + std::to_string(blob.size()) + " in " +
                  (directory / kWeightsFile).string());
    }
    std::string stored_checksum = meta.value("head_checksum", "");
    if (!stored_checksum.empty() && stored_checksum != to_hex(fnv1a64(blob))) {
        raise(ErrorKind::Incompatible,
              "artifact weights checksum mismatch: " + (directory / kWeightsFile).string());
    }

    std::size_t offset = 0;
    for (std::size_t i = 0; i < artifact.head.weights.size(); ++i, offset += 4) {
        artifact.head.weights[i] = static_cast<double>(read_f32_le(blob, offset));
    }
    for (std::size_t i = 0; i < artifact.head.bias.size(); ++i, offset += 4) {
        artifact.head.bias[i] = static_cast<double>(read_f32_le(blob, offset));
    }
    return artifact;
}

}  // namespace ttpx
