#pragma once

#include <set>
#include <string>
#include <vector>

#include "ttpx/datasets.hpp"
#include "ttpx/jsonl.hpp"
#include "ttpx/modeling/classifier.hpp"
#include "ttpx/preprocess.hpp"
#include "ttpx/taxonomy.hpp"

namespace ttpx {

struct ExtractionConfig {
    double relevance_threshold = 0.644;  // minimum confidence to keep a sentence
    bool include_attributions = false;

    void validate() const;
};

/// Per-sentence classification outcome inside one report.
struct SentenceAttribution {
    std::size_t sentence_index = 0;
    std::string normalized_text;
    std::string predicted_label;
    double confidence = 0.0;
    bool kept = false;  // confidence >= threshold (equality keeps)
};

/// Aggregated techniques for one report: the union of predicted labels over
/// kept sentences.
struct ExtractionResult {
    std::string report_id;
    std::set<std::string> techniques;
    std::vector<SentenceAttribution> attributions;  // when include_attributions
    std::string artifact_reference;
    ExtractionConfig config;
};

json extraction_result_to_json(const ExtractionResult& result);
ExtractionResult extraction_result_from_json(const json& doc);

struct BatchExtraction {
    std::vector<ExtractionResult> results;
    struct Failure {
        std::string report_id;
        std::string message;
    };
    std::vector<Failure> failures;
};

// Report-level pipeline: segment (when the report carries raw prose),
// strip citations, normalize IOCs, classify every sentence, filter below the
// relevance threshold, and union the surviving labels.
class TtpExtractor {
public:
    TtpExtractor(const ClassifierArtifact& artifact, EmbeddingBackend& backend,
                 const TechniqueRegistry& registry);
    TtpExtractor(const ClassifierArtifact& artifact, EmbeddingBackend& backend,
                 const TechniqueRegistry& registry, IocNormalizer normalizer);

    ExtractionResult extract(const ThreatReport& report, const ExtractionConfig& config) const;

    /// Order-preserving map of extract(); per-report failures are isolated
    /// into `failures` instead of aborting the batch.
    BatchExtraction extract_batch(const std::vector<ThreatReport>& reports,
                                  const ExtractionConfig& config, int jobs = 1) const;

private:
    const ClassifierArtifact& artifact_;
    EmbeddingBackend& backend_;
    const TechniqueRegistry& registry_;
    IocNormalizer normalizer_;
};

}  // namespace ttpx
