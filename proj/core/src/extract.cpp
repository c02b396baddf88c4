#include "ttpx/extract.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "ttpx/error.hpp"

namespace ttpx {

void ExtractionConfig::validate() const {
    if (!(relevance_threshold >= 0.0 && relevance_threshold <= 1.0)) {
        raise(ErrorKind::Validation, "relevance threshold must be in [0,1], got " +
                                         std::to_string(relevance_threshold));
    }
}

json extraction_result_to_json(const ExtractionResult& result) {
    json doc{{"report_id", result.report_id},
             {"techniques",
              std::vector<std::string>(result.techniques.begin(), result.techniques.end())},
             {"artifact_reference", result.artifact_reference},
             {"config",
              {{"relevance_threshold", result.config.relevance_threshold},
               {"include_attributions", result.config.include_attributions}}},
             {"attributions", json::array()}};
    for (const auto& a : result.attributions) {
        doc["attributions"].push_back({{"sentence_index", a.sentence_index},
                                       {"normalized_text", a.normalized_text},
                                       {"predicted_label", a.predicted_label},
                                       {"confidence", a.confidence},
                                       {"kept", a.kept}});
    }
    return doc;
}

ExtractionResult extraction_result_from_json(const json& doc) {
    ExtractionResult result;
    result.report_id = doc.value("report_id", "");
    for (const auto& t : doc.value("techniques", json::array())) {
        result.techniques.insert(t.get<std::string>());
    }
    result.artifact_reference = doc.value("artifact_reference", "");
    if (doc.contains("config")) {
        result.config.relevance_threshold =
            doc.at("config").value("relevance_threshold", 0.644);
        result.config.include_attributions =
            doc.at("config").value("include_attributions", false);
    }
    for (const auto& a : doc.value("attributions", json::array())) {
        SentenceAttribution attribution;
        attribution.sentence_index = a.value("sentence_index", std::size_t{0});
        attribution.normalized_text = a.value("normalized_text", "");
        attribution.predicted_label = a.value("predicted_label", "");
        attribution.confidence = a.value("confidence", 0.0);
        attribution.kept = a.value("kept", false);
        result.attributions.push_back(std::move(attribution));
    }
    return result;
}

TtpExtractor::TtpExtractor(const ClassifierArtifact& artifact, EmbeddingBackend& backend,
                           const TechniqueRegistry& registry)
    : TtpExtractor(artifact, backend, registry, IocNormalizer()) {}

TtpExtractor::TtpExtractor(const ClassifierArtifact& artifact, EmbeddingBackend& backend,
                           const TechniqueRegistry& registry, IocNormalizer normalizer)
    : artifact_(artifact),
      backend_(backend),
      registry_(registry),
      normalizer_(std::move(normalizer)) {}

ExtractionResult TtpExtractor::extract(const ThreatReport& report,
                                       const ExtractionConfig& config) const {
    config.validate();

    ExtractionResult result;
    result.report_id = report.report_id;
    result.artifact_reference = artifact_.encoder_reference;
    result.config = config;

    std::vector<std::string> segmented;
    const std::vector<std::string>* sentence_list = &report.sentences;
    if (report.sentences.empty() && !report.raw_text.empty()) {
        segmented = segment_report(report.raw_text);
        sentence_list = &segmented;
    }
    const std::vector<std::string>& sentences = *sentence_list;

    for (std::size_t i = 0; i < sentences.size(); ++i) {
        std::string cleaned = strip_citations(sentences[i]);
        auto [normalized, audit] = normalizer_.normalize(cleaned, i);
        if (normalized.find_first_not_of(" \t\r\n") == std::string::npos) {
            continue;
        }
        ClassDistribution distribution;
        try {
            distribution = classify(normalized, artifact_, backend_, registry_);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::Incompatible || e.kind() == ErrorKind::Contract) throw;
            raise(e.kind(), std::string(e.what()) + " (report " + report.report_id +
                                ", sentence index " + std::to_string(i) + ")");
        }

        SentenceAttribution attribution;
        attribution.sentence_index = i;
        attribution.normalized_text = normalized;
        attribution.predicted_label = registry_.id_at(distribution.predicted_index);
        attribution.confidence = distribution.confidence;
        // Below the threshold is filtered; equality keeps.
        attribution.kept = distribution.confidence >= config.relevance_threshold;
        if (attribution.kept) {
            result.techniques.insert(attribution.predicted_label);
        }
        if (config.include_attributions) {
            result.attributions.push_back(std::move(attribution));
        }
    }
    return result;
}

BatchExtraction TtpExtractor::extract_batch(const std::vector<ThreatReport>& reports,
                                            const ExtractionConfig& config, int jobs) const {
    config.validate();
    BatchExtraction batch;

    struct Slot {
        bool ok = false;
        ExtractionResult result;
        std::string error;
        std::string report_id;
    };
    std::vector<Slot> slots(reports.size());

    auto run_one = [&](std::size_t index) {
        slots[index].report_id = reports[index].report_id;
        try {
            slots[index].result = extract(reports[index], config);
            slots[index].ok = true;
        } catch (const std::exception& e) {
            slots[index].error = e.what();
        }
    };

    jobs = std::max(1, jobs);
    bool parallel = jobs > 1 && backend_.concurrency_safe();
    if (!parallel) {
        for (std::size_t i = 0; i < reports.size(); ++i) run_one(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= reports.size()) return;
                run_one(i);
            }
        };
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (auto& slot : slots) {
        if (slot.ok) {
            batch.results.push_back(std::move(slot.result));
        } else {
            batch.failures.push_back({slot.report_id, slot.error});
        }
    }
    return batch;
}

}  // namespace ttpx
