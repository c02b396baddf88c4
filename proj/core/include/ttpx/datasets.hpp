#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ttpx/taxonomy.hpp"

namespace ttpx {

enum class SentenceOrigin { Base, Augmented };

/// One preprocessed sentence paired with a technique label: the training unit.
struct LabeledSentence {
    std::string text;
    std::string label;  // technique id, present in the active registry
    SentenceOrigin origin = SentenceOrigin::Base;
    std::string source_text;  // original sentence for augmented entries
};

struct SentenceDataset {
    std::vector<LabeledSentence> entries;
    std::string registry_version;
};

/// A finished threat report: ordered sentences plus ground-truth labels.
/// `sentences` may be empty when only raw prose was supplied; downstream
/// extraction segments `raw_text` in that case.
struct ThreatReport {
    std::string report_id;
    std::vector<std::string> sentences;
    std::string raw_text;
    std::set<std::string> true_labels;  // empty for unlabeled reports
};

struct DatasetSplit {
    SentenceDataset train;
    SentenceDataset test;
    std::uint64_t seed = 0;
    double ratio = 0.8;
};

// File format: newline-delimited JSON. First record is a header
// {format_version, registry_version}; entries follow as
// {text, label, origin, source_text?}. Labels are validated against the
// registry; violations are reported together, naming each offending line.
SentenceDataset load_sentence_dataset(const std::filesystem::path& file,
                                      const TechniqueRegistry& registry);
void save_sentence_dataset(const std::filesystem::path& file, const SentenceDataset& dataset);

/// Per-class stratified split, deterministic for a given seed. Classes with a
/// single entry keep it in train; every class with >= 2 entries lands at
/// least one entry on each side.
DatasetSplit split_dataset(const SentenceDataset& dataset, double ratio, std::uint64_t seed);

/// Technique id -> entry count; ids absent from the dataset are omitted.
std::map<std::string, std::size_t> class_distribution(const SentenceDataset& dataset);

// Accepts either an aggregate JSONL file (header + one record per report) or
// a directory of one-report-per-file JSON documents. Records carry
// {report_id, text, true_labels}; a pre-segmented `sentences` array is also
// accepted and takes precedence over `text`.
std::vector<ThreatReport> load_report_dataset(const std::filesystem::path& path,
                                              const TechniqueRegistry& registry);

void save_report_dataset(const std::filesystem::path& file,
                         const std::vector<ThreatReport>& reports,
                         const std::string& registry_version);

}  // namespace ttpx
