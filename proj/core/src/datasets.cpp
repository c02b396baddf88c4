#include "ttpx/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ttpx/error.hpp"
#include "ttpx/jsonl.hpp"

namespace ttpx {

namespace {

constexpr int kFormatVersion = 1;

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string origin_to_string(SentenceOrigin origin) {
    return origin == SentenceOrigin::Base ? "base" : "augmented";
}

SentenceOrigin origin_from_string(const std::string& s, const std::string& where) {
    if (s == "base") return SentenceOrigin::Base;
    if (s == "augmented") return SentenceOrigin::Augmented;
    raise(ErrorKind::Parse, where + ": unknown origin \"" + s + "\"");
}

bool is_header_record(const json& record) {
    return record.is_object() && record.contains("format_version") && !record.contains("text") &&
           !record.contains("id");
}

ThreatReport report_from_record(const json& record, const TechniqueRegistry& registry,
                                const std::string& where) {
    if (!record.is_object()) {
        raise(ErrorKind::Parse, where + ": report record must be an object");
    }
    ThreatReport report;
    report.report_id = record.value("report_id", "");
    if (report.report_id.empty()) {
        raise(ErrorKind::Parse, where + ": report record needs a non-empty `report_id`");
    }
    if (record.contains("sentences") && record.at("sentences").is_array() &&
        !record.at("sentences").empty()) {
        for (const auto& s : record.at("sentences")) {
            report.sentences.push_back(s.get<std::string>());
        }
    } else if (record.contains("text")) {
        report.raw_text = record.at("text").get<std::string>();
    } else {
        raise(ErrorKind::Parse,
              where + ": report record needs `text` or a non-empty `sentences` array");
    }
    for (const auto& label : record.value("true_labels", json::array())) {
        std::string id = label.get<std::string>();
        if (!registry.contains(id)) {
            raise(ErrorKind::Validation,
                  where + ": true label " + id + " is not in the active registry");
        }
        report.true_labels.insert(id);
    }
    return report;
}

}  // namespace

SentenceDataset load_sentence_dataset(const std::filesystem::path& file,
                                      const TechniqueRegistry& registry) {
    SentenceDataset dataset;
    std::vector<std::string> violations;

    for_each_jsonl_record(file, [&](std::size_t line_no, const json& record) {
        if (line_no == 1 && is_header_record(record)) {
            dataset.registry_version = record.value("registry_version", "");
            return;
        }
        std::string where = file.string() + ":" + std::to_string(line_no);
        if (!record.contains("text") || !record.contains("label")) {
            raise(ErrorKind::Parse, where + ": sentence record needs `text` and `label`");
        }
        LabeledSentence entry;
        entry.text = record.at("text").get<std::string>();
        entry.label = record.at("label").get<std::string>();
        entry.origin = origin_from_string(record.value("origin", "base"), where);
        entry.source_text = record.value("source_text", "");
        if (trim(entry.text).empty()) {
            violations.push_back(where + ": empty sentence text");
            return;
        }
        if (!validate_technique_id(entry.label) || !registry.contains(entry.label)) {
            violations.push_back(where + ": label " + entry.label +
                                 " is not in the active registry");
            return;
        }
        dataset.entries.push_back(std::move(entry));
    });

    if (!violations.empty()) {
        std::ostringstream msg;
        msg << violations.size() << " invalid dataset row(s):";
        for (const auto& v : violations) msg << "\n  " << v;
        raise(ErrorKind::Validation, msg.str());
    }
    if (dataset.entries.empty()) {
        raise(ErrorKind::Validation, "dataset contains no entries: " + file.string());
    }
    if (dataset.registry_version.empty()) {
        dataset.registry_version = registry.version();
    }
    return dataset;
}

void save_sentence_dataset(const std::filesystem::path& file, const SentenceDataset& dataset) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        raise(ErrorKind::Io, "cannot open file for writing: " + file.string());
    }
    out << json{{"format_version", kFormatVersion},
                {"registry_version", dataset.registry_version}}
               .dump()
        << "\n";
    for (const auto& e : dataset.entries) {
        json record{{"text", e.text}, {"label", e.label}, {"origin", origin_to_string(e.origin)}};
        if (e.origin == SentenceOrigin::Augmented) {
            record["source_text"] = e.source_text;
        }
        out << record.dump() << "\n";
    }
    if (!out) {
        raise(ErrorKind::Io, "write failed: " + file.string());
    }
}

DatasetSplit split_dataset(const SentenceDataset& dataset, double ratio, std::uint64_t seed) {
    if (dataset.entries.empty()) {
        raise(ErrorKind::Validation, "cannot split an empty dataset");
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        raise(ErrorKind::Validation, "split ratio must be in (0,1), got " + std::to_string(ratio));
    }

    // Group entry indices per class, in dataset order; iterate classes in
    // sorted label order so the RNG stream is consumed deterministically.
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < dataset.entries.size(); ++i) {
        by_class[dataset.entries[i].label].push_back(i);
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    for (auto& [label, indices] : by_class) {
        std::shuffle(indices.begin(), indices.end(), rng);
        std::size_t c = indices.size();
        std::size_t n_train;
        if (c < 2) {
            n_train = c;  // too small to stratify: keep in train
        } else {
            n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(c)));
            n_train = std::clamp<std::size_t>(n_train, 1, c - 1);
        }
        train_idx.insert(train_idx.end(), indices.begin(), indices.begin() + n_train);
        test_idx.insert(test_idx.end(), indices.begin() + n_train, indices.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    DatasetSplit split;
    split.seed = seed;
    split.ratio = ratio;
    split.train.registry_version = dataset.registry_version;
    split.test.registry_version = dataset.registry_version;
    for (std::size_t i : train_idx) split.train.entries.push_back(dataset.entries[i]);
    for (std::size_t i : test_idx) split.test.entries.push_back(dataset.entries[i]);
    return split;
}

std::map<std::string, std::size_t> class_distribution(const SentenceDataset& dataset) {
    std::map<std::string, std::size_t> counts;
    for (const auto& e : dataset.entries) {
        ++counts[e.label];
    }
    return counts;
}

std::vector<ThreatReport> load_report_dataset(const std::filesystem::path& path,
                                              const TechniqueRegistry& registry) {
    std::vector<ThreatReport> reports;

    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            reports.push_back(report_from_record(parse_json_file(file), registry, file.string()));
        }
        return reports;
    }

    for_each_jsonl_record(path, [&](std::size_t line_no, const json& record) {
        if (line_no == 1 && is_header_record(record)) return;
        reports.push_back(
            report_from_record(record, registry, path.string() + ":" + std::to_string(line_no)));
    });
    return reports;
}

void save_report_dataset(const std::filesystem::path& file,
                         const std::vector<ThreatReport>& reports,
                         const std::string& registry_version) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        raise(ErrorKind::Io, "cannot open file for writing: " + file.string());
    }
    out << json{{"format_version", kFormatVersion}, {"registry_version", registry_version}}.dump()
        << "\n";
    for (const auto& r : reports) {
        json record{{"report_id", r.report_id},
                    {"true_labels", std::vector<std::string>(r.true_labels.begin(),
                                                             r.true_labels.end())}};
        if (!r.sentences.empty()) {
            record["sentences"] = r.sentences;
        } else {
            record["text"] = r.raw_text;
        }
        out << record.dump() << "\n";
    }
    if (!out) {
        raise(ErrorKind::Io, "write failed: " + file.string());
    }
}

}  // namespace ttpx
