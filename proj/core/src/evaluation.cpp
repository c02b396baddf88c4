#include "ttpx/evaluation.hpp"

#include <algorithm>

#include "ttpx/error.hpp"

namespace ttpx {

namespace {

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

// Ratios computed from integer counts only, so results are reproducible
// bit-for-bit against any counting oracle.
ClassMetrics metrics_from_counts(const Counts& c) {
    ClassMetrics m;
    m.support = c.tp + c.fn;
    m.precision = (c.tp + c.fp) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                                    : 0.0;
    m.recall = (c.tp + c.fn) > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                                 : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall /
                                                (m.precision + m.recall)
                                          : 0.0;
    return m;
}

MetricsReport assemble_report(const std::vector<Counts>& counts,
                              const TechniqueRegistry& registry, MacroOver macro_over) {
    MetricsReport report;
    double sum_p = 0.0;
    double sum_r = 0.0;
    double sum_f1 = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const Counts& c = counts[i];
        bool observed = c.tp + c.fp + c.fn > 0;
        if (macro_over == MacroOver::Observed && !observed) continue;
        ClassMetrics m = metrics_from_counts(c);
        report.per_class.emplace(registry.id_at(i), m);
        sum_p += m.precision;
        sum_r += m.recall;
        sum_f1 += m.f1;
        ++evaluated;
    }
    report.evaluated_class_count = evaluated;
    if (evaluated > 0) {
        report.macro_precision = sum_p / static_cast<double>(evaluated);
        report.macro_recall = sum_r / static_cast<double>(evaluated);
        report.macro_f1 = sum_f1 / static_cast<double>(evaluated);
    }
    return report;
}

void check_vector_shapes(const std::vector<LabelVector>& truth,
                         const std::vector<LabelVector>& predicted) {
    if (truth.size() != predicted.size()) {
        raise(ErrorKind::Validation,
              "truth and prediction lists differ in length: " + std::to_string(truth.size()) +
                  " vs " + std::to_string(predicted.size()));
    }
    if (truth.empty()) {
        raise(ErrorKind::Validation, "cannot evaluate an empty instance list");
    }
    std::size_t m = truth.front().size();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i].size() != m || predicted[i].size() != m) {
            raise(ErrorKind::Validation,
                  "label vectors must share one length; instance " + std::to_string(i) +
                      " disagrees");
        }
    }
    if (m == 0) {
        raise(ErrorKind::Validation, "label vectors must be non-empty");
    }
}

}  // namespace

LabelVector to_label_vector(const std::set<std::string>& ids, const TechniqueRegistry& registry) {
    LabelVector v(registry.class_count(), 0);
    for (const auto& id : ids) {
        v[registry.position(id)] = 1;
    }
    return v;
}

double hamming_loss(const std::vector<LabelVector>& truth,
                    const std::vector<LabelVector>& predicted) {
    check_vector_shapes(truth, predicted);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t j = 0; j < truth[i].size(); ++j) {
            mismatches += (truth[i][j] != 0) != (predicted[i][j] != 0) ? 1 : 0;
        }
    }
    return static_cast<double>(mismatches) /
           static_cast<double>(truth.size() * truth.front().size());
}

MetricsReport multilabel_macro_metrics(const std::vector<LabelVector>& truth,
                                       const std::vector<LabelVector>& predicted,
                                       const TechniqueRegistry& registry, MacroOver macro_over) {
    check_vector_shapes(truth, predicted);
    if (truth.front().size() != registry.class_count()) {
        raise(ErrorKind::Validation, "label vector length does not match the registry layout");
    }
    std::vector<Counts> counts(registry.class_count());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t j = 0; j < counts.size(); ++j) {
            bool t = truth[i][j] != 0;
            bool p = predicted[i][j] != 0;
            if (t && p) ++counts[j].tp;
            if (!t && p) ++counts[j].fp;
            if (t && !p) ++counts[j].fn;
        }
    }
    MetricsReport report = assemble_report(counts, registry, macro_over);
    report.hamming = hamming_loss(truth, predicted);
    return report;
}

MetricsReport multiclass_sentence_metrics(const std::vector<std::string>& truth,
                                          const std::vector<std::string>& predicted,
                                          const TechniqueRegistry& registry,
                                          MacroOver macro_over) {
    if (truth.size() != predicted.size()) {
        raise(ErrorKind::Validation,
              "truth and prediction lists differ in length: " + std::to_string(truth.size()) +
                  " vs " + std::to_string(predicted.size()));
    }
    if (truth.empty()) {
        raise(ErrorKind::Validation, "cannot evaluate an empty instance list");
    }
    std::vector<Counts> counts(registry.class_count());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        std::size_t t = registry.position(truth[i]);      // throws on unknown labels
        std::size_t p = registry.position(predicted[i]);
        if (t == p) {
            ++counts[t].tp;
        } else {
            ++counts[t].fn;
            ++counts[p].fp;
        }
    }
    return assemble_report(counts, registry, macro_over);
}

BinHistogram classwise_bins(const std::map<std::string, double>& per_class_scores) {
    BinHistogram histogram;
    for (const auto& [id, score] : per_class_scores) {
        if (!(score >= 0.0 && score <= 1.0)) {
            raise(ErrorKind::Validation,
                  "score for " + id + " is outside [0,1]: " + std::to_string(score));
        }
        auto bin = static_cast<std::size_t>(score / BinHistogram::interval);
        bin = std::min<std::size_t>(bin, histogram.counts.size() - 1);  // 1.0 lands in the top bin
        ++histogram.counts[bin];
    }
    return histogram;
}

}  // namespace ttpx
