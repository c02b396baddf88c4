#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ttpx/taxonomy.hpp"

namespace ttpx {

/// Multi-hot label vector aligned to the registry layout (entry i refers to
/// registry position i).
using LabelVector = std::vector<std::uint8_t>;

LabelVector to_label_vector(const std::set<std::string>& ids, const TechniqueRegistry& registry);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // number of instances with the class true
};

struct MetricsReport {
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::optional<double> hamming;  // set for multi-label (report-level) runs
    std::map<std::string, ClassMetrics> per_class;
    std::size_t evaluated_class_count = 0;
};

/// Which classes enter the macro average: only classes observed in truth or
/// predictions, or every class in the registry.
enum class MacroOver { Observed, All };

/// Fraction of label positions where prediction and truth disagree:
/// sum_i popcount(y_i XOR yhat_i) / (k * m).
double hamming_loss(const std::vector<LabelVector>& truth,
                    const std::vector<LabelVector>& predicted);

/// Report-level multi-label metrics: per-class TP/FP/FN across instances,
/// macro averages over the evaluated class set, hamming loss included.
/// Classes with zero support and zero predictions are excluded under
/// MacroOver::Observed; per-class 0/0 ratios count as 0 when they do enter.
MetricsReport multilabel_macro_metrics(const std::vector<LabelVector>& truth,
                                       const std::vector<LabelVector>& predicted,
                                       const TechniqueRegistry& registry,
                                       MacroOver macro_over = MacroOver::Observed);

/// Sentence-level multi-class metrics: one-vs-rest counts from the confusion
/// matrix. `hamming` is left unset.
MetricsReport multiclass_sentence_metrics(const std::vector<std::string>& truth,
                                          const std::vector<std::string>& predicted,
                                          const TechniqueRegistry& registry,
                                          MacroOver macro_over = MacroOver::Observed);

/// Histogram of per-class scores over ten 0.1-wide bins; the top bin is
/// closed ([0.9, 1.0]).
struct BinHistogram {
    static constexpr double interval = 0.1;
    std::array<std::size_t, 10> counts{};
};

BinHistogram classwise_bins(const std::map<std::string, double>& per_class_scores);

}  // namespace ttpx
