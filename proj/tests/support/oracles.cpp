#include "support/oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

namespace ttpx::testing {

namespace {

std::vector<std::string> split_words(const std::string& sentence) {
    std::istringstream in(sentence);
    std::vector<std::string> words;
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

std::string join(const std::vector<std::string>& words) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += ' ';
        out += words[i];
    }
    return out;
}

double plain_cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += double(a.values[i]) * double(b.values[i]);
        na += double(a.values[i]) * double(a.values[i]);
        nb += double(b.values[i]) * double(b.values[i]);
    }
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

}  // namespace

std::vector<AugmentedSentence> oracle_augment_sentence(const std::string& sentence, double theta,
                                                       int top_k, MaskedLmBackend& mlm,
                                                       EmbeddingBackend& embedder) {
    std::vector<std::string> words = split_words(sentence);
    EmbeddingVector original = embedder.embed(sentence);

    std::vector<AugmentedSentence> augmented;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < words.size(); ++i) {
        std::vector<std::string> masked = words;
        masked[i] = mlm.mask_token();
        std::vector<MaskedPrediction> top = mlm.predict_masked(join(masked), top_k);
        for (const MaskedPrediction& candidate : top) {
            if (candidate.word == words[i]) continue;
            std::vector<std::string> variant = words;
            variant[i] = candidate.word;
            std::string text = join(variant);
            double score = plain_cosine(original, embedder.embed(text));
            if (score >= theta) {
                if (seen.count(text)) continue;
                seen.insert(text);
                AugmentedSentence a;
                a.text = text;
                a.source_text = sentence;
                a.masked_position = i;
                a.replacement_word = candidate.word;
                a.similarity = score;
                augmented.push_back(a);
            }
        }
    }
    return augmented;
}

SentenceDataset oracle_augment_dataset(const SentenceDataset& dataset, double theta, int top_k,
                                       MaskedLmBackend& mlm, EmbeddingBackend& embedder) {
    SentenceDataset out;
    out.registry_version = dataset.registry_version;
    out.entries = dataset.entries;
    std::set<std::string> seen;
    for (const auto& e : dataset.entries) seen.insert(e.text);
    for (const auto& entry : dataset.entries) {
        std::vector<AugmentedSentence> generated =
            oracle_augment_sentence(entry.text, theta, top_k, mlm, embedder);
        for (const auto& g : generated) {
            if (seen.count(g.text)) continue;
            seen.insert(g.text);
            LabeledSentence ls;
            ls.text = g.text;
            ls.label = entry.label;
            ls.origin = SentenceOrigin::Augmented;
            ls.source_text = g.source_text;
            out.entries.push_back(ls);
        }
    }
    return out;
}

double oracle_hamming_loss(const std::vector<LabelVector>& truth,
                           const std::vector<LabelVector>& predicted) {
    std::size_t wrong = 0;
    std::size_t total = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        for (std::size_t j = 0; j < truth[i].size(); ++j) {
            bool a = truth[i][j] != 0;
            bool b = predicted[i][j] != 0;
            if (a != b) wrong += 1;
            total += 1;
        }
    }
    return double(wrong) / double(total);
}

std::vector<OracleClassMetrics> oracle_per_class_metrics(
    const std::vector<LabelVector>& truth, const std::vector<LabelVector>& predicted) {
    std::size_t m = truth.front().size();
    std::vector<OracleClassMetrics> out;
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            bool t = truth[i][j] != 0;
            bool p = predicted[i][j] != 0;
            if (t && p) tp += 1;
            if (!t && p) fp += 1;
            if (t && !p) fn += 1;
        }
        OracleClassMetrics cm{};
        cm.observed = tp + fp + fn > 0;
        cm.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
        cm.recall = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
        cm.f1 = cm.precision + cm.recall > 0.0
                    ? 2.0 * cm.precision * cm.recall / (cm.precision + cm.recall)
                    : 0.0;
        out.push_back(cm);
    }
    return out;
}

std::string oracle_leftmost_longest_normalize(const std::string& sentence,
                                              const std::vector<IocRule>& rules) {
    struct Compiled {
        const IocRule* rule;
        std::regex re;
    };
    std::vector<Compiled> compiled;
    for (const auto& r : rules) compiled.push_back({&r, std::regex(r.pattern)});
    std::sort(compiled.begin(), compiled.end(),
              [](const Compiled& a, const Compiled& b) { return a.rule->priority < b.rule->priority; });

    auto allowed = [](const IocRule& rule, const std::string& text) {
        if (rule.extension_allowlist.empty()) return true;
        auto dot = text.rfind('.');
        if (dot == std::string::npos || dot + 1 >= text.size()) return false;
        std::string ext = text.substr(dot + 1);
        for (char& c : ext) c = char(std::tolower(static_cast<unsigned char>(c)));
        return std::find(rule.extension_allowlist.begin(), rule.extension_allowlist.end(), ext) !=
               rule.extension_allowlist.end();
    };

    std::string out;
    std::size_t pos = 0;
    while (pos < sentence.size()) {
        // Best match across the union: leftmost, then longest, then priority.
        bool found = false;
        std::size_t best_begin = 0, best_end = 0;
        const IocRule* best_rule = nullptr;
        for (const auto& c : compiled) {
            auto it = std::sregex_iterator(sentence.begin() + std::ptrdiff_t(pos), sentence.end(),
                                           c.re);
            for (; it != std::sregex_iterator(); ++it) {
                const std::smatch& m = *it;
                int g = c.rule->claim_group;
                if (g > 0 && (std::size_t(g) >= m.size() || !m[g].matched)) continue;
                std::size_t begin = pos + std::size_t(m.position(g));
                std::size_t end = begin + std::size_t(m.length(g));
                if (begin == end) continue;
                if (!allowed(*c.rule, m.str(g))) continue;  // keep scanning this rule
                bool better = !found || begin < best_begin ||
                              (begin == best_begin && end > best_end) ||
                              (begin == best_begin && end == best_end &&
                               c.rule->priority < best_rule->priority);
                if (better) {
                    found = true;
                    best_begin = begin;
                    best_end = end;
                    best_rule = c.rule;
                }
                break;  // leftmost allowed match for this rule found
            }
        }
        if (!found) {
            out.append(sentence, pos, sentence.size() - pos);
            break;
        }
        out.append(sentence, pos, best_begin - pos);
        out.append(best_rule->base_name);
        pos = best_end;
    }
    return out;
}

bool perceptron_separable(const std::vector<EmbeddingVector>& points,
                          const std::vector<std::size_t>& labels, std::size_t classes,
                          int max_epochs) {
    std::size_t dim = points.front().dimension();
    std::vector<std::vector<double>> w(classes, std::vector<double>(dim + 1, 0.0));
    for (int epoch = 0; epoch < max_epochs; ++epoch) {
        int mistakes = 0;
        for (std::size_t n = 0; n < points.size(); ++n) {
            std::size_t best = 0;
            double best_score = -1e300;
            for (std::size_t c = 0; c < classes; ++c) {
                double s = w[c][dim];
                for (std::size_t j = 0; j < dim; ++j) s += w[c][j] * points[n].values[j];
                if (s > best_score) {
                    best_score = s;
                    best = c;
                }
            }
            if (best != labels[n]) {
                mistakes += 1;
                for (std::size_t j = 0; j < dim; ++j) {
                    w[labels[n]][j] += points[n].values[j];
                    w[best][j] -= points[n].values[j];
                }
                w[labels[n]][dim] += 1.0;
                w[best][dim] -= 1.0;
            }
        }
        if (mistakes == 0) return true;
    }
    return false;
}

std::size_t nearest_centroid_label(const std::vector<EmbeddingVector>& train_points,
                                   const std::vector<std::size_t>& train_labels,
                                   std::size_t classes, const EmbeddingVector& query) {
    std::size_t dim = query.dimension();
    std::vector<std::vector<double>> centroid(classes, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> count(classes, 0);
    for (std::size_t n = 0; n < train_points.size(); ++n) {
        for (std::size_t j = 0; j < dim; ++j) {
            centroid[train_labels[n]][j] += train_points[n].values[j];
        }
        count[train_labels[n]] += 1;
    }
    std::size_t best = 0;
    double best_dist = 1e300;
    for (std::size_t c = 0; c < classes; ++c) {
        if (count[c] == 0) continue;
        double dist = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            double delta = centroid[c][j] / double(count[c]) - double(query.values[j]);
            dist += delta * delta;
        }
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    return best;
}

std::vector<double> finite_difference_gradient(LinearHead head, const std::vector<float>& x,
                                               std::size_t target, double h) {
    std::vector<double> grad;
    auto probe = [&](double* parameter) {
        double original = *parameter;
        *parameter = original + h;
        double up = cross_entropy_loss(head, x, target);
        *parameter = original - h;
        double down = cross_entropy_loss(head, x, target);
        *parameter = original;
        grad.push_back((up - down) / (2.0 * h));
    };
    for (std::size_t i = 0; i < head.weights.size(); ++i) probe(&head.weights[i]);
    for (std::size_t i = 0; i < head.bias.size(); ++i) probe(&head.bias[i]);
    return grad;
}

}  // namespace ttpx::testing
