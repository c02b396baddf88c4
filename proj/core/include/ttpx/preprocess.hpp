#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace ttpx {

/// One IOC replacement rule. Rules apply in ascending `priority`; a character
/// span claimed by one rule is never re-matched by a later rule.
struct IocRule {
    std::string base_name;   // replacement token, e.g. "file path"
    std::string pattern;     // ECMAScript regular expression
    int priority = 0;        // lower applies first
    // Non-empty: a match only counts when the text after its last '.' is in
    // this list (case-insensitive). Separates file names from domains.
    std::vector<std::string> extension_allowlist;
    // When 1, the claimed span is capture group 1 rather than the full match
    // (used by patterns that need a context guard prefix).
    int claim_group = 0;
};

struct IocReplacement {
    std::string rule;            // base_name of the matching rule
    std::string matched;         // the original span text
    std::size_t sentence_index;  // position of the sentence in its report
};

/// Audit trail for one normalization pass.
struct NormalizationReport {
    std::vector<IocReplacement> replacements;
    std::uint64_t input_hash = 0;   // FNV-1a of the text before
    std::uint64_t output_hash = 0;  // FNV-1a of the text after
};

/// The shipped rule table: registry, email, CVE, file path, IP address,
/// file name (extension-gated), domain — in that priority order.
std::vector<IocRule> default_ioc_rules();

/// Reads a rule table config: {"rules": [{base_name, pattern, priority,
/// extension_allowlist?, claim_group?}, ...]}.
std::vector<IocRule> load_ioc_rules(const std::filesystem::path& file);

class IocNormalizer {
public:
    IocNormalizer();  // default rule table
    explicit IocNormalizer(const std::vector<IocRule>& rules);
    ~IocNormalizer();
    IocNormalizer(IocNormalizer&&) noexcept;
    IocNormalizer& operator=(IocNormalizer&&) noexcept;

    /// Replaces each IOC span with its rule's base name. Total: never fails.
    std::pair<std::string, NormalizationReport> normalize(
        const std::string& sentence, std::size_t sentence_index = 0) const;

    const std::vector<IocRule>& rules() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience wrapper over a shared default-rule normalizer.
std::pair<std::string, NormalizationReport> normalize_iocs(const std::string& sentence);

/// Removes bracketed numeric citation markers ([12], [3, 5], [1][2]) and
/// collapses the whitespace they leave behind. Everything else is untouched.
std::string strip_citations(const std::string& text);

/// Splits report prose into ordered sentences. Deterministic rule-based
/// splitter: terminal punctuation with an abbreviation guard, bullet lines
/// and headings as their own segments, paragraph breaks never merged.
std::vector<std::string> segment_report(const std::string& text);

}  // namespace ttpx
