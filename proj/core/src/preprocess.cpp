#include "ttpx/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <regex>
#include <sstream>

#include "ttpx/error.hpp"
#include "ttpx/hashing.hpp"
#include "ttpx/jsonl.hpp"

namespace ttpx {

namespace {

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

// ---------------------------------------------------------------------------
// IOC replacement
// ---------------------------------------------------------------------------

std::vector<IocRule> default_ioc_rules() {
    std::vector<IocRule> rules;

    // Hive-rooted registry keys. Components may not contain whitespace except
    // single spaces inside intermediate components ("Windows NT"); the final
    // component never ends in punctuation so trailing commas/periods survive.
    rules.push_back(
        {"registry",
         R"((?:HKEY_LOCAL_MACHINE|HKEY_CURRENT_USER|HKEY_CLASSES_ROOT|HKEY_USERS|HKEY_CURRENT_CONFIG)\\(?:[^\\\s]+(?: [^\\\s]+)*\\)*[^\\\s]*[^\\\s.,;:!?'")\]])",
         10,
         {},
         0});

    rules.push_back({"email", R"(\b[a-zA-Z0-9._%+-]+@[a-zA-Z0-9.-]+\.[a-zA-Z]{2,}\b)", 20, {}, 0});

    rules.push_back({"CVE", R"(\bCVE-\d{4}-\d{4,}\b)", 30, {}, 0});

    // Windows paths: drive-anchored or at least one backslash separator. The
    // final component may be extensionless (reports often name directories).
    rules.push_back(
        {"file path",
         R"(\b(?:[a-zA-Z]:\\(?:[a-zA-Z0-9_.-]+\\)*|(?:[a-zA-Z0-9_.-]+\\)+)[a-zA-Z0-9_.-]*[a-zA-Z0-9_])",
         40,
         {},
         0});

    // Unix paths: two or more /component groups, guarded so the pattern never
    // fires inside a URL. The claimed span is group 1 (past the guard char).
    rules.push_back({"file path",
                     R"((?:^|[\s"'(,;:=<>\[])((?:/[a-zA-Z0-9_.-]+){2,}/?))",
                     41,
                     {},
                     1});

    rules.push_back({"IP address", R"(\b(?:\d{1,3}\.){3}\d{1,3}\b)", 50, {}, 0});

    // Dotted tokens count as file names only when the extension is on the
    // allowlist; everything else falls through to the domain rule.
    rules.push_back({"file",
                     R"(\b[a-zA-Z0-9_-]+\.[a-zA-Z0-9_]+\b)",
                     60,
                     {"exe", "dll", "bat", "ps1", "vbs", "js",  "doc", "docx",
                      "xls", "xlsx", "pdf", "zip", "rar", "7z",  "lnk", "scr",
                      "tmp", "dat",  "bin", "sys", "jar", "py",  "sh",  "elf"},
                     0});

    // Scheme-prefixed URLs are swallowed whole; bare domains use the classic
    // label pattern with an alphabetic TLD.
    rules.push_back(
        {"domain",
         R"((?:https?|ftps?)://[^\s"'<>]*[^\s"'<>.,;:!?)\]]|\b[a-zA-Z0-9](?:[a-zA-Z0-9.-]*[a-zA-Z0-9])?\.[a-zA-Z]{2,}\b)",
         70,
         {},
         0});

    return rules;
}

std::vector<IocRule> load_ioc_rules(const std::filesystem::path& file) {
    json doc = parse_json_file(file);
    if (!doc.contains("rules") || !doc.at("rules").is_array()) {
        raise(ErrorKind::Parse, "IOC rule config has no `rules` array: " + file.string());
    }
    std::vector<IocRule> rules;
    for (const auto& r : doc.at("rules")) {
        IocRule rule;
        rule.base_name = r.at("base_name").get<std::string>();
        rule.pattern = r.at("pattern").get<std::string>();
        rule.priority = r.at("priority").get<int>();
        if (r.contains("extension_allowlist")) {
            for (const auto& ext : r.at("extension_allowlist")) {
                rule.extension_allowlist.push_back(ext.get<std::string>());
            }
        }
        rule.claim_group = r.value("claim_group", 0);
        if (rule.base_name.empty()) {
            raise(ErrorKind::Validation, "IOC rule with empty base_name in " + file.string());
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

struct IocNormalizer::Impl {
    struct CompiledRule {
        IocRule rule;
        std::regex regex;
        std::vector<std::string> allowlist_lower;
    };
    std::vector<CompiledRule> compiled;
};

IocNormalizer::IocNormalizer() : IocNormalizer(default_ioc_rules()) {}

IocNormalizer::IocNormalizer(const std::vector<IocRule>& rules) : impl_(new Impl) {
    std::vector<IocRule> ordered = rules;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const IocRule& a, const IocRule& b) { return a.priority < b.priority; });
    for (const auto& rule : ordered) {
        Impl::CompiledRule cr;
        cr.rule = rule;
        try {
            cr.regex = std::regex(rule.pattern, std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
            raise(ErrorKind::Validation,
                  "IOC rule \"" + rule.base_name + "\" has an invalid pattern: " + e.what());
        }
        for (const auto& ext : rule.extension_allowlist) {
            cr.allowlist_lower.push_back(lowercase(ext));
        }
        impl_->compiled.push_back(std::move(cr));
    }
}

IocNormalizer::~IocNormalizer() = default;
IocNormalizer::IocNormalizer(IocNormalizer&&) noexcept = default;
IocNormalizer& IocNormalizer::operator=(IocNormalizer&&) noexcept = default;

const std::vector<IocRule>& IocNormalizer::rules() const {
    static thread_local std::vector<IocRule> view;
    view.clear();
    for (const auto& cr : impl_->compiled) view.push_back(cr.rule);
    return view;
}

namespace {

struct ClaimedSpan {
    std::size_t begin;
    std::size_t end;  // exclusive
    const std::string* base_name;
    std::string matched;
};

bool overlaps(const ClaimedSpan& s, std::size_t begin, std::size_t end) {
    return s.begin < end && begin < s.end;
}

bool extension_allowed(const std::string& matched, const std::vector<std::string>& allowlist) {
    auto dot = matched.rfind('.');
    if (dot == std::string::npos || dot + 1 >= matched.size()) return false;
    std::string ext = lowercase(matched.substr(dot + 1));
    return std::find(allowlist.begin(), allowlist.end(), ext) != allowlist.end();
}

}  // namespace

std::pair<std::string, NormalizationReport> IocNormalizer::normalize(
    const std::string& sentence, std::size_t sentence_index) const {
    std::vector<ClaimedSpan> claims;

    for (const auto& cr : impl_->compiled) {
        auto begin_it = std::sregex_iterator(sentence.begin(), sentence.end(), cr.regex);
        for (auto it = begin_it; it != std::sregex_iterator(); ++it) {
            const std::smatch& m = *it;
            int group = cr.rule.claim_group;
            if (group > 0 && (static_cast<std::size_t>(group) >= m.size() || !m[group].matched)) {
                continue;
            }
            std::size_t begin = static_cast<std::size_t>(m.position(group));
            std::size_t end = begin + static_cast<std::size_t>(m.length(group));
            if (begin == end) continue;
            std::string matched = m.str(group);
            if (!cr.allowlist_lower.empty() && !extension_allowed(matched, cr.allowlist_lower)) {
                continue;
            }
            bool taken = std::any_of(claims.begin(), claims.end(), [&](const ClaimedSpan& s) {
                return overlaps(s, begin, end);
            });
            if (taken) continue;
            claims.push_back({begin, end, &cr.rule.base_name, std::move(matched)});
        }
    }

    std::sort(claims.begin(), claims.end(),
              [](const ClaimedSpan& a, const ClaimedSpan& b) { return a.begin < b.begin; });

    std::string out;
    out.reserve(sentence.size());
    NormalizationReport report;
    report.input_hash = fnv1a64(sentence);

    std::size_t cursor = 0;
    for (const auto& claim : claims) {
        out.append(sentence, cursor, claim.begin - cursor);
        out.append(*claim.base_name);
        report.replacements.push_back({*claim.base_name, claim.matched, sentence_index});
        cursor = claim.end;
    }
    out.append(sentence, cursor, sentence.size() - cursor);
    report.output_hash = fnv1a64(out);
    return {std::move(out), std::move(report)};
}

std::pair<std::string, NormalizationReport> normalize_iocs(const std::string& sentence) {
    static const IocNormalizer default_normalizer;
    return default_normalizer.normalize(sentence);
}

// ---------------------------------------------------------------------------
// Citation stripping
// ---------------------------------------------------------------------------

namespace {

// [12], [3, 5], [3-5], [3–5]; also chained [1][2].
const std::regex& citation_marker_regex() {
    static const std::regex re(R"(\[\s*\d+(?:\s*(?:,|;|-|–)\s*\d+)*\s*\])");
    return re;
}

// Unicode superscript digits used as footnote markers.
std::size_t superscript_digit_length(const std::string& s, std::size_t i) {
    if (i + 1 < s.size() && static_cast<unsigned char>(s[i]) == 0xC2) {
        unsigned char b = static_cast<unsigned char>(s[i + 1]);
        if (b == 0xB9 || b == 0xB2 || b == 0xB3) return 2;  // ¹ ² ³
    }
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x81) {
        unsigned char b = static_cast<unsigned char>(s[i + 2]);
        if (b == 0xB0 || (b >= 0xB4 && b <= 0xB9)) return 3;  // ⁰ ⁴–⁹
    }
    return 0;
}

}  // namespace

std::string strip_citations(const std::string& text) {
    // Pass 1: delete marker spans, remembering junction offsets in the output.
    std::string stripped;
    stripped.reserve(text.size());
    std::vector<std::size_t> junctions;

    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '[') {
            std::smatch m;
            if (std::regex_search(text.cbegin() + static_cast<std::ptrdiff_t>(i), text.cend(), m,
                                  citation_marker_regex(),
                                  std::regex_constants::match_continuous)) {
                junctions.push_back(stripped.size());
                i += static_cast<std::size_t>(m.length(0));
                continue;
            }
        }
        if (std::size_t len = superscript_digit_length(text, i); len > 0) {
            junctions.push_back(stripped.size());
            i += len;
            continue;
        }
        stripped.push_back(text[i]);
        ++i;
    }
    if (junctions.empty()) return text;

    // Pass 2: tidy only the whitespace runs a removal touched. A run that ends
    // at the string edge or runs into closing punctuation disappears entirely;
    // otherwise it collapses to a single space.
    std::string out;
    out.reserve(stripped.size());
    std::size_t j = 0;  // next junction to consider
    std::size_t pos = 0;
    while (pos < stripped.size()) {
        if (!is_ascii_space(stripped[pos])) {
            out.push_back(stripped[pos]);
            ++pos;
            continue;
        }
        std::size_t run_end = pos;
        while (run_end < stripped.size() && is_ascii_space(stripped[run_end])) ++run_end;
        while (j < junctions.size() && junctions[j] < pos) ++j;
        bool touched = j < junctions.size() && junctions[j] <= run_end;
        if (!touched) {
            out.append(stripped, pos, run_end - pos);
        } else {
            bool at_start = out.empty();
            bool at_end = run_end == stripped.size();
            bool before_punct =
                run_end < stripped.size() && std::strchr(".,;:!?)", stripped[run_end]) != nullptr;
            if (!at_start && !at_end && !before_punct) {
                out.push_back(' ');
            }
        }
        pos = run_end;
    }
    // A junction flush against the string start with no whitespace run.
    return out;
}

// ---------------------------------------------------------------------------
// Sentence segmentation
// ---------------------------------------------------------------------------

namespace {

const std::array<const char*, 22> kAbbreviations = {
    "e.g", "i.e", "etc", "vs",  "cf",  "al",  "mr",  "mrs", "ms",   "dr",  "prof",
    "inc", "corp", "ltd", "co", "fig", "figs", "st",  "u.s", "u.k", "approx", "dept"};

bool is_guarded_abbreviation(const std::string& text, std::size_t punct_begin) {
    // Token = maximal non-space run ending just before the punctuation char.
    std::size_t end = punct_begin;
    std::size_t begin = end;
    while (begin > 0 && !is_ascii_space(text[begin - 1])) --begin;
    if (begin == end) return false;
    std::string token = text.substr(begin, end - begin);
    while (!token.empty() && std::strchr("(\"'", token.front()) != nullptr) token.erase(0, 1);
    if (token.empty()) return false;
    // Single capital letter reads as an initial ("J. Smith").
    if (token.size() == 1 && std::isupper(static_cast<unsigned char>(token[0]))) return true;
    std::string lowered = lowercase(token);
    return std::any_of(kAbbreviations.begin(), kAbbreviations.end(),
                       [&](const char* a) { return lowered == a; });
}

bool starts_new_sentence(char c) {
    return std::isupper(static_cast<unsigned char>(c)) ||
           std::isdigit(static_cast<unsigned char>(c)) || std::strchr("\"'(", c) != nullptr;
}

// Splits one flowing text unit at sentence boundaries.
void split_unit(const std::string& unit, std::vector<std::string>& out) {
    auto flush = [&](std::size_t begin, std::size_t end) {
        while (begin < end && is_ascii_space(unit[begin])) ++begin;
        while (end > begin && is_ascii_space(unit[end - 1])) --end;
        if (begin < end) out.push_back(unit.substr(begin, end - begin));
    };

    std::size_t start = 0;
    std::size_t i = 0;
    while (i < unit.size()) {
        char c = unit[i];
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        std::size_t punct_begin = i;
        while (i < unit.size() && (unit[i] == '.' || unit[i] == '!' || unit[i] == '?')) ++i;
        while (i < unit.size() && std::strchr(")\"'", unit[i]) != nullptr) ++i;
        std::size_t after = i;
        std::size_t next = after;
        while (next < unit.size() && is_ascii_space(unit[next])) ++next;
        bool boundary = next > after && next < unit.size() && starts_new_sentence(unit[next]) &&
                        !(unit[punct_begin] == '.' && is_guarded_abbreviation(unit, punct_begin));
        if (boundary) {
            flush(start, after);
            start = next;
            i = next;
        }
    }
    flush(start, unit.size());
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

bool is_bullet_line(const std::string& line) {
    std::size_t i = line.find_first_not_of(" \t");
    if (i == std::string::npos) return false;
    if (line.compare(i, 3, "\xE2\x80\xA2") == 0) return true;  // •
    char c = line[i];
    if ((c == '-' || c == '*' || c == 'o') && i + 1 < line.size() &&
        is_ascii_space(line[i + 1])) {
        return true;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t k = i;
        while (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) ++k;
        if (k < line.size() && (line[k] == '.' || line[k] == ')') && k + 1 < line.size() &&
            is_ascii_space(line[k + 1])) {
            return true;
        }
    }
    return false;
}

// Heading-like: short, no terminal punctuation, and either colon-terminated
// or title-cased throughout. Wrapped prose ("the actor used\nPowerShell.")
// stays joined because lowercase words disqualify the line.
bool is_heading_line(const std::string& line) {
    std::size_t end = line.find_last_not_of(" \t\r");
    if (end == std::string::npos) return false;
    char last = line[end];
    if (last == '.' || last == '!' || last == '?' || last == ';' || last == ',') return false;
    std::istringstream stream(line);
    std::string w;
    int count = 0;
    bool title_case = true;
    while (stream >> w) {
        ++count;
        auto c = static_cast<unsigned char>(w[0]);
        if (!(std::isupper(c) || std::isdigit(c))) title_case = false;
    }
    if (count == 0 || count > 8) return false;
    return last == ':' || title_case;
}

}  // namespace

std::vector<std::string> segment_report(const std::string& text) {
    std::vector<std::string> lines;
    {
        std::string current;
        for (char c : text) {
            if (c == '\n') {
                lines.push_back(current);
                current.clear();
            } else if (c != '\r') {
                current.push_back(c);
            }
        }
        lines.push_back(current);
    }

    std::vector<std::string> segments;
    std::string unit;
    auto flush_unit = [&]() {
        if (!unit.empty()) {
            split_unit(unit, segments);
            unit.clear();
        }
    };

    for (const auto& line : lines) {
        if (is_blank(line)) {  // paragraph break: hard boundary
            flush_unit();
            continue;
        }
        if (is_bullet_line(line)) {
            flush_unit();
            split_unit(line, segments);
            continue;
        }
        if (unit.empty() && is_heading_line(line)) {
            split_unit(line, segments);
            continue;
        }
        if (!unit.empty()) unit.push_back(' ');
        std::size_t b = line.find_first_not_of(" \t");
        std::size_t e = line.find_last_not_of(" \t\r");
        unit.append(line, b, e - b + 1);
        if (!unit.empty() && unit.back() == ':') flush_unit();
    }
    flush_unit();
    return segments;
}

}  // namespace ttpx
