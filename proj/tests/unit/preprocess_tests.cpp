#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "ttpx/preprocess.hpp"

using namespace ttpx;

namespace {

struct Case {
    const char* input;
    const char* expected;
};

std::vector<std::string> ws_tokens(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

// The transformation worked through in the fine-tuning write-up; the
// normalizer must reproduce it byte for byte.
constexpr const char* kWorkedExampleInput =
    R"(Upon execution, the malware contacts the C2 server at attacker-example.com, drops an executable payload.exe at C:\Users\Default\AppData\Roaming, and creates an autorun entry in HKEY_LOCAL_MACHINE\Software\Microsoft\Windows\CurrentVersion\Run)";
constexpr const char* kWorkedExampleOutput =
    R"(Upon execution, the malware contacts the C2 server at domain, drops an executable file at file path, and creates an autorun entry in registry)";

// 30 hand-derived cases: three or more per IOC category plus overlap traps.
const Case kIocFixture[] = {
    // registry
    {R"(creates an autorun entry in HKEY_LOCAL_MACHINE\Software\Microsoft\Windows\CurrentVersion\Run)",
     "creates an autorun entry in registry"},
    {R"(persists via HKEY_CURRENT_USER\Software\Classes\CLSID before reboot)",
     "persists via registry before reboot"},
    {R"(writes HKEY_USERS\S-1-5-21\Environment\Path, then exits)",
     "writes registry, then exits"},
    {R"(queries HKEY_LOCAL_MACHINE\SOFTWARE\Microsoft\Windows NT\CurrentVersion\Winlogon for shell values)",
     "queries registry for shell values"},
    // email
    {"contact admin@example.com about CVE-2021-44228", "contact email about CVE"},
    {"spearphishing from hr-payroll@corp-mail.net targeted staff",
     "spearphishing from email targeted staff"},
    {"user+tag@mail.example.org received the lure", "email received the lure"},
    // CVE
    {"exploits CVE-2021-44228 in log4j", "exploits CVE in log4j"},
    {"targets CVE-2017-0144 and CVE-2017-0145", "targets CVE and CVE"},
    {"patched against CVE-2023-23397.", "patched against CVE."},
    // file path
    {R"(drops an executable at C:\Users\Default\AppData\Roaming)",
     "drops an executable at file path"},
    {R"(copies itself to C:\Windows\System32\drivers\etc\hosts.bak)",
     "copies itself to file path"},
    {"reads /etc/crontab before scheduling", "reads file path before scheduling"},
    {R"(side-loads l1btool\helper.dll from the archive)",
     "side-loads file path from the archive"},
    // IP address
    {"beacons to 10.0.0.5", "beacons to IP address"},
    {"C2 at 192.168.001.210 over port 443", "C2 at IP address over port 443"},
    {"scanned 172.16.4.1, 172.16.4.2, and 172.16.4.3",
     "scanned IP address, IP address, and IP address"},
    {"traffic went to 203.0.113.77.", "traffic went to IP address."},
    // file name
    {"drops an executable payload.exe in the temp folder",
     "drops an executable file in the temp folder"},
    {"the loader script run.PS1 executes next", "the loader script file executes next"},
    {"extracts tools from archive.7z silently", "extracts tools from file silently"},
    // domain
    {"resolves updates.bad-cdn.net hourly", "resolves domain hourly"},
    {"the phishing site www.login-portal.com mimics webmail",
     "the phishing site domain mimics webmail"},
    {"redirects victims to http://evil.example.com/kit/download",
     "redirects victims to domain"},
    {"payload fetched from https://cdn.badhost.io/a?b=1", "payload fetched from domain"},
    // overlap traps
    {"uploads stolen.docx to exfil-drop.site", "uploads file to domain"},
    {"emails sent from billing@invoice-portal.net spoof the brand",
     "emails sent from email spoof the brand"},
    {R"(modifies HKEY_LOCAL_MACHINE\SYSTEM\CurrentControlSet\Services\Tcpip\Parameters silently)",
     "modifies registry silently"},
    {"maps activity to T1059.001 in the matrix", "maps activity to T1059.001 in the matrix"},
    {R"(saves C:\ProgramData\cache\update.exe, then runs it)",
     "saves file path, then runs it"},
    // no IOC at all
    {"the attacker escalated privileges", "the attacker escalated privileges"},
};

// 50 sentences with hand-marked citation spans: expected = the sentence with
// those spans (and the whitespace they strand) removed.
const Case kCitationFixture[] = {
    {"uses PowerShell [4] to execute", "uses PowerShell to execute"},
    {"as seen in [1][2]", "as seen in"},
    {"text with no markers", "text with no markers"},
    {"[1] The actor moved laterally", "The actor moved laterally"},
    {"persistence was established [12]", "persistence was established"},
    {"documented in [3, 5] and confirmed", "documented in and confirmed"},
    {"reported [3-5] across campaigns", "reported across campaigns"},
    {"observed earlier [7].", "observed earlier."},
    {"tooling overlaps [2], [9] with prior intrusions",
     "tooling overlaps, with prior intrusions"},
    {"the dropper [11] fetched [12] the implant", "the dropper fetched the implant"},
    {"credential theft followed [8] immediately", "credential theft followed immediately"},
    {"[23] [24] Both reports agree", "Both reports agree"},
    {"lateral movement used SMB [6a]", "lateral movement used SMB [6a]"},
    {"phishing remains common [1, 2, 3]", "phishing remains common"},
    {"see prior analysis [10] for details", "see prior analysis for details"},
    {"the campaign [5] targeted telecoms [6]", "the campaign targeted telecoms"},
    {"C2 used DNS tunneling [14].", "C2 used DNS tunneling."},
    {"attributed with low confidence [19]", "attributed with low confidence"},
    {"malware reused code [21][22][23]", "malware reused code"},
    {"as described [2] above [3] twice", "as described above twice"},
    {"initial access via VPN appliances [13]", "initial access via VPN appliances"},
    {"[4]", ""},
    {"malicious macros launch cmd[4] in memory", "malicious macros launch cmd in memory"},
    {"the exploit chain [1, 7] stayed stable", "the exploit chain stayed stable"},
    {"staging occurred on trusted sites [16],[17]", "staging occurred on trusted sites,"},
    {"data left over HTTPS [9] at night", "data left over HTTPS at night"},
    {"defense evasion tricks [5-8] evolved", "defense evasion tricks evolved"},
    {"the loader checks locale settings [25]", "the loader checks locale settings"},
    {"wipers reappeared in 2022 [18]", "wipers reappeared in 2022"},
    {"encrypted archives moved out [20] slowly", "encrypted archives moved out slowly"},
    {"operators favor LOLBins [26] heavily", "operators favor LOLBins heavily"},
    {"a second wave followed [27] in May", "a second wave followed in May"},
    {"the botnet rents access [28]", "the botnet rents access"},
    {"firmware implants persist [29] across wipes", "firmware implants persist across wipes"},
    {"researchers disagree [30, 31] on attribution", "researchers disagree on attribution"},
    {"[32] Scanning preceded exploitation", "Scanning preceded exploitation"},
    {"ransom notes mention support chats [33].", "ransom notes mention support chats."},
    {"sandbox checks abort execution [34]", "sandbox checks abort execution"},
    {"the appendix lists hashes [35] and rules", "the appendix lists hashes and rules"},
    {"proxy chains hide origin [36]", "proxy chains hide origin"},
    {"no citations here at all", "no citations here at all"},
    {"exfil paused on weekends [37]", "exfil paused on weekends"},
    {"module names rotate weekly [38][39]", "module names rotate weekly"},
    {"the group returned after takedown [40]", "the group returned after takedown"},
    {"macros remain the entry point [41, 42]", "macros remain the entry point"},
    {"signed drivers were abused [43]", "signed drivers were abused"},
    {"cloud tokens were replayed [44] later", "cloud tokens were replayed later"},
    {"MFA fatigue attacks spiked [45]", "MFA fatigue attacks spiked"},
    {"supply chains stay exposed [46]", "supply chains stay exposed"},
    {"detections lag behind tooling [47, 48].", "detections lag behind tooling."},
};

}  // namespace

TEST_SUITE("preprocess") {

TEST_CASE("the worked normalization example transforms bit-exactly") {
    auto [output, report] = normalize_iocs(kWorkedExampleInput);
    CHECK(output == kWorkedExampleOutput);
    REQUIRE(report.replacements.size() == 3);
    CHECK(report.replacements[0].rule == "domain");
    CHECK(report.replacements[0].matched == "attacker-example.com");
    CHECK(report.replacements[1].rule == "file");
    CHECK(report.replacements[1].matched == "payload.exe");
    CHECK(report.replacements[2].rule == "registry");
}

TEST_CASE("IOC coverage fixture normalizes to hand-derived expectations") {
    for (const Case& c : kIocFixture) {
        CAPTURE(c.input);
        auto [output, report] = normalize_iocs(c.input);
        CHECK(output == c.expected);
    }
}

TEST_CASE("normalization is idempotent: base names never re-match") {
    IocNormalizer normalizer;
    auto check_fixed_point = [&](const std::string& input) {
        auto [once, r1] = normalizer.normalize(input);
        auto [twice, r2] = normalizer.normalize(once);
        CAPTURE(input);
        CHECK(twice == once);
        CHECK(r2.replacements.empty());
    };
    check_fixed_point(kWorkedExampleInput);
    for (const Case& c : kIocFixture) check_fixed_point(c.input);
}

TEST_CASE("priority claiming equals leftmost-longest over the rule union") {
    IocNormalizer normalizer;
    auto rules = default_ioc_rules();
    auto check_equal = [&](const std::string& input) {
        CAPTURE(input);
        CHECK(normalizer.normalize(input).first ==
              testing::oracle_leftmost_longest_normalize(input, rules));
    };
    check_equal(kWorkedExampleInput);
    for (const Case& c : kIocFixture) check_equal(c.input);
}

TEST_CASE("no character span is claimed by two rules") {
    IocNormalizer normalizer;
    for (const Case& c : kIocFixture) {
        auto [output, report] = normalizer.normalize(c.input);
        // Spans are disjoint iff total replaced length fits in the input.
        std::size_t replaced = 0;
        for (const auto& r : report.replacements) replaced += r.matched.size();
        CHECK(replaced <= std::string(c.input).size());
        // And every matched span occurs in the input.
        for (const auto& r : report.replacements) {
            CHECK(std::string(c.input).find(r.matched) != std::string::npos);
        }
    }
}

TEST_CASE("normalization report hashes track the transformation") {
    auto [output, report] = normalize_iocs("beacons to 10.0.0.5");
    CHECK(report.input_hash != report.output_hash);
    auto [unchanged, report2] = normalize_iocs("nothing to see");
    CHECK(report2.input_hash == report2.output_hash);
    CHECK(report2.replacements.empty());
}

TEST_CASE("rule table round-trips through the config format") {
    // Covered in cli_tests via the shipped config file; here: the defaults
    // expose the documented priority order.
    auto rules = default_ioc_rules();
    REQUIRE(rules.size() == 8);
    CHECK(rules[0].base_name == "registry");
    CHECK(rules[1].base_name == "email");
    CHECK(rules[2].base_name == "CVE");
    CHECK(rules[3].base_name == "file path");
    CHECK(rules[4].base_name == "file path");
    CHECK(rules[5].base_name == "IP address");
    CHECK(rules[6].base_name == "file");
    CHECK(rules[7].base_name == "domain");
    CHECK(std::is_sorted(rules.begin(), rules.end(),
                         [](const IocRule& a, const IocRule& b) {
                             return a.priority < b.priority;
                         }));
}

TEST_CASE("strip_citations removes markers per the hand-marked fixture") {
    for (const Case& c : kCitationFixture) {
        CAPTURE(c.input);
        CHECK(strip_citations(c.input) == c.expected);
    }
}

TEST_CASE("strip_citations output is a subsequence modulo whitespace") {
    for (const Case& c : kCitationFixture) {
        std::string out = strip_citations(c.input);
        // Every non-space output char appears in the input, in order.
        std::string in = c.input;
        std::size_t ipos = 0;
        bool subsequence = true;
        for (char ch : out) {
            if (ch == ' ') continue;
            bool found = false;
            while (ipos < in.size()) {
                if (in[ipos++] == ch) {
                    found = true;
                    break;
                }
            }
            if (!found) {
                subsequence = false;
                break;
            }
        }
        CAPTURE(c.input);
        CHECK(subsequence);
    }
}

TEST_CASE("strip_citations removes superscript footnote markers") {
    CHECK(strip_citations("the campaign\xC2\xB9 continued") == "the campaign continued");
    CHECK(strip_citations("see appendix\xE2\x81\xB4") == "see appendix");
}

TEST_CASE("segment_report on trivial inputs") {
    CHECK(segment_report("").empty());
    CHECK(segment_report(" \n\t\n ").empty());
    auto two = segment_report("A happened. B followed.");
    REQUIRE(two.size() == 2);
    CHECK(two[0] == "A happened.");
    CHECK(two[1] == "B followed.");
}

TEST_CASE("segment_report matches the gold segmentation of a 3-paragraph report") {
    const std::string report =
        "The intrusion began on March 4. The actor, known for targeting telecoms\n"
        "(e.g. carriers in Europe), sent spearphishing mail. Victims opened an\n"
        "attachment named invoice.doc and enabled macros. A dropper then fetched\n"
        "payload.exe from a staging server.\n"
        "\n"
        "Persistence relied on a run key at\n"
        "HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\Run. Lateral\n"
        "movement used stolen credentials over SMB! Did the operators clean up\n"
        "their tooling? Logs from 10.0.0.5 say otherwise.\n"
        "\n"
        "Recommended mitigations:\n"
        "- Block outbound SMB at the perimeter.\n"
        "- Rotate credentials for all admins (cf. vendor guidance).\n"
        "- Audit run keys weekly.\n";

    const std::vector<std::string> gold = {
        "The intrusion began on March 4.",
        "The actor, known for targeting telecoms (e.g. carriers in Europe), sent spearphishing "
        "mail.",
        "Victims opened an attachment named invoice.doc and enabled macros.",
        "A dropper then fetched payload.exe from a staging server.",
        "Persistence relied on a run key at "
        "HKEY_CURRENT_USER\\Software\\Microsoft\\Windows\\CurrentVersion\\Run.",
        "Lateral movement used stolen credentials over SMB!",
        "Did the operators clean up their tooling?",
        "Logs from 10.0.0.5 say otherwise.",
        "Recommended mitigations:",
        "- Block outbound SMB at the perimeter.",
        "- Rotate credentials for all admins (cf. vendor guidance).",
        "- Audit run keys weekly.",
    };

    auto segments = segment_report(report);

    // Boundary agreement: boundaries are prefix token counts of each list.
    auto boundaries = [](const std::vector<std::string>& segs) {
        std::set<std::size_t> out;
        std::size_t tokens = 0;
        for (const auto& s : segs) {
            tokens += ws_tokens(s).size();
            out.insert(tokens);
        }
        return out;
    };
    auto gold_b = boundaries(gold);
    auto got_b = boundaries(segments);
    std::size_t agree = 0;
    for (std::size_t b : gold_b) agree += got_b.count(b);
    double precision = got_b.empty() ? 0.0 : double(agree) / double(got_b.size());
    double recall = double(agree) / double(gold_b.size());
    CAPTURE(segments);
    CHECK(recall >= 0.95);
    CHECK(precision >= 0.95);

    // Reconstruction: the token stream survives segmentation untouched.
    std::vector<std::string> original_tokens = ws_tokens(report);
    std::vector<std::string> joined_tokens;
    for (const auto& s : segments) {
        auto t = ws_tokens(s);
        joined_tokens.insert(joined_tokens.end(), t.begin(), t.end());
    }
    CHECK(original_tokens == joined_tokens);
}

TEST_CASE("segment_report never merges across paragraph breaks") {
    auto segments = segment_report("alpha beta continues here\n\ngamma delta closes it.");
    REQUIRE(segments.size() >= 2);
    for (const auto& s : segments) {
        bool has_left = s.find("beta") != std::string::npos;
        bool has_right = s.find("gamma") != std::string::npos;
        CHECK_FALSE((has_left && has_right));
    }
}

TEST_CASE("segment_report keeps IOC-internal periods intact") {
    auto segments =
        segment_report("The implant beacons to 10.0.0.5 every hour. Analysts saw payload.exe "
                       "and evil.com in the logs.");
    REQUIRE(segments.size() == 2);
    CHECK(segments[0] == "The implant beacons to 10.0.0.5 every hour.");
    CHECK(segments[1] == "Analysts saw payload.exe and evil.com in the logs.");
}

}  // TEST_SUITE
