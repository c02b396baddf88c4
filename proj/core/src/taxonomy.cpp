#include "ttpx/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "ttpx/error.hpp"
#include "ttpx/jsonl.hpp"

namespace ttpx {

namespace {

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

Technique technique_from_record(const json& record, const std::string& where) {
    if (!record.is_object() || !record.contains("id") || !record.contains("name")) {
        raise(ErrorKind::Parse, where + ": technique record needs `id` and `name`");
    }
    Technique t;
    t.id = record.at("id").get<std::string>();
    t.name = record.at("name").get<std::string>();
    if (record.contains("tactics")) {
        for (const auto& tactic : record.at("tactics")) {
            t.tactics.push_back(tactic.get<std::string>());
        }
    }
    if (!validate_technique_id(t.id)) {
        raise(ErrorKind::Parse, where + ": malformed technique id \"" + t.id + "\"");
    }
    if (is_subtechnique_id(t.id)) {
        raise(ErrorKind::Parse, where + ": sub-technique id \"" + t.id +
                                    "\" cannot be a class label (label space is technique-level)");
    }
    if (t.name.empty()) {
        raise(ErrorKind::Parse, where + ": technique " + t.id + " has an empty name");
    }
    return t;
}

}  // namespace

bool validate_technique_id(const std::string& candidate) {
    // T + 4 digits, optional "." + 3 digits. No regex: this sits on hot paths.
    if (candidate.size() != 5 && candidate.size() != 9) return false;
    if (candidate[0] != 'T') return false;
    if (!all_digits({candidate.data() + 1, 4})) return false;
    if (candidate.size() == 9) {
        if (candidate[5] != '.') return false;
        if (!all_digits({candidate.data() + 6, 3})) return false;
    }
    return true;
}

bool is_subtechnique_id(const std::string& id) {
    return id.find('.') != std::string::npos;
}

TechniqueRegistry::TechniqueRegistry(std::vector<Technique> techniques, std::string version)
    : techniques_(std::move(techniques)), version_(std::move(version)) {
    if (techniques_.empty()) {
        raise(ErrorKind::Validation, "taxonomy must contain at least one technique");
    }
    std::sort(techniques_.begin(), techniques_.end(),
              [](const Technique& a, const Technique& b) { return a.id < b.id; });
    index_.reserve(techniques_.size());
    for (std::size_t i = 0; i < techniques_.size(); ++i) {
        auto [it, inserted] = index_.emplace(techniques_[i].id, i);
        if (!inserted) {
            raise(ErrorKind::Validation, "duplicate technique id " + techniques_[i].id);
        }
    }
}

const Technique& TechniqueRegistry::lookup(const std::string& id) const {
    return techniques_[position(id)];
}

bool TechniqueRegistry::contains(const std::string& id) const {
    return index_.find(id) != index_.end();
}

std::size_t TechniqueRegistry::position(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) {
        raise(ErrorKind::NotFound, "unknown technique id " + id);
    }
    return it->second;
}

const std::string& TechniqueRegistry::id_at(std::size_t position) const {
    if (position >= techniques_.size()) {
        raise(ErrorKind::NotFound, "technique position out of range: " + std::to_string(position));
    }
    return techniques_[position].id;
}

TechniqueRegistry load_taxonomy(const std::filesystem::path& file) {
    std::vector<Technique> techniques;
    std::string version = "unversioned";
    bool saw_header = false;

    for_each_jsonl_record(file, [&](std::size_t line_no, const json& record) {
        if (!saw_header && line_no == 1 && record.is_object() &&
            record.contains("registry_version") && !record.contains("id")) {
            version = record.at("registry_version").get<std::string>();
            saw_header = true;
            return;
        }
        techniques.push_back(
            technique_from_record(record, file.string() + ":" + std::to_string(line_no)));
    });

    if (techniques.empty()) {
        raise(ErrorKind::Validation,
              "taxonomy must contain at least one technique: " + file.string());
    }
    // Duplicate detection happens in the registry constructor.
    return TechniqueRegistry(std::move(techniques), std::move(version));
}

void save_taxonomy(const std::filesystem::path& file,
                   const std::vector<Technique>& techniques,
                   const std::string& registry_version) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        raise(ErrorKind::Io, "cannot open file for writing: " + file.string());
    }
    out << json{{"format_version", 1}, {"registry_version", registry_version}}.dump() << "\n";
    for (const auto& t : techniques) {
        out << json{{"id", t.id}, {"name", t.name}, {"tactics", t.tactics}}.dump() << "\n";
    }
    if (!out) {
        raise(ErrorKind::Io, "write failed: " + file.string());
    }
}

std::vector<Technique> techniques_from_attack_stix(const std::string& stix_document) {
    json doc = json::parse(stix_document, nullptr, false);
    if (doc.is_discarded()) {
        raise(ErrorKind::Parse, "ATT&CK STIX feed is not valid JSON");
    }
    if (!doc.contains("objects") || !doc.at("objects").is_array()) {
        raise(ErrorKind::Parse, "ATT&CK STIX feed has no `objects` array");
    }

    std::vector<Technique> out;
    for (const auto& obj : doc.at("objects")) {
        if (obj.value("type", "") != "attack-pattern") continue;
        if (obj.value("revoked", false) || obj.value("x_mitre_deprecated", false)) continue;

        std::string external_id;
        for (const auto& ref : obj.value("external_references", json::array())) {
            if (ref.value("source_name", "") == "mitre-attack") {
                external_id = ref.value("external_id", "");
                break;
            }
        }
        if (external_id.empty() || !validate_technique_id(external_id)) continue;
        if (is_subtechnique_id(external_id)) continue;

        Technique t;
        t.id = external_id;
        t.name = obj.value("name", "");
        for (const auto& phase : obj.value("kill_chain_phases", json::array())) {
            if (phase.value("kill_chain_name", "") == "mitre-attack") {
                t.tactics.push_back(phase.value("phase_name", ""));
            }
        }
        if (t.name.empty()) continue;
        out.push_back(std::move(t));
    }
    std::sort(out.begin(), out.end(),
              [](const Technique& a, const Technique& b) { return a.id < b.id; });
    return out;
}

}  // namespace ttpx
