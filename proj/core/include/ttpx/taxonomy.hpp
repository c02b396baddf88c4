#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace ttpx {

/// One ATT&CK technique: the unit of the classifier's label space.
struct Technique {
    std::string id;                     // "T" + 4 digits, e.g. "T1059"
    std::string name;                   // human-readable technique name
    std::vector<std::string> tactics;   // at least one tactic name
};

/// True iff `candidate` is a well-formed technique id: T + 4 digits,
/// optionally followed by "." + 3 digits for a sub-technique.
bool validate_technique_id(const std::string& candidate);

/// True iff `id` carries a ".NNN" sub-technique suffix.
bool is_subtechnique_id(const std::string& id);

// Immutable registry of techniques, sorted by id. Iteration order fixes the
// label-vector layout: position i in every probability or multi-hot vector
// refers to techniques()[i]. Safe for unrestricted concurrent reads.
class TechniqueRegistry {
public:
    TechniqueRegistry(std::vector<Technique> techniques, std::string version);

    const Technique& lookup(const std::string& id) const;
    bool contains(const std::string& id) const;

    /// Position of `id` in the canonical layout; throws NotFound when absent.
    std::size_t position(const std::string& id) const;
    const std::string& id_at(std::size_t position) const;

    std::size_t class_count() const { return techniques_.size(); }
    const std::vector<Technique>& techniques() const { return techniques_; }
    const std::string& version() const { return version_; }

private:
    std::vector<Technique> techniques_;
    std::unordered_map<std::string, std::size_t> index_;
    std::string version_;
};

// Loads a taxonomy file: newline-delimited JSON records {id, name, tactics},
// optionally preceded by a header record {format_version, registry_version}.
// Records with malformed, duplicate, or sub-technique ids are rejected with a
// parse error naming the offending line (the label space is technique-level).
TechniqueRegistry load_taxonomy(const std::filesystem::path& file);

void save_taxonomy(const std::filesystem::path& file,
                   const std::vector<Technique>& techniques,
                   const std::string& registry_version);

// Converts an official ATT&CK STIX 2.x bundle (the public enterprise feed)
// into taxonomy records: enterprise attack-patterns with a mitre-attack
// external id, skipping sub-techniques and revoked/deprecated entries.
std::vector<Technique> techniques_from_attack_stix(const std::string& stix_document);

}  // namespace ttpx
