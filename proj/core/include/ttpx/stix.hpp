#pragma once

#include <string>
#include <vector>

#include "ttpx/extract.hpp"
#include "ttpx/jsonl.hpp"
#include "ttpx/taxonomy.hpp"

namespace ttpx {

/// Knobs for bundle generation. Object UUIDs are name-based under a fixed
/// project namespace, and `timestamp` is injectable, so identical inputs
/// serialize to byte-identical documents.
struct StixOptions {
    std::string producer_name = "ttpx";
    // RFC 3339 UTC timestamp stamped on created/modified/published fields.
    std::string timestamp = "2024-01-01T00:00:00.000Z";
    // Carry per-sentence attributions as a custom x_ property on the report
    // object. Off by default: nonstandard consumers may choke on it.
    bool include_attributions = false;
};

/// Builds a STIX 2.1 bundle for one extraction result: one identity (the
/// producing tool), one report referencing every attack-pattern, and one
/// attack-pattern per extracted technique with a mitre-attack external id.
/// Every technique must resolve in the registry.
json to_stix_bundle(const ExtractionResult& result, const TechniqueRegistry& registry,
                    const StixOptions& options = {});

/// Canonical serialization: two-space indent, lexicographic keys, trailing
/// newline. Use this for files so bundles diff and hash stably.
std::string serialize_bundle(const json& bundle);

/// Checks required STIX 2.1 fields, id shapes (`type--uuid`), and referential
/// integrity of object_refs / created_by_ref. Returns human-readable
/// violations; an empty list means the document conforms. Unparseable input
/// raises ErrorKind::Parse instead.
std::vector<std::string> validate_bundle(const std::string& document);

}  // namespace ttpx
