#include "ttpx/stix.hpp"

#include <algorithm>
#include <cctype>

#include "ttpx/error.hpp"
#include "ttpx/uuid.hpp"

namespace ttpx {

namespace {

// Fixed project namespace for name-based ids; generated once and pinned so
// bundles stay stable across releases.
const std::array<std::uint8_t, 16>& project_namespace() {
    static const auto ns = parse_uuid("b3d1a1f2-79a4-5e82-9b0e-3d4f1a6c8e27");
    return ns;
}

std::string object_id(const std::string& type, const std::string& name) {
    return type + "--" + uuid_v5(project_namespace(), type + ":" + name);
}

bool is_valid_stix_id(const std::string& id) {
    auto sep = id.find("--");
    if (sep == std::string::npos || sep == 0) return false;
    std::string type = id.substr(0, sep);
    for (char c : type) {
        if (!(std::islower(static_cast<unsigned char>(c)) || c == '-')) return false;
    }
    return is_valid_uuid(std::string_view(id).substr(sep + 2));
}

}  // namespace

json to_stix_bundle(const ExtractionResult& result, const TechniqueRegistry& registry,
                    const StixOptions& options) {
    // Resolve everything up front: an unknown technique produces no output.
    std::vector<const Technique*> techniques;
    for (const auto& id : result.techniques) {
        techniques.push_back(&registry.lookup(id));
    }

    const std::string identity_id = object_id("identity", options.producer_name);

    json objects = json::array();

    json identity{{"type", "identity"},
                  {"spec_version", "2.1"},
                  {"id", identity_id},
                  {"created", options.timestamp},
                  {"modified", options.timestamp},
                  {"name", options.producer_name},
                  {"identity_class", "system"}};
    objects.push_back(identity);

    std::vector<std::string> pattern_ids;
    for (const Technique* technique : techniques) {
        std::string id = object_id("attack-pattern", technique->id);
        pattern_ids.push_back(id);
        json pattern{{"type", "attack-pattern"},
                     {"spec_version", "2.1"},
                     {"id", id},
                     {"created", options.timestamp},
                     {"modified", options.timestamp},
                     {"created_by_ref", identity_id},
                     {"name", technique->name},
                     {"external_references",
                      json::array({{{"source_name", "mitre-attack"},
                                    {"external_id", technique->id},
                                    {"url", "https://attack.mitre.org/techniques/" +
                                                technique->id + "/"}}})}};
        if (!technique->tactics.empty()) {
            json phases = json::array();
            for (const auto& tactic : technique->tactics) {
                phases.push_back({{"kill_chain_name", "mitre-attack"}, {"phase_name", tactic}});
            }
            pattern["kill_chain_phases"] = phases;
        }
        objects.push_back(std::move(pattern));
    }

    json report{{"type", "report"},
                {"spec_version", "2.1"},
                {"id", object_id("report", result.report_id)},
                {"created", options.timestamp},
                {"modified", options.timestamp},
                {"published", options.timestamp},
                {"created_by_ref", identity_id},
                {"name", "Technique extraction: " + result.report_id},
                {"description", result.report_id},
                {"report_types", json::array({"threat-report"})},
                {"object_refs", pattern_ids.empty() ? json::array() : json(pattern_ids)}};
    if (options.include_attributions && !result.attributions.empty()) {
        json attributions = json::array();
        for (const auto& a : result.attributions) {
            attributions.push_back({{"sentence_index", a.sentence_index},
                                    {"predicted_label", a.predicted_label},
                                    {"confidence", a.confidence},
                                    {"kept", a.kept}});
        }
        report["x_ttpx_attributions"] = attributions;
    }
    objects.push_back(std::move(report));

    return json{{"type", "bundle"},
                {"id", object_id("bundle", result.report_id)},
                {"objects", objects}};
}

std::string serialize_bundle(const json& bundle) {
    return bundle.dump(2) + "\n";
}

std::vector<std::string> validate_bundle(const std::string& document) {
    json doc = json::parse(document, nullptr, false);
    if (doc.is_discarded()) {
        raise(ErrorKind::Parse, "bundle document is not valid JSON");
    }

    std::vector<std::string> violations;
    auto require = [&](bool condition, const std::string& message) {
        if (!condition) violations.push_back(message);
    };

    require(doc.value("type", "") == "bundle", "bundle: `type` must be \"bundle\"");
    std::string bundle_id = doc.value("id", "");
    require(!bundle_id.empty() && is_valid_stix_id(bundle_id),
            "bundle: `id` must be a valid type--uuid identifier");
    if (!doc.contains("objects") || !doc.at("objects").is_array()) {
        violations.push_back("bundle: missing `objects` array");
        return violations;
    }

    std::vector<std::string> known_ids;
    for (const auto& obj : doc.at("objects")) {
        if (obj.contains("id") && obj.at("id").is_string()) {
            known_ids.push_back(obj.at("id").get<std::string>());
        }
    }
    auto resolves = [&](const std::string& ref) {
        return std::find(known_ids.begin(), known_ids.end(), ref) != known_ids.end();
    };

    for (const auto& obj : doc.at("objects")) {
        std::string type = obj.value("type", "");
        std::string id = obj.value("id", "");
        std::string label = id.empty() ? "(missing id)" : id;
        require(!type.empty(), label + ": missing `type`");
        require(!id.empty() && is_valid_stix_id(id), label + ": malformed object id");
        if (!id.empty() && !type.empty()) {
            require(id.rfind(type + "--", 0) == 0, label + ": id prefix disagrees with type");
        }
        require(obj.value("spec_version", "") == "2.1", label + ": `spec_version` must be \"2.1\"");
        require(obj.contains("created"), label + ": missing `created`");
        require(obj.contains("modified"), label + ": missing `modified`");

        if (type == "attack-pattern") {
            require(obj.contains("name"), label + ": attack-pattern missing `name`");
            bool has_mitre_ref = false;
            for (const auto& ref : obj.value("external_references", json::array())) {
                if (ref.value("source_name", "") == "mitre-attack" &&
                    !ref.value("external_id", "").empty()) {
                    has_mitre_ref = true;
                }
            }
            require(has_mitre_ref,
                    label + ": attack-pattern missing a mitre-attack external reference");
        }
        if (type == "report") {
            require(obj.contains("name"), label + ": report missing `name`");
            require(obj.contains("published"), label + ": report missing `published`");
            require(obj.contains("object_refs") && obj.at("object_refs").is_array(),
                    label + ": report missing `object_refs`");
            for (const auto& ref : obj.value("object_refs", json::array())) {
                std::string target = ref.get<std::string>();
                require(resolves(target), label + ": dangling object_ref " + target);
            }
        }
        if (type == "identity") {
            require(obj.contains("name"), label + ": identity missing `name`");
        }
        if (obj.contains("created_by_ref")) {
            std::string ref = obj.at("created_by_ref").get<std::string>();
            require(resolves(ref), label + ": dangling created_by_ref " + ref);
        }
    }
    return violations;
}

}  // namespace ttpx
