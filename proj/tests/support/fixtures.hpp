#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ttpx/datasets.hpp"
#include "ttpx/taxonomy.hpp"

namespace ttpx::testing {

inline TechniqueRegistry make_registry(
    std::vector<std::pair<std::string, std::string>> id_names,
    const std::string& version = "test-v1") {
    std::vector<Technique> techniques;
    for (auto& [id, name] : id_names) {
        techniques.push_back({id, name, {"test-tactic"}});
    }
    return TechniqueRegistry(std::move(techniques), version);
}

inline TechniqueRegistry small_attack_registry(const std::string& version = "test-v1") {
    return make_registry({{"T1059", "Command and Scripting Interpreter"},
                          {"T1566", "Phishing"},
                          {"T1127", "Trusted Developer Utilities Proxy Execution"},
                          {"T1547", "Boot or Logon Autostart Execution"}},
                         version);
}

// Unique scratch directory, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("ttpx_test_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::filesystem::path fixture_dir() {
#ifdef TTPX_FIXTURE_DIR
    return std::filesystem::path(TTPX_FIXTURE_DIR);
#else
    return std::filesystem::current_path() / "fixtures";
#endif
}

}  // namespace ttpx::testing
