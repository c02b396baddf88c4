#pragma once

#include <filesystem>
#include <functional>
#include <string>

#include <json.hpp>

namespace ttpx {

using json = nlohmann::json;

// Reads a newline-delimited JSON file, invoking `on_record` with each parsed
// object and its 1-based line number. Blank lines are skipped; a line that
// fails to parse raises ErrorKind::Parse naming the file and line.
void for_each_jsonl_record(const std::filesystem::path& file,
                           const std::function<void(std::size_t, const json&)>& on_record);

json parse_json_file(const std::filesystem::path& file);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& content);

}  // namespace ttpx
