#include "ttpx/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "ttpx/error.hpp"
#include "ttpx/hashing.hpp"

namespace ttpx {

void for_each_jsonl_record(const std::filesystem::path& file,
                           const std::function<void(std::size_t, const json&)>& on_record) {
    std::ifstream in(file);
    if (!in) {
        raise(ErrorKind::Io, "cannot open file: " + file.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded()) {
            raise(ErrorKind::Parse,
                  file.string() + ":" + std::to_string(line_no) + ": invalid JSON record");
        }
        on_record(line_no, record);
    }
}

json parse_json_file(const std::filesystem::path& file) {
    json doc = json::parse(read_text_file(file), nullptr, false);
    if (doc.is_discarded()) {
        raise(ErrorKind::Parse, "invalid JSON document: " + file.string());
    }
    return doc;
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        raise(ErrorKind::Io, "cannot open file: " + file.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        raise(ErrorKind::Io, "cannot open file for writing: " + file.string());
    }
    out << content;
    if (!out) {
        raise(ErrorKind::Io, "write failed: " + file.string());
    }
}

std::string to_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xf];
        value >>= 4;
    }
    return out;
}

}  // namespace ttpx
