#pragma once

// Locale-independent CSV emission and run manifests.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "wpcn/error.hpp"

namespace wpcn {

// Shortest round-trip decimal form; never depends on the C locale.
inline std::string format_double(double v)
{
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size())
    {
        add_row_text(header);
    }

    void add_row(const std::vector<double>& values)
    {
        if (values.size() != columns_) throw InvalidParams("CSV row width mismatch");
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) text_ += ',';
            text_ += format_double(values[i]);
        }
        text_ += '\n';
    }

    void add_row_text(const std::vector<std::string>& cells)
    {
        if (cells.size() != columns_) throw InvalidParams("CSV row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

    void write(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path + "'");
        out << text_;
    }

private:
    std::size_t columns_;
    std::string text_;
};

// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// nlohmann::json keeps object keys sorted, so the dump and the hash do not
// depend on the key order of the input file.
inline std::string config_hash(const nlohmann::json& config)
{
    char buf[17];
    const auto r = std::to_chars(buf, buf + sizeof buf, fnv1a64(config.dump()), 16);
    std::string hex(buf, r.ptr);
    return std::string(16 - hex.size(), '0') + hex;
}

struct RunManifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version;
    double wall_time_s = 0.0;
    std::vector<std::string> outputs;

    nlohmann::json to_json() const
    {
        return {{"command", command},     {"config_hash", config_hash},
                {"seed", seed},           {"tool_version", tool_version},
                {"wall_time_s", wall_time_s}, {"outputs", outputs}};
    }

    void write(const std::string& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write '" + path + "'");
        out << to_json().dump(2) << '\n';
    }
};

} // namespace wpcn
