#pragma once
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "retrial/model.hpp"

namespace retrial {

inline constexpr const char* kToolVersion = "1.0.0";

/// Round-trip safe decimal text: 17 significant digits, '.' decimal point.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        row_strings(header);
    }

    void row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(fmt17(v));
        row_strings(cells);
    }

    void row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline nlohmann::json params_json(const SystemParams& p) {
    return {{"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"theta1", p.theta1},       {"theta2", p.theta2},
            {"b1", p.b1.to_string()}, {"b2", p.b2.to_string()}, {"b3", p.b3.to_string()}, {"single_class", p.single_class}};
}

/// Record of one CLI invocation; every emitted file is listed.
struct RunManifest {
    std::string config_path;
    std::string subcommand;
    nlohmann::json params = nullptr;
    nlohmann::json options = nlohmann::json::object();
    std::filesystem::path output_dir;
    std::vector<std::string> files;

    void write() const {
        nlohmann::json j;
        j["config"] = config_path;
        j["subcommand"] = subcommand;
        j["params"] = params;
        j["options"] = options;
        j["output_dir"] = output_dir.string();
        j["tool_version"] = kToolVersion;
        char ts[32];
        const std::time_t now = std::time(nullptr);
        std::strftime(ts, sizeof ts, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        j["timestamp"] = ts;
        std::vector<std::string> all = files;
        all.push_back("manifest.json");
        j["files"] = all;
        std::ofstream(output_dir / "manifest.json") << j.dump(2) << '\n';
    }
};

} // namespace retrial
