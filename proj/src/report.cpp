#include "unfold/report.hpp"

#include <fstream>
#include <sstream>

#include "unfold/errors.hpp"

namespace unfold {

std::string tool_version() { return "0.1.0"; }

void RunManifest::add_stage(const std::string& name, const std::string& status) {
    stages.push_back({name, status});
}

void RunManifest::add_artifact(const std::string& path) { artifacts.push_back(path); }

std::string RunManifest::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\n  \"tool_version\": \"" << tool_version << "\",\n";
    os << "  \"config_hash\": \"" << std::hex << config_hash << std::dec << "\",\n";
    os << "  \"seed\": " << seed << ",\n  \"stages\": {";
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (i) os << ", ";
        os << "\"" << stages[i].first << "\": \"" << stages[i].second << "\"";
    }
    os << "},\n  \"artifacts\": [";
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
        if (i) os << ", ";
        os << "\"" << artifacts[i] << "\"";
    }
    os << "],\n  \"wall_seconds\": " << wall_seconds << "\n}\n";
    return os.str();
}

void RunManifest::write(const std::string& path) const {
    write_text_file(path, to_json());
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    os << content;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (columns.empty() || header.size() != columns.size())
        throw ValidationError("write_csv: header/column mismatch");
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    os.precision(17);
    for (std::size_t i = 0; i < header.size(); ++i)
        os << (i ? "," : "") << header[i];
    os << "\n";
    const std::size_t rows = columns[0].size();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << (c ? "," : "") << columns[c][r];
        os << "\n";
    }
}

} // namespace unfold
