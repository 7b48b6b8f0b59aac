#pragma once

#include <string>
#include <vector>

#include "unfold/model_config.hpp"

namespace unfold {

// Run bookkeeping: artifacts, stage status, reproducibility hash.
struct RunManifest {
    std::string tool_version;
    std::uint64_t config_hash{0};
    std::uint64_t seed{0};
    std::vector<std::pair<std::string, std::string>> stages;  // name -> status
    std::vector<std::string> artifacts;
    double wall_seconds{0.0};

    void add_stage(const std::string& name, const std::string& status);
    void add_artifact(const std::string& path);
    // Deterministic serialization; wall clock is emitted as a separate field.
    std::string to_json() const;
    void write(const std::string& path) const;
};

void write_text_file(const std::string& path, const std::string& content);

// Flat CSV from two or three columns.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns);

std::string tool_version();

} // namespace unfold
