#pragma once

#include <filesystem>
#include <string>

#include "taylornet/risk.hpp"

namespace taylornet {

// CSV with header y,x1..xd plus a JSON sidecar {n, d, B_x} (same stem, .json).
void save_dataset(const Dataset& data, const std::filesystem::path& csv);
// Rows within 1e-6 (relative to B_x) of the sphere are re-projected; others are rejected.
Dataset load_dataset(const std::filesystem::path& csv);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// SHA-1 of "blob <len>\0<content>", the object id git assigns to the content.
std::string git_blob_hash(const std::string& content);

}  // namespace taylornet
