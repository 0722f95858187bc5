#pragma once

#include <filesystem>
#include <vector>

namespace arsep {

// Exemplar bank files. The binary layout is the magic "ARSB", then uint64
// count and uint64 length (little endian), then count * length float32.

void save_bank(const std::filesystem::path& path, const std::vector<std::vector<double>>& bank);
std::vector<std::vector<double>> load_bank(const std::filesystem::path& path);

/// Every *.wav in the directory, sorted by file name; all must share a length.
std::vector<std::vector<double>> load_bank_directory(const std::filesystem::path& dir);

/// A bank file or a directory of WAV segments, whichever `path` is.
std::vector<std::vector<double>> load_exemplars(const std::filesystem::path& path);

}  // namespace arsep
