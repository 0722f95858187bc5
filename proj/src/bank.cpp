#include "arsep/bank.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "arsep/errors.hpp"
#include "arsep/signal.hpp"

namespace arsep {

static_assert(std::endian::native == std::endian::little, "bank files are little endian");

namespace {

constexpr std::array<char, 4> kMagic{'A', 'R', 'S', 'B'};

}  // namespace

void save_bank(const std::filesystem::path& path, const std::vector<std::vector<double>>& bank) {
  if (bank.empty()) throw ConfigError("save_bank: empty bank");
  const std::uint64_t count = bank.size();
  const std::uint64_t length = bank.front().size();
  std::vector<float> data;
  data.reserve(count * length);
  for (const auto& e : bank) {
    if (e.size() != length) throw ShapeError("save_bank: exemplars differ in length");
    for (double v : e) data.push_back(static_cast<float>(v));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_bank: cannot open " + path.string());
  out.write(kMagic.data(), kMagic.size());
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) throw Error("save_bank: write failed for " + path.string());
}

std::vector<std::vector<double>> load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_bank: cannot open " + path.string());
  std::array<char, 4> magic{};
  std::uint64_t count = 0, length = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&count), sizeof count);
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || magic != kMagic) throw ParseError("load_bank: bad header in " + path.string());
  if (count == 0 || length == 0) throw ParseError("load_bank: empty bank");
  const auto payload = std::filesystem::file_size(path) - 4 - 2 * sizeof(std::uint64_t);
  if (payload != count * length * sizeof(float))
    throw ParseError("load_bank: payload size does not match header");
  std::vector<float> row(length);
  std::vector<std::vector<double>> bank(count);
  for (auto& e : bank) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(length * sizeof(float)));
    e.assign(row.begin(), row.end());
  }
  if (!in) throw ParseError("load_bank: truncated payload");
  return bank;
}

std::vector<std::vector<double>> load_bank_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ConfigError("no .wav exemplars in " + dir.string());
  std::vector<std::vector<double>> bank;
  for (const auto& f : files) {
    const auto w = read_wav(f);
    if (!bank.empty() && w.size() != bank.front().size())
      throw ShapeError("exemplar " + f.filename().string() + " differs in length");
    bank.push_back(w.data());
  }
  return bank;
}

std::vector<std::vector<double>> load_exemplars(const std::filesystem::path& path) {
  return std::filesystem::is_directory(path) ? load_bank_directory(path) : load_bank(path);
}

}  // namespace arsep
