#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "arsep/bank.hpp"
#include "arsep/errors.hpp"
#include "arsep/signal.hpp"

using namespace arsep;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("arsep_bank_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("bank round trip keeps float32 values") {
  const auto dir = temp_dir("roundtrip");
  const std::vector<std::vector<double>> bank{{0.5, -0.25, 1.0}, {2.0, 0.0, -3.5}};
  save_bank(dir / "b.bin", bank);
  CHECK(load_bank(dir / "b.bin") == bank);
  CHECK(load_exemplars(dir / "b.bin") == bank);
  CHECK(fs::file_size(dir / "b.bin") == 4 + 16 + 6 * 4);
}

TEST_CASE("ragged or empty banks are rejected on save") {
  const auto dir = temp_dir("ragged");
  CHECK_THROWS_AS(save_bank(dir / "r.bin", {{1.0, 2.0}, {1.0}}), ShapeError);
  CHECK_THROWS_AS(save_bank(dir / "e.bin", {}), ConfigError);
}

TEST_CASE("bad header and truncated data are parse errors") {
  const auto dir = temp_dir("bad");
  {
    std::ofstream out(dir / "magic.bin", std::ios::binary);
    out << "NOPE0000000000000000";
  }
  CHECK_THROWS_AS(load_bank(dir / "magic.bin"), ParseError);

  save_bank(dir / "ok.bin", {{1.0, 2.0, 3.0, 4.0}});
  fs::resize_file(dir / "ok.bin", fs::file_size(dir / "ok.bin") - 2);
  CHECK_THROWS_AS(load_bank(dir / "ok.bin"), ParseError);
}

TEST_CASE("directory of WAV segments loads in name order") {
  const auto dir = temp_dir("wavs");
  write_wav(dir / "b.wav", Waveform({0.5, 0.5}, 8000));
  write_wav(dir / "a.wav", Waveform({0.25, -0.25}, 8000));
  { std::ofstream(dir / "notes.txt") << "ignored"; }
  const auto bank = load_exemplars(dir);
  REQUIRE(bank.size() == 2);
  CHECK(bank[0] == std::vector<double>{0.25, -0.25});
  CHECK(bank[1] == std::vector<double>{0.5, 0.5});

  write_wav(dir / "c.wav", Waveform({0.1, 0.2, 0.3}, 8000));
  CHECK_THROWS_AS(load_bank_directory(dir), ShapeError);
}
