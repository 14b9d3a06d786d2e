#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "eegdec/montage.hpp"
#include "eegdec/rng.hpp"
#include "eegdec/types.hpp"

namespace test_helpers {

// Unique scratch directory per instance, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("eegdec_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const char* name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Three well-separated 2-D Gaussian blobs, labels 0/1/2 in block order.
inline std::pair<eegdec::Matrix, std::vector<int>> blob_points(int per_class,
                                                               std::uint64_t seed) {
  eegdec::util::Rng rng(seed);
  eegdec::Matrix x(3 * per_class, 2);
  std::vector<int> y;
  const double cx[3] = {0.0, 8.0, 0.0};
  const double cy[3] = {0.0, 0.0, 8.0};
  for (int cls = 0; cls < 3; ++cls) {
    for (int i = 0; i < per_class; ++i) {
      const int row = cls * per_class + i;
      x(row, 0) = cx[cls] + 0.5 * rng.normal();
      x(row, 1) = cy[cls] + 0.5 * rng.normal();
      y.push_back(cls);
    }
  }
  return {std::move(x), std::move(y)};
}

// Standard-montage recording filled with seeded unit noise.
inline eegdec::ingest::Recording noise_recording(std::int64_t n_samples, double fs,
                                                 std::uint64_t seed) {
  const eegdec::ingest::MontageTable& montage = eegdec::ingest::standard_montage();
  eegdec::ingest::Recording rec;
  rec.fs = fs;
  rec.channel_names = montage.names;
  rec.electrode_pos = montage.positions;
  rec.data.resize(montage.size(), n_samples);
  eegdec::util::Rng rng(seed);
  for (std::int64_t t = 0; t < n_samples; ++t) {
    for (int c = 0; c < montage.size(); ++c) rec.data(c, t) = rng.normal();
  }
  return rec;
}

}  // namespace test_helpers
