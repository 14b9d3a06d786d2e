#pragma once

#include <string>
#include <vector>

#include "eegdec/types.hpp"

namespace eegdec::ingest {

// (name, unit position) rows for the electrode cap.
struct MontageTable {
  std::vector<std::string> names;
  std::vector<Vec3> positions;

  int size() const { return static_cast<int>(names.size()); }
  // Index of name, or -1.
  int find(const std::string& name) const;
  void validate() const;
};

// The 31-electrode 10-20/10-10 cap at idealized unit-sphere coordinates.
// Same content as the shipped data file (data/montage_1020.csv).
const MontageTable& standard_montage();

// CSV rows "name,x,y,z", no header.
MontageTable load_montage_csv(const std::string& path);
void write_montage_csv(const MontageTable& montage, const std::string& path);

}  // namespace eegdec::ingest
