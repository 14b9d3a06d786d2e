#include "eegdec/montage.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace eegdec::ingest {
namespace {

// Inclination from the vertex and azimuth from the right ear (+x), nasion at
// +y; all in degrees.
Vec3 from_angles(double inclination_deg, double azimuth_deg) {
  const double th = inclination_deg * std::numbers::pi / 180.0;
  const double az = azimuth_deg * std::numbers::pi / 180.0;
  return {std::sin(th) * std::cos(az), std::sin(th) * std::sin(az), std::cos(th)};
}

Vec3 arc_midpoint(const Vec3& u, const Vec3& v) { return (u + v).normalized(); }

// Idealized 10-20/10-10 sphere: the outer ring sits at 72 deg inclination with
// 18-deg steps along the circumference, midline/central electrodes at 36 deg,
// intermediate (10-10) electrodes as great-circle midpoints of their
// neighbors, and the 9/10 column on the 90-deg ring below the outer one.
MontageTable build_standard() {
  std::map<std::string, Vec3> p;
  p["Fp1"] = from_angles(72, 108);
  p["Fp2"] = from_angles(72, 72);
  p["F7"] = from_angles(72, 144);
  p["F8"] = from_angles(72, 36);
  p["T7"] = from_angles(72, 180);
  p["T8"] = from_angles(72, 0);
  p["P7"] = from_angles(72, 216);
  p["P8"] = from_angles(72, 324);
  p["O1"] = from_angles(72, 252);
  p["O2"] = from_angles(72, 288);
  p["Fz"] = from_angles(36, 90);
  p["Cz"] = from_angles(0, 0);
  p["Pz"] = from_angles(36, 270);
  p["C3"] = from_angles(36, 180);
  p["C4"] = from_angles(36, 0);
  p["F3"] = arc_midpoint(p["F7"], p["Fz"]);
  p["F4"] = arc_midpoint(p["F8"], p["Fz"]);
  p["P3"] = arc_midpoint(p["P7"], p["Pz"]);
  p["P4"] = arc_midpoint(p["P8"], p["Pz"]);

  const Vec3 fcz = arc_midpoint(p["Fz"], p["Cz"]);
  const Vec3 cpz = arc_midpoint(p["Cz"], p["Pz"]);
  const Vec3 fc3 = arc_midpoint(p["F3"], p["C3"]);
  const Vec3 fc4 = arc_midpoint(p["F4"], p["C4"]);
  const Vec3 cp3 = arc_midpoint(p["C3"], p["P3"]);
  const Vec3 cp4 = arc_midpoint(p["C4"], p["P4"]);
  const Vec3 ft7 = arc_midpoint(p["F7"], p["T7"]);
  const Vec3 ft8 = arc_midpoint(p["F8"], p["T8"]);
  const Vec3 tp7 = arc_midpoint(p["T7"], p["P7"]);
  const Vec3 tp8 = arc_midpoint(p["T8"], p["P8"]);
  p["FC1"] = arc_midpoint(fcz, fc3);
  p["FC2"] = arc_midpoint(fcz, fc4);
  p["CP1"] = arc_midpoint(cpz, cp3);
  p["CP2"] = arc_midpoint(cpz, cp4);
  p["FC5"] = arc_midpoint(fc3, ft7);
  p["FC6"] = arc_midpoint(fc4, ft8);
  p["CP5"] = arc_midpoint(cp3, tp7);
  p["CP6"] = arc_midpoint(cp4, tp8);
  p["FT9"] = from_angles(90, 162);
  p["FT10"] = from_angles(90, 18);
  p["TP9"] = from_angles(90, 198);
  p["TP10"] = from_angles(90, 342);

  static const char* order[] = {"Fp1", "Fp2", "F3",  "F4",  "C3",  "C4",  "P3",  "P4",
                                "O1",  "O2",  "F7",  "F8",  "T7",  "T8",  "P7",  "P8",
                                "Fz",  "Cz",  "Pz",  "FC1", "FC2", "CP1", "CP2", "FC5",
                                "FC6", "CP5", "CP6", "FT9", "FT10", "TP9", "TP10"};
  MontageTable table;
  for (const char* name : order) {
    table.names.emplace_back(name);
    table.positions.push_back(p.at(name));
  }
  return table;
}

}  // namespace

int MontageTable::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return -1;
}

void MontageTable::validate() const {
  if (names.size() != positions.size()) {
    throw ValidationError("montage names/positions size mismatch");
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) {
      throw ValidationError("montage row " + std::to_string(i) + " has an empty name");
    }
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      if (names[i] == names[j]) {
        throw ValidationError("duplicate montage name " + names[i]);
      }
    }
    if (std::abs(positions[i].norm() - 1.0) > 1e-6) {
      throw ValidationError("montage position for " + names[i] + " is not unit-norm");
    }
  }
}

const MontageTable& standard_montage() {
  static const MontageTable table = build_standard();
  return table;
}

MontageTable load_montage_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open montage file " + path);
  MontageTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string name, xs, ys, zs;
    if (!std::getline(row, name, ',') || !std::getline(row, xs, ',') ||
        !std::getline(row, ys, ',') || !std::getline(row, zs)) {
      throw ValidationError("montage " + path + " line " + std::to_string(line_no) +
                            ": expected name,x,y,z");
    }
    try {
      table.names.push_back(name);
      table.positions.emplace_back(std::stod(xs), std::stod(ys), std::stod(zs));
    } catch (const std::exception&) {
      throw ValidationError("montage " + path + " line " + std::to_string(line_no) +
                            ": non-numeric coordinate");
    }
  }
  table.validate();
  return table;
}

void write_montage_csv(const MontageTable& montage, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write montage file " + path);
  char buf[128];
  for (std::size_t i = 0; i < montage.names.size(); ++i) {
    const Vec3& p = montage.positions[i];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", montage.names[i].c_str(), p.x(),
                  p.y(), p.z());
    out << buf;
  }
}

}  // namespace eegdec::ingest
