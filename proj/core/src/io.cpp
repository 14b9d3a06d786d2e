#include "eegdec/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace eegdec::ingest {
namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

double parse_cell(std::string_view cell, int line_no, int column_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError("non-numeric cell at line " + std::to_string(line_no) + ", column " +
                          std::to_string(column_no));
  }
  return value;
}

}  // namespace

Recording read_recording(const std::string& path, double fs, const MontageTable& montage) {
  if (!(fs > 0.0)) throw ValidationError("sampling rate must be positive");
  const std::string text = read_file(path);

  Recording rec;
  rec.fs = fs;

  std::size_t pos = 0;
  int line_no = 0;
  std::vector<double> values;  // sample-major
  std::size_t n_channels = 0;

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;

    std::size_t cell_start = 0;
    int column_no = 0;
    while (cell_start <= line.size()) {
      std::size_t comma = line.find(',', cell_start);
      if (comma == std::string::npos) comma = line.size();
      std::string_view cell = line.substr(cell_start, comma - cell_start);
      ++column_no;
      if (line_no == 1) {
        const std::string name(cell);
        const int idx = montage.find(name);
        if (idx < 0) throw ValidationError("unknown channel \"" + name + "\" in header");
        rec.channel_names.push_back(name);
        rec.electrode_pos.push_back(montage.positions[static_cast<std::size_t>(idx)]);
      } else {
        values.push_back(parse_cell(cell, line_no, column_no));
      }
      cell_start = comma + 1;
      if (comma == line.size()) break;
    }
    if (line_no == 1) {
      n_channels = rec.channel_names.size();
    } else if (static_cast<std::size_t>(column_no) != n_channels) {
      throw ValidationError("ragged row at line " + std::to_string(line_no) + ": expected " +
                            std::to_string(n_channels) + " cells, got " +
                            std::to_string(column_no));
    }
  }

  if (n_channels == 0) throw ValidationError(path + " has no header row");
  const std::size_t n_samples = values.size() / n_channels;
  if (n_samples == 0) throw ValidationError(path + " has no sample rows");

  rec.data.resize(static_cast<Eigen::Index>(n_channels), static_cast<Eigen::Index>(n_samples));
  for (std::size_t t = 0; t < n_samples; ++t) {
    for (std::size_t c = 0; c < n_channels; ++c) {
      rec.data(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) =
          values[t * n_channels + c];
    }
  }
  rec.validate();
  return rec;
}

void write_recording(const Recording& rec, const std::string& path) {
  rec.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);

  std::string buffer;
  buffer.reserve(1 << 20);
  for (std::size_t c = 0; c < rec.channel_names.size(); ++c) {
    if (c) buffer += ',';
    buffer += rec.channel_names[c];
  }
  buffer += '\n';

  char cell[64];
  const int channels = rec.channels();
  for (std::int64_t t = 0; t < rec.samples(); ++t) {
    for (int c = 0; c < channels; ++c) {
      const int len = std::snprintf(cell, sizeof(cell), "%.9g", rec.data(c, t));
      if (c) buffer += ',';
      buffer.append(cell, static_cast<std::size_t>(len));
    }
    buffer += '\n';
    if (buffer.size() > (1 << 20)) {
      out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
      buffer.clear();
    }
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

std::vector<EventMarker> read_markers(const std::string& path, const Recording& rec) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("marker file " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw ValidationError("marker file must be a JSON array");

  std::vector<EventMarker> markers;
  markers.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    if (!entry.is_object() || !entry.contains("onset_sample") || !entry.contains("label")) {
      throw ValidationError("marker " + std::to_string(i) +
                            " must be an object with onset_sample and label");
    }
    if (!entry["onset_sample"].is_number_integer() || !entry["label"].is_string()) {
      throw ValidationError("marker " + std::to_string(i) +
                            ": onset_sample must be an integer and label a string");
    }
    EventMarker m;
    m.onset_sample = entry["onset_sample"].get<std::int64_t>();
    m.label = label_from_name(entry["label"].get<std::string>());
    if (m.onset_sample < 0 || m.onset_sample >= rec.samples()) {
      throw ValidationError("marker " + std::to_string(i) + ": onset out of range [0, " +
                            std::to_string(rec.samples()) + ")");
    }
    markers.push_back(m);
  }
  std::stable_sort(markers.begin(), markers.end(),
                   [](const EventMarker& a, const EventMarker& b) {
                     return a.onset_sample < b.onset_sample;
                   });
  return markers;
}

void write_markers(const std::vector<EventMarker>& markers, const std::string& path) {
  nlohmann::json doc = nlohmann::json::array();
  for (const EventMarker& m : markers) {
    doc.push_back({{"onset_sample", m.onset_sample}, {"label", label_name(m.label)}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace eegdec::ingest
