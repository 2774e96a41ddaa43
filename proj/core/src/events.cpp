#include "mdlm/events.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "mdlm/errors.hpp"

namespace mdlm {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_number(const std::string& field, const std::string& origin,
                    std::size_t line_no, const char* what) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw UnparsableRow(origin + " line " + std::to_string(line_no) + ": " +
                        what + " '" + field + "' is not a number");
  }
  return value;
}

}  // namespace

std::vector<StimulusTrack> parse_events(const std::string& text,
                                        const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  int onset_col = -1, duration_col = -1, type_col = -1;
  std::map<std::string, StimulusTrack> by_type;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (onset_col < 0) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == "onset") onset_col = static_cast<int>(i);
        if (fields[i] == "duration") duration_col = static_cast<int>(i);
        if (fields[i] == "trial_type") type_col = static_cast<int>(i);
      }
      if (onset_col < 0 || duration_col < 0 || type_col < 0) {
        std::string missing;
        if (onset_col < 0) missing = "onset";
        else if (duration_col < 0) missing = "duration";
        else missing = "trial_type";
        throw MissingColumn(origin + ": header lacks required column '" +
                            missing + "'");
      }
      continue;
    }
    const std::size_t needed = static_cast<std::size_t>(
        std::max(onset_col, std::max(duration_col, type_col)));
    if (fields.size() <= needed) {
      throw UnparsableRow(origin + " line " + std::to_string(line_no) +
                          ": expected at least " + std::to_string(needed + 1) +
                          " tab-separated fields, got " +
                          std::to_string(fields.size()));
    }
    const double onset =
        parse_number(fields[static_cast<std::size_t>(onset_col)], origin,
                     line_no, "onset");
    const double duration =
        parse_number(fields[static_cast<std::size_t>(duration_col)], origin,
                     line_no, "duration");
    if (onset < 0.0 || duration < 0.0) {
      throw UnparsableRow(origin + " line " + std::to_string(line_no) +
                          ": negative onset or duration");
    }
    const std::string& type = fields[static_cast<std::size_t>(type_col)];
    if (type.empty()) {
      throw UnparsableRow(origin + " line " + std::to_string(line_no) +
                          ": empty trial_type");
    }
    StimulusTrack& track = by_type[type];
    track.label = type;
    track.onsets.push_back(onset);
    track.durations.push_back(duration);
  }
  if (onset_col < 0) {
    throw MissingColumn(origin + ": no header row found");
  }
  std::vector<StimulusTrack> tracks;
  tracks.reserve(by_type.size());
  for (auto& [label, track] : by_type) {
    track.normalize();
    tracks.push_back(std::move(track));
  }
  return tracks;  // std::map iteration gives label order
}

std::vector<StimulusTrack> read_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open events file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_events(text.str(), "'" + path + "'");
}

StimulusTrack merge_tracks(const std::vector<StimulusTrack>& tracks,
                           const std::string& label) {
  if (tracks.empty()) throw InputError("merge_tracks needs at least one track");
  StimulusTrack merged;
  merged.label = label;
  for (const StimulusTrack& track : tracks) {
    track.validate();
    merged.onsets.insert(merged.onsets.end(), track.onsets.begin(),
                         track.onsets.end());
    merged.durations.insert(merged.durations.end(), track.durations.begin(),
                            track.durations.end());
  }
  merged.normalize();
  return merged;
}

}  // namespace mdlm
