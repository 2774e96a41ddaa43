#pragma once

#include <string>
#include <vector>

#include "mdlm/design.hpp"

// BIDS-style events tables: tab-separated, header row naming at least onset,
// duration and trial_type (any column order; extra columns ignored).  Rows
// with the same trial_type form one stimulus track; tracks come back sorted
// by label.

namespace mdlm {

std::vector<StimulusTrack> read_events(const std::string& path);
std::vector<StimulusTrack> parse_events(const std::string& text,
                                        const std::string& origin);

// Collapses several tracks into a single condition.
StimulusTrack merge_tracks(const std::vector<StimulusTrack>& tracks,
                           const std::string& label = "merged");

}  // namespace mdlm
